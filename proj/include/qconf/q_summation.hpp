#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "qconf/classical_summation.hpp"
#include "qconf/continuation.hpp"
#include "qconf/operators.hpp"

namespace qconf {

enum class q_mode { discrete, theta, continuous };
const char* to_string(q_mode m);
q_mode parse_q_mode(const std::string& s);

// a_l / [l/k]_q!
power_series q_borel(const power_series& s, rational k, double q);
// a_l / q^{l(l-1)/2}
power_series rz_borel(const power_series& s, double q);

struct jackson_result {
    cplx value;
    int lower = 0;  // lowest l used
    int upper = 0;  // highest l used
};
// (q-1) sum_l f(q^l e^{id}) q^l e^{id}, truncated within |l| <= 400.
jackson_result jackson_integral(const std::function<cplx(cplx)>& f, double d, double q);

// Jackson q-Laplace of order k: rho_k o L_{q,1}^{[d]} o rho_{1/k}.
cplx discrete_q_laplace(const ray_function& f, rational k, double d, double q, const sector_point& z);
// sum_n f(q^n (q-1) e^{id}) / Theta_q(q^{n+1} (q-1) e^{id} / z)
cplx theta_q_laplace(const ray_function& f, double d, double q, const sector_point& z);
// (q-1)/log q int_0^{infty e^{id}} f(zeta) / (z e_q(q zeta / z)) dzeta, order k by conjugation.
cplx continuous_q_laplace(const ray_function& f, rational k, double d, double q, const sector_point& z);

// Continuation of a convergent series along arg zeta = d through the q-difference equation.
ray_handle q_continuation(const power_series& s, const linear_operator& q_op, double d);

struct pole_spiral {
    cplx base;     // poles lie on base * ratio^Z (in the variable z^order)
    double ratio;  // for the continuous mode ratio = 0 marks a full ray
    double order = 1.0;
};

class q_summed_function {
public:
    const summation_ladder& ladder() const { return ladder_; }
    double direction() const { return d_; }
    double q() const { return q_; }
    q_mode mode() const { return mode_; }
    const std::vector<pole_spiral>& pole_spirals() const { return poles_; }
    double half_opening() const;
    bool in_domain(const sector_point& z) const;
    // Relative distance to the nearest recorded pole (infinity if none).
    double pole_distance(const sector_point& z) const;

    cplx evaluate(const sector_point& z) const;
    cplx evaluate(cplx z) const { return evaluate(sector_point::from_complex(z)); }

private:
    friend q_summed_function q_multisum(const power_series&, const linear_operator&, double, q_mode, bool);

    struct section_data {
        int l = 0;
        std::shared_ptr<const section_system> sys;
        ray_handle base;
        std::vector<std::vector<cplx>> formal;
    };

    summation_ladder ladder_;
    double d_ = 0.0;
    double q_ = 2.0;
    q_mode mode_ = q_mode::discrete;
    bool passthrough_ = false;
    std::shared_ptr<const section_system> direct_;
    std::vector<section_data> sections_;
    std::vector<std::shared_ptr<detail::lattice_engine>> engines_;
    std::vector<pole_spiral> poles_;
};

// single_level sums with the first slope only (required for theta mode, implied by it).
q_summed_function q_multisum(const power_series& s, const linear_operator& op, double d, q_mode mode,
                             bool single_level = false);

// Singular directions of the q-Borel plane data used by q_multisum.
direction_set q_singular_directions(const linear_operator& op, const summation_ladder& ladder);
double q_stokes_offset(const linear_operator& op, double d_singular, bool single_level);
cplx q_stokes_jump(const power_series& s, const linear_operator& op, double d_singular, const sector_point& z,
                   q_mode mode, bool single_level = false);

// Solution of a first-order q-operator normalised to 1 at infinity: prod_n R(q^n z)^{-1}, R = -b_0/b_1.
cplx q_homogeneous(const linear_operator& op, cplx z);

struct confluence_row {
    double q = 0.0;
    double a1_difference = 0.0;  // max coefficient distance to the limit
    bool a2_slopes_match = false;
    double a3_constant = 0.0;    // max |b_i - b~_i| / ((q-1)(|b~_i|+1)) on the sample
};

struct confluence_report {
    std::vector<confluence_row> rows;
    bool a1_pass = false;
    bool a2_pass = false;
    bool a3_pass = false;
    double c1 = 0.0;           // fitted constant (max over the grid)
    double c1_exponent = 0.0;  // slope of log c1 against log(q-1)
    bool pass() const { return a1_pass && a2_pass && a3_pass; }
};

confluence_report validate_confluence_family(const operator_family& family, const linear_operator& limit,
                                             const std::vector<double>& q_grid);

}  // namespace qconf
