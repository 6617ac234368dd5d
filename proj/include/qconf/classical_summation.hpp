#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <vector>

#include "qconf/continuation.hpp"
#include "qconf/operators.hpp"
#include "qconf/rational.hpp"
#include "qconf/series_core.hpp"

namespace qconf {

namespace detail {
class lattice_engine;
}

struct summation_ladder {
    std::vector<rational> positive_slopes;  // k_1 < ... < k_{r-1}
    int top_level = 0;                      // k_r
    std::vector<rational> kappa;            // kappa_1 ... kappa_r
    std::vector<int> alpha;                 // repetition counts
    std::vector<rational> kappa_tilde;      // kappa~_1 ... kappa~_s
    int beta = 1;
    int d0 = 2;

    bool convergent() const { return kappa_tilde.empty(); }
};

// a_n / Gamma(1 + n/k), exponents read through ram_index.
power_series formal_borel(const power_series& s, rational k);

summation_ladder build_ladder(const newton_polygon_t& polygon, const std::vector<int>& coefficient_degrees,
                              std::optional<int> k_r_choice = std::nullopt);
summation_ladder build_ladder(const linear_operator& op, std::optional<int> k_r_choice = std::nullopt);

enum class direction_source { leading_root, borel_pole };
const char* to_string(direction_source s);

struct direction_set {
    std::vector<double> directions;  // sorted in [0, 2 pi)
    std::vector<direction_source> provenance;

    double distance(double d) const;  // angular distance to the nearest entry (infinity if empty)
};

direction_set singular_directions(const linear_operator& op, const summation_ladder& ladder);

struct continued_function {
    ray_handle ray;
    growth_fit growth;
};

// s is a convergent Borel transform annihilated by borel_op (up to its right side).
continued_function borel_continuation(const power_series& s, const linear_operator& borel_op, double d, double k = 1.0);

// L_k^d f at z by trapezoidal quadrature in log|zeta| with step halving.
cplx laplace_along_ray(const ray_function& f, rational k, double d, const sector_point& z);

// S~^d of a formal solution, evaluated lazily on a sector around d.
class summed_function {
public:
    summed_function() = default;

    const summation_ladder& ladder() const { return ladder_; }
    double direction() const { return d_; }
    // Open sector of arguments where the value is defined.
    double half_opening() const;
    bool in_domain(const sector_point& z) const;

    cplx evaluate(const sector_point& z) const;
    cplx evaluate(cplx z) const { return evaluate(sector_point::from_complex(z)); }

private:
    friend summed_function multisum(const power_series&, const linear_operator&, double);

    struct section_data {
        int l = 0;
        std::shared_ptr<const section_system> sys;
        ray_handle base;
        std::vector<std::vector<cplx>> formal;  // [level j][n], level 0 unused
    };
    std::shared_ptr<detail::lattice_engine> engine_for(const section_data& sec, double h) const;

    summation_ladder ladder_;
    double d_ = 0.0;
    bool passthrough_ = false;
    std::shared_ptr<const section_system> direct_;  // convergent case
    std::vector<section_data> sections_;
    double analytic_halfwidth_ = pi;

    struct cache {
        std::mutex mu;
        std::map<std::pair<int, long>, std::shared_ptr<detail::lattice_engine>> engines;
    };
    std::shared_ptr<cache> cache_ = std::make_shared<cache>();
};

summed_function multisum(const power_series& s, const linear_operator& op, double d);

// S~^{d+}(z) - S~^{d-}(z) across the singular direction d_singular.
cplx stokes_jump(const power_series& s, const linear_operator& op, double d_singular, const sector_point& z);
// Lateral offset used by stokes_jump.
double stokes_offset(const linear_operator& op, double d_singular);

// Homogeneous solution of a first-order operator normalised to 1 at infinity:
// exp(int_z^infty b_0 / (s b_1) ds), along the ray through z.
cplx classical_homogeneous(const linear_operator& op, const sector_point& z);

// Helpers shared with the q side.
namespace detail {
std::vector<cplx> polynomial_roots(const polynomial& p);
// Asymptotic value sum c_n x^n when optimal truncation reaches 1e-17 relative.
std::optional<cplx> optimal_truncation(const std::vector<cplx>& c, cplx x, int n_min);
double quantize_step(double h);
}  // namespace detail

}  // namespace qconf
