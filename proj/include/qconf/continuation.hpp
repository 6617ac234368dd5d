#pragma once

#include <functional>
#include <memory>
#include <mutex>
#include <vector>

#include <Eigen/Dense>

#include "qconf/operators.hpp"
#include "qconf/series_core.hpp"

namespace qconf {

// How the beta-section coefficients are weighted before summation.
//   none       : V_n = h_{l+n beta}
//   gamma      : divided by prod_i Gamma(1 + n beta / kt_i)
//   q_ramified : divided by prod_i [n beta / kt_i]_{q^{kt_i}}!
//   rz         : divided by q^{m(m-1)/2}, m = n beta
enum class borel_weight { none, gamma, q_ramified, rz };

struct section_options {
    int beta = 1;
    int l = 0;
    borel_weight weight = borel_weight::none;
    std::vector<rational> levels;
};

// Generating function F(x) = sum_n V_n x^n, x = zeta^beta, of the vectors
// V_n = (h_m, ..., h_{m-J+1}) / G(n), m = l + n beta. F satisfies
//   classical: sum_a C_a(x) theta^a F = R(x)
//   q:         sum_a C_a(x) F(Q^a x) = R(x),  Q = q^beta
// with C_a(x) = d_a I - x E_a and R a polynomial.
class section_system {
public:
    section_system(const recurrence& rec, std::vector<cplx> h, section_options opt);

    int dim() const { return J_; }
    int order() const { return A_; }
    bool q_type() const { return rec_.q_type; }
    int beta() const { return opt_.beta; }
    int l() const { return opt_.l; }
    double q() const { return rec_.q; }
    // Last block computed directly from the input coefficients.
    int direct_count() const { return n_direct_; }
    double step_ratio() const;  // Q = q^beta

    // V_n (thread-safe, grows an internal cache)
    Eigen::VectorXcd coefficient_vector(int n) const;
    cplx coefficient(int n) const { return coefficient_vector(n)(0); }
    double log_weight(int n) const;

    const std::vector<cplx>& singular_points() const { return singular_; }
    double radius() const { return radius_; }

    Eigen::MatrixXcd C(int a, cplx x) const;
    Eigen::VectorXcd R(cplx x) const;

    // theta^a F(x) for a = 0..derivs-1 by the convergent series.
    std::vector<Eigen::VectorXcd> series_state(cplx x, int derivs) const;
    Eigen::VectorXcd series_value(cplx x) const { return series_state(x, 1)[0]; }
    // F(Q^A x) from F(Q^a x), a < A.
    Eigen::VectorXcd q_step(cplx x, const std::vector<Eigen::VectorXcd>& prev) const;

private:
    cplx h_at(int m) const;
    void extend(int n) const;
    cplx nu(int n) const;

    recurrence rec_;
    section_options opt_;
    int J_ = 1;
    int A_ = 0;
    int n_direct_ = 0;
    polynomial D_;
    std::vector<std::vector<polynomial>> N_;  // J x J entries in nu
    std::vector<cplx> d_;
    std::vector<Eigen::MatrixXcd> E_;
    std::vector<Eigen::VectorXcd> Rn_;
    std::vector<cplx> singular_;
    double radius_ = 0.0;

    mutable std::mutex mu_;
    mutable std::vector<cplx> h_;
    mutable std::vector<Eigen::VectorXcd> V_;
    mutable std::vector<double> logw_;
};

struct growth_fit {
    double J = 0.0;
    double L = 0.0;
};

// Evaluable function along the ray arg(zeta) = direction.
class ray_function {
public:
    explicit ray_function(double direction) : direction_(direction) {}
    virtual ~ray_function() = default;

    double direction() const { return direction_; }
    cplx at(double t) const { return at_sorted({t})[0]; }
    // Values at t e^{i d} for ascending t.
    virtual std::vector<cplx> at_sorted(const std::vector<double>& ts) const = 0;
    // Half-width (radians) of the sector around the ray where the function is analytic.
    virtual double analytic_halfwidth() const { return pi; }

    growth_fit growth(double k, double t_max) const;

private:
    double direction_;
};

using ray_handle = std::shared_ptr<const ray_function>;

ray_handle make_series_ray(power_series s, double d);
ray_handle make_function_ray(std::function<cplx(cplx)> f, double d, double halfwidth = pi);

// Continuation of F_0 along the ray by the section system (ODE or q-iteration).
ray_handle make_system_ray(std::shared_ptr<const section_system> sys, double d);

// Smallest angular distance between the direction d and the given angles.
double angular_distance(double d, const std::vector<double>& angles);
double wrap_angle(double a);  // into [0, 2 pi)

}  // namespace qconf
