#pragma once

#include <vector>

#include <Eigen/Dense>

#include "qconf/series_core.hpp"

namespace qconf {

enum class eval_mode { series, product };

using matrix = Eigen::MatrixXcd;

// Smallest q accepted by the theta / e_q evaluators.
inline constexpr double q_floor = 1.001;

// value = mantissa * exp(log_scale); keeps huge or tiny magnitudes representable.
struct scaled_value {
    cplx mantissa;
    double log_scale;
    cplx value() const;
};

cplx theta(cplx z, double q, eval_mode mode = eval_mode::series);
scaled_value theta_scaled(cplx z, double q);
// Theta_q(a) / Theta_q(b) without forming either value.
cplx theta_ratio(cplx a, cplx b, double q);

// e_q for q > 1; for 0 < q < 1 the p-convention e_p(z) = 1/((1-p)z; p)_inf is used.
cplx eq_exp(cplx z, double q, eval_mode mode = eval_mode::product);
// log e_q(z) for q > 1 (any branch; only exp of it is meaningful).
cplx log_eq_exp(cplx z, double q);

cplx lq(cplx z, double q);
cplx lambda_char(cplx a, cplx z, double q);
matrix lambda_matrix(const matrix& A, cplx z, double q);
matrix q_exp_matrix(const matrix& A, double q);

cplx pochhammer(cplx a, double p, int n);
cplx pochhammer_inf(cplx a, double p);
// log (a;p)_inf as a sum of principal logs.
cplx log_pochhammer_inf(cplx a, double p);

}  // namespace qconf
