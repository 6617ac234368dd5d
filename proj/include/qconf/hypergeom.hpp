#pragma once

#include <vector>

#include "qconf/operators.hpp"
#include "qconf/series_core.hpp"

namespace qconf {

// Parameters of r phi s (a_1..a_r ; b_1..b_s ; p), 0 < p < 1.
struct phi_params {
    std::vector<cplx> upper;
    std::vector<cplx> lower;
    double p = 0.5;

    int r() const { return int(upper.size()); }
    int s() const { return int(lower.size()); }
};

// Parameters of r F s (alpha_1..alpha_r ; beta_1..beta_s).
struct f_params {
    std::vector<cplx> upper;
    std::vector<cplx> lower;

    int r() const { return int(upper.size()); }
    int s() const { return int(lower.size()); }
};

// First N coefficients of r phi s. A vanishing denominator raises a parameter error.
power_series rphi(const phi_params& prm, int N);
// Value of a convergent r phi s (r <= s+1). For r = s+1 points outside the
// disk are reached through the q-difference equation, stepping from p^K z.
cplx rphi_value(const phi_params& prm, cplx z);

power_series rF(const f_params& prm, int N);
// Coefficients of r F s((-1)^{1+s-r} z), the series annihilated by rF_operator.
power_series rF_signed(const f_params& prm, int N);
// r F s for r <= s (entire) or r = s+1 with |z| < 1.
cplx rF_value(const f_params& prm, cplx z);

// sigma_q operator (q = 1/p) annihilating r phi s(a; b; p; z). Only r = s+2 is
// accepted; there it is (s-1) prod (s - b_i q) + z q^{1+s} prod (s - a_i).
linear_operator rphi_operator(const phi_params& prm);
// delta operator annihilating r F s(alpha; beta; (-1)^{1+s-r} z).
linear_operator rF_operator(const f_params& prm);

// Right side of the connection formula at infinity for r phi r-1.
cplx connection_infinity(const phi_params& prm, cplx z);

// Closed form of the theta q-Laplace sum (base 1/p) of the divergent r phi s, r = s+2.
cplx qsum_closed_form(const phi_params& prm, double d, cplx z);

// Gamma-weighted sum of s+1 F r-1 terms, the classical sum of r F s((-1)^{1+s-r} z) in direction d.
cplx classical_limit_rhs(const f_params& prm, double d, const sector_point& z);
// Plain complex z is placed on the sheet with |arg z - d| <= pi.
cplx classical_limit_rhs(const f_params& prm, double d, cplx z);

// p^alpha, p^beta parameters and the rescaled argument x = z (1-p)^{1+s-r}.
phi_params deform(const f_params& prm, double p);
cplx deformed_argument(const f_params& prm, double p, cplx z);

}  // namespace qconf
