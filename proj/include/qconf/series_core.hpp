#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <vector>

#include "qconf/errors.hpp"
#include "qconf/rational.hpp"

namespace qconf {

using cplx = std::complex<double>;

inline constexpr double pi = 3.141592653589793238462643383279502884;

// A point of the Riemann surface of the logarithm. The argument is never
// reduced mod 2*pi, so powers z^a are taken on the sheet it selects.
struct sector_point {
    double log_modulus = 0.0;
    double argument = 0.0;

    static sector_point from_complex(cplx z);
    static sector_point from_polar(double modulus, double argument);

    double modulus() const;
    cplx value() const;
    // z^a on this sheet.
    cplx pow(double a) const;
    sector_point scaled(double factor) const;
};

struct power_series {
    std::vector<cplx> coefficients;  // index n is the coefficient of t^n, t = z^(1/ram_index)
    int ram_index = 1;

    power_series() = default;
    explicit power_series(std::vector<cplx> c, int ram = 1) : coefficients(std::move(c)), ram_index(ram) {}

    std::size_t truncation_order() const { return coefficients.size(); }
    cplx operator[](std::size_t n) const { return n < coefficients.size() ? coefficients[n] : cplx(0.0); }

    // Horner evaluation of the truncated sum at z (principal branch for ram_index > 1).
    cplx evaluate(cplx z) const;
    cplx evaluate(const sector_point& z) const;

    // Lowest terms representation: ram_index reduced by the gcd of the support.
    power_series normalized() const;
};

power_series operator+(const power_series& a, const power_series& b);
power_series operator-(const power_series& a, const power_series& b);
power_series operator*(const power_series& a, const power_series& b);
power_series operator*(cplx c, const power_series& a);

// Shift by z^k (k >= 0) keeping the truncation order of the input.
power_series shift(const power_series& s, int k);

struct polynomial {
    std::vector<cplx> coefficients;

    polynomial() = default;
    explicit polynomial(std::vector<cplx> c) : coefficients(std::move(c)) { trim(); }
    static polynomial constant(cplx c) { return polynomial(std::vector<cplx>{c}); }
    static polynomial monomial(int degree, cplx c = 1.0);

    int degree() const { return int(coefficients.size()) - 1; }  // -1 for the zero polynomial
    bool is_zero() const { return coefficients.empty(); }
    cplx operator[](std::size_t i) const { return i < coefficients.size() ? coefficients[i] : cplx(0.0); }
    cplx operator()(cplx x) const;
    // Index of the first nonzero coefficient, or nullopt for zero.
    std::optional<int> valuation() const;

    // p(a*x + b)
    polynomial substitute_affine(cplx a, cplx b) const;
    void trim();
};

polynomial operator+(const polynomial& a, const polynomial& b);
polynomial operator-(const polynomial& a, const polynomial& b);
polynomial operator*(const polynomial& a, const polynomial& b);
polynomial operator*(cplx c, const polynomial& a);

double q_bracket(int l, double q);
double q_factorial(int n, double q);
// log [n]_q!, finite for any n.
double log_q_factorial(int n, double q);

power_series ramify(const power_series& s, rational c);
power_series section(const power_series& s, int beta, int l);

cplx gamma(cplx z);
cplx rgamma(cplx z);  // 1/Gamma, zero at the poles
double binomial(int n, int k);

}  // namespace qconf
