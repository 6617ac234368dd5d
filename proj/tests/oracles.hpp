#pragma once

// Reference computations written independently of the library code paths.

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/expint.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <complex>
#include <limits>
#include <random>
#include <vector>

namespace oracle {

using cplx = std::complex<double>;
constexpr double pi = 3.141592653589793238462643383279502884;

// Borel-Laplace sum of sum (-1)^n n! z^{n+1} for real z > 0: z int_0^inf e^{-t} / (1 + z t) dt.
inline double euler_sum(double z) {
    using boost::math::quadrature::gauss_kronrod;
    auto f = [z](double t) { return std::exp(-t) / (1.0 + z * t); };
    double err = 0.0;
    double v = gauss_kronrod<double, 61>::integrate(f, 0.0, std::numeric_limits<double>::infinity(), 15, 1e-14, &err);
    return z * v;
}

inline double euler_sum_expint(double z) { return std::exp(1.0 / z) * boost::math::expint(1, 1.0 / z); }

// Bilateral series sum_n q^{-n(n+1)/2} z^n, plain summation over |n| <= 6000.
inline cplx theta(cplx z, double q) {
    cplx acc = 0.0;
    double lq = std::log(q);
    for (int n = -6000; n <= 6000; ++n) {
        double lw = -0.5 * n * (n + 1.0) * lq;
        cplx t = std::exp(lw + double(n) * std::log(z));
        acc += t;
    }
    return acc;
}

// prod_{k<K} (1 - a p^k) with K large enough for the tail to be below 1e-18.
inline cplx pochhammer_inf(cplx a, double p) {
    cplx acc = 1.0;
    double pk = 1.0;
    for (int k = 0; k < 200000 && std::abs(a) * pk > 1e-18; ++k, pk *= p) acc *= 1.0 - a * pk;
    return acc;
}

// e_q(z) = prod_{n>=0} (1 + (q-1) q^{-n-1} z), q > 1.
inline cplx eq_exp(cplx z, double q) {
    cplx acc = 1.0;
    double c = (q - 1.0) / q;
    for (int n = 0; n < 200000 && std::abs(c * z) > 1e-18; ++n, c /= q) acc *= 1.0 + c * z;
    return acc;
}

// e_p(z) = 1 / ((1-p) z; p)_inf, 0 < p < 1.
inline cplx ep_exp(cplx z, double p) { return 1.0 / pochhammer_inf((1.0 - p) * z, p); }

inline double q_bracket(int n, double q) { return (std::pow(q, n) - 1.0) / (q - 1.0); }

inline double q_factorial(int n, double q) {
    double acc = 1.0;
    for (int k = 1; k <= n; ++k) acc *= q_bracket(k, q);
    return acc;
}

// Laplace of order 1 of a polynomial: sum g_n n! z^n.
inline cplx laplace_poly(const std::vector<cplx>& g, cplx z) {
    cplx acc = 0.0, zn = 1.0;
    double fact = 1.0;
    for (std::size_t n = 0; n < g.size(); ++n) {
        if (n) fact *= double(n);
        acc += g[n] * fact * zn;
        zn *= z;
    }
    return acc;
}

inline cplx poly_eval(const std::vector<cplx>& g, cplx x) {
    cplx acc = 0.0;
    for (std::size_t i = g.size(); i-- > 0;) acc = acc * x + g[i];
    return acc;
}

inline std::vector<cplx> random_poly(std::mt19937& rng, int degree) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<cplx> g(degree + 1);
    for (auto& c : g) c = cplx(u(rng), u(rng));
    return g;
}

inline double rel(cplx a, cplx b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

// (a; p)_n as an explicit product
inline cplx poch(cplx a, double p, int n) {
    cplx acc = 1.0;
    for (int k = 0; k < n; ++k) acc *= 1.0 - a * std::pow(p, k);
    return acc;
}

// r phi s coefficient straight from the defining formula
inline cplx phi_coef(const std::vector<cplx>& a, const std::vector<cplx>& b, double p, int n) {
    cplx num = 1.0, den = poch(p, p, n);
    for (cplx x : a) num *= poch(x, p, n);
    for (cplx x : b) den *= poch(x, p, n);
    int e = 1 + int(b.size()) - int(a.size());
    double w = std::pow((n % 2 ? -1.0 : 1.0) * std::pow(p, 0.5 * n * (n - 1.0)), e);
    return num / den * w;
}

inline cplx phi_direct(const std::vector<cplx>& a, const std::vector<cplx>& b, double p, cplx z, int n_max = 400) {
    cplx acc = 0.0, zn = 1.0;
    for (int n = 0; n < n_max; ++n, zn *= z) acc += phi_coef(a, b, p, n) * zn;
    return acc;
}

// Heine's transformation of 2phi1 to argument c p / (a b z)
inline cplx heine_rhs(cplx a, cplx b, cplx c, double p, cplx z) {
    auto P = [&](cplx x) { return pochhammer_inf(x, p); };
    auto term = [&](cplx a1, cplx b1) {
        cplx pref = P(b1) * P(c / a1) * P(a1 * z) * P(p / (a1 * z)) / (P(c) * P(b1 / a1) * P(z) * P(p / z));
        return pref * phi_direct({a1, a1 * p / c}, {a1 * p / b1}, p, c * p / (a * b * z));
    };
    return term(a, b) + term(b, a);
}

// 2F0(a, b;; -z) = 1/Gamma(a) int_0^inf t^{a-1} e^{-t} (1 + z t)^{-b} dt, substituted t = u^{1/a}
inline cplx two_f0_laplace(double a, double b, cplx z) {
    using boost::math::quadrature::gauss_kronrod;
    auto part = [&](bool im) {
        auto f = [&](double u) {
            double t = std::pow(u, 1.0 / a);
            cplx v = std::exp(-t) * std::pow(1.0 + z * t, -b) / a;
            return im ? v.imag() : v.real();
        };
        return gauss_kronrod<double, 61>::integrate(f, 0.0, std::numeric_limits<double>::infinity(), 12, 1e-12);
    };
    return cplx(part(false), part(true)) / boost::math::tgamma(a);
}

}  // namespace oracle
