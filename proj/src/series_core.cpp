#include "qconf/series_core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace qconf {

const char* error_code(error_kind k) {
    switch (k) {
        case error_kind::domain: return "domain";
        case error_kind::range: return "range";
        case error_kind::parse: return "parse";
        case error_kind::validation: return "validation";
        case error_kind::unsupported: return "unsupported";
        case error_kind::argument: return "argument";
        case error_kind::resonance: return "resonance";
        case error_kind::pole: return "pole";
        case error_kind::spiral_collision: return "spiral-collision";
        case error_kind::singular_direction: return "singular-direction";
        case error_kind::growth: return "growth";
        case error_kind::bracketing: return "bracketing";
        case error_kind::degenerate_parameter: return "degenerate-parameter";
        case error_kind::direction: return "direction";
        case error_kind::parameter: return "parameter";
        case error_kind::config: return "config";
    }
    return "unknown";
}

int exit_code_for(error_kind k) {
    switch (k) {
        case error_kind::parse:
        case error_kind::validation:
        case error_kind::argument:
        case error_kind::config:
            return 2;
        default:
            return 3;
    }
}

sector_point sector_point::from_complex(cplx z) {
    if (z == cplx(0.0)) fail(error_kind::domain, "sector point at the origin");
    return {std::log(std::abs(z)), std::arg(z)};
}

sector_point sector_point::from_polar(double modulus, double argument) {
    if (!(modulus > 0.0)) fail(error_kind::domain, "sector point needs a positive modulus");
    return {std::log(modulus), argument};
}

double sector_point::modulus() const { return std::exp(log_modulus); }

cplx sector_point::value() const { return std::polar(modulus(), argument); }

cplx sector_point::pow(double a) const { return std::polar(std::exp(a * log_modulus), a * argument); }

sector_point sector_point::scaled(double factor) const { return {log_modulus + std::log(factor), argument}; }

cplx power_series::evaluate(cplx z) const { return evaluate(sector_point::from_complex(z == cplx(0.0) ? cplx(1e-300) : z)); }

cplx power_series::evaluate(const sector_point& z) const {
    cplx t = ram_index == 1 ? z.value() : z.pow(1.0 / ram_index);
    cplx acc = 0.0;
    for (auto it = coefficients.rbegin(); it != coefficients.rend(); ++it) acc = acc * t + *it;
    return acc;
}

power_series power_series::normalized() const {
    int g = ram_index;
    for (std::size_t n = 0; n < coefficients.size(); ++n)
        if (coefficients[n] != cplx(0.0)) g = std::gcd(g, int(n));
    if (g <= 1) return *this;
    power_series out;
    out.ram_index = ram_index / g;
    out.coefficients.assign((coefficients.size() + g - 1) / g, 0.0);
    for (std::size_t n = 0; n < coefficients.size(); n += g) out.coefficients[n / g] = coefficients[n];
    return out;
}

namespace {

void check_ram(const power_series& a, const power_series& b) {
    if (a.ram_index != b.ram_index)
        fail(error_kind::argument, "series with different ramification indices");
}

}  // namespace

power_series operator+(const power_series& a, const power_series& b) {
    check_ram(a, b);
    std::size_t n = std::min(a.truncation_order(), b.truncation_order());
    std::vector<cplx> c(n);
    for (std::size_t i = 0; i < n; ++i) c[i] = a[i] + b[i];
    return power_series(std::move(c), a.ram_index);
}

power_series operator-(const power_series& a, const power_series& b) { return a + cplx(-1.0) * b; }

power_series operator*(const power_series& a, const power_series& b) {
    check_ram(a, b);
    std::size_t n = std::min(a.truncation_order(), b.truncation_order());
    std::vector<cplx> c(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; i + j < n; ++j) c[i + j] += a[i] * b[j];
    return power_series(std::move(c), a.ram_index);
}

power_series operator*(cplx c, const power_series& a) {
    power_series out = a;
    for (auto& x : out.coefficients) x *= c;
    return out;
}

power_series shift(const power_series& s, int k) {
    power_series out(std::vector<cplx>(s.truncation_order(), 0.0), s.ram_index);
    for (std::size_t n = 0; n + k < s.truncation_order(); ++n) out.coefficients[n + k] = s[n];
    return out;
}

polynomial polynomial::monomial(int degree, cplx c) {
    std::vector<cplx> v(degree + 1, 0.0);
    v[degree] = c;
    return polynomial(std::move(v));
}

void polynomial::trim() {
    while (!coefficients.empty() && coefficients.back() == cplx(0.0)) coefficients.pop_back();
}

cplx polynomial::operator()(cplx x) const {
    cplx acc = 0.0;
    for (auto it = coefficients.rbegin(); it != coefficients.rend(); ++it) acc = acc * x + *it;
    return acc;
}

std::optional<int> polynomial::valuation() const {
    for (std::size_t i = 0; i < coefficients.size(); ++i)
        if (coefficients[i] != cplx(0.0)) return int(i);
    return std::nullopt;
}

polynomial polynomial::substitute_affine(cplx a, cplx b) const {
    // Horner with polynomial arithmetic: p(ax+b)
    polynomial lin(std::vector<cplx>{b, a});
    polynomial acc;
    for (auto it = coefficients.rbegin(); it != coefficients.rend(); ++it) acc = acc * lin + constant(*it);
    return acc;
}

polynomial operator+(const polynomial& a, const polynomial& b) {
    std::vector<cplx> c(std::max(a.coefficients.size(), b.coefficients.size()), 0.0);
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = a[i] + b[i];
    return polynomial(std::move(c));
}

polynomial operator-(const polynomial& a, const polynomial& b) { return a + cplx(-1.0) * b; }

polynomial operator*(const polynomial& a, const polynomial& b) {
    if (a.is_zero() || b.is_zero()) return {};
    std::vector<cplx> c(a.coefficients.size() + b.coefficients.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.coefficients.size(); ++i)
        for (std::size_t j = 0; j < b.coefficients.size(); ++j) c[i + j] += a.coefficients[i] * b.coefficients[j];
    return polynomial(std::move(c));
}

polynomial operator*(cplx c, const polynomial& a) {
    std::vector<cplx> v = a.coefficients;
    for (auto& x : v) x *= c;
    return polynomial(std::move(v));
}

double q_bracket(int l, double q) {
    if (!(q > 1.0)) fail(error_kind::domain, "q_bracket needs q > 1, got " + std::to_string(q));
    if (l < 0) fail(error_kind::argument, "q_bracket needs l >= 0");
    return std::expm1(l * std::log(q)) / (q - 1.0);
}

double q_factorial(int n, double q) {
    if (!(q > 1.0)) fail(error_kind::domain, "q_factorial needs q > 1, got " + std::to_string(q));
    if (n < 0) fail(error_kind::argument, "q_factorial needs n >= 0");
    double acc = 1.0;
    for (int l = 1; l <= n; ++l) {
        acc *= q_bracket(l, q);
        if (!std::isfinite(acc)) fail(error_kind::range, "q_factorial overflows at n = " + std::to_string(l));
    }
    return acc;
}

double log_q_factorial(int n, double q) {
    double acc = 0.0;
    for (int l = 2; l <= n; ++l) acc += std::log(q_bracket(l, q));
    return acc;
}

power_series ramify(const power_series& s, rational c) {
    if (c <= rational(0)) fail(error_kind::argument, "ramify needs a positive exponent");
    // exponent n/nu maps to n*c/nu = n*a/(b*nu); new index nu' = b*nu/g keeps n*a/g integral
    std::int64_t a = c.num(), b = c.den();
    std::int64_t g = std::gcd(a, b * s.ram_index);
    std::int64_t step = a / g;
    power_series out;
    out.ram_index = int(b * s.ram_index / g);
    std::size_t n = s.truncation_order();
    out.coefficients.assign(n == 0 ? 0 : (n - 1) * step + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) out.coefficients[i * step] = s[i];
    return out;
}

power_series section(const power_series& s, int beta, int l) {
    if (beta < 1) fail(error_kind::argument, "section needs beta >= 1");
    if (l < 0 || l >= beta) fail(error_kind::argument, "section index l out of range [0, beta)");
    if (s.ram_index != 1) fail(error_kind::argument, "section needs ram_index 1");
    power_series out(std::vector<cplx>(s.truncation_order(), 0.0), 1);
    for (std::size_t n = 0; n * beta + l < s.truncation_order(); ++n) out.coefficients[n * beta] = s[n * beta + l];
    return out;
}

namespace {

// Lanczos, g = 7, n = 9.
constexpr double lanczos_g = 7.0;
constexpr double lanczos_c[9] = {0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
                                 771.32342877765313,   -176.61502916214059,   12.507343278686905,
                                 -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};

cplx lanczos_gamma(cplx z) {
    // valid for Re z >= 0.5
    z -= 1.0;
    cplx x = lanczos_c[0];
    for (int i = 1; i < 9; ++i) x += lanczos_c[i] / (z + double(i));
    cplx t = z + lanczos_g + 0.5;
    return std::sqrt(2.0 * pi) * std::exp((z + 0.5) * std::log(t) - t) * x;
}

bool at_pole(cplx z, long* which) {
    if (z.imag() != 0.0 || z.real() > 0.0) return false;
    double r = std::round(z.real());
    if (r == z.real()) {
        *which = long(r);
        return true;
    }
    return false;
}

}  // namespace

cplx gamma(cplx z) {
    long n = 0;
    if (at_pole(z, &n)) fail(error_kind::domain, "Gamma has a pole at " + std::to_string(n));
    if (z.imag() == 0.0 && z.real() > 0.0 && z.real() < 171.0) return std::tgamma(z.real());
    if (z.real() < 0.5) return pi / (std::sin(pi * z) * lanczos_gamma(1.0 - z));
    return lanczos_gamma(z);
}

cplx rgamma(cplx z) {
    long n = 0;
    if (at_pole(z, &n)) return 0.0;
    return 1.0 / gamma(z);
}

double binomial(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

}  // namespace qconf
