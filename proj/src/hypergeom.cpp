#include "qconf/hypergeom.hpp"

#include <cmath>
#include <string>

#include "qconf/continuation.hpp"
#include "qconf/q_special.hpp"

namespace qconf {

namespace {

constexpr double collision_tol = 1e-8;
constexpr double disk = 0.5;  // series evaluation radius for r = s+1

void check_p(double p) {
    if (!(p > 0.0 && p < 1.0)) fail(error_kind::parameter, "base p must lie in (0, 1)");
}

// Ascending coefficients of c * prod (X - roots_i).
std::vector<cplx> from_roots(const std::vector<cplx>& roots, cplx c = 1.0) {
    std::vector<cplx> out{c};
    for (cplx r : roots) {
        std::vector<cplx> next(out.size() + 1, 0.0);
        for (std::size_t i = 0; i < out.size(); ++i) {
            next[i + 1] += out[i];
            next[i] -= r * out[i];
        }
        out = std::move(next);
    }
    return out;
}

double sign_pow(int e) { return (e % 2 == 0) ? 1.0 : -1.0; }

// x in p^{-N}: (x; p)_inf vanishes.
bool kills_pochhammer(cplx x, double p) {
    if (x == cplx(0.0)) return false;
    cplx l = std::log(x);
    if (std::abs(l.imag()) > collision_tol) return false;
    double n = -l.real() / std::log(p);
    return n > -collision_tol && std::abs(n - std::round(n)) < collision_tol;
}

// y / x in p^Z.
bool same_class(cplx x, cplx y, double p) {
    if (x == cplx(0.0) || y == cplx(0.0)) return x == y;
    cplx l = std::log(y / x);
    if (std::abs(l.imag()) > collision_tol) return false;
    double n = l.real() / std::log(p);
    return std::abs(n - std::round(n)) < collision_tol;
}

bool same_class_additive(cplx a, cplx b) {
    cplx t = a - b;
    return std::abs(t.imag()) < collision_tol && std::abs(t.real() - std::round(t.real())) < collision_tol;
}

void check_distinct(const std::vector<cplx>& v, double p, const char* what) {
    for (std::size_t i = 0; i < v.size(); ++i)
        for (std::size_t j = i + 1; j < v.size(); ++j)
            if (same_class(v[i], v[j], p))
                fail(error_kind::degenerate_parameter, std::string(what) + " " + std::to_string(i + 1) + " and " +
                                                           std::to_string(j + 1) + " share a class in C*/q^Z");
}

// Term ratio u_{n+1}/u_n of r phi s.
cplx phi_ratio(const phi_params& prm, int n) {
    double pn = std::pow(prm.p, n);
    cplx num = 1.0, den = 1.0 - pn * prm.p;
    for (cplx a : prm.upper) num *= 1.0 - a * pn;
    for (std::size_t i = 0; i < prm.lower.size(); ++i) {
        cplx f = 1.0 - prm.lower[i] * pn;
        if (std::abs(f) < 1e-14)
            fail(error_kind::parameter,
                 "denominator factor (b_" + std::to_string(i + 1) + "; p)_" + std::to_string(n + 1) + " vanishes");
        den *= f;
    }
    int e = 1 + prm.s() - prm.r();
    return num / den * sign_pow(std::abs(e)) * std::pow(pn, e);
}

cplx f_ratio(const f_params& prm, int n) {
    cplx num = 1.0, den = double(n + 1);
    for (cplx a : prm.upper) num *= a + double(n);
    for (std::size_t i = 0; i < prm.lower.size(); ++i) {
        cplx f = prm.lower[i] + double(n);
        if (std::abs(f) < 1e-14)
            fail(error_kind::parameter, "denominator factor (beta_" + std::to_string(i + 1) + ")_" +
                                            std::to_string(n + 1) + " vanishes");
        den *= f;
    }
    return num / den;
}

// Sum of a series given by its term ratio, stopped once the terms are negligible.
template <class R>
cplx sum_by_ratio(R ratio, cplx z, int max_terms) {
    cplx term = 1.0, acc = 1.0;
    int quiet = 0;
    for (int n = 0; n < max_terms; ++n) {
        term *= ratio(n) * z;
        acc += term;
        quiet = std::abs(term) <= 1e-17 * std::abs(acc) ? quiet + 1 : 0;
        if (quiet >= 3 || term == cplx(0.0)) return acc;
    }
    fail(error_kind::range, "hypergeometric series did not converge within the term budget");
}

// sigma_q form of the equation of r phi s: sum_i (A_i + z B_i) sigma^i, q = 1/p.
void sigma_coefficients(const phi_params& prm, std::vector<cplx>& A, std::vector<cplx>& B) {
    double q = 1.0 / prm.p;
    std::vector<cplx> roots{1.0};
    for (cplx b : prm.lower) roots.push_back(b * q);
    A = from_roots(roots);
    B = from_roots(prm.upper, sign_pow(std::abs(prm.s() - prm.r())) * std::pow(q, 1 + prm.s()));
}

// log (x; p)_inf, pole-free by the caller's checks.
cplx lpi(cplx x, double p) { return log_pochhammer_inf(x, p); }

}  // namespace

power_series rphi(const phi_params& prm, int N) {
    check_p(prm.p);
    if (N < 1) fail(error_kind::argument, "truncation order must be positive");
    std::vector<cplx> c(N);
    c[0] = 1.0;
    for (int n = 0; n + 1 < N; ++n) c[n + 1] = c[n] * phi_ratio(prm, n);
    return power_series(std::move(c));
}

cplx rphi_value(const phi_params& prm, cplx z) {
    check_p(prm.p);
    const int r = prm.r(), s = prm.s();
    if (r > s + 1) fail(error_kind::unsupported, "r phi s with r > s+1 diverges; use the q-summation");
    auto ratio = [&](int n) { return phi_ratio(prm, n); };
    if (r <= s || std::abs(z) <= disk) return sum_by_ratio(ratio, z, 200000);

    // r = s+1: march f(p^k z) outward from inside the disk using
    // sum_i c_i(x) f(q^i x) = 0 with x = p^r z_k.
    std::vector<cplx> A, B;
    sigma_coefficients(prm, A, B);
    const int m = r;
    const double p = prm.p;
    int K = int(std::ceil(std::log(std::abs(z) / disk) / -std::log(p)));
    if (K > 100000) fail(error_kind::range, "continuation needs too many q-steps");
    std::vector<cplx> f(K + m);
    for (int k = K; k < K + m; ++k) f[k] = sum_by_ratio(ratio, z * std::pow(p, k), 200000);
    for (int k = K - 1; k >= 0; --k) {
        cplx x = z * std::pow(p, k + m);
        cplx lead = A[m] + x * B[m];
        if (std::abs(lead) < 1e-12 * (std::abs(A[m]) + std::abs(x * B[m])))
            fail(error_kind::pole, "continuation meets a pole of r phi r-1 on the spiral q^N");
        cplx acc = 0.0;
        for (int i = 0; i < m; ++i) {
            cplx ci = (i < int(A.size()) ? A[i] : 0.0) + x * (i < int(B.size()) ? B[i] : 0.0);
            acc += ci * f[k + m - i];
        }
        f[k] = -acc / lead;
    }
    return f[0];
}

power_series rF(const f_params& prm, int N) {
    if (N < 1) fail(error_kind::argument, "truncation order must be positive");
    std::vector<cplx> c(N);
    c[0] = 1.0;
    for (int n = 0; n + 1 < N; ++n) c[n + 1] = c[n] * f_ratio(prm, n);
    return power_series(std::move(c));
}

power_series rF_signed(const f_params& prm, int N) {
    power_series out = rF(prm, N);
    if ((1 + prm.s() - prm.r()) % 2 != 0)
        for (std::size_t n = 1; n < out.coefficients.size(); n += 2) out.coefficients[n] = -out.coefficients[n];
    return out;
}

cplx rF_value(const f_params& prm, cplx z) {
    const int r = prm.r(), s = prm.s();
    if (r > s + 1) fail(error_kind::unsupported, "r F s with r > s+1 diverges; use multisum");
    if (r == s + 1 && std::abs(z) >= 1.0) fail(error_kind::domain, "r F r-1 series needs |z| < 1");
    return sum_by_ratio([&](int n) { return f_ratio(prm, n); }, z, 200000);
}

linear_operator rphi_operator(const phi_params& prm) {
    check_p(prm.p);
    if (prm.r() != prm.s() + 2)
        fail(error_kind::unsupported, "the sigma_q equation with slopes {0, 1} is available for r = s+2 only");
    std::vector<cplx> A, B;
    sigma_coefficients(prm, A, B);
    linear_operator op;
    op.kind = op_kind::q_difference;
    op.basis = op_basis::sigma_q;
    op.q = 1.0 / prm.p;
    std::size_t m = std::max(A.size(), B.size());
    for (std::size_t i = 0; i < m; ++i) {
        polynomial b;
        b.coefficients = {i < A.size() ? A[i] : 0.0, i < B.size() ? B[i] : 0.0};
        op.coefficients.push_back(b);
    }
    return op;
}

linear_operator rF_operator(const f_params& prm) {
    std::vector<cplx> roots{0.0};
    for (cplx b : prm.lower) roots.push_back(1.0 - b);
    std::vector<cplx> A = from_roots(roots);
    std::vector<cplx> na;
    for (cplx a : prm.upper) na.push_back(-a);
    std::vector<cplx> B = from_roots(na, sign_pow(std::abs(prm.s() - prm.r())));
    linear_operator op;
    op.kind = op_kind::differential;
    op.basis = op_basis::delta;
    std::size_t m = std::max(A.size(), B.size());
    for (std::size_t i = 0; i < m; ++i) {
        polynomial b;
        b.coefficients = {i < A.size() ? A[i] : 0.0, i < B.size() ? B[i] : 0.0};
        op.coefficients.push_back(b);
    }
    return op;
}

cplx connection_infinity(const phi_params& prm, cplx z) {
    check_p(prm.p);
    const int r = prm.r();
    const double p = prm.p;
    if (prm.s() != r - 1) fail(error_kind::argument, "connection formula needs r upper and r-1 lower parameters");
    for (cplx a : prm.upper)
        if (a == cplx(0.0)) fail(error_kind::degenerate_parameter, "upper parameters must be nonzero");
    check_distinct(prm.upper, p, "upper parameters");
    if (z == cplx(0.0) || kills_pochhammer(z, p) || kills_pochhammer(p / z, p))
        fail(error_kind::pole, "z lies on the pole spiral p^Z of the connection formula");
    cplx prod_a = 1.0, prod_b = 1.0;
    for (cplx a : prm.upper) prod_a *= a;
    for (cplx b : prm.lower) prod_b *= b;
    for (cplx b : prm.lower)
        if (kills_pochhammer(b, p)) fail(error_kind::parameter, "lower parameter in q^N");

    cplx total = 0.0;
    for (int j = 0; j < r; ++j) {
        cplx aj = prm.upper[j];
        bool zero = kills_pochhammer(aj * z, p) || kills_pochhammer(p / (aj * z), p);
        for (cplx b : prm.lower) zero = zero || kills_pochhammer(b / aj, p);
        for (int i = 0; i < r; ++i) zero = zero || (i != j && kills_pochhammer(prm.upper[i], p));
        if (zero) continue;  // vanishing numerator
        cplx lg = lpi(aj * z, p) + lpi(p / (aj * z), p) - lpi(z, p) - lpi(p / z, p);
        phi_params inner;
        inner.p = p;
        inner.upper.push_back(aj);
        for (cplx b : prm.lower) {
            if (b == cplx(0.0)) fail(error_kind::degenerate_parameter, "lower parameters must be nonzero here");
            inner.upper.push_back(aj * p / b);
            lg += lpi(b / aj, p) - lpi(b, p);
        }
        for (int i = 0; i < r; ++i) {
            if (i == j) continue;
            lg += lpi(prm.upper[i], p) - lpi(prm.upper[i] / aj, p);
            inner.lower.push_back(aj * p / prm.upper[i]);
        }
        total += std::exp(lg) * rphi_value(inner, p * prod_b / (z * prod_a));
    }
    return total;
}

cplx qsum_closed_form(const phi_params& prm, double d, cplx z) {
    check_p(prm.p);
    const int r = prm.r(), s = prm.s();
    const double p = prm.p, q = 1.0 / p;
    if (r != s + 2) fail(error_kind::unsupported, "closed form is available for r = s+2 only");
    if (angular_distance(d, {wrap_angle((r - s - 1) * pi)}) < 1e-9)
        fail(error_kind::direction, "direction d = (r-s-1) pi mod 2 pi is excluded");
    cplx prod_a = 1.0, prod_b = 1.0;
    for (cplx a : prm.upper) prod_a *= a;
    for (cplx b : prm.lower) prod_b *= b;
    if (std::abs(prod_a) == 0.0) fail(error_kind::degenerate_parameter, "product of the upper parameters vanishes");
    std::vector<cplx> all = prm.upper;
    all.insert(all.end(), prm.lower.begin(), prm.lower.end());
    check_distinct(all, p, "parameters");
    for (cplx b : prm.lower)
        if (kills_pochhammer(b, p)) fail(error_kind::parameter, "lower parameter in q^N");
    if (z == cplx(0.0)) fail(error_kind::domain, "z = 0");

    const double sg = sign_pow(std::abs(s - r));
    const cplx lambda = (q - 1.0) * std::polar(1.0, d);
    cplx total = 0.0;
    for (int j = 0; j < r; ++j) {
        cplx aj = prm.upper[j];
        bool zero = false;
        for (cplx b : prm.lower) zero = zero || kills_pochhammer(b / aj, p);
        for (int i = 0; i < r; ++i) zero = zero || (i != j && kills_pochhammer(prm.upper[i], p));
        if (zero) continue;
        cplx lg = 0.0;
        phi_params inner;
        inner.p = p;
        inner.upper.push_back(aj);
        for (cplx b : prm.lower) {
            lg += lpi(b / aj, p) - lpi(b, p);
            inner.upper.push_back(aj * p / b);
        }
        inner.upper.push_back(0.0);
        for (int i = 0; i < r; ++i) {
            if (i == j) continue;
            lg += lpi(prm.upper[i], p) - lpi(prm.upper[i] / aj, p);
            inner.lower.push_back(aj * p / prm.upper[i]);
        }
        cplx th = theta_ratio(sg * aj * lambda, sg * lambda, q) * theta_ratio(aj * z / lambda, z / lambda, q);
        // The Borel image carries a_j Theta(a_j zeta)/Theta(zeta) and an extra p in
        // the inverted argument; both come from the triple product with b_{s+1} -> 0.
        cplx w = p * sg * prod_b / (z * prod_a);
        total += aj * std::exp(lg) * th * rphi_value(inner, w);
    }
    return total;
}

cplx classical_limit_rhs(const f_params& prm, double d, const sector_point& z) {
    const int r = prm.r(), s = prm.s();
    if (r < s + 2) fail(error_kind::argument, "classical_limit_rhs expects r > s+1");
    for (int i = 0; i < r; ++i)
        for (int j = i + 1; j < r; ++j)
            if (same_class_additive(prm.upper[i], prm.upper[j]))
                fail(error_kind::parameter, "alpha_" + std::to_string(i + 1) + " - alpha_" + std::to_string(j + 1) +
                                                " is an integer (Gamma pole)");
    for (std::size_t i = 0; i < prm.lower.size(); ++i) {
        cplx b = prm.lower[i];
        if (std::abs(b.imag()) < collision_tol && b.real() < collision_tol &&
            std::abs(b.real() - std::round(b.real())) < collision_tol)
            fail(error_kind::parameter, "Gamma(beta_" + std::to_string(i + 1) + ") has a pole");
    }
    // arg(-z) = d is the boundary of the sector of validity.
    if (angular_distance(wrap_angle(z.argument + pi), {wrap_angle(d)}) < 1e-12)
        fail(error_kind::domain, "arg(-z) = d lies outside the domain of the classical sum");

    // w = (-1)^{s-r} z on the sheet of z; odd r-s turns by -pi.
    const bool odd = (r - s) % 2 != 0;
    const double log_w = z.log_modulus;
    const double arg_w = z.argument - (odd ? pi : 0.0);
    const cplx inv_arg = (odd ? -1.0 : 1.0) / z.value();

    cplx total = 0.0;
    for (int j = 0; j < r; ++j) {
        cplx aj = prm.upper[j];
        cplx c = std::exp(-aj * cplx(log_w, arg_w));
        f_params inner;
        inner.upper.push_back(aj);
        for (cplx b : prm.lower) {
            c *= gamma(b) * rgamma(b - aj);
            inner.upper.push_back(aj - b + 1.0);
        }
        for (int i = 0; i < r; ++i) {
            if (i == j) continue;
            c *= gamma(prm.upper[i] - aj) * rgamma(prm.upper[i]);
            inner.lower.push_back(aj - prm.upper[i] + 1.0);
        }
        total += c * rF_value(inner, inv_arg);
    }
    return total;
}

cplx classical_limit_rhs(const f_params& prm, double d, cplx z) {
    sector_point zp = sector_point::from_complex(z);
    zp.argument = d + std::remainder(zp.argument - d, 2 * pi);  // sheet nearest to d
    return classical_limit_rhs(prm, d, zp);
}

phi_params deform(const f_params& prm, double p) {
    check_p(p);
    phi_params out;
    out.p = p;
    double lp = std::log(p);
    for (cplx a : prm.upper) out.upper.push_back(std::exp(a * lp));
    for (cplx b : prm.lower) out.lower.push_back(std::exp(b * lp));
    return out;
}

cplx deformed_argument(const f_params& prm, double p, cplx z) {
    return z * std::pow(1.0 - p, 1 + prm.s() - prm.r());
}

}  // namespace qconf
