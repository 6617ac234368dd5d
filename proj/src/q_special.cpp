#include "qconf/q_special.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace qconf {

namespace {

void check_q(double q) {
    if (!(q > 1.0)) fail(error_kind::domain, "q must exceed 1, got " + std::to_string(q));
    if (q < q_floor)
        fail(error_kind::range, "q = " + std::to_string(q) + " is below the supported floor 1.001; use the limit formulas");
}

constexpr double tiny = 1e-17;

// Theta series terms sum_n q^{-n(n+1)/2} z^n, scaled by the largest term.
// weight_n multiplies each term (used for the delta derivative).
template <class W>
scaled_value theta_sum(cplx z, double q, W weight, double* abs_sum = nullptr) {
    double lq = std::log(q);
    double lz = std::log(std::abs(z));
    double th = std::arg(z);
    auto logmag = [&](double n) { return -n * (n + 1) / 2 * lq + n * lz; };
    double npeak = lz / lq - 0.5;
    long n0 = std::lround(npeak);
    double top = std::max(logmag(double(n0)), std::max(logmag(double(n0 - 1)), logmag(double(n0 + 1))));
    cplx acc = 0.0;
    double mag = 0.0;
    auto add = [&](long n) {
        double lm = logmag(double(n)) - top;
        double a = std::exp(lm);
        acc += weight(n) * std::polar(a, double(n) * th);
        mag += a * std::max(1.0, std::abs(weight(n)));
        return a;
    };
    add(n0);
    for (long n = n0 + 1;; ++n)
        if (add(n) < tiny * 1e-3 && n > n0 + 2) break;
    for (long n = n0 - 1;; --n)
        if (add(n) < tiny * 1e-3 && n < n0 - 2) break;
    if (abs_sum) *abs_sum = mag;
    return {acc, top};
}

}  // namespace

cplx scaled_value::value() const { return mantissa * std::exp(log_scale); }

scaled_value theta_scaled(cplx z, double q) {
    check_q(q);
    if (z == cplx(0.0)) fail(error_kind::domain, "theta is undefined at z = 0");
    return theta_sum(z, q, [](long) { return 1.0; });
}

cplx theta(cplx z, double q, eval_mode mode) {
    check_q(q);
    if (z == cplx(0.0)) fail(error_kind::domain, "theta is undefined at z = 0");
    if (mode == eval_mode::series) return theta_scaled(z, q).value();
    // prod (1 - q^{-n-1})(1 + q^{-n-1} z)(1 + q^{-n} / z), summed as logs
    cplx acc = 0.0;
    for (int n = 0;; ++n) {
        double qn1 = std::pow(q, -double(n) - 1.0);
        double qn = std::pow(q, -double(n));
        acc += std::log1p(-qn1) + std::log(1.0 + qn1 * z) + std::log(1.0 + qn / z);
        if (qn1 * std::max(1.0, std::abs(z)) < tiny && qn / std::abs(z) < tiny) break;
    }
    return std::exp(acc);
}

// Theta(a)/Theta(b) from the triple product, summed as logs. The bilateral
// series cancels badly off the positive axis once q is near 1.
cplx theta_ratio(cplx a, cplx b, double q) {
    check_q(q);
    if (a == cplx(0.0) || b == cplx(0.0)) fail(error_kind::domain, "theta is undefined at z = 0");
    cplx acc = 0.0;
    double closest = INFINITY;
    for (int n = 0;; ++n) {
        double qn1 = std::pow(q, -double(n) - 1.0);
        double qn = std::pow(q, -double(n));
        cplx fb1 = 1.0 + qn1 * b, fb2 = 1.0 + qn / b;
        closest = std::min({closest, std::abs(fb1), std::abs(fb2)});
        acc += std::log(1.0 + qn1 * a) + std::log(1.0 + qn / a) - std::log(fb1) - std::log(fb2);
        double big = std::max(std::abs(a), std::abs(b)), small = std::min(std::abs(a), std::abs(b));
        if (qn1 * std::max(1.0, big) < tiny && qn / small < tiny) break;
    }
    if (closest < 1e-13) fail(error_kind::pole, "theta vanishes at the denominator point (on -q^Z)");
    return std::exp(acc);
}

cplx log_eq_exp(cplx z, double q) {
    check_q(q);
    cplx acc = 0.0;
    double c = (q - 1.0) / q;
    for (int n = 0; n < 1000000; ++n) {
        cplx t = c * z;
        acc += std::log(1.0 + t);
        if (std::abs(t) < tiny) break;
        c /= q;
    }
    return acc;
}

cplx eq_exp(cplx z, double q, eval_mode mode) {
    if (q > 0.0 && q < 1.0) {
        double p = q;
        if (mode == eval_mode::product) {
            cplx acc = 1.0;
            double c = 1.0 - p;
            for (int n = 0; n < 1000000; ++n) {
                cplx f = 1.0 - c * z;
                if (f == cplx(0.0)) fail(error_kind::pole, "e_p has a pole at this point");
                acc /= f;
                if (std::abs(c * z) < tiny) break;
                c *= p;
            }
            return acc;
        }
        if (std::abs(z) * (1.0 - p) >= 1.0) fail(error_kind::domain, "e_p series diverges for |z| >= 1/(1-p)");
        cplx acc = 1.0, term = 1.0;
        for (int n = 1; n < 100000; ++n) {
            term *= z * (1.0 - p) / (1.0 - std::pow(p, n));
            acc += term;
            if (std::abs(term) < tiny * std::abs(acc)) break;
        }
        return acc;
    }
    check_q(q);
    if (mode == eval_mode::product) {
        cplx acc = 1.0;
        double c = (q - 1.0) / q;
        for (int n = 0; n < 1000000; ++n) {
            cplx t = c * z;
            acc *= 1.0 + t;
            if (std::abs(t) < tiny) break;
            c /= q;
        }
        return acc;
    }
    cplx acc = 1.0, term = 1.0;
    for (int n = 1; n < 1000000; ++n) {
        term *= z / q_bracket(n, q);
        acc += term;
        if (std::abs(term) < tiny * std::abs(acc) && std::abs(z) < q_bracket(n, q)) break;
    }
    return acc;
}

cplx lq(cplx z, double q) {
    check_q(q);
    if (z == cplx(0.0)) fail(error_kind::domain, "l_q is undefined at z = 0");
    double mag = 0.0;
    auto den = theta_sum(z, q, [](long) { return 1.0; }, &mag);
    if (std::abs(den.mantissa) < 1e-13 * mag) fail(error_kind::pole, "l_q has a pole on -q^Z");
    auto num = theta_sum(z, q, [](long n) { return double(n); });
    return num.mantissa / den.mantissa;
}

cplx lambda_char(cplx a, cplx z, double q) {
    if (a == cplx(0.0)) fail(error_kind::argument, "Lambda_{q,a} needs a != 0");
    if (z == cplx(0.0)) fail(error_kind::domain, "Lambda_{q,a} is undefined at z = 0");
    return theta_ratio(z, z / a, q);
}

matrix lambda_matrix(const matrix& A, cplx z, double q) {
    if (A.rows() != A.cols()) fail(error_kind::argument, "Lambda_{q,A} needs a square matrix");
    Eigen::ComplexEigenSolver<matrix> es(A, true);
    auto ev = es.eigenvalues();
    double norm = std::max(1.0, A.norm());
    for (int i = 0; i < ev.size(); ++i) {
        if (std::abs(ev[i]) < 1e-12 * norm) fail(error_kind::argument, "Lambda_{q,A} needs an invertible A");
        for (int j = i + 1; j < ev.size(); ++j)
            if (std::abs(ev[i] - ev[j]) <= 1e-8 * norm)
                fail(error_kind::unsupported, "Lambda_{q,A} needs separated eigenvalues (diagonalizable A)");
    }
    matrix P = es.eigenvectors();
    Eigen::JacobiSVD<matrix> svd(P);
    auto sv = svd.singularValues();
    if (sv(sv.size() - 1) < 1e-8 * sv(0)) fail(error_kind::unsupported, "A is numerically defective");
    matrix D = matrix::Zero(A.rows(), A.cols());
    for (int i = 0; i < ev.size(); ++i) D(i, i) = lambda_char(ev[i], z, q);
    return P * D * P.inverse();
}

matrix q_exp_matrix(const matrix& A, double q) {
    check_q(q);
    if (A.rows() != A.cols()) fail(error_kind::argument, "e_q(A) needs a square matrix");
    matrix sum = matrix::Identity(A.rows(), A.cols());
    matrix term = sum;
    for (int n = 1; n < 100000; ++n) {
        term = term * A / q_bracket(n, q);
        sum += term;
        if (!term.allFinite() || !sum.allFinite()) fail(error_kind::range, "e_q(A) overflowed at term " + std::to_string(n));
        if (term.norm() < 1e-16 * std::max(1.0, sum.norm()) && A.norm() < q_bracket(n, q)) return sum;
    }
    fail(error_kind::range, "e_q(A) did not converge");
}

cplx pochhammer(cplx a, double p, int n) {
    if (n < 0) fail(error_kind::argument, "finite Pochhammer needs n >= 0");
    cplx acc = 1.0;
    double pk = 1.0;
    for (int k = 0; k < n; ++k) {
        acc *= 1.0 - a * pk;
        pk *= p;
    }
    return acc;
}

cplx pochhammer_inf(cplx a, double p) {
    if (!(p > 0.0 && p < 1.0)) fail(error_kind::domain, "(a;p)_inf needs 0 < p < 1");
    cplx acc = 1.0;
    double pk = 1.0;
    for (int k = 0; k < 10000000; ++k) {
        cplx t = a * pk;
        acc *= 1.0 - t;
        if (std::abs(t) < tiny) break;
        pk *= p;
    }
    return acc;
}

cplx log_pochhammer_inf(cplx a, double p) {
    if (!(p > 0.0 && p < 1.0)) fail(error_kind::domain, "(a;p)_inf needs 0 < p < 1");
    cplx acc = 0.0;
    double pk = 1.0;
    for (int k = 0; k < 10000000; ++k) {
        cplx t = a * pk;
        if (t == cplx(1.0)) fail(error_kind::parameter, "(a;p)_inf vanishes: a p^k = 1");
        acc += std::log(1.0 - t);
        if (std::abs(t) < tiny) break;
        pk *= p;
    }
    return acc;
}

}  // namespace qconf
