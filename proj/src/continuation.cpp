#include "qconf/continuation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <boost/numeric/odeint.hpp>

namespace qconf {

namespace {

using poly_matrix = std::vector<std::vector<polynomial>>;

poly_matrix identity_poly(int J) {
    poly_matrix M(J, std::vector<polynomial>(J));
    for (int i = 0; i < J; ++i) M[i][i] = polynomial::constant(1.0);
    return M;
}

poly_matrix multiply(const poly_matrix& A, const poly_matrix& B) {
    int J = int(A.size());
    poly_matrix C(J, std::vector<polynomial>(J));
    for (int i = 0; i < J; ++i)
        for (int k = 0; k < J; ++k) {
            if (A[i][k].is_zero()) continue;
            for (int j = 0; j < J; ++j)
                if (!B[k][j].is_zero()) C[i][j] = C[i][j] + A[i][k] * B[k][j];
        }
    return C;
}

bool near_zero(const polynomial& p, cplx x) {
    double scale = 0.0, xp = 1.0;
    for (auto c : p.coefficients) {
        scale += std::abs(c) * xp;
        xp *= std::abs(x);
    }
    return scale == 0.0 || std::abs(p(x)) <= 1e-12 * scale;
}

}  // namespace

double wrap_angle(double a) {
    double r = std::fmod(a, 2.0 * pi);
    if (r < 0) r += 2.0 * pi;
    return r;
}

double angular_distance(double d, const std::vector<double>& angles) {
    double best = std::numeric_limits<double>::infinity();
    for (double a : angles) {
        double diff = wrap_angle(d - a);
        best = std::min(best, std::min(diff, 2.0 * pi - diff));
    }
    return best;
}

section_system::section_system(const recurrence& rec, std::vector<cplx> h, section_options opt)
    : rec_(rec), opt_(std::move(opt)), h_(std::move(h)) {
    if (rec_.span() < 1) rec_.p.push_back(polynomial());
    if (rec_.p[0].is_zero()) fail(error_kind::degenerate_parameter, "recurrence with vanishing leading polynomial");
    J_ = rec_.span();
    const int beta = opt_.beta, l = opt_.l;
    if (beta < 1 || l < 0 || l >= beta) fail(error_kind::argument, "invalid section parameters");
    const double q = rec_.q;
    if (rec_.q_type && opt_.weight == borel_weight::gamma)
        fail(error_kind::argument, "Gamma weights apply to differential recurrences");
    if (!rec_.q_type && (opt_.weight == borel_weight::q_ramified || opt_.weight == borel_weight::rz))
        fail(error_kind::argument, "q weights apply to q-difference recurrences");
    for (auto& k : opt_.levels)
        if (!(rational(beta) / k).is_integer()) fail(error_kind::argument, "beta / level is not an integer");

    // substitution m = l + n beta - t, expressed in the section variable
    auto at_block = [&](const polynomial& p, int t) {
        if (!rec_.q_type) return p.substitute_affine(double(beta), double(l - t));
        return p.substitute_affine(std::pow(q, double(l - t)), 0.0);
    };

    poly_matrix N = identity_poly(J_);
    polynomial D = polynomial::constant(1.0);
    for (int t = 0; t < beta; ++t) {
        poly_matrix M(J_, std::vector<polynomial>(J_));
        for (int j = 1; j <= J_; ++j) M[0][j - 1] = cplx(-1.0) * at_block(rec_.p[j], t);
        polynomial p0 = at_block(rec_.p[0], t);
        for (int i = 1; i < J_; ++i) M[i][i - 1] = p0;
        N = multiply(N, M);
        D = D * p0;
    }
    polynomial ratio = polynomial::constant(1.0);
    switch (opt_.weight) {
        case borel_weight::none: break;
        case borel_weight::gamma:
            for (auto& k : opt_.levels) {
                int e = int((rational(beta) / k).num());
                for (int t = 1; t <= e; ++t) ratio = ratio * polynomial(std::vector<cplx>{double(t - e), double(e)});
            }
            break;
        case borel_weight::q_ramified:
            for (auto& k : opt_.levels) {
                int e = int((rational(beta) / k).num());
                double kd = k.to_double();
                double Qk = std::pow(q, kd);
                for (int t = 1; t <= e; ++t)
                    ratio = ratio * polynomial(std::vector<cplx>{-1.0 / (Qk - 1.0),
                                                                 std::pow(q, kd * t - beta) / (Qk - 1.0)});
            }
            break;
        case borel_weight::rz:
            ratio = polynomial::monomial(beta, std::pow(q, -double(beta) * (beta + 1) / 2.0));
            break;
    }
    D_ = ratio * D;
    N_ = N;

    // last index touched by the right-hand side or by a zero of p_0
    int special = -1;
    for (int m = 0; m < int(rec_.rhs.size()); ++m)
        if (rec_.rhs[m] != cplx(0.0)) special = m;
    {
        const auto& p0 = rec_.p[0];
        double lead = std::abs(p0.coefficients.back());
        double bound = 1.0;
        for (auto c : p0.coefficients) bound = std::max(bound, 1.0 + std::abs(c) / lead);
        int mmax = rec_.q_type ? int(std::ceil(std::log(bound) / std::log(q))) + 1 : int(std::ceil(bound)) + 1;
        mmax = std::min(mmax, 100000);
        for (int m = 0; m <= mmax; ++m)
            if (near_zero(p0, rec_.nu(m))) special = std::max(special, m);
    }
    n_direct_ = special < l ? 0 : (special - l + beta - 1) / beta;

    // operator coefficients of the generating-function equation
    A_ = D_.degree();
    for (auto& row : N_)
        for (auto& e : row) A_ = std::max(A_, e.degree());
    d_.assign(A_ + 1, 0.0);
    for (int a = 0; a <= D_.degree(); ++a) d_[a] = D_[a];
    E_.assign(A_ + 1, Eigen::MatrixXcd::Zero(J_, J_));
    for (int i = 0; i < J_; ++i)
        for (int j = 0; j < J_; ++j) {
            polynomial e = rec_.q_type ? N_[i][j] : N_[i][j].substitute_affine(1.0, 1.0);
            for (int a = 0; a <= e.degree(); ++a)
                E_[a](i, j) = e[a] * (rec_.q_type ? std::pow(q, double(beta) * a) : 1.0);
        }

    extend(std::max(n_direct_ + 1, 64));
    Rn_.clear();
    for (int n = 0; n <= n_direct_; ++n) {
        Eigen::VectorXcd r = D_(nu(n)) * V_[n];
        if (n > 0) {
            Eigen::MatrixXcd Nn(J_, J_);
            for (int i = 0; i < J_; ++i)
                for (int j = 0; j < J_; ++j) Nn(i, j) = N_[i][j](nu(n));
            r -= Nn * V_[n - 1];
        }
        Rn_.push_back(r);
    }

    double dA = std::abs(d_[A_]);
    if (dA > 1e-300) {
        Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(E_[A_], false);
        double scale = std::max(1e-300, E_[A_].norm());
        for (int i = 0; i < J_; ++i) {
            cplx lam = es.eigenvalues()[i];
            if (std::abs(lam) > 1e-13 * scale) singular_.push_back(d_[A_] / lam);
        }
    }
    if (!singular_.empty()) {
        radius_ = std::numeric_limits<double>::infinity();
        for (auto x : singular_) radius_ = std::min(radius_, std::abs(x));
    } else {
        double worst = 0.0;
        for (int n = 40; n <= 60; ++n) {
            double v = coefficient_vector(n).norm();
            if (v > 0) worst = std::max(worst, std::pow(v, 1.0 / n));
        }
        radius_ = worst > 0 ? 1.0 / worst : std::numeric_limits<double>::infinity();
    }
}

double section_system::step_ratio() const { return std::pow(rec_.q, double(opt_.beta)); }

cplx section_system::nu(int n) const {
    return rec_.q_type ? cplx(std::pow(rec_.q, double(opt_.beta) * n)) : cplx(double(n));
}

cplx section_system::h_at(int m) const {
    if (m < 0) return 0.0;
    while (int(h_.size()) <= m) {
        int k = int(h_.size());
        cplx acc = rec_.r(k);
        for (int j = 1; j <= J_ && j <= k; ++j) acc -= rec_.p_at(j, k) * h_[k - j];
        cplx c = rec_.p_at(0, k);
        if (near_zero(rec_.p[0], rec_.nu(k))) {
            if (std::abs(acc) > 1e-10 * std::max(1.0, std::abs(h_.empty() ? 1.0 : h_.back())))
                fail(error_kind::resonance, "resonance at n = " + std::to_string(k));
            h_.push_back(0.0);
        } else {
            h_.push_back(acc / c);
        }
    }
    return h_[m];
}

double section_system::log_weight(int n) const {
    const int beta = opt_.beta;
    double acc = 0.0;
    switch (opt_.weight) {
        case borel_weight::none: break;
        case borel_weight::gamma:
            for (auto& k : opt_.levels) acc += std::lgamma(1.0 + double(n) * beta / k.to_double());
            break;
        case borel_weight::q_ramified:
            for (auto& k : opt_.levels) {
                int e = int((rational(beta) / k).num());
                acc += log_q_factorial(n * e, std::pow(rec_.q, k.to_double()));
            }
            break;
        case borel_weight::rz: {
            double m = double(n) * beta;
            acc = m * (m - 1.0) / 2.0 * std::log(rec_.q);
            break;
        }
    }
    return acc;
}

void section_system::extend(int n) const {
    while (int(V_.size()) <= n) {
        int k = int(V_.size());
        Eigen::VectorXcd v(J_);
        if (k <= n_direct_) {
            double lw = log_weight(k);
            for (int c = 0; c < J_; ++c) v(c) = h_at(opt_.l + k * opt_.beta - c) * std::exp(-lw);
        } else {
            cplx x = nu(k);
            Eigen::MatrixXcd Nn(J_, J_);
            for (int i = 0; i < J_; ++i)
                for (int j = 0; j < J_; ++j) Nn(i, j) = N_[i][j](x);
            cplx den = D_(x);
            if (den == cplx(0.0)) fail(error_kind::resonance, "section recurrence degenerates at n = " + std::to_string(k));
            v = (Nn * V_[k - 1]) * (1.0 / den);
        }
        if (!v.allFinite()) fail(error_kind::range, "section coefficients overflow at n = " + std::to_string(k));
        V_.push_back(v);
    }
}

Eigen::VectorXcd section_system::coefficient_vector(int n) const {
    std::lock_guard<std::mutex> lock(mu_);
    extend(n);
    return V_[n];
}

Eigen::MatrixXcd section_system::C(int a, cplx x) const {
    return d_[a] * Eigen::MatrixXcd::Identity(J_, J_) - x * E_[a];
}

Eigen::VectorXcd section_system::R(cplx x) const {
    Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(J_);
    cplx xp = 1.0;
    for (auto& r : Rn_) {
        acc += xp * r;
        xp *= x;
    }
    return acc;
}

std::vector<Eigen::VectorXcd> section_system::series_state(cplx x, int derivs) const {
    std::vector<Eigen::VectorXcd> out(std::max(derivs, 1), Eigen::VectorXcd::Zero(J_));
    double ax = std::abs(x);
    if (ax >= radius_) fail(error_kind::domain, "series evaluated outside its disk");
    int quiet = 0;
    cplx xp = 1.0;
    for (int n = 0; n < 200000; ++n) {
        Eigen::VectorXcd v = coefficient_vector(n) * xp;
        double w = rec_.q_type ? 1.0 : double(n);
        double wa = 1.0;
        for (int a = 0; a < int(out.size()); ++a) {
            out[a] += wa * v;
            wa *= w;
        }
        double term = v.norm() * std::max(1.0, std::pow(double(n), out.size() - 1));
        double total = out[0].norm() + 1e-300;
        quiet = term < 1e-17 * total ? quiet + 1 : 0;
        if (quiet >= 4 && n > 8) return out;
        xp *= x;
    }
    fail(error_kind::range, "series did not converge");
}

Eigen::VectorXcd section_system::q_step(cplx x, const std::vector<Eigen::VectorXcd>& prev) const {
    Eigen::VectorXcd acc = R(x);
    for (int a = 0; a < A_; ++a) acc -= C(a, x) * prev[a];
    auto lu = C(A_, x).fullPivLu();
    if (!lu.isInvertible()) fail(error_kind::pole, "q-iteration meets a singular point");
    return lu.solve(acc);
}

growth_fit ray_function::growth(double k, double t_max) const {
    std::vector<double> ts;
    for (int i = 0; i < 32; ++i) ts.push_back(t_max * std::pow(10.0, -3.0 + 3.0 * i / 31.0));
    auto vals = at_sorted(ts);
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::vector<double> ly;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        if (!std::isfinite(std::abs(vals[i]))) fail(error_kind::growth, "non-finite value while fitting growth");
        double x = std::pow(ts[i], k);
        double y = std::log(std::abs(vals[i]) + 1e-300);
        ly.push_back(y);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    double n = double(ts.size());
    double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    growth_fit g;
    g.L = std::max(0.0, slope);
    double logJ = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < ts.size(); ++i) logJ = std::max(logJ, ly[i] - g.L * std::pow(ts[i], k));
    g.J = std::exp(logJ);
    if (!std::isfinite(g.L) || !std::isfinite(g.J)) fail(error_kind::growth, "growth fit failed");
    return g;
}

namespace {

class series_ray : public ray_function {
public:
    series_ray(power_series s, double d) : ray_function(d), s_(std::move(s)) {}
    std::vector<cplx> at_sorted(const std::vector<double>& ts) const override {
        std::vector<cplx> out;
        for (double t : ts) out.push_back(s_.evaluate(sector_point{std::log(t), direction()}));
        return out;
    }

private:
    power_series s_;
};

class function_ray : public ray_function {
public:
    function_ray(std::function<cplx(cplx)> f, double d, double hw) : ray_function(d), f_(std::move(f)), hw_(hw) {}
    std::vector<cplx> at_sorted(const std::vector<double>& ts) const override {
        std::vector<cplx> out;
        for (double t : ts) out.push_back(f_(std::polar(t, direction())));
        return out;
    }
    double analytic_halfwidth() const override { return hw_; }

private:
    std::function<cplx(cplx)> f_;
    double hw_;
};

struct ode_rhs {
    const section_system* sys;
    double beta;
    double d;
    void operator()(const std::vector<double>& y, std::vector<double>& dy, double u) const {
        int A = sys->order(), J = sys->dim();
        cplx x = std::polar(std::exp(beta * u), beta * d);
        Eigen::VectorXcd acc = sys->R(x);
        for (int a = 0; a < A; ++a) {
            Eigen::VectorXcd ya(J);
            for (int c = 0; c < J; ++c) ya(c) = cplx(y[2 * (a * J + c)], y[2 * (a * J + c) + 1]);
            acc -= sys->C(a, x) * ya;
        }
        Eigen::VectorXcd top = sys->C(A, x).partialPivLu().solve(acc);
        for (int a = 0; a < A; ++a)
            for (int c = 0; c < J; ++c) {
                cplx v = a + 1 < A ? cplx(y[2 * ((a + 1) * J + c)], y[2 * ((a + 1) * J + c) + 1]) : top(c);
                dy[2 * (a * J + c)] = beta * v.real();
                dy[2 * (a * J + c) + 1] = beta * v.imag();
            }
    }
};

class system_ray : public ray_function {
public:
    system_ray(std::shared_ptr<const section_system> sys, double d) : ray_function(d), sys_(std::move(sys)) {
        std::vector<double> sing;
        for (auto x : sys_->singular_points())
            for (int k = 0; k < sys_->beta(); ++k) sing.push_back((std::arg(x) + 2.0 * pi * k) / sys_->beta());
        hw_ = sing.empty() ? pi : angular_distance(d, sing);
        if (hw_ < 1e-9)
            fail(sys_->q_type() ? error_kind::spiral_collision : error_kind::singular_direction,
                 "continuation ray meets a singularity of the Borel-plane equation");
    }

    double analytic_halfwidth() const override { return hw_; }

    std::vector<cplx> at_sorted(const std::vector<double>& ts) const override {
        return sys_->q_type() ? q_values(ts) : ode_values(ts);
    }

private:
    cplx x_of(double t) const {
        double b = sys_->beta();
        return std::polar(std::pow(t, b), b * direction());
    }

    std::vector<cplx> ode_values(const std::vector<double>& ts) const {
        namespace odeint = boost::numeric::odeint;
        std::vector<cplx> out;
        const double b = sys_->beta();
        const double R = sys_->radius();
        const int A = sys_->order(), J = sys_->dim();
        bool started = false;
        std::vector<double> y;
        double u = 0.0;
        ode_rhs rhs{sys_.get(), b, direction()};
        auto stepper = odeint::make_controlled(1e-15, 1e-13, 0.05, odeint::runge_kutta_fehlberg78<std::vector<double>>());
        for (double t : ts) {
            cplx x = x_of(t);
            if (std::abs(x) <= 0.5 * R) {
                out.push_back(sys_->series_value(x)(0));
                continue;
            }
            if (A == 0) {
                auto lu = sys_->C(0, x).fullPivLu();
                out.push_back(lu.solve(sys_->R(x))(0));
                continue;
            }
            if (!started) {
                double t0 = std::pow(0.5 * R, 1.0 / b);
                auto st = sys_->series_state(x_of(t0), A);
                y.assign(2 * A * J, 0.0);
                for (int a = 0; a < A; ++a)
                    for (int c = 0; c < J; ++c) {
                        y[2 * (a * J + c)] = st[a](c).real();
                        y[2 * (a * J + c) + 1] = st[a](c).imag();
                    }
                u = std::log(t0);
                started = true;
            }
            double u1 = std::log(t);
            if (u1 > u) {
                odeint::integrate_adaptive(stepper, std::cref(rhs), y, u, u1, std::min(0.01, u1 - u));
                u = u1;
            }
            cplx v(y[0], y[1]);
            if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
                fail(error_kind::growth, "continuation overflowed along the ray");
            out.push_back(v);
        }
        return out;
    }

    std::vector<cplx> q_values(const std::vector<double>& ts) const {
        std::vector<cplx> out;
        const double Q = sys_->step_ratio();
        const double R = sys_->radius();
        const int A = sys_->order();
        for (double t : ts) {
            cplx x = x_of(t);
            if (std::abs(x) <= 0.5 * R) {
                out.push_back(sys_->series_value(x)(0));
                continue;
            }
            int K = A - 1 + int(std::ceil(std::log(std::abs(x) / (0.5 * R)) / std::log(Q)));
            cplx xb = x * std::pow(Q, -double(K));
            std::vector<Eigen::VectorXcd> win;
            for (int a = 0; a < A; ++a) win.push_back(sys_->series_value(xb * std::pow(Q, double(a))));
            for (int s = 0; s + A <= K; ++s) {
                cplx xs = xb * std::pow(Q, double(s));
                Eigen::VectorXcd next = sys_->q_step(xs, win);
                win.erase(win.begin());
                win.push_back(next);
            }
            cplx v = A == 0 ? cplx(sys_->C(0, x).fullPivLu().solve(sys_->R(x))(0)) : win.back()(0);
            if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
                fail(error_kind::growth, "q-continuation overflowed along the ray");
            out.push_back(v);
        }
        return out;
    }

    std::shared_ptr<const section_system> sys_;
    double hw_ = pi;
};

}  // namespace

ray_handle make_series_ray(power_series s, double d) { return std::make_shared<series_ray>(std::move(s), d); }

ray_handle make_function_ray(std::function<cplx(cplx)> f, double d, double halfwidth) {
    return std::make_shared<function_ray>(std::move(f), d, halfwidth);
}

ray_handle make_system_ray(std::shared_ptr<const section_system> sys, double d) {
    return std::make_shared<system_ray>(std::move(sys), d);
}

}  // namespace qconf
