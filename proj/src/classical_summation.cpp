#include "qconf/classical_summation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "ladder_engine.hpp"

namespace qconf {

namespace detail {

std::vector<cplx> polynomial_roots(const polynomial& p) {
    int n = p.degree();
    if (n < 1) return {};
    Eigen::MatrixXcd comp = Eigen::MatrixXcd::Zero(n, n);
    cplx lead = p[std::size_t(n)];
    for (int i = 0; i < n; ++i) comp(0, i) = -p[std::size_t(n - 1 - i)] / lead;
    for (int i = 1; i < n; ++i) comp(i, i - 1) = 1.0;
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(comp, false);
    std::vector<cplx> out(es.eigenvalues().data(), es.eigenvalues().data() + n);
    return out;
}

std::optional<cplx> optimal_truncation(const std::vector<cplx>& c, cplx x, int n_min) {
    cplx sum = 0.0, xp = 1.0;
    double prev = std::numeric_limits<double>::infinity();
    int rising = 0, quiet = 0;
    for (std::size_t n = 0; n < c.size(); ++n) {
        cplx term = c[n] * xp;
        sum += term;
        double a = std::abs(term);
        if (int(n) > n_min) {
            quiet = a <= 1e-17 * std::abs(sum) ? quiet + 1 : 0;
            if (quiet >= 2) return sum;
            rising = a > prev ? rising + 1 : 0;
            if (rising >= 3) return std::nullopt;
        }
        if (a > 0) prev = a;
        xp *= x;
    }
    return std::nullopt;
}

double quantize_step(double h) {
    const double top = 0.08;
    if (h >= top) return top;
    return top * std::pow(2.0, -std::ceil(std::log2(top / h)));
}

}  // namespace detail

power_series formal_borel(const power_series& s, rational k) {
    if (k <= rational(0)) fail(error_kind::argument, "Borel order must be positive");
    power_series out = s;
    double kd = k.to_double();
    for (std::size_t n = 0; n < out.coefficients.size(); ++n) {
        double e = double(n) / s.ram_index / kd;
        out.coefficients[n] *= std::exp(-std::lgamma(1.0 + e));
    }
    return out;
}

summation_ladder build_ladder(const newton_polygon_t& polygon, const std::vector<int>& coefficient_degrees,
                              std::optional<int> k_r_choice) {
    summation_ladder L;
    L.positive_slopes = polygon.positive_slopes();
    std::sort(L.positive_slopes.begin(), L.positive_slopes.end());
    L.positive_slopes.erase(std::unique(L.positive_slopes.begin(), L.positive_slopes.end()), L.positive_slopes.end());
    L.d0 = 2;
    for (int deg : coefficient_degrees) L.d0 = std::max(L.d0, deg);
    if (L.positive_slopes.empty()) {
        if (k_r_choice) fail(error_kind::argument, "no positive slope: a top level cannot be chosen");
        return L;
    }
    rational floor_level = std::max(L.positive_slopes.back(), rational(L.d0));
    int minimal = int(floor_level.ceil());
    if (rational(minimal) == floor_level) ++minimal;
    if (k_r_choice) {
        if (rational(*k_r_choice) <= floor_level)
            fail(error_kind::argument, "k_r = " + std::to_string(*k_r_choice) + " must exceed " + floor_level.str());
        L.top_level = *k_r_choice;
    } else {
        L.top_level = minimal;
    }
    std::vector<rational> ks = L.positive_slopes;
    ks.push_back(rational(L.top_level));
    for (std::size_t i = 0; i < ks.size(); ++i) {
        rational inv = i + 1 < ks.size() ? ks[i].inverse() - ks[i + 1].inverse() : ks[i].inverse();
        L.kappa.push_back(inv.inverse());
    }
    std::int64_t beta = 1;
    for (auto& kap : L.kappa) {
        int a = 1;
        while (kap * rational(a) < rational(L.d0)) ++a;
        L.alpha.push_back(a);
        for (int t = 0; t < a; ++t) L.kappa_tilde.push_back(kap * rational(a));
        beta = std::lcm(beta, (kap * rational(a)).num());
    }
    L.beta = int(beta);
    return L;
}

summation_ladder build_ladder(const linear_operator& op, std::optional<int> k_r_choice) {
    std::vector<int> degs;
    for (auto& b : op.coefficients) degs.push_back(std::max(0, b.degree()));
    return build_ladder(newton_polygon(op), degs, k_r_choice);
}

const char* to_string(direction_source s) { return s == direction_source::leading_root ? "leading-root" : "borel-pole"; }

double direction_set::distance(double d) const { return angular_distance(d, directions); }

namespace {

recurrence homogeneous_recurrence(const linear_operator& op) {
    linear_operator h = op;
    h.rhs.reset();
    return make_recurrence(h);
}

void add_direction(direction_set& set, double a, direction_source src) {
    a = wrap_angle(a);
    for (std::size_t i = 0; i < set.directions.size(); ++i) {
        double diff = std::abs(set.directions[i] - a);
        if (std::min(diff, 2 * pi - diff) < 1e-9) return;
    }
    set.directions.push_back(a);
    set.provenance.push_back(src);
}

void sort_directions(direction_set& set) {
    std::vector<std::size_t> idx(set.directions.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return set.directions[a] < set.directions[b]; });
    direction_set out;
    for (auto i : idx) {
        out.directions.push_back(set.directions[i]);
        out.provenance.push_back(set.provenance[i]);
    }
    set = out;
}

std::vector<double> borel_pole_directions(const section_system& sys) {
    std::vector<double> out;
    for (auto x : sys.singular_points())
        for (int k = 0; k < sys.beta(); ++k) out.push_back((std::arg(x) + 2.0 * pi * k) / sys.beta());
    return out;
}

}  // namespace

direction_set singular_directions(const linear_operator& op, const summation_ladder& ladder) {
    direction_set set;
    if (ladder.convergent()) return set;
    for (auto r : detail::polynomial_roots(op.coefficients.back()))
        if (std::abs(r) > 1e-12) add_direction(set, std::arg(r), direction_source::leading_root);
    recurrence rec = homogeneous_recurrence(op);
    for (int l = 0; l < ladder.beta; ++l) {
        section_options o;
        o.beta = ladder.beta;
        o.l = l;
        o.weight = op.kind == op_kind::differential ? borel_weight::gamma : borel_weight::q_ramified;
        o.levels = ladder.kappa_tilde;
        section_system sys(rec, {}, o);
        for (double a : borel_pole_directions(sys)) add_direction(set, a, direction_source::borel_pole);
    }
    sort_directions(set);
    return set;
}

continued_function borel_continuation(const power_series& s, const linear_operator& borel_op, double d, double k) {
    if (s.ram_index != 1) fail(error_kind::unsupported, "continuation of ramified Borel series");
    section_options o;
    auto sys = std::make_shared<section_system>(make_recurrence(borel_op), s.coefficients, o);
    continued_function out;
    out.ray = make_system_ray(sys, d);
    out.growth = out.ray->growth(k, 20.0);
    return out;
}

cplx laplace_along_ray(const ray_function& f, rational k, double d, const sector_point& z) {
    const double kd = k.to_double();
    double phi = z.argument - d;
    double c = std::cos(kd * phi);
    if (std::abs(phi) >= pi / (2.0 * kd) || c < 1e-6)
        fail(error_kind::domain, "z lies outside the Laplace sector around the ray");
    double zk = std::exp(kd * z.log_modulus);
    growth_fit g = f.growth(kd, z.modulus() * std::pow(80.0 / c, 1.0 / kd));
    if (g.L * zk >= 0.9 * c)
        fail(error_kind::domain, "integrability fails: |z|^k >= 1/L with fitted L = " + std::to_string(g.L));
    double rate = c - g.L * zk;
    double u_lo = z.log_modulus + std::log(1e-19) / kd;
    double u_hi = z.log_modulus + std::log(50.0 / rate) / kd;
    auto integrate = [&](double h) {
        std::vector<double> ts;
        int n = int(std::ceil((u_hi - u_lo) / h));
        for (int i = 0; i <= n; ++i) ts.push_back(std::exp(u_lo + i * h));
        auto vals = f.at_sorted(ts);
        cplx acc = 0.0;
        for (int i = 0; i <= n; ++i) {
            cplx log_r = kd * cplx(std::log(ts[i]) - z.log_modulus, d - z.argument);
            cplx r = std::exp(log_r);
            acc += h * kd * r * std::exp(-r) * vals[i];
        }
        return acc;
    };
    double h = 0.1;
    cplx prev = integrate(h);
    for (int it = 0; it < 9; ++it) {
        h /= 2;
        cplx cur = integrate(h);
        if (std::abs(cur - prev) <= 1e-13 * std::abs(cur) + 1e-300) return cur;
        prev = cur;
    }
    return prev;
}

double summed_function::half_opening() const {
    if (passthrough_) return pi;
    return pi / (2.0 * ladder_.kappa_tilde.back().to_double());
}

bool summed_function::in_domain(const sector_point& z) const {
    if (passthrough_) return true;
    return std::abs(z.argument - d_) < half_opening();
}

std::shared_ptr<detail::lattice_engine> summed_function::engine_for(const section_data& sec, double h) const {
    std::lock_guard<std::mutex> lock(cache_->mu);
    auto key = std::make_pair(sec.l, long(std::lround(h * 1e12)));
    auto it = cache_->engines.find(key);
    if (it != cache_->engines.end()) return it->second;
    detail::lattice_params p;
    p.h = h;
    p.d = d_;
    p.base = sec.base;
    for (auto& kt : ladder_.kappa_tilde) {
        double k = kt.to_double();
        double lhk = std::log(h * k);
        p.levels.push_back({k, [lhk](cplx lr) { return lhk + lr - std::exp(lr); }});
    }
    const int beta = ladder_.beta;
    const double d = d_;
    auto formal = sec.formal;
    int n_min = sec.sys->direct_count() + sec.sys->dim();
    p.formal = [formal, beta, d, n_min](int j, double log_t) -> std::optional<cplx> {
        if (j >= int(formal.size()) || formal[j].empty()) return std::nullopt;
        cplx x = std::polar(std::exp(beta * log_t), beta * d);
        return detail::optimal_truncation(formal[j], x, n_min);
    };
    auto eng = std::make_shared<detail::lattice_engine>(std::move(p));
    cache_->engines.emplace(key, eng);
    return eng;
}

cplx summed_function::evaluate(const sector_point& z) const {
    if (passthrough_) {
        if (z.modulus() < 0.5 * direct_->radius()) return direct_->series_value(z.value())(0);
        return make_system_ray(direct_, z.argument)->at(z.modulus());
    }
    double phi = std::abs(z.argument - d_);
    double strip = half_opening() - phi;
    if (strip <= 1e-6)
        fail(error_kind::domain, "z outside the summation sector (|arg z - d| must stay below " +
                                     std::to_string(half_opening()) + ")");
    double h = 0.08;
    for (auto& kt : ladder_.kappa_tilde) h = std::min(h, pi / (2.0 * kt.to_double()) / 5.0);
    h = std::min({h, analytic_halfwidth_ / 5.0, strip / 5.0});
    h = detail::quantize_step(h);
    cplx acc = 0.0;
    cplx zv = z.value();
    for (auto& sec : sections_) acc += std::pow(zv, sec.l) * engine_for(sec, h)->evaluate(z);
    return acc;
}

summed_function multisum(const power_series& s, const linear_operator& op, double d) {
    summed_function out;
    out.d_ = d;
    out.ladder_ = build_ladder(op);
    if (s.ram_index != 1) fail(error_kind::unsupported, "summation of ramified series");
    recurrence rec = make_recurrence(op);
    if (out.ladder_.convergent()) {
        out.passthrough_ = true;
        out.direct_ = std::make_shared<section_system>(rec, s.coefficients, section_options{});
        return out;
    }
    direction_set dirs = singular_directions(op, out.ladder_);
    if (dirs.distance(d) < 1e-9)
        fail(error_kind::singular_direction, "direction " + std::to_string(d) + " is singular");
    const auto& kt = out.ladder_.kappa_tilde;
    const int beta = out.ladder_.beta;
    for (int l = 0; l < beta; ++l) {
        section_options o;
        o.beta = beta;
        o.l = l;
        o.weight = borel_weight::gamma;
        o.levels = kt;
        auto sys = std::make_shared<section_system>(rec, s.coefficients, o);
        bool zero = true;
        for (int n = 0; n <= sys->direct_count() + 1 && zero; ++n)
            if (sys->coefficient_vector(n).norm() != 0.0) zero = false;
        if (zero) continue;
        summed_function::section_data sec;
        sec.l = l;
        sec.sys = sys;
        sec.base = make_system_ray(sys, d);
        out.analytic_halfwidth_ = std::min(out.analytic_halfwidth_, sec.base->analytic_halfwidth());
        sec.formal.resize(kt.size());
        for (std::size_t j = 1; j < kt.size(); ++j) {
            for (int n = 0; n < 220; ++n) {
                cplx v;
                try {
                    v = sys->coefficient(n);
                } catch (const error&) {
                    break;
                }
                double lw = 0.0;
                for (std::size_t i = 0; i < j; ++i) lw += std::lgamma(1.0 + double(n) * beta / kt[i].to_double());
                cplx c = v * std::exp(lw);
                if (!std::isfinite(std::abs(c))) break;
                sec.formal[j].push_back(c);
            }
        }
        out.sections_.push_back(std::move(sec));
    }
    return out;
}

double stokes_offset(const linear_operator& op, double d_singular) {
    auto ladder = build_ladder(op);
    if (ladder.convergent()) return pi / 8.0;
    auto dirs = singular_directions(op, ladder);
    std::vector<double> others;
    for (double a : dirs.directions)
        if (angular_distance(d_singular, {a}) > 1e-9) others.push_back(a);
    double gap = others.empty() ? pi : angular_distance(d_singular, others);
    return std::min(pi / (8.0 * ladder.top_level), gap / 2.0);
}

cplx stokes_jump(const power_series& s, const linear_operator& op, double d_singular, const sector_point& z) {
    auto ladder = build_ladder(op);
    if (ladder.convergent()) return 0.0;
    auto dirs = singular_directions(op, ladder);
    if (dirs.distance(d_singular) > 1e-6)
        fail(error_kind::argument, "direction " + std::to_string(d_singular) + " is not a singular direction");
    double delta = stokes_offset(op, d_singular);
    auto plus = multisum(s, op, d_singular + delta);
    auto minus = multisum(s, op, d_singular - delta);
    if (!plus.in_domain(z) || !minus.in_domain(z))
        fail(error_kind::bracketing, "z is not inside both lateral sectors around the singular direction");
    return plus.evaluate(z) - minus.evaluate(z);
}

cplx classical_homogeneous(const linear_operator& op, const sector_point& z) {
    if (op.kind != op_kind::differential || op.basis != op_basis::delta || op.order() != 1)
        fail(error_kind::unsupported, "homogeneous solution only for first-order delta operators");
    const polynomial& b0 = op.coefficients[0];
    const polynomial& b1 = op.coefficients[1];
    if (b1.is_zero() || b0.degree() >= b1.degree())
        fail(error_kind::unsupported, "homogeneous solution is not normalisable at infinity");
    cplx zv = z.value();
    // s = z/u, ds = -z/u^2 du
    auto g = [&](double u) -> cplx {
        if (u <= 0.0) return 0.0;
        cplx s = zv / u;
        return b0(s) / (s * b1(s)) * zv / (u * u);
    };
    using gk = boost::math::quadrature::gauss_kronrod<double, 61>;
    double re = gk::integrate([&](double u) { return g(u).real(); }, 0.0, 1.0, 15, 1e-14);
    double im = gk::integrate([&](double u) { return g(u).imag(); }, 0.0, 1.0, 15, 1e-14);
    return std::exp(cplx(re, im));
}

}  // namespace qconf
