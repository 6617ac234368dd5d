#include "qconf/q_summation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ladder_engine.hpp"
#include "qconf/q_special.hpp"

namespace qconf {

const char* to_string(q_mode m) {
    switch (m) {
        case q_mode::discrete: return "discrete";
        case q_mode::theta: return "theta";
        case q_mode::continuous: return "continuous";
    }
    return "?";
}

q_mode parse_q_mode(const std::string& s) {
    if (s == "discrete") return q_mode::discrete;
    if (s == "theta") return q_mode::theta;
    if (s == "continuous") return q_mode::continuous;
    fail(error_kind::config, "unknown mode '" + s + "' (expected discrete, theta or continuous)");
}

namespace {

void check_q(double q) {
    if (!(q >= q_floor)) fail(error_kind::range, "q = " + std::to_string(q) + " is below the supported floor 1.001");
}

// Relative distance from w to the spiral base * ratio^Z.
double spiral_distance(cplx w, cplx base, double ratio) {
    cplx t = w / base;
    double n = std::round(std::log(std::abs(t)) / std::log(ratio));
    return std::abs(t / std::pow(ratio, n) - 1.0);
}

cplx q_kernel_log(cplx lr, double Q, double log_pref) { return log_pref + lr - log_eq_exp(Q * std::exp(lr), Q); }

cplx theta_kernel_log(cplx lr, double q) {
    scaled_value t = theta_scaled(q * std::exp(lr), q);
    return -(std::log(t.mantissa) + t.log_scale);
}

detail::lattice_params single_level_params(const ray_function& f, double k, double d, double h, double log_rho0,
                                           std::function<cplx(cplx)> log_w) {
    detail::lattice_params p;
    p.log_rho0 = log_rho0;
    p.h = h;
    p.d = d;
    p.levels.push_back({k, std::move(log_w)});
    // non-owning view of f
    p.base = ray_handle(std::shared_ptr<const ray_function>(), &f);
    return p;
}

}  // namespace

power_series q_borel(const power_series& s, rational k, double q) {
    check_q(q);
    if (k <= rational(0)) fail(error_kind::argument, "q-Borel order must be positive");
    power_series out = s;
    for (std::size_t n = 0; n < out.coefficients.size(); ++n) {
        if (out.coefficients[n] == cplx(0.0)) continue;
        rational e = rational(std::int64_t(n), s.ram_index) / k;
        if (!e.is_integer()) fail(error_kind::unsupported, "exponent " + e.str() + " is not an integer multiple of 1/k");
        out.coefficients[n] *= std::exp(-log_q_factorial(int(e.num()), q));
    }
    return out;
}

power_series rz_borel(const power_series& s, double q) {
    check_q(q);
    if (s.ram_index != 1) fail(error_kind::unsupported, "rz_borel expects an unramified series");
    power_series out = s;
    for (std::size_t n = 0; n < out.coefficients.size(); ++n) {
        double l = double(n);
        out.coefficients[n] *= std::exp(-l * (l - 1.0) / 2.0 * std::log(q));
    }
    return out;
}

jackson_result jackson_integral(const std::function<cplx(cplx)>& f, double d, double q) {
    if (!(q > 1.0)) fail(error_kind::domain, "Jackson integral needs q > 1");
    const int L = 400;
    auto term = [&](int l) {
        cplx pt = std::polar(std::pow(q, double(l)), d);
        return (q - 1.0) * f(pt) * pt;
    };
    jackson_result res;
    cplx acc = term(0);
    auto sweep = [&](int dir, int& bound) {
        int quiet = 0;
        for (int l = dir; std::abs(l) <= L; l += dir) {
            cplx t = term(l);
            acc += t;
            bound = l;
            quiet = std::abs(t) < 1e-16 * std::abs(acc) ? quiet + 1 : 0;
            if (quiet >= 3) return true;
        }
        return false;
    };
    bool up = sweep(1, res.upper);
    bool down = sweep(-1, res.lower);
    if (!up || !down || !std::isfinite(std::abs(acc)))
        fail(error_kind::range, "Jackson sum did not converge within |l| <= 400");
    res.value = acc;
    return res;
}

cplx discrete_q_laplace(const ray_function& f, rational k, double d, double q, const sector_point& z) {
    check_q(q);
    double kd = k.to_double();
    cplx Z = z.pow(kd);
    if (spiral_distance(Z, (1.0 - q) * std::polar(1.0, kd * d), q) < 1e-6)
        fail(error_kind::pole, "z^k lies on the pole spiral (1-q) e^{ikd} q^Z");
    double lp = std::log(q - 1.0);
    auto p = single_level_params(f, kd, d, std::log(q) / kd, 0.0, [q, lp](cplx lr) { return q_kernel_log(lr, q, lp); });
    return detail::lattice_engine(std::move(p)).evaluate(z);
}

cplx theta_q_laplace(const ray_function& f, double d, double q, const sector_point& z) {
    check_q(q);
    if (spiral_distance(z.value(), -(q - 1.0) * std::polar(1.0, d), q) < 1e-6)
        fail(error_kind::pole, "z lies on the pole spiral (q-1)[d+pi]");
    auto p = single_level_params(f, 1.0, d, std::log(q), std::log(q - 1.0),
                                 [q](cplx lr) { return theta_kernel_log(lr, q); });
    return detail::lattice_engine(std::move(p)).evaluate(z);
}

cplx continuous_q_laplace(const ray_function& f, rational k, double d, double q, const sector_point& z) {
    check_q(q);
    double kd = k.to_double();
    double phase = kd * (z.argument - d);
    if (angular_distance(phase, {pi}) < 1e-6) fail(error_kind::pole, "z^k lies on the pole ray arg = kd + pi");
    double strip = std::min(f.analytic_halfwidth(), (pi - std::abs(std::remainder(phase, 2 * pi))) / kd);
    int M = int(std::ceil(std::log(q) / std::min(0.02, strip / 5.0)));
    double h = std::log(q) / kd / M;
    double lp = std::log((q - 1.0) / std::log(q) * kd * h);
    auto p = single_level_params(f, kd, d, h, 0.0, [q, lp](cplx lr) { return q_kernel_log(lr, q, lp); });
    return detail::lattice_engine(std::move(p)).evaluate(z);
}

ray_handle q_continuation(const power_series& s, const linear_operator& q_op, double d) {
    if (q_op.kind != op_kind::q_difference) fail(error_kind::argument, "q_continuation expects a q-difference operator");
    if (s.ram_index != 1) fail(error_kind::unsupported, "continuation of ramified series");
    auto sys = std::make_shared<section_system>(make_recurrence(q_op), s.coefficients, section_options{});
    return make_system_ray(sys, d);
}

namespace {

summation_ladder single_ladder(const linear_operator& op, bool theta) {
    summation_ladder L;
    auto np = newton_polygon(op);
    L.positive_slopes = np.positive_slopes();
    std::sort(L.positive_slopes.begin(), L.positive_slopes.end());
    L.positive_slopes.erase(std::unique(L.positive_slopes.begin(), L.positive_slopes.end()), L.positive_slopes.end());
    if (L.positive_slopes.empty()) return L;
    if (L.positive_slopes.size() > 1)
        fail(error_kind::unsupported, "single-level summation needs exactly one positive slope");
    rational k = L.positive_slopes[0];
    if (theta && k != rational(1)) fail(error_kind::unsupported, "theta mode sums slope-1 problems only");
    L.kappa = {k};
    L.alpha = {1};
    L.kappa_tilde = {k};
    L.top_level = int(k.ceil());
    L.beta = int(k.num());
    L.d0 = 0;
    return L;
}

}  // namespace

direction_set q_singular_directions(const linear_operator& op, const summation_ladder& ladder) {
    direction_set set;
    if (ladder.convergent()) return set;
    linear_operator hom = op;
    hom.rhs.reset();
    recurrence rec = make_recurrence(hom);
    for (int l = 0; l < ladder.beta; ++l) {
        section_options o;
        o.beta = ladder.beta;
        o.l = l;
        o.weight = borel_weight::q_ramified;
        o.levels = ladder.kappa_tilde;
        section_system sys(rec, {}, o);
        for (auto x : sys.singular_points())
            for (int k = 0; k < sys.beta(); ++k) {
                double a = wrap_angle((std::arg(x) + 2.0 * pi * k) / sys.beta());
                if (angular_distance(a, set.directions) > 1e-9) {
                    set.directions.push_back(a);
                    set.provenance.push_back(direction_source::borel_pole);
                }
            }
    }
    std::vector<std::size_t> idx(set.directions.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return set.directions[a] < set.directions[b]; });
    direction_set out;
    for (auto i : idx) {
        out.directions.push_back(set.directions[i]);
        out.provenance.push_back(set.provenance[i]);
    }
    return out;
}

double q_summed_function::half_opening() const {
    if (passthrough_) return pi;
    return pi / (2.0 * ladder_.kappa_tilde.back().to_double());
}

bool q_summed_function::in_domain(const sector_point& z) const {
    return passthrough_ || std::abs(z.argument - d_) < half_opening();
}

double q_summed_function::pole_distance(const sector_point& z) const {
    double best = std::numeric_limits<double>::infinity();
    for (auto& p : poles_) {
        cplx w = z.pow(p.order);
        if (p.ratio == 0.0) {
            best = std::min(best, angular_distance(std::arg(w), {std::arg(p.base)}));
        } else {
            best = std::min(best, spiral_distance(w, p.base, p.ratio));
        }
    }
    return best;
}

cplx q_summed_function::evaluate(const sector_point& z) const {
    if (passthrough_) {
        if (z.modulus() < 0.5 * direct_->radius()) return direct_->series_value(z.value())(0);
        return make_system_ray(direct_, z.argument)->at(z.modulus());
    }
    if (!in_domain(z))
        fail(error_kind::domain, "z outside the summation sector (|arg z - d| must stay below " +
                                     std::to_string(half_opening()) + ")");
    if (pole_distance(z) < 1e-6) fail(error_kind::pole, "z lies on a recorded pole spiral of the q-sum");
    cplx acc = 0.0;
    cplx zv = z.value();
    for (std::size_t i = 0; i < sections_.size(); ++i) acc += std::pow(zv, sections_[i].l) * engines_[i]->evaluate(z);
    return acc;
}

q_summed_function q_multisum(const power_series& s, const linear_operator& op, double d, q_mode mode,
                             bool single_level) {
    if (op.kind != op_kind::q_difference) fail(error_kind::argument, "q_multisum expects a q-difference operator");
    const double q = op.q_value();
    check_q(q);
    if (s.ram_index != 1) fail(error_kind::unsupported, "summation of ramified series");
    q_summed_function out;
    out.d_ = d;
    out.q_ = q;
    out.mode_ = mode;
    if (mode == q_mode::theta) single_level = true;
    out.ladder_ = single_level ? single_ladder(op, mode == q_mode::theta) : build_ladder(op);
    recurrence rec = make_recurrence(op);
    if (out.ladder_.convergent()) {
        out.passthrough_ = true;
        out.direct_ = std::make_shared<section_system>(rec, s.coefficients, section_options{});
        return out;
    }
    const auto& kt = out.ladder_.kappa_tilde;
    const int beta = out.ladder_.beta;
    auto dirs = q_singular_directions(op, out.ladder_);
    if (dirs.distance(d) < 1e-9) fail(error_kind::singular_direction, "direction " + std::to_string(d) + " is singular");

    double hw = pi;
    for (int l = 0; l < beta; ++l) {
        section_options o;
        o.beta = beta;
        o.l = l;
        o.weight = mode == q_mode::theta ? borel_weight::rz : borel_weight::q_ramified;
        o.levels = kt;
        auto sys = std::make_shared<section_system>(rec, s.coefficients, o);
        bool zero = true;
        for (int n = 0; n <= sys->direct_count() + 1 && zero; ++n)
            if (sys->coefficient_vector(n).norm() != 0.0) zero = false;
        if (zero) continue;
        q_summed_function::section_data sec;
        sec.l = l;
        sec.sys = sys;
        sec.base = make_system_ray(sys, d);
        hw = std::min(hw, sec.base->analytic_halfwidth());
        sec.formal.resize(kt.size());
        for (std::size_t j = 1; j < kt.size(); ++j) {
            for (int n = 0; n < 220; ++n) {
                cplx v;
                try {
                    v = sys->coefficient(n);
                } catch (const error&) {
                    break;
                }
                if (n > sys->direct_count() && std::abs(v) < 1e-290) break;
                double lw = 0.0;
                for (std::size_t i = 0; i < j; ++i) {
                    int e = int((rational(beta) / kt[i]).num());
                    lw += log_q_factorial(n * e, std::pow(q, kt[i].to_double()));
                }
                cplx c = v * std::exp(lw);
                if (!std::isfinite(std::abs(c))) break;
                sec.formal[j].push_back(c);
            }
        }
        out.sections_.push_back(std::move(sec));
    }

    const double ks = kt.back().to_double();
    const double Qs = std::pow(q, ks);
    switch (mode) {
        case q_mode::discrete: out.poles_.push_back({(1.0 - Qs) * std::polar(1.0, ks * d), Qs, ks}); break;
        case q_mode::continuous: out.poles_.push_back({std::polar(1.0, ks * d + pi), 0.0, ks}); break;
        case q_mode::theta: out.poles_.push_back({-(q - 1.0) * std::polar(1.0, d), q, 1.0}); break;
    }

    double h = std::log(q);
    double log_rho0 = 0.0;
    if (mode == q_mode::continuous) {
        double hmax = std::min(0.02, hw / 5.0);
        for (auto& k : kt) hmax = std::min(hmax, pi / (2.0 * k.to_double()) / 5.0);
        int M = int(std::ceil(std::log(q) / hmax));
        h = std::log(q) / M;
    }
    if (mode == q_mode::theta) log_rho0 = std::log(q - 1.0);

    for (auto& sec : out.sections_) {
        detail::lattice_params p;
        p.log_rho0 = log_rho0;
        p.h = h;
        p.d = d;
        p.base = sec.base;
        for (auto& k : kt) {
            double kd = k.to_double();
            double Q = std::pow(q, kd);
            if (mode == q_mode::theta) {
                p.levels.push_back({1.0, [q](cplx lr) { return theta_kernel_log(lr, q); }});
            } else {
                double lp = mode == q_mode::discrete ? std::log(Q - 1.0) : std::log((Q - 1.0) / std::log(Q) * kd * h);
                p.levels.push_back({kd, [Q, lp](cplx lr) { return q_kernel_log(lr, Q, lp); }});
            }
        }
        auto formal = sec.formal;
        int n_min = sec.sys->direct_count() + sec.sys->dim();
        p.formal = [formal, beta, d, n_min](int j, double log_t) -> std::optional<cplx> {
            if (j >= int(formal.size()) || formal[j].empty()) return std::nullopt;
            cplx x = std::polar(std::exp(beta * log_t), beta * d);
            return detail::optimal_truncation(formal[j], x, n_min);
        };
        out.engines_.push_back(std::make_shared<detail::lattice_engine>(std::move(p)));
    }
    return out;
}

double q_stokes_offset(const linear_operator& op, double d_singular, bool single_level) {
    auto ladder = single_level ? single_ladder(op, false) : build_ladder(op);
    if (ladder.convergent()) return pi / 8.0;
    auto dirs = q_singular_directions(op, ladder);
    std::vector<double> others;
    for (double a : dirs.directions)
        if (angular_distance(d_singular, {a}) > 1e-9) others.push_back(a);
    double gap = others.empty() ? pi : angular_distance(d_singular, others);
    return std::min(pi / (8.0 * std::max(1, ladder.top_level)), gap / 2.0);
}

cplx q_stokes_jump(const power_series& s, const linear_operator& op, double d_singular, const sector_point& z,
                   q_mode mode, bool single_level) {
    if (mode == q_mode::theta) single_level = true;
    auto ladder = single_level ? single_ladder(op, mode == q_mode::theta) : build_ladder(op);
    if (ladder.convergent()) return 0.0;
    auto dirs = q_singular_directions(op, ladder);
    if (dirs.distance(d_singular) > 1e-6)
        fail(error_kind::argument, "direction " + std::to_string(d_singular) + " is not a singular direction");
    double delta = q_stokes_offset(op, d_singular, single_level);
    auto plus = q_multisum(s, op, d_singular + delta, mode, single_level);
    auto minus = q_multisum(s, op, d_singular - delta, mode, single_level);
    if (!plus.in_domain(z) || !minus.in_domain(z))
        fail(error_kind::bracketing, "z is not inside both lateral sectors around the singular direction");
    return plus.evaluate(z) - minus.evaluate(z);
}

cplx q_homogeneous(const linear_operator& op, cplx z) {
    if (op.kind != op_kind::q_difference || op.order() != 1)
        fail(error_kind::unsupported, "homogeneous q-solution only for first-order q-difference operators");
    linear_operator sig = to_sigma_basis(op);
    const polynomial& b0 = sig.coefficients[0];
    const polynomial& b1 = sig.coefficients[1];
    if (b1.is_zero() || b0.degree() != b1.degree())
        fail(error_kind::unsupported, "homogeneous q-solution is not normalisable at infinity");
    cplx lim = -b0[std::size_t(b0.degree())] / b1[std::size_t(b1.degree())];
    if (std::abs(lim - 1.0) > 1e-12) fail(error_kind::unsupported, "-b_0/b_1 does not tend to 1 at infinity");
    const double q = sig.q_value();
    cplx log_acc = 0.0;
    cplx w = z;
    for (int n = 0; n < 100000; ++n) {
        cplx R = -b0(w) / b1(w);
        if (R == cplx(0.0)) fail(error_kind::pole, "homogeneous q-solution has a pole here");
        cplx lr = std::log(R);
        log_acc -= lr;
        if (std::abs(lr) < 1e-18 && n > 3) return std::exp(log_acc);
        w *= q;
    }
    fail(error_kind::range, "homogeneous q-product did not converge");
}

confluence_report validate_confluence_family(const operator_family& family, const linear_operator& limit,
                                             const std::vector<double>& q_grid) {
    confluence_report rep;
    auto lim_slopes = newton_polygon(limit).positive_slopes();
    std::vector<cplx> samples;
    for (double r : {0.1, 0.5, 1.0, 2.0})
        for (int a = 0; a < 8; ++a) samples.push_back(std::polar(r, 2.0 * pi * a / 8.0 + 0.1));
    rep.a2_pass = true;
    for (double q : q_grid) {
        confluence_row row;
        row.q = q;
        linear_operator op = family.at(q);
        std::size_t m = std::max(op.coefficients.size(), limit.coefficients.size());
        for (std::size_t i = 0; i < m; ++i) {
            polynomial bq = i < op.coefficients.size() ? op.coefficients[i] : polynomial();
            polynomial bl = i < limit.coefficients.size() ? limit.coefficients[i] : polynomial();
            std::size_t deg = std::max(bq.coefficients.size(), bl.coefficients.size());
            for (std::size_t j = 0; j < deg; ++j) row.a1_difference = std::max(row.a1_difference, std::abs(bq[j] - bl[j]));
            for (cplx z : samples) {
                double num = std::abs(bq(z) - bl(z));
                row.a3_constant = std::max(row.a3_constant, num / ((q - 1.0) * (std::abs(bl(z)) + 1.0)));
            }
        }
        auto qs = newton_polygon(op).positive_slopes();
        row.a2_slopes_match = qs == lim_slopes;
        rep.a2_pass = rep.a2_pass && row.a2_slopes_match;
        rep.rows.push_back(row);
    }
    // A1: differences shrink along the grid towards q = 1
    rep.a1_pass = !rep.rows.empty();
    for (std::size_t i = 1; i < rep.rows.size(); ++i)
        if (rep.rows[i].a1_difference > rep.rows[i - 1].a1_difference * (1.0 + 1e-12) + 1e-15) rep.a1_pass = false;
    if (!rep.rows.empty() && rep.rows.back().a1_difference > 1e-12 && rep.rows.size() > 1 &&
        !(rep.rows.back().a1_difference < rep.rows.front().a1_difference))
        rep.a1_pass = false;
    // A3: the constant stays bounded; fit its power law in (q - 1)
    bool finite = true;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (auto& r : rep.rows) {
        finite = finite && std::isfinite(r.a3_constant);
        rep.c1 = std::max(rep.c1, r.a3_constant);
        if (r.a3_constant > 1e-14) {
            double x = std::log(r.q - 1.0), y = std::log(r.a3_constant);
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
            ++n;
        }
    }
    rep.c1_exponent = n >= 2 ? (n * sxy - sx * sy) / (n * sxx - sx * sx) : 0.0;
    rep.a3_pass = finite && rep.c1_exponent > -0.25;
    return rep;
}

}  // namespace qconf
