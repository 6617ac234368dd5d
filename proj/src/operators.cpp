#include "qconf/operators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

namespace qconf {

using nlohmann::json;

const char* to_string(op_kind k) { return k == op_kind::differential ? "differential" : "q_difference"; }

const char* to_string(op_basis b) {
    switch (b) {
        case op_basis::delta: return "delta";
        case op_basis::delta_q: return "delta_q";
        case op_basis::sigma_q: return "sigma_q";
    }
    return "?";
}

double linear_operator::q_value() const {
    if (!q) fail(error_kind::argument, "operator has no q");
    return *q;
}

int linear_operator::max_degree() const {
    int d = 0;
    for (auto& b : coefficients) d = std::max(d, b.degree());
    return d;
}

void linear_operator::validate() const {
    if (coefficients.empty()) fail(error_kind::validation, "operator without coefficients");
    if (coefficients.back().is_zero()) fail(error_kind::validation, "leading coefficient b_m is the zero polynomial");
    if (kind == op_kind::differential && basis != op_basis::delta)
        fail(error_kind::validation, "differential operators use the delta basis");
    if (kind == op_kind::q_difference && basis == op_basis::delta)
        fail(error_kind::validation, "q_difference operators use delta_q or sigma_q");
    if (kind == op_kind::q_difference && !(q && *q > 1.0)) fail(error_kind::validation, "q_difference needs q > 1");
    if (rhs && rhs->ram_index != 1) fail(error_kind::validation, "right-hand side must have ram_index 1");
}

namespace {

[[noreturn]] void parse_fail(const std::string& path, const std::string& msg) {
    fail(error_kind::parse, path + ": " + msg);
}

cplx parse_complex(const json& v, const std::string& path) {
    if (v.is_number()) return {v.get<double>(), 0.0};
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
        parse_fail(path, "expected [re, im]");
    return {v[0].get<double>(), v[1].get<double>()};
}

json complex_json(cplx c) { return json::array({c.real(), c.imag()}); }

power_series parse_series(const json& v, const std::string& path) {
    power_series s;
    const json* arr = &v;
    if (v.is_object()) {
        if (!v.contains("coefficients")) parse_fail(path, "series object needs coefficients");
        arr = &v.at("coefficients");
        if (v.contains("ram_index")) {
            if (!v["ram_index"].is_number_integer() || v["ram_index"].get<int>() < 1)
                parse_fail(path + ".ram_index", "expected a positive integer");
            s.ram_index = v["ram_index"].get<int>();
        }
    }
    if (!arr->is_array()) parse_fail(path, "expected a coefficient list");
    for (std::size_t i = 0; i < arr->size(); ++i)
        s.coefficients.push_back(parse_complex((*arr)[i], path + "[" + std::to_string(i) + "]"));
    return s;
}

op_kind parse_kind(const json& doc) {
    if (!doc.contains("kind") || !doc["kind"].is_string()) parse_fail("$.kind", "missing or not a string");
    auto k = doc["kind"].get<std::string>();
    if (k == "differential") return op_kind::differential;
    if (k == "q_difference") return op_kind::q_difference;
    parse_fail("$.kind", "unknown kind '" + k + "'");
}

op_basis parse_basis(const json& doc) {
    if (!doc.contains("basis") || !doc["basis"].is_string()) parse_fail("$.basis", "missing or not a string");
    auto b = doc["basis"].get<std::string>();
    if (b == "delta") return op_basis::delta;
    if (b == "delta_q") return op_basis::delta_q;
    if (b == "sigma_q") return op_basis::sigma_q;
    parse_fail("$.basis", "unknown basis '" + b + "'");
}

}  // namespace

linear_operator parse_operator(const json& doc) {
    if (!doc.is_object()) parse_fail("$", "operator document must be an object");
    linear_operator op;
    op.kind = parse_kind(doc);
    op.basis = parse_basis(doc);
    if (doc.contains("q")) {
        if (!doc["q"].is_number()) parse_fail("$.q", "expected a number");
        op.q = doc["q"].get<double>();
    }
    if (op.kind == op_kind::q_difference && !op.q) parse_fail("$.q", "q_difference operator without q");
    if (!doc.contains("coefficients") || !doc["coefficients"].is_array())
        parse_fail("$.coefficients", "missing or not a list");
    const auto& cs = doc["coefficients"];
    for (std::size_t i = 0; i < cs.size(); ++i) {
        std::string path = "$.coefficients[" + std::to_string(i) + "]";
        if (!cs[i].is_array()) parse_fail(path, "expected a polynomial coefficient list");
        std::vector<cplx> c;
        for (std::size_t j = 0; j < cs[i].size(); ++j)
            c.push_back(parse_complex(cs[i][j], path + "[" + std::to_string(j) + "]"));
        op.coefficients.push_back(polynomial(std::move(c)));
    }
    if (doc.contains("rhs") && !doc["rhs"].is_null()) op.rhs = parse_series(doc["rhs"], "$.rhs");
    op.validate();
    return op;
}

linear_operator parse_operator_text(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        fail(error_kind::parse, std::string("$: ") + e.what());
    }
    return parse_operator(doc);
}

json serialize_operator(const linear_operator& op) {
    json doc;
    doc["kind"] = to_string(op.kind);
    doc["basis"] = to_string(op.basis);
    if (op.q) doc["q"] = *op.q;
    json cs = json::array();
    for (auto& b : op.coefficients) {
        json p = json::array();
        for (auto c : b.coefficients) p.push_back(complex_json(c));
        cs.push_back(p);
    }
    doc["coefficients"] = cs;
    if (op.rhs) {
        json r = json::array();
        for (auto c : op.rhs->coefficients) r.push_back(complex_json(c));
        doc["rhs"] = json{{"ram_index", op.rhs->ram_index}, {"coefficients", r}};
    }
    return doc;
}

linear_operator to_sigma_basis(const linear_operator& op) {
    if (op.basis == op_basis::sigma_q) return op;
    if (op.basis != op_basis::delta_q) fail(error_kind::argument, "sigma_q conversion needs a q_difference operator");
    double q = op.q_value();
    int m = op.order();
    linear_operator out = op;
    out.basis = op_basis::sigma_q;
    out.coefficients.assign(m + 1, polynomial());
    // delta_q^i = (sigma - 1)^i / (q - 1)^i
    for (int i = 0; i <= m; ++i) {
        double scale = std::pow(q - 1.0, -i);
        for (int k = 0; k <= i; ++k) {
            double c = binomial(i, k) * (((i - k) % 2) ? -1.0 : 1.0) * scale;
            out.coefficients[k] = out.coefficients[k] + cplx(c) * op.coefficients[i];
        }
    }
    return out;
}

std::vector<rational> newton_polygon_t::positive_slopes() const {
    std::vector<rational> out;
    for (auto& s : slopes)
        if (s.slope > rational(0)) out.push_back(s.slope);
    return out;
}

namespace {

struct ipoint {
    std::int64_t x, y;
};

// Lower hull with collinear points removed; input sorted by x with distinct x.
std::vector<ipoint> lower_hull(const std::vector<ipoint>& pts) {
    std::vector<ipoint> h;
    for (auto& p : pts) {
        while (h.size() >= 2) {
            auto& a = h[h.size() - 2];
            auto& b = h[h.size() - 1];
            __int128 cross = (__int128)(b.x - a.x) * (p.y - a.y) - (__int128)(b.y - a.y) * (p.x - a.x);
            if (cross <= 0)
                h.pop_back();
            else
                break;
        }
        h.push_back(p);
    }
    return h;
}

}  // namespace

newton_polygon_t newton_polygon(const linear_operator& op) {
    op.validate();
    std::vector<ipoint> pts;
    if (op.kind == op_kind::differential) {
        // columns 0..m, each extended leftwards: w_i = min_{k >= i} v(b_k)
        int m = op.order();
        std::vector<std::int64_t> w(m + 1);
        std::int64_t run = std::numeric_limits<std::int64_t>::max();
        for (int i = m; i >= 0; --i) {
            auto v = op.coefficients[i].valuation();
            if (v) run = std::min<std::int64_t>(run, *v);
            w[i] = run;
        }
        for (int i = 0; i <= m; ++i) pts.push_back({i, w[i]});
    } else {
        auto s = to_sigma_basis(op);
        for (int i = 0; i <= s.order(); ++i) {
            auto v = s.coefficients[i].valuation();
            if (v) pts.push_back({i, *v});
        }
    }
    auto hull = lower_hull(pts);
    newton_polygon_t np;
    for (auto& p : hull) np.vertices.push_back({int(p.x), rational(p.y)});
    for (std::size_t i = 0; i + 1 < hull.size(); ++i) {
        int dx = int(hull[i + 1].x - hull[i].x);
        np.slopes.push_back({rational(hull[i + 1].y - hull[i].y, dx), dx});
    }
    return np;
}

char_polynomial characteristic_polynomial(const linear_operator& op, rational slope) {
    if (op.kind != op_kind::q_difference)
        fail(error_kind::argument, "characteristic polynomials are defined for q_difference operators");
    if (!slope.is_integer()) fail(error_kind::unsupported, "characteristic polynomial needs an integer slope, got " + slope.str());
    auto np = newton_polygon(op);
    std::size_t idx = np.slopes.size();
    for (std::size_t i = 0; i < np.slopes.size(); ++i)
        if (np.slopes[i].slope == slope) idx = i;
    if (idx == np.slopes.size()) fail(error_kind::argument, "slope " + slope.str() + " is not a slope of the polygon");
    auto s = to_sigma_basis(op);
    double q = s.q_value();
    int d0 = np.vertices[idx].d, d1 = np.vertices[idx + 1].d;
    std::int64_t n0 = np.vertices[idx].n.num();
    std::int64_t mu = slope.num();
    char_polynomial cp;
    cp.slope = slope;
    for (int j = d0; j <= d1; ++j) {
        std::int64_t e = n0 + mu * (j - d0);
        cplx a = e >= 0 ? s.coefficients[j][std::size_t(e)] : cplx(0.0);
        cp.coefficients.push_back(a * std::pow(q, double(mu) * j * (j - 1) / 2.0));
    }
    int deg = d1 - d0;
    Eigen::MatrixXcd comp = Eigen::MatrixXcd::Zero(deg, deg);
    cplx lead = cp.coefficients.back();
    for (int i = 0; i < deg; ++i) {
        comp(0, i) = -cp.coefficients[deg - 1 - i] / lead;
        if (i + 1 < deg) comp(i + 1, i) = 1.0;
    }
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(comp, false);
    for (int i = 0; i < deg; ++i) cp.roots.push_back(es.eigenvalues()[i]);
    std::sort(cp.roots.begin(), cp.roots.end(), [](cplx a, cplx b) {
        return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
    });
    for (auto r : cp.roots) {
        bool merged = false;
        for (std::size_t k = 0; k < cp.distinct_roots.size(); ++k) {
            if (std::abs(r - cp.distinct_roots[k]) <= 1e-7 * std::max(1.0, std::abs(r))) {
                ++cp.multiplicities[k];
                merged = true;
                break;
            }
        }
        if (!merged) {
            cp.distinct_roots.push_back(r);
            cp.multiplicities.push_back(1);
        }
    }
    return cp;
}

namespace {

// Action of D^i on t^n where t = z^(1/nu).
cplx basis_power(const linear_operator& op, int i, int n, int nu) {
    double x = double(n) / nu;
    switch (op.basis) {
        case op_basis::delta: return std::pow(x, i);
        case op_basis::sigma_q: return std::pow(op.q_value(), x * i);
        case op_basis::delta_q: {
            double q = op.q_value();
            return std::pow(std::expm1(x * std::log(q)) / (q - 1.0), i);
        }
    }
    return 0.0;
}

}  // namespace

power_series apply_operator(const linear_operator& op, const power_series& s) {
    int nu = s.ram_index;
    std::size_t N = s.truncation_order();
    power_series out(std::vector<cplx>(N, 0.0), nu);
    for (int i = 0; i <= op.order(); ++i) {
        const auto& b = op.coefficients[i];
        for (std::size_t n = 0; n < N; ++n) {
            if (s[n] == cplx(0.0)) continue;
            cplx act = basis_power(op, i, int(n), nu) * s[n];
            for (std::size_t j = 0; j < b.coefficients.size(); ++j) {
                std::size_t idx = n + j * nu;
                if (idx < N) out.coefficients[idx] += b.coefficients[j] * act;
            }
        }
    }
    return out;
}

cplx recurrence::nu(double n) const { return q_type ? cplx(std::pow(q, n)) : cplx(n); }

recurrence make_recurrence(const linear_operator& op) {
    op.validate();
    recurrence rec;
    rec.q_type = op.kind == op_kind::q_difference;
    if (rec.q_type) rec.q = op.q_value();
    int v = std::numeric_limits<int>::max();
    int top = 0;
    for (auto& b : op.coefficients) {
        if (auto vb = b.valuation()) v = std::min(v, *vb);
        top = std::max(top, b.degree());
    }
    int J = top - v;
    rec.p.assign(J + 1, polynomial());
    for (int j = 0; j <= J; ++j) {
        for (int i = 0; i <= op.order(); ++i) {
            cplx b = op.coefficients[i][std::size_t(j + v)];
            if (b == cplx(0.0)) continue;
            polynomial term;
            switch (op.basis) {
                case op_basis::delta:  // (n - j)^i
                    term = polynomial::monomial(i).substitute_affine(1.0, double(-j));
                    break;
                case op_basis::sigma_q:  // q^{i(n-j)} = q^{-ij} Q^i
                    term = polynomial::monomial(i, std::pow(rec.q, -double(i) * j));
                    break;
                case op_basis::delta_q: {  // ((Q q^{-j} - 1)/(q - 1))^i
                    polynomial lin(std::vector<cplx>{-1.0 / (rec.q - 1.0), std::pow(rec.q, -double(j)) / (rec.q - 1.0)});
                    term = polynomial::constant(1.0);
                    for (int k = 0; k < i; ++k) term = term * lin;
                    break;
                }
            }
            rec.p[j] = rec.p[j] + b * term;
        }
    }
    if (op.rhs) {
        const auto& r = op.rhs->coefficients;
        for (std::size_t n = std::size_t(v); n < r.size(); ++n) rec.rhs.push_back(r[n]);
        // rhs terms below the common valuation must vanish for a series solution to exist
        for (int n = 0; n < v && n < int(r.size()); ++n)
            if (r[n] != cplx(0.0))
                fail(error_kind::resonance, "right-hand side term z^" + std::to_string(n) + " below the operator valuation");
    }
    return rec;
}

series_solution solve_series(const linear_operator& op, const std::optional<power_series>& rhs, int valuation,
                             cplx leading, int order) {
    if (order < 1) fail(error_kind::argument, "series order must be positive");
    if (valuation < 0) fail(error_kind::argument, "valuation must be nonnegative");
    linear_operator work = op;
    work.rhs = rhs ? rhs : op.rhs;
    auto rec = make_recurrence(work);
    series_solution sol;
    std::vector<cplx> h(order, 0.0);
    double scale = 0.0;
    for (int n = 0; n < order; ++n) {
        cplx acc = rec.r(n);
        for (int j = 1; j <= rec.span() && j <= n; ++j) acc -= rec.p_at(j, n) * h[n - j];
        cplx c = rec.p_at(0, n);
        double ref = std::abs(acc);
        for (int j = 0; j <= rec.span(); ++j) ref = std::max(ref, std::abs(rec.p_at(j, n)));
        // size of p_0 at nu_n without cancellation, to judge whether c vanishes
        double c_scale = 0.0, nu_pow = 1.0;
        for (auto a : rec.p[0].coefficients) {
            c_scale += std::abs(a) * nu_pow;
            nu_pow *= std::abs(rec.nu(n));
        }
        bool zero_c = std::abs(c) <= 1e-13 * std::max(1e-300, c_scale);
        if (n < valuation) {
            if (std::abs(acc) > 1e-10 * std::max(1.0, scale))
                fail(error_kind::argument, "equation at order " + std::to_string(n) + " forces a term below the valuation");
            continue;
        }
        if (n == valuation) {
            if (!zero_c) {
                cplx forced = acc / c;
                if (std::abs(forced - leading) > 1e-10 * std::max(1.0, std::abs(leading)))
                    fail(error_kind::argument, "leading coefficient inconsistent with the equation at order " + std::to_string(n));
            } else if (std::abs(acc) > 1e-10 * std::max(1.0, ref)) {
                fail(error_kind::resonance, "resonance at n = " + std::to_string(n));
            }
            h[n] = leading;
            scale = std::max(scale, std::abs(leading));
            continue;
        }
        if (c == cplx(0.0) || zero_c) {
            if (std::abs(acc) > 1e-10 * std::max(1.0, ref))
                fail(error_kind::resonance, "resonance at n = " + std::to_string(n));
            h[n] = 0.0;
            sol.non_unique = true;
            continue;
        }
        if (std::abs(c) < 1e-8 * c_scale) sol.ill_conditioned.push_back(n);
        h[n] = acc / c;
        scale = std::max(scale, std::abs(h[n]));
    }
    sol.series = power_series(std::move(h), 1);
    return sol;
}

linear_operator borel_plane_operator(const linear_operator& op, rational k) {
    if (k <= rational(0)) fail(error_kind::argument, "Borel order must be positive");
    auto rec = make_recurrence(op);
    int J = rec.span();
    for (int j = 0; j <= J; ++j) {
        if (rec.p[j].is_zero()) continue;
        rational steps = rational(J - j) / k;
        if (!steps.is_integer())
            fail(error_kind::unsupported, "recurrence shift " + std::to_string(J - j) + " is not a multiple of k = " +
                                              k.str() + "; ramify first");
    }
    linear_operator out;
    out.kind = op.kind;
    std::vector<polynomial> P(J + 1);
    std::vector<cplx> rhs;
    if (!rec.q_type) {
        double kk = k.to_double();
        for (int j = 0; j <= J; ++j) {
            // prod_{t=1}^{(J-j)/k} ((n-J)/k + t)
            polynomial poch = polynomial::constant(1.0);
            int steps = int((rational(J - j) / k).num());
            for (int t = 1; t <= steps; ++t)
                poch = poch * polynomial(std::vector<cplx>{-double(J) / kk + t, 1.0 / kk});
            P[j] = rec.p[j] * poch;
        }
        for (std::size_t n = 0; n < rec.rhs.size(); ++n)
            rhs.push_back(rec.rhs[n] * rgamma(1.0 + (double(n) - J) / kk));
        out.basis = op_basis::delta;
        out.coefficients.assign(1, polynomial());
        for (int j = 0; j <= J; ++j) {
            polynomial shifted = P[j].substitute_affine(1.0, double(j));  // P_j(delta + j)
            for (int i = 0; i <= shifted.degree(); ++i) {
                if (int(out.coefficients.size()) <= i) out.coefficients.resize(i + 1);
                out.coefficients[i] = out.coefficients[i] + polynomial::monomial(j, shifted[i]);
            }
        }
    } else {
        if (k != rational(1)) fail(error_kind::unsupported, "q-Borel plane operator is available for k = 1; ramify first");
        double q = rec.q;
        for (int j = 0; j <= J; ++j) {
            // prod_{t=1}^{J-j} [n - J + t]_q, polynomial in Q = q^n
            polynomial poch = polynomial::constant(1.0);
            for (int t = 1; t <= J - j; ++t)
                poch = poch * polynomial(std::vector<cplx>{-1.0 / (q - 1.0), std::pow(q, double(t - J)) / (q - 1.0)});
            P[j] = rec.p[j] * poch;
        }
        for (std::size_t n = 0; n < rec.rhs.size(); ++n) {
            int m = int(n) - J;
            rhs.push_back(m < 0 ? cplx(0.0) : rec.rhs[n] / q_factorial(m, q));
        }
        out.basis = op_basis::sigma_q;
        out.q = q;
        out.coefficients.assign(1, polynomial());
        for (int j = 0; j <= J; ++j) {
            // zeta^j P_j(q^j sigma)
            for (int i = 0; i <= P[j].degree(); ++i) {
                if (int(out.coefficients.size()) <= i) out.coefficients.resize(i + 1);
                out.coefficients[i] =
                    out.coefficients[i] + polynomial::monomial(j, P[j][i] * std::pow(q, double(i) * j));
            }
        }
    }
    while (out.coefficients.size() > 1 && out.coefficients.back().is_zero()) out.coefficients.pop_back();
    bool any = false;
    for (auto c : rhs) any = any || c != cplx(0.0);
    if (any) out.rhs = power_series(rhs, 1);
    return out;
}

namespace {

std::vector<family_term> parse_family_entry(const json& v, const std::string& path) {
    if (v.is_object()) {
        if (!v.contains("terms") || !v["terms"].is_array()) parse_fail(path, "family entry needs a terms list");
        std::vector<family_term> out;
        for (std::size_t i = 0; i < v["terms"].size(); ++i) {
            const auto& t = v["terms"][i];
            std::string tp = path + ".terms[" + std::to_string(i) + "]";
            if (!t.is_object() || !t.contains("coef")) parse_fail(tp, "expected {coef, power}");
            family_term ft;
            ft.coef = parse_complex(t["coef"], tp + ".coef");
            if (t.contains("power")) {
                if (!t["power"].is_number()) parse_fail(tp + ".power", "expected a number");
                ft.power = t["power"].get<double>();
                if (ft.power < 0) parse_fail(tp + ".power", "powers of (q-1) must be nonnegative");
            }
            out.push_back(ft);
        }
        return out;
    }
    return {family_term{parse_complex(v, path), 0.0}};
}

}  // namespace

operator_family parse_operator_family(const json& doc) {
    if (!doc.is_object()) parse_fail("$", "family document must be an object");
    operator_family f;
    f.kind = parse_kind(doc);
    f.basis = parse_basis(doc);
    if (f.kind != op_kind::q_difference) parse_fail("$.kind", "a family must be q_difference");
    if (!doc.contains("coefficients") || !doc["coefficients"].is_array())
        parse_fail("$.coefficients", "missing or not a list");
    const auto& cs = doc["coefficients"];
    for (std::size_t i = 0; i < cs.size(); ++i) {
        std::string path = "$.coefficients[" + std::to_string(i) + "]";
        if (!cs[i].is_array()) parse_fail(path, "expected a list");
        std::vector<std::vector<family_term>> row;
        for (std::size_t j = 0; j < cs[i].size(); ++j)
            row.push_back(parse_family_entry(cs[i][j], path + "[" + std::to_string(j) + "]"));
        f.coefficients.push_back(std::move(row));
    }
    if (f.coefficients.empty()) parse_fail("$.coefficients", "empty");
    if (doc.contains("rhs") && !doc["rhs"].is_null()) f.rhs = parse_series(doc["rhs"], "$.rhs");
    return f;
}

linear_operator operator_family::at(double q) const {
    linear_operator op;
    op.kind = kind;
    op.basis = basis;
    op.q = q;
    op.rhs = rhs;
    for (auto& row : coefficients) {
        std::vector<cplx> c;
        for (auto& terms : row) {
            cplx acc = 0.0;
            for (auto& t : terms) acc += t.coef * std::pow(q - 1.0, t.power);
            c.push_back(acc);
        }
        op.coefficients.push_back(polynomial(std::move(c)));
    }
    op.validate();
    return op;
}

linear_operator operator_family::limit() const {
    linear_operator op;
    op.kind = op_kind::differential;
    op.basis = op_basis::delta;
    op.rhs = rhs;
    if (basis != op_basis::delta_q) fail(error_kind::unsupported, "the q -> 1 limit is formed for delta_q families");
    for (auto& row : coefficients) {
        std::vector<cplx> c;
        for (auto& terms : row) {
            cplx acc = 0.0;
            for (auto& t : terms)
                if (t.power == 0.0) acc += t.coef;
            c.push_back(acc);
        }
        op.coefficients.push_back(polynomial(std::move(c)));
    }
    op.validate();
    return op;
}

}  // namespace qconf
