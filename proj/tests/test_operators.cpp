#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "qconf/operators.hpp"

using namespace qconf;
using nlohmann::json;

namespace {

linear_operator euler() {
    return parse_operator(json::parse(R"({"kind":"differential","basis":"delta","coefficients":[[1],[0,1]],
        "rhs":{"ram_index":1,"coefficients":[0,1]}})"));
}

linear_operator q_euler(double q) {
    json d = json::parse(R"({"kind":"q_difference","basis":"delta_q","coefficients":[[1],[0,1]],
        "rhs":{"ram_index":1,"coefficients":[0,1]}})");
    d["q"] = q;
    return parse_operator(d);
}

linear_operator example_op() {
    return parse_operator(json::parse(R"({"kind":"differential","basis":"delta",
        "coefficients":[[-1],[1],[0,1],[0,0,0,1,1]]})"));
}

}  // namespace

TEST_CASE("parse and serialize") {
    auto op = euler();
    CHECK(op.order() == 1);
    CHECK(example_op().order() == 3);
    auto back = parse_operator(serialize_operator(op));
    CHECK(serialize_operator(back).dump() == serialize_operator(op).dump());
    auto cx = parse_operator_text(R"({"kind":"q_difference","basis":"sigma_q","q":1.5,
        "coefficients":[[[0.25,-1.5e-3],[1,0]],[[1,2]]]})");
    CHECK(parse_operator(serialize_operator(cx)).coefficients[0][0] == cplx(0.25, -1.5e-3));
}

TEST_CASE("schema violations are parse errors") {
    auto kind_of = [](const char* text) {
        try {
            parse_operator_text(text);
        } catch (const error& e) {
            return e.kind();
        }
        return error_kind::domain;  // sentinel: nothing thrown
    };
    CHECK(kind_of(R"({"kind":"q_difference","basis":"sigma_q","coefficients":[[1],[1]]})") == error_kind::parse);
    CHECK(kind_of(R"({"kind":"differential","basis":"delta","coefficients":[[1],"z"]})") == error_kind::parse);
    CHECK(kind_of(R"({"kind":"differential","basis":"sigma_q","coefficients":[[1],[1]]})") != error_kind::domain);
    CHECK(kind_of(R"({"kind":"differential","basis":"delta","coefficients":[[1],[0]]})") == error_kind::validation);
    CHECK(kind_of("{not json") == error_kind::parse);
}

TEST_CASE("newton polygon of the example operator") {
    auto np = newton_polygon(example_op());
    REQUIRE(np.slopes.size() == 3);
    CHECK(np.slopes[0].slope == rational(0));
    CHECK(np.slopes[1].slope == rational(1));
    CHECK(np.slopes[2].slope == rational(2));
    for (auto& s : np.slopes) CHECK(s.multiplicity == 1);
    auto pos = np.positive_slopes();
    REQUIRE(pos.size() == 2);
    CHECK(pos[1] == rational(2));
}

TEST_CASE("polygon of sigma - a and of q-Euler") {
    auto op = parse_operator_text(R"({"kind":"q_difference","basis":"sigma_q","q":2,"coefficients":[[-2],[1]]})");
    auto np = newton_polygon(op);
    REQUIRE(np.slopes.size() == 1);
    CHECK(np.slopes[0].slope == rational(0));
    auto cp = characteristic_polynomial(op, rational(0));
    REQUIRE(cp.distinct_roots.size() == 1);
    CHECK(std::abs(cp.distinct_roots[0] - 2.0) < 1e-12);
    CHECK_THROWS_AS(characteristic_polynomial(op, rational(1)), error);

    auto qe = to_sigma_basis(q_euler(1.3));
    qe.rhs.reset();
    auto nq = newton_polygon(qe);
    REQUIRE(nq.slopes.size() == 1);
    CHECK(nq.slopes[0].slope == rational(1));
    auto ch = characteristic_polynomial(qe, rational(1));
    // re-expansion of the roots
    for (auto r : ch.roots) {
        cplx v = 0.0, p = 1.0;
        for (auto c : ch.coefficients) {
            v += c * p;
            p *= r;
        }
        CHECK(std::abs(v) < 1e-10);
    }
}

TEST_CASE("z-shift moves the sigma polygon without changing slopes") {
    auto op = to_sigma_basis(q_euler(1.7));
    op.rhs.reset();
    auto shifted = op;
    for (auto& b : shifted.coefficients) b = polynomial::monomial(1) * b;
    auto a = newton_polygon(op), b = newton_polygon(shifted);
    REQUIRE(a.vertices.size() == b.vertices.size());
    for (std::size_t i = 0; i < a.vertices.size(); ++i) CHECK(b.vertices[i].n == a.vertices[i].n + rational(1));
    for (std::size_t i = 0; i < a.slopes.size(); ++i) CHECK(b.slopes[i].slope == a.slopes[i].slope);
}

TEST_CASE("apply_operator on monomials") {
    linear_operator d;
    d.coefficients = {polynomial(), polynomial::constant(1.0)};
    CHECK(apply_operator(d, power_series({0, 0, 0, 1.0}))[3] == cplx(3.0));
    linear_operator s;
    s.kind = op_kind::q_difference;
    s.basis = op_basis::sigma_q;
    s.q = 2.0;
    s.coefficients = {polynomial(), polynomial::constant(1.0)};
    CHECK(apply_operator(s, power_series({0, 0, 1.0}))[2] == cplx(4.0));
    s.basis = op_basis::delta_q;
    CHECK(std::abs(apply_operator(s, power_series({0, 0, 0, 1.0}))[3] - oracle::q_bracket(3, 2.0)) < 1e-14);
}

TEST_CASE("Euler series solutions") {
    auto sol = solve_series(euler(), std::nullopt, 1, 1.0, 20).series;
    double f = 1.0;
    for (int n = 0; n < 19; ++n) {
        if (n) f *= n;
        CHECK(oracle::rel(sol[n + 1], cplx((n % 2 ? -1.0 : 1.0) * f)) < 1e-14);
    }
    auto qs = solve_series(q_euler(1.4), std::nullopt, 1, 1.0, 20).series;
    for (int n = 0; n < 19; ++n)
        CHECK(oracle::rel(qs[n + 1], cplx((n % 2 ? -1.0 : 1.0) * oracle::q_factorial(n, 1.4))) < 1e-13);
    linear_operator lin;
    lin.coefficients = {polynomial::constant(-1.0), polynomial::constant(1.0)};
    auto z = solve_series(lin, std::nullopt, 1, 1.0, 6).series;
    CHECK(z[1] == cplx(1.0));
    for (int n = 2; n < 6; ++n) CHECK(z[n] == cplx(0.0));
}

TEST_CASE("resonance is reported") {
    // delta y - 2 y = z^2 has no power series solution
    auto op = parse_operator_text(R"({"kind":"differential","basis":"delta","coefficients":[[-2],[1]],
        "rhs":{"ram_index":1,"coefficients":[0,0,1]}})");
    try {
        solve_series(op, std::nullopt, 0, 0.0, 10);
        FAIL("expected resonance");
    } catch (const error& e) {
        CHECK(e.kind() == error_kind::resonance);
        CHECK(std::string(e.what()).find("n = 2") != std::string::npos);
    }
}

TEST_CASE("random operators: solutions annihilated to truncation") {
    std::mt19937 rng(2024);
    std::uniform_real_distribution<double> u(-1, 1);
    std::uniform_int_distribution<int> deg(0, 4), ord(1, 3);
    for (int trial = 0; trial < 40; ++trial) {
        linear_operator op;
        bool q = trial % 2;
        if (q) {
            op.kind = op_kind::q_difference;
            op.basis = op_basis::delta_q;
            op.q = 1.2 + 0.1 * (trial % 5);
        }
        int m = ord(rng);
        for (int i = 0; i <= m; ++i) {
            std::vector<cplx> c(deg(rng) + 1);
            for (auto& x : c) x = cplx(u(rng), u(rng));
            op.coefficients.push_back(polynomial(c));
        }
        if (op.coefficients[0][0] == cplx(0.0)) continue;
        op.rhs = power_series({cplx(u(rng), u(rng)), cplx(u(rng), 0.0)});
        series_solution sol;
        try {
            sol = solve_series(op, std::nullopt, 0, op.rhs->coefficients[0] / op.coefficients[0][0], 25);
        } catch (const error&) {
            continue;
        }
        auto res = apply_operator(op, sol.series) - *op.rhs;
        double scale = 0.0;
        for (auto c : sol.series.coefficients) scale = std::max(scale, std::abs(c));
        for (int n = 0; n < 25; ++n) CHECK(std::abs(res[n]) <= 1e-10 * std::max(1.0, scale));
    }
}

TEST_CASE("Borel-plane operator of Euler annihilates log(1+zeta)") {
    auto op = euler();
    auto bop = borel_plane_operator(op, rational(1));
    std::vector<cplx> c(30, 0.0);
    for (int n = 0; n + 1 < 30; ++n) c[n + 1] = (n % 2 ? -1.0 : 1.0) / (n + 1.0);
    auto res = apply_operator(bop, power_series(c));
    if (bop.rhs) res = res - *bop.rhs;
    for (int n = 0; n < 28; ++n) CHECK(std::abs(res[n]) < 1e-12);

    auto qop = q_euler(1.5);
    auto qb = borel_plane_operator(qop, rational(1));
    std::vector<cplx> d(30, 0.0);
    for (int n = 0; n + 1 < 30; ++n) d[n + 1] = (n % 2 ? -1.0 : 1.0) / oracle::q_bracket(n + 1, 1.5);
    auto qres = apply_operator(qb, power_series(d));
    if (qb.rhs) qres = qres - *qb.rhs;
    for (int n = 0; n < 28; ++n) CHECK(std::abs(qres[n]) < 1e-12);
}

TEST_CASE("family at q and its limit") {
    auto fam = parse_operator_family(json::parse(R"({"kind":"q_difference","basis":"delta_q",
        "coefficients":[[1],[0,{"terms":[{"coef":1,"power":0},{"coef":2,"power":1}]}]]})"));
    auto at = fam.at(1.5);
    CHECK(at.q_value() == 1.5);
    CHECK(std::abs(at.coefficients[1][1] - 2.0) < 1e-15);
    auto lim = fam.limit();
    CHECK(lim.kind == op_kind::differential);
    CHECK(lim.coefficients[1][1] == cplx(1.0));
}
