#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "qconf/classical_summation.hpp"

using namespace qconf;

namespace {

linear_operator euler() {
    linear_operator op;
    op.coefficients = {polynomial::constant(1.0), polynomial::monomial(1)};
    op.rhs = power_series({0.0, 1.0});
    return op;
}

power_series euler_series(int n = 40) { return solve_series(euler(), std::nullopt, 1, 1.0, n).series; }

// delta f at z by central differences in log z, one Richardson step.
cplx log_derivative(const std::function<cplx(const sector_point&)>& f, const sector_point& z) {
    auto D = [&](double h) {
        sector_point a = z, b = z;
        a.log_modulus += h;
        b.log_modulus -= h;
        return (f(a) - f(b)) / (2 * h);
    };
    return (4.0 * D(5e-4) - D(1e-3)) / 3.0;
}

}  // namespace

TEST_CASE("ladders") {
    newton_polygon_t np;
    np.slopes = {{rational(0), 1}, {rational(1), 1}, {rational(2), 1}};
    auto L = build_ladder(np, {0, 0, 1, 4}, 5);
    std::vector<std::string> want = {"4", "4", "20/3", "20/3", "5"};
    REQUIRE(L.kappa_tilde.size() == want.size());
    for (std::size_t i = 0; i < want.size(); ++i) CHECK(L.kappa_tilde[i].str() == want[i]);
    CHECK(L.kappa[0] == rational(2));
    CHECK(L.kappa[1] == rational(10, 3));
    CHECK(L.kappa[2] == rational(5));
    CHECK(L.beta == 20);
    // sum of 1/kappa~ is 1/k_1
    rational acc(0);
    for (auto& k : L.kappa_tilde) acc = acc + k.inverse();
    CHECK(acc == rational(1));

    newton_polygon_t one;
    one.slopes = {{rational(1), 1}};
    auto M = build_ladder(one, {0, 2});
    CHECK(M.top_level == 3);
    REQUIRE(M.kappa.size() == 2);
    CHECK(M.kappa[0] == rational(3, 2));
    CHECK(M.kappa[1] == rational(3));
    // alpha = (2, 1): the top level repeats once more, keeping sum 1/kappa~ = 1/k_1
    REQUIRE(M.kappa_tilde.size() == 3);
    for (auto& k : M.kappa_tilde) CHECK(k == rational(3));
    CHECK(M.alpha[0] == 2);
    CHECK(M.alpha[1] == 1);
    CHECK(M.beta == 3);
    CHECK_THROWS_AS(build_ladder(one, {0, 2}, 2), error);

    newton_polygon_t flat;
    flat.slopes = {{rational(0), 2}};
    CHECK(build_ladder(flat, {1, 1, 1}).convergent());
}

TEST_CASE("formal Borel transforms") {
    auto b = formal_borel(power_series({0.0, 1.0}), rational(1));
    CHECK(b[1] == cplx(1.0));
    auto e = formal_borel(euler_series(20), rational(1));
    for (int n = 0; n + 1 < 20; ++n) CHECK(oracle::rel(e[n + 1], cplx((n % 2 ? -1.0 : 1.0) / (n + 1.0))) < 1e-14);
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> u(-1, 1);
    std::vector<cplx> c(15);
    for (auto& x : c) x = cplx(u(rng), u(rng));
    power_series s(c);
    rational k(3, 2);
    auto direct = formal_borel(s, k).normalized();
    auto conj = ramify(formal_borel(ramify(s, k.inverse()), rational(1)), k).normalized();
    REQUIRE(direct.ram_index == conj.ram_index);
    for (std::size_t i = 0; i < direct.truncation_order() && i < conj.truncation_order(); ++i)
        CHECK(std::abs(direct[i] - conj[i]) < 1e-14);
}

TEST_CASE("singular directions") {
    auto d = singular_directions(euler(), build_ladder(euler()));
    CHECK(d.distance(pi) < 1e-9);
    linear_operator flat;
    flat.coefficients = {polynomial({0.0, -1.0}), polynomial::constant(1.0)};
    CHECK(singular_directions(flat, build_ladder(flat)).directions.empty());
    linear_operator tilted;
    tilted.coefficients = {polynomial::constant(1.0), polynomial({0.0, cplx(0.0, -2.0), 1.0})};
    auto t = singular_directions(tilted, build_ladder(tilted));
    CHECK(t.distance(pi / 2) < 1e-9);
}

TEST_CASE("Borel continuation and Laplace on a ray") {
    auto op = euler();
    auto bop = borel_plane_operator(op, rational(1));
    auto bs = formal_borel(euler_series(40), rational(1));
    auto cf = borel_continuation(bs, bop, 0.0);
    for (double t : {0.5, 2.0, 10.0}) CHECK(std::abs(cf.ray->at(t) - std::log1p(t)) < 1e-9);
    CHECK_THROWS_AS(borel_continuation(bs, bop, pi), error);
    linear_operator dz;  // delta f = 2 z + z^2
    dz.coefficients = {polynomial(), polynomial::constant(1.0)};
    dz.rhs = power_series({0.0, 2.0, 1.0});
    auto poly = borel_continuation(power_series({1.0, 2.0, 0.5}), dz, 0.3);
    cplx x = std::polar(3.0, 0.3);
    CHECK(std::abs(poly.ray->at(3.0) - (1.0 + 2.0 * x + 0.5 * x * x)) < 1e-12);

    auto one = make_function_ray([](cplx) { return cplx(1.0); }, 0.0);
    auto id = make_function_ray([](cplx t) { return t; }, 0.0);
    auto z = sector_point::from_complex(0.3);
    CHECK(std::abs(laplace_along_ray(*one, rational(1), 0.0, z) - 1.0) < 1e-10);
    CHECK(std::abs(laplace_along_ray(*id, rational(1), 0.0, z) - 0.3) < 1e-10);
    cplx v = laplace_along_ray(*cf.ray, rational(1), 0.0, sector_point::from_complex(0.1));
    CHECK(oracle::rel(v, cplx(oracle::euler_sum(0.1))) < 1e-8);
    CHECK_THROWS_AS(laplace_along_ray(*one, rational(1), 0.0, sector_point::from_polar(0.3, 2.0)), error);
    // positivity for a positive integrand
    CHECK(std::abs(v.imag()) < 1e-12 * std::abs(v));
    CHECK(v.real() > 0);
}

TEST_CASE("Euler multisum against the quadrature oracle") {
    auto op = euler();
    auto S = multisum(euler_series(), op, 0.0);
    for (double z : {0.05, 0.1, 0.2, 0.5}) {
        double ref = oracle::euler_sum(z);
        CHECK(std::abs(ref - oracle::euler_sum_expint(z)) < 1e-13 * ref);
        CHECK(oracle::rel(S.evaluate(cplx(z)), cplx(ref)) < 1e-8);
    }
    CHECK_THROWS_AS(multisum(euler_series(), op, pi), error);
    try {
        S.evaluate(sector_point::from_polar(0.1, 2.5));
        FAIL("expected a domain error");
    } catch (const error& e) {
        CHECK(e.kind() == error_kind::domain);
    }
}

TEST_CASE("convergent passthrough") {
    linear_operator op;
    op.coefficients = {polynomial({0.0, -1.0}), polynomial({1.0, -1.0})};
    std::vector<cplx> c(60, 1.0);
    auto S = multisum(power_series(c), op, 0.0);
    CHECK(std::abs(S.evaluate(cplx(0.3)) - 1.0 / 0.7) < 1e-12);
}

TEST_CASE("multisum output satisfies the equation") {
    auto op = euler();
    auto S = multisum(euler_series(), op, 0.1);
    for (cplx z : {cplx(0.1, 0.02), cplx(0.2, -0.05), cplx(0.3, 0.1)}) {
        auto sp = sector_point::from_complex(z);
        cplx f = S.evaluate(sp);
        cplx df = log_derivative([&](const sector_point& p) { return S.evaluate(p); }, sp);
        cplx res = f + z * df - z;
        double scale = std::max({std::abs(f), std::abs(z * df), std::abs(z)});
        CHECK(std::abs(res) < 1e-5 * scale);
    }
}

TEST_CASE("Stokes jump across pi") {
    auto op = euler();
    auto s = euler_series();
    auto z = sector_point::from_polar(0.2, pi);
    cplx j = stokes_jump(s, op, pi, z);
    CHECK(std::abs(std::abs(j * std::exp(-1.0 / z.value())) - 2 * pi) < 1e-6);
    // residue of e^{-zeta/z}/(1+zeta) at -1 times 2 pi i, up to orientation
    cplx res = 2.0 * pi * cplx(0, 1) * std::exp(1.0 / z.value());
    CHECK(std::min(std::abs(j - res), std::abs(j + res)) < 1e-6 * std::abs(res));
    std::vector<cplx> norm;
    for (double r : {0.15, 0.2, 0.3}) {
        auto w = sector_point::from_polar(r, pi);
        norm.push_back(stokes_jump(s, op, pi, w) / std::exp(1.0 / w.value()));
    }
    CHECK(std::abs(norm[0] - norm[1]) < 1e-6);
    CHECK(std::abs(norm[2] - norm[1]) < 1e-6);
    linear_operator flat;
    flat.coefficients = {polynomial({0.0, -1.0}), polynomial::constant(1.0)};
    CHECK(stokes_jump(solve_series(flat, std::nullopt, 0, 1.0, 40).series, flat, 1.0, sector_point::from_complex(0.4)) ==
          cplx(0.0));
}

TEST_CASE("formal Borel identities on random polynomials") {
    std::mt19937 rng(99);
    for (int trial = 0; trial < 20; ++trial) {
        auto g = oracle::random_poly(rng, 8);
        std::vector<cplx> dg(g.size()), zg(g.size() + 1, 0.0);
        for (std::size_t n = 0; n < g.size(); ++n) {
            dg[n] = double(n) * g[n];
            zg[n + 1] = g[n];
        }
        auto B = [](const std::vector<cplx>& c) { return formal_borel(power_series(c), rational(1)); };
        auto lhs1 = B(dg), b = B(g), bz = B(zg);
        for (std::size_t n = 0; n < g.size(); ++n) {
            CHECK(std::abs(lhs1[n] - double(n) * b[n]) <= 1e-12 * std::abs(b[n]) + 1e-300);
            // delta B(z f) = zeta B(f)
            CHECK(std::abs(double(n + 1) * bz[n + 1] - b[n]) <= 1e-12 * std::abs(b[n]) + 1e-300);
        }
    }
}

TEST_CASE("Laplace identities on random polynomials") {
    std::mt19937 rng(123);
    const double d = 0.2;
    for (int trial = 0; trial < 5; ++trial) {
        auto g = oracle::random_poly(rng, 8);
        auto ray = [&](std::function<cplx(cplx)> f) { return make_function_ray(std::move(f), d); };
        auto G = ray([&](cplx t) { return oracle::poly_eval(g, t); });
        auto dG = ray([&](cplx t) {
            cplx acc = 0.0, p = 1.0;
            for (std::size_t n = 0; n < g.size(); ++n, p *= t) acc += double(n) * g[n] * p;
            return acc;
        });
        auto zG = ray([&](cplx t) { return t * oracle::poly_eval(g, t); });
        auto L = [&](const ray_handle& h, const sector_point& z) { return laplace_along_ray(*h, rational(1), d, z); };
        for (auto z : {sector_point::from_polar(0.3, 0.1), sector_point::from_polar(0.5, 0.4)}) {
            cplx Lg = L(G, z);
            CHECK(oracle::rel(Lg, oracle::laplace_poly(g, z.value())) < 1e-8);
            cplx dLg = log_derivative([&](const sector_point& p) { return L(G, p); }, z);
            CHECK(oracle::rel(L(dG, z), dLg) < 1e-8);
            cplx zv = z.value();
            CHECK(oracle::rel(zv * L(dG, z), L(zG, z) - zv * Lg) < 1e-8);
        }
    }
}
