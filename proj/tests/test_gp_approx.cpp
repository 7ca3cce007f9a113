#include "uavnoma/gp_approx.hpp"

#include "support.hpp"

#include <doctest.h>

#include <random>

using namespace uavnoma;
using namespace uavnoma::gp;

namespace {

double exact_speed_ratio(const Vec2& q, const Vec2& qp, double s) {
    return q.squaredNorm() + qp.squaredNorm() == 0.0
               ? 0.0
               : (q.squaredNorm() + qp.squaredNorm()) / (2.0 * q.dot(qp) + s * s);
}

double exact_distance_ratio(const Vec2& q, double L, const Vec2& r, double H) {
    return (q.squaredNorm() + r.squaredNorm() + H * H) / (2.0 * q.dot(r) + L);
}

}  // namespace

TEST_CASE("speed weights") {
    const double c = 7.0;
    const auto w = speed_weights({c, c}, {c, c}, std::sqrt(2.0) * c);
    CHECK(w.x == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
    CHECK(w.y == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
    CHECK(w.rest == doctest::Approx(1.0 / 3.0).epsilon(1e-14));

    const auto small = speed_weights({40, 60}, {45, 55}, 1e-6);
    CHECK(small.rest <= 2e-9);
    CHECK(small.x + small.y + small.rest == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(small.x + small.y == doctest::Approx(1.0).epsilon(1e-8));

    const auto n = speed_weights({120, 130}, {110, 140}, 20.0);
    CHECK(n.x == doctest::Approx(0.417721518987341772151898734177).epsilon(1e-14));
    CHECK(n.y == doctest::Approx(0.57594936708860759493670886076).epsilon(1e-14));
    CHECK(n.rest == doctest::Approx(0.00632911392405063291139240506329).epsilon(1e-13));

    CHECK_THROWS_AS(speed_weights({-1, 5}, {5, 5}, 10.0), std::domain_error);
}

TEST_CASE("distance epigraph weights") {
    const auto w = distance_epigraph_weights({95, 160}, {130, 75}, 2500.0);
    CHECK(w.x == doctest::Approx(0.482421875).epsilon(1e-14));
    CHECK(w.y == doctest::Approx(0.46875).epsilon(1e-14));
    CHECK(w.rest == doctest::Approx(0.048828125).epsilon(1e-13));

    const auto big = distance_epigraph_weights({1, 1}, {1, 1}, 1e12);
    CHECK(big.rest == doctest::Approx(1.0).epsilon(1e-8));

    const double c = 3.0;
    const auto sym = distance_epigraph_weights({c, c}, {c, c}, 2.0 * c * c);
    CHECK(sym.x == doctest::Approx(1.0 / 3.0));
    CHECK(sym.rest == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("objective weights") {
    const auto w = objective_term_weights(900.0, 2e-9, 0.5, 1e-3);
    CHECK(w.nu == doctest::Approx(0.00358708648864089278597050617776).epsilon(1e-13));
    CHECK(w.xi == doctest::Approx(0.996412913511359107214029493822).epsilon(1e-14));

    const auto floor = objective_term_weights(900.0, 1e-9, kPowerFloor, 1e-3);
    CHECK(floor.nu > 0.9);
    const auto tiny = objective_term_weights(900.0, 1e-9, 1e-20, 1e-3);
    CHECK(tiny.xi == doctest::Approx(kMinWeight).epsilon(1e-6));
    CHECK(tiny.nu + tiny.xi == doctest::Approx(1.0).epsilon(1e-12));

    const auto half = objective_term_weights(1000.0, 1e-9, 1e-3, 1e-3);
    CHECK(half.nu == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(half.xi == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("speed condensation") {
    const Vec2 q{130, 95}, qp{120, 100};
    const double s = 20.0;
    const auto w = speed_weights(q, qp, s);
    CHECK(speed_constraint_monomial(q, qp, w, s) ==
          doctest::Approx(exact_speed_ratio(q, qp, s)).epsilon(1e-12));

    const Vec2 same{110, 90};
    const auto ws = speed_weights(same, same, s);
    const double v = speed_constraint_monomial(same, same, ws, s);
    CHECK(v == doctest::Approx(2.0 * same.squaredNorm() / (2.0 * same.squaredNorm() + s * s)));
    CHECK(v < 1.0);

    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> d(1.0, 201.0);
    for (int i = 0; i < 100; ++i) {
        const Vec2 a{d(rng), d(rng)}, b{d(rng), d(rng)};
        CHECK(speed_constraint_monomial(a, b, w, s) >= exact_speed_ratio(a, b, s) * (1.0 - 1e-12));
    }
}

TEST_CASE("distance condensation") {
    const Vec2 q{95, 160}, r{130, 75};
    const double H = 25.0;
    const double L = H * H + (q - r).squaredNorm();
    const auto w = distance_epigraph_weights(q, r, L);
    CHECK(distance_epigraph_monomial(q, L, r, H, w) == doctest::Approx(1.0).epsilon(1e-12));
    double prev = distance_epigraph_monomial(q, L, r, H, w);
    for (double k = 1.1; k < 10.0; k *= 1.3) {
        const double v = distance_epigraph_monomial(q, L * k, r, H, w);
        CHECK(v < prev);
        prev = v;
    }
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> d(1.0, 201.0), dl(625.0, 20000.0);
    for (int i = 0; i < 100; ++i) {
        const Vec2 a{d(rng), d(rng)};
        const double l = dl(rng);
        CHECK(distance_epigraph_monomial(a, l, r, H, w) >= exact_distance_ratio(a, l, r, H) * (1.0 - 1e-12));
    }
}

TEST_CASE("gamma term") {
    const double L = 1400.0, Psi = 3e-7, p = 0.6, mu0 = 1e-3;
    const auto w = objective_term_weights(L, Psi, p, mu0);
    const double exact = L * Psi / (L * Psi + p * mu0);
    CHECK(gamma_term(L, Psi, p, mu0, w) == doctest::Approx(exact).epsilon(1e-12));
    CHECK(exact < 1.0);

    // log-linear along a line in (ln L, ln Psi)
    auto lg = [&](double t) { return std::log(gamma_term(L * std::exp(t), Psi * std::exp(-0.5 * t), p, mu0, w)); };
    CHECK(lg(1.0) - lg(0.0) == doctest::Approx(lg(2.0) - lg(1.0)).epsilon(1e-10));

    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> dl(625.0, 20000.0), dp(-21.0, -12.0);
    for (int i = 0; i < 100; ++i) {
        const double l = dl(rng), ps = std::exp(dp(rng));
        CHECK(gamma_term(l, ps, p, mu0, w) >= l * ps / (l * ps + p * mu0) * (1.0 - 1e-12));
    }
}

TEST_CASE("interference epigraph") {
    CHECK(interference_epigraph_constraint(2e-9, 900.0, 0.0, 1e-9, 1e-3) == doctest::Approx(0.5));
    const double L = 900.0, S = 0.8, s2 = 1e-9, mu0 = 1e-3;
    const double tight = mu0 / L * S + s2;
    CHECK(interference_epigraph_constraint(tight, L, S, s2, mu0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(interference_epigraph_constraint(2.0 * tight, L, S, s2, mu0) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("min-rate constraint") {
    CHECK(min_rate_constraint_gp(0.7, 0.0) == doctest::Approx(0.7));
    const double c = bits_to_nats(0.25);
    CHECK(std::exp(-c) == doctest::Approx(0.840896415253714543).epsilon(1e-15));
    CHECK(min_rate_constraint_gp(0.840896415253714543, c) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("GP builders reject non-positive coefficients") {
    GeometricProgram g;
    g.num_vars = 1;
    g.objective = Posynomial{Monomial::variable(0)};
    g.add_constraint(Posynomial{Monomial{-1.0, {{0, 1.0}}}}, "bad[1]");
    CHECK_THROWS_WITH_AS(gp_to_convex(g), doctest::Contains("bad[1]"), std::invalid_argument);
}
