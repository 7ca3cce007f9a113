#include "uavnoma/mobility.hpp"

#include "support.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

using namespace uavnoma;
using test::make_config;

namespace {

MobilityConfig walk(double v1, double v2, double dt = 1.0) {
    MobilityConfig m;
    m.speed_min = v1;
    m.speed_max = v2;
    m.slot_duration = dt;
    return m;
}

}  // namespace

TEST_CASE("deterministic steps") {
    const auto m = walk(0, 0);
    Rng rng(1);
    const Vec2 p{12, -7};
    for (int i = 0; i < 100; ++i) CHECK(step_user(p, m, rng) == p);

    const auto m2 = walk(2, 2, 2.0);
    const Vec2 moved = step_user({0, 0}, 0.0, 2.0, m2);
    CHECK(moved.x() == doctest::Approx(4.0).epsilon(1e-14));
    CHECK(std::abs(moved.y()) < 1e-14);
}

TEST_CASE("specular reflection") {
    const Vec2 r = reflect_in_disk({45, 0}, {10, 0}, 50.0);
    CHECK(r.x() == doctest::Approx(45.0).epsilon(1e-12));
    CHECK(std::abs(r.y()) < 1e-12);

    const Vec2 inside = reflect_in_disk({0, 0}, {3, 4}, 50.0);
    CHECK((inside - Vec2(3, 4)).norm() < 1e-14);

    // path length is kept
    const Vec2 glance = reflect_in_disk({0, 40}, {30, 30}, 50.0);
    CHECK(glance.norm() <= 50.0 + 1e-9);
}

TEST_CASE("users stay inside the disk") {
    const auto m = walk(0, 12, 1.0);
    Rng rng(3);
    Vec2 p = uniform_in_disk(50.0, rng);
    for (int i = 0; i < 20000; ++i) {
        p = step_user(p, m, rng);
        REQUIRE(p.norm() <= 50.0 + 1e-9);
    }
}

TEST_CASE("direction frequencies") {
    const auto m = walk(1, 1, 1.0);
    Rng rng(5);
    const auto& dirs = MobilityConfig::directions();
    std::array<int, 8> count{};
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const Vec2 d = step_user({0, 0}, m, rng);
        const double a = std::atan2(d.y(), d.x());
        int best = 0;
        for (int k = 1; k < 8; ++k)
            if (std::abs(std::remainder(a - dirs[k], 2 * std::numbers::pi)) <
                std::abs(std::remainder(a - dirs[best], 2 * std::numbers::pi)))
                best = k;
        ++count[best];
    }
    double chi2 = 0.0;
    for (int c : count) chi2 += (c - n / 8.0) * (c - n / 8.0) / (n / 8.0);
    CHECK(chi2 < 18.475);  // chi-square, 7 dof, alpha 0.01
}

TEST_CASE("uniform disk sampling: r^2/R^2 is uniform") {
    Rng rng(7);
    const int n = 20000;
    std::vector<double> u(n);
    for (double& x : u) {
        const Vec2 p = uniform_in_disk(50.0, rng);
        x = p.squaredNorm() / 2500.0;
    }
    std::sort(u.begin(), u.end());
    double d = 0.0;
    for (int i = 0; i < n; ++i) d = std::max({d, (i + 1.0) / n - u[i], u[i] - double(i) / n});
    CHECK(d < 1.628 / std::sqrt(double(n)));
}

TEST_CASE("group sizes") {
    Rng rng(9);
    const double lambda = 6.0;
    const int n = 20000;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        const int k = draw_group_size(lambda, rng);
        REQUIRE(k >= 1);
        sum += k;
    }
    CHECK(std::abs(sum / n - lambda) <= 3.0 * std::sqrt(lambda / n));
    for (int i = 0; i < 100; ++i) CHECK(draw_group_size(1e-12, rng) == 1);

    std::vector<Rng> rngs{group_size_stream(1, 0), group_size_stream(1, 1)};
    const auto ch = vary_group_sizes({3, 4}, 3.0, rngs);
    for (int g = 0; g < 2; ++g) {
        CHECK(ch.sizes[g] >= 1);
        CHECK(ch.sizes[g] == (g == 0 ? 3 : 4) + ch.arrivals[g] - ch.departures[g]);
        CHECK((ch.arrivals[g] == 0 || ch.departures[g] == 0));
    }
}

TEST_CASE("traces are reproducible and streams are per user") {
    auto cfg = make_config(2, 3, 8, 8.0, {-25, 0}, {25, 0});
    const auto m = MobilityConfig::from(cfg, 0.0, 3.0, 0.0);
    const UserTrace a = generate_trace(cfg, m, 11);
    const UserTrace b = generate_trace(cfg, m, 11);
    CHECK(a.positions == b.positions);
    CHECK(generate_trace(cfg, m, 12).positions != a.positions);

    auto bigger = cfg;
    bigger.users_per_group = {5, 3, 2};
    const UserTrace c = generate_trace(bigger, m, 11);
    for (int s = 0; s < 8; ++s)
        for (int g = 0; g < 2; ++g)
            for (int u = 0; u < 3; ++u) CHECK(c.positions[s][g][u] == a.positions[s][g][u]);

    for (const auto& slot : a.positions)
        for (const auto& grp : slot)
            for (const auto& p : grp) CHECK(p.norm() <= cfg.coverage_radius + 1e-9);
}

TEST_CASE("group size variation keeps surviving users") {
    auto cfg = make_config(2, 3, 10, 10.0, {-25, 0}, {25, 0});
    const auto m = MobilityConfig::from(cfg, 0.0, 0.0, 3.0);
    const UserTrace t = generate_trace(cfg, m, 4);
    bool changed = false;
    for (int s = 1; s < 10; ++s)
        for (int g = 0; g < 2; ++g) {
            const auto& before = t.positions[s - 1][g];
            const auto& after = t.positions[s][g];
            REQUIRE(!after.empty());
            changed = changed || before.size() != after.size();
            // zero speed: the common prefix does not move
            for (std::size_t u = 0; u < std::min(before.size(), after.size()); ++u) CHECK(after[u] == before[u]);
        }
    CHECK(changed);
}

TEST_CASE("pool layout regroups the same users") {
    auto cfg = make_config(2, 3, 2, 2.0, {-25, 0}, {25, 0});
    const auto m = MobilityConfig::from(cfg, 0.0, 0.0, 0.0);
    auto three = cfg;
    three.users_per_group = {2, 2, 2};
    const UserTrace a = generate_trace(cfg, m, 8, UserLayout::Pool);
    const UserTrace b = generate_trace(three, m, 8, UserLayout::Pool);
    std::vector<Vec2> pa, pb;
    for (const auto& g : a.positions[0]) pa.insert(pa.end(), g.begin(), g.end());
    for (const auto& g : b.positions[0]) pb.insert(pb.end(), g.begin(), g.end());
    CHECK(pa == pb);
}
