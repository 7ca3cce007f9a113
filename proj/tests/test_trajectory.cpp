#include "uavnoma/power.hpp"
#include "uavnoma/trajectory.hpp"

#include "support.hpp"

#include <doctest.h>

using namespace uavnoma;
using test::make_config;

TEST_CASE("tight epigraphs") {
    auto cfg = make_config(2, 1, 2, 4.0, {-10, 0}, {10, 0});
    const UserTrace trace = UserTrace::constant({{{0, 0}}, {{30, 10}}}, 2);
    Trajectory traj{{{-10, 0}, {0, 0}, {10, 0}}};
    const PowerSchedule p = PowerSchedule::uniform(2, 2, 0.5);
    const Epigraphs e = initialize_epigraphs(traj, trace, p, cfg);
    CHECK(e.L[0][0] == doctest::Approx(625.0));
    // group 0 is overhead at slot 0 and so the strongest: noise only
    CHECK(e.Psi[0][0] == doctest::Approx(cfg.noise_power).epsilon(1e-14));
    const double h1 = cfg.pathloss_ref / e.L[1][0];
    CHECK(e.Psi[1][0] == doctest::Approx(h1 * 0.5 + cfg.noise_power).epsilon(1e-14));

    auto multi = make_config(1, 4, 1, 2.0, {0, 0}, {5, 0});
    const auto users = test::random_users(multi, 9);
    const UserTrace tr = UserTrace::constant(users, 1);
    Trajectory t1{{{0, 0}, {5, 0}}};
    const Epigraphs e1 = initialize_epigraphs(t1, tr, PowerSchedule::uniform(1, 1, 1.0), multi);
    double worst = 0.0;
    for (const auto& r : users[0]) worst = std::max(worst, 625.0 + (Vec2(5, 0) - r).squaredNorm());
    CHECK(e1.L[0][0] == doctest::Approx(worst).epsilon(1e-14));
}

TEST_CASE("one slot: nothing to move") {
    auto cfg = make_config(2, 2, 1, 2.0, {-5, 0}, {5, 0});
    const UserTrace trace = UserTrace::constant(test::random_users(cfg, 1), 1);
    const Trajectory init = Trajectory::straight_line(cfg.start_point, cfg.end_point, 1);
    const auto res = solve_trajectory(initial_powers(cfg), trace, cfg, init);
    REQUIRE(res.points.size() == 2);
    CHECK(res.points[0] == init.points[0]);
    CHECK(res.points[1] == init.points[1]);
    CHECK(res.epigraphs.L[0][0] > 0.0);
}

TEST_CASE("single user: the UAV flies over the user") {
    auto cfg = make_config(1, 1, 4, 20.0, {-30, 0}, {30, 0});
    const UserTrace trace = UserTrace::constant({{{0, 0}}}, 4);
    const PowerSchedule p = PowerSchedule::uniform(1, 4, cfg.p_max);
    const auto res = solve_trajectory(p, trace, cfg, Trajectory::straight_line(cfg.start_point, cfg.end_point, 4));
    double closest = 1e9;
    for (int n = 1; n < 4; ++n) closest = std::min(closest, res.points[n].norm());
    CHECK(closest <= 2.0 * cfg.eps_traj);
    CHECK(res.converged);
}

TEST_CASE("no slack: the straight line is the only path") {
    auto cfg = make_config(2, 2, 4, 4.0, {-20, 0}, {20, 0});
    REQUIRE(cfg.num_slots * cfg.step_max() == doctest::Approx(40.0));
    const UserTrace trace = UserTrace::constant(test::random_users(cfg, 3), 4);
    const Trajectory init = Trajectory::straight_line(cfg.start_point, cfg.end_point, 4);
    const auto res = solve_trajectory(initial_powers(cfg), trace, cfg, init);
    for (int n = 0; n <= 4; ++n) CHECK((res.points[n] - init.points[n]).norm() <= kTolGeom);
}

TEST_CASE("SCA iterates stay feasible and ascend") {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        auto cfg = make_config(3, 3, 5, 10.0, {-25, 0}, {25, 0}, 0.25);
        const UserTrace trace = UserTrace::constant(test::random_users(cfg, seed), 5);
        const PowerSchedule p = initial_powers(cfg);
        const Trajectory init = Trajectory::straight_line(cfg.start_point, cfg.end_point, 5);
        const double before = total_objective(init, p, trace, cfg);
        const auto res = solve_trajectory(p, trace, cfg, init);
        Trajectory out{res.points};
        CHECK(check_feasibility(out, p, trace, cfg).feasible());
        CHECK(total_objective(out, p, trace, cfg) >= before - 1e-6);
        double prev = before;
        for (const auto& it : res.iterates) {
            CHECK(it.objective >= prev - 1e-6);
            prev = it.objective;
        }
        CHECK(res.iterates.size() <= 50);

        // restarting at the returned point barely moves
        const auto again = solve_trajectory(p, trace, cfg, out);
        CHECK(trajectory_distance(Trajectory{again.points}, out) <= cfg.eps_traj);
    }
}

TEST_CASE("infeasible QoS is reported with its family") {
    auto cfg = make_config(2, 2, 3, 6.0, {-20, 0}, {20, 0}, 40.0);
    const UserTrace trace = UserTrace::constant(test::random_users(cfg, 4), 3);
    const Trajectory init = Trajectory::straight_line(cfg.start_point, cfg.end_point, 3);
    try {
        solve_trajectory(initial_powers(cfg), trace, cfg, init);
        FAIL("expected InfeasibleError");
    } catch (const InfeasibleError& e) {
        CHECK(e.family() == "min-rate");
    }
}
