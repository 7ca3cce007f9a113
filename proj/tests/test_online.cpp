#include "uavnoma/io.hpp"
#include "uavnoma/online.hpp"
#include "uavnoma/runner.hpp"

#include "support.hpp"

#include <doctest.h>

using namespace uavnoma;
using test::make_config;

namespace {

Scenario shipped(const char* name) { return load_scenario(std::string(UAVNOMA_SCENARIO_DIR) + "/" + name + ".json"); }

}  // namespace

TEST_CASE("terminal point is reached") {
    const Scenario sc = shipped("fig8-10");
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        CAPTURE(seed);
        const RunOutput out = run_scenario(sc, RunMode::Online, seed);
        const auto& pts = out.result.trajectory.points;
        CHECK((pts.back() - sc.config.end_point).norm() <= 1e-6);
        CHECK(pts.front() == sc.config.start_point);
        for (std::size_t n = 1; n < pts.size(); ++n)
            CHECK((pts[n] - pts[n - 1]).norm() <= sc.config.step_max() + kTolGeom);
        CHECK(out.result.objective_history.size() == static_cast<std::size_t>(sc.config.num_slots) + 1);
        for (std::size_t i = 1; i < out.result.objective_history.size(); ++i)
            CHECK(out.result.objective_history[i] >= out.result.objective_history[i - 1]);
    }
}

TEST_CASE("narrow lens: the only reachable point") {
    auto cfg = make_config(1, 1, 4, 4.0, {-20, 0}, {20, 0});
    REQUIRE(cfg.step_max() == doctest::Approx(10.0));
    OnlineState st;
    st.slot = 2;
    st.position = {-10, 0};  // 30 m out with 3 slots of 10 m left
    st.users = {{{0, 40}}};
    const SlotPlan plan = plan_slot(st, cfg);
    CHECK((plan.point - Vec2(0, 0)).norm() <= 1e-4);
    CHECK((plan.point - st.position).norm() <= cfg.step_max() + kTolGeom);
    CHECK((plan.point - cfg.end_point).norm() <= st.s_remain(cfg) + kTolGeom);
}

TEST_CASE("the plan for a slot ignores later positions") {
    auto cfg = make_config(2, 2, 5, 10.0, {-25, 0}, {25, 0}, 0.25);
    const auto users = test::random_users(cfg, 3);
    const UserTrace a = UserTrace::constant(users, 5);
    UserTrace b = a;
    for (int s = 2; s < 5; ++s)
        for (auto& g : b.positions[s])
            for (auto& p : g) p = -p;
    const RunResult ra = run_online(cfg, a);
    const RunResult rb = run_online(cfg, b);
    CHECK(ra.trajectory.points[1] == rb.trajectory.points[1]);
    CHECK(ra.trajectory.points[2] == rb.trajectory.points[2]);
    CHECK(ra.powers.p.col(0) == rb.powers.p.col(0));
    CHECK(ra.powers.p.col(1) == rb.powers.p.col(1));
    CHECK(ra.trajectory.points[3] != rb.trajectory.points[3]);
}

TEST_CASE("final slot with one group uses full power") {
    auto cfg = make_config(1, 2, 3, 6.0, {-20, 0}, {20, 0});
    OnlineState st;
    st.slot = 3;
    st.position = {15, 0};
    st.users = {{{10, 10}, {-5, 0}}};
    const SlotPlan plan = plan_final_slot(st, cfg);
    CHECK(plan.point == cfg.end_point);
    CHECK(plan.powers(0) == doctest::Approx(cfg.p_max).epsilon(1e-9));
}

TEST_CASE("without reachability the UAV parks at the hotspot") {
    const Scenario sc = shipped("hotspot");
    OnlineOptions free;
    free.reachability = false;
    const RunOutput loose = run_scenario(sc, RunMode::Online, 1, free);
    const double miss = (loose.result.trajectory.points.back() - sc.config.end_point).norm();
    CHECK(miss > sc.config.step_max());

    const RunOutput tight = run_scenario(sc, RunMode::Online, 1);
    CHECK((tight.result.trajectory.points.back() - sc.config.end_point).norm() <= 1e-6);
    CHECK(loose.result.objective() > tight.result.objective());
}
