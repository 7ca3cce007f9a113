#pragma once

// Online planning: at slot n the UAV sees only the current user positions
// and picks q[n] and the slot powers with a small per-slot alternating
// loop. The anchor constraint ||q[n] - q[N]|| <= S_remain[n] keeps the
// terminal point reachable; the last slot only allocates power.

#include "uavnoma/mobility.hpp"
#include "uavnoma/model.hpp"
#include "uavnoma/trajectory.hpp"

#include <cstdint>
#include <optional>

namespace uavnoma {

struct OnlineOptions {
    bool reachability = true;
};

struct OnlineState {
    int slot = 1;          // n, 1-based
    Vec2 position;         // q[n-1]
    SlotUsers users;       // observed at the start of slot n
    Eigen::VectorXd prev_powers;  // empty for the first slot

    double s_remain(const ScenarioConfig& cfg) const { return cfg.step_max() * (cfg.num_slots - slot); }
};

struct SlotPlan {
    Vec2 point;
    Eigen::VectorXd powers;
    Eigen::VectorXd rates;
    int iterations = 0;
    bool converged = false;
    int relaxations = 0;
    bool infeasible = false;  // QoS dropped entirely for this slot
    double qos_scale = 1.0;
};

// Slots 1..N-1.
SlotPlan plan_slot(const OnlineState& state, const ScenarioConfig& cfg, const OnlineOptions& opt = {});
// Slot N: moves toward q[N] by at most S_max, then a power-only solve.
SlotPlan plan_final_slot(const OnlineState& state, const ScenarioConfig& cfg, const OnlineOptions& opt = {});

// Replays a trace slot by slot; trace.slot(s) is revealed at slot s + 1.
RunResult run_online(const ScenarioConfig& cfg, const UserTrace& trace, const OnlineOptions& opt = {});

RunResult run_online(const ScenarioConfig& cfg, const MobilityConfig& mobility, std::uint64_t seed,
                     const OnlineOptions& opt = {}, UserLayout layout = UserLayout::PerGroup);

}  // namespace uavnoma
