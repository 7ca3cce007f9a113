#include "uavnoma/asm.hpp"

#include "uavnoma/power.hpp"
#include "uavnoma/trajectory.hpp"

#include <sstream>

namespace uavnoma {

namespace {

void check_trace(const ScenarioConfig& cfg, const UserTrace& trace, OfflineMode mode) {
    if (trace.num_slots() != cfg.num_slots)
        throw ScenarioError("trace: expected " + std::to_string(cfg.num_slots) + " slots, got " +
                            std::to_string(trace.num_slots()));
    for (const auto& slot : trace.positions) {
        if (static_cast<int>(slot.size()) != cfg.num_groups()) throw ScenarioError("trace: group count mismatch");
        for (const auto& grp : slot)
            if (grp.empty()) throw ScenarioError("trace: empty group");
    }
    if (mode == OfflineMode::Fixed && !trace.is_static())
        throw ScenarioError("trace: fixed mode needs users that do not move");
}

void check_bound(double objective, double bound) {
    if (objective > bound * (1.0 + 1e-12)) {
        std::ostringstream os;
        os << "objective " << objective << " exceeds its upper bound " << bound;
        throw std::logic_error(os.str());
    }
}

}  // namespace

RunResult run_offline(const ScenarioConfig& cfg, const UserTrace& trace, OfflineMode mode) {
    cfg.validate();
    check_trace(cfg, trace, mode);
    RunResult res;
    res.mode = mode == OfflineMode::Fixed ? "offline-fixed" : "offline-mobile";
    res.seed = cfg.rng_seed;
    Trajectory traj = Trajectory::straight_line(cfg.start_point, cfg.end_point, cfg.num_slots);
    PowerSchedule powers = initial_powers(cfg);
    const double bound = objective_upper_bound(cfg);
    double scale = 1.0;
    int relaxations = 0;

    double obj = total_objective(traj, powers, trace, cfg);
    check_bound(obj, bound);
    res.objective_history.push_back(obj);
    res.log.push_back({"asm", 0, 0, 0.0, obj});

    for (int t = 1; t <= cfg.limits.max_asm_iter; ++t) {
        const TrajectoryResult tr = with_qos_relaxation(
            scale, relaxations, [&](double sc) { return solve_trajectory(powers, trace, cfg, traj, sc); });
        for (const auto& it : tr.iterates) res.log.push_back({"trajectory", t, it.t1, it.movement, it.objective});
        Trajectory next_traj{tr.points};
        const double move_q = trajectory_distance(next_traj, traj);
        traj = next_traj;
        check_bound(total_objective(traj, powers, trace, cfg), bound);

        const PowerResult pr = with_qos_relaxation(
            scale, relaxations, [&](double sc) { return solve_power(traj, trace, cfg, powers, sc); });
        for (const auto& it : pr.iterates) res.log.push_back({"power", t, it.t2, it.movement, it.objective});
        const double move_p = (pr.p - powers.p).norm();
        powers.p = pr.p;

        obj = total_objective(traj, powers, trace, cfg);
        check_bound(obj, bound);
        res.objective_history.push_back(obj);
        res.log.push_back({"asm", t, 0, std::max(move_q, move_p), obj});
        res.iterations = t;
        if (move_q <= cfg.eps_traj && move_p <= cfg.eps_power) {
            res.converged = true;
            break;
        }
    }
    res.trajectory = traj;
    res.powers = powers;
    res.rates = slot_rates(traj, powers, trace, cfg);
    res.qos_relaxed = relaxations > 0;
    res.qos_scale = scale;
    return res;
}

}  // namespace uavnoma
