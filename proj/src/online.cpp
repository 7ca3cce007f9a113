#include "uavnoma/online.hpp"

#include "uavnoma/asm.hpp"
#include "uavnoma/power.hpp"

#include <algorithm>
#include <optional>

namespace uavnoma {

namespace {

Vec2 step_toward(const Vec2& from, const Vec2& to, double s_max) {
    const Vec2 d = to - from;
    const double dist = d.norm();
    if (dist <= s_max) return to;
    return from + d * (s_max / dist);
}

// Point on the segment toward q[N] halfway between the shortest step that
// keeps q[N] reachable and the longest allowed one. Starting off both disk
// rims keeps the first trajectory subproblem from being pinned there.
Vec2 interior_start(const OnlineState& state, const ScenarioConfig& cfg, bool reachability) {
    const double s_max = cfg.step_max();
    const double dist = (cfg.end_point - state.position).norm();
    const double shortest = reachability ? std::max(0.0, dist - state.s_remain(cfg)) : 0.0;
    return step_toward(state.position, cfg.end_point, 0.5 * (shortest + std::min(s_max, dist)));
}

bool strictly_reachable(const Vec2& q, const OnlineState& state, const ScenarioConfig& cfg, bool reachability) {
    const double margin = 1e-3 * cfg.step_max();
    if ((q - state.position).norm() > cfg.step_max() - margin) return false;
    return !reachability || (q - cfg.end_point).norm() < state.s_remain(cfg) - margin;
}

// Second start, pulled toward the centroid of the observed users and kept
// strictly inside the reachable set. Empty when it collapses onto the first.
std::optional<Vec2> centroid_start(const OnlineState& state, const ScenarioConfig& cfg, bool reachability,
                                   const Vec2& first) {
    Vec2 c = Vec2::Zero();
    int n = 0;
    for (const auto& g : state.users)
        for (const auto& r : g) {
            c += r;
            ++n;
        }
    if (n == 0) return std::nullopt;
    const Vec2 target = step_toward(state.position, c / n, 0.5 * cfg.step_max());
    double lo = 0.0, hi = 1.0;
    if (!strictly_reachable(target, state, cfg, reachability)) {
        for (int k = 0; k < 40; ++k) {
            const double mid = 0.5 * (lo + hi);
            (strictly_reachable(first + mid * (target - first), state, cfg, reachability) ? lo : hi) = mid;
        }
        hi = lo;
    }
    const Vec2 q = first + hi * (target - first);
    if ((q - first).norm() <= cfg.eps_traj || !strictly_reachable(q, state, cfg, reachability)) return std::nullopt;
    return q;
}

Eigen::VectorXd slot_min_rate(const ScenarioConfig& cfg, int s, double scale) {
    Eigen::VectorXd r(cfg.num_groups());
    for (int g = 0; g < cfg.num_groups(); ++g) r(g) = cfg.min_rate[g][s] * scale;
    return r;
}

Eigen::VectorXd start_powers(const OnlineState& st, const ScenarioConfig& cfg) {
    if (st.prev_powers.size() == cfg.num_groups()) return st.prev_powers;
    return Eigen::VectorXd::Constant(cfg.num_groups(), cfg.p_max / (2.0 * cfg.num_groups()));
}

Eigen::VectorXd rates_at(const Vec2& q, const SlotUsers& users, const Eigen::VectorXd& p, const ScenarioConfig& cfg) {
    const SlotChannelState st = slot_channel_state(q, users, cfg.altitude, cfg.pathloss_ref);
    Eigen::VectorXd r(p.size());
    for (int g = 0; g < p.size(); ++g) r(g) = multicast_capacity(p, st, g, cfg.noise_power);
    return r;
}

// Mini alternating loop for one slot at the given QoS scale.
SlotPlan mini_asm(const OnlineState& state, const ScenarioConfig& cfg, const OnlineOptions& opt, const Vec2& start,
                  double& scale, int& relaxations) {
    const int s = state.slot - 1;
    SlotPlan plan;
    Vec2 q = start;
    Eigen::VectorXd p = start_powers(state, cfg);
    TrajectoryOptions topt = TrajectoryOptions::from(cfg);
    const PowerOptions popt = PowerOptions::from(cfg);
    // Powers carried over from the previous slot can make the first
    // trajectory step infeasible once the SIC order changes; refit them at
    // the initial point first, without spending a relaxation.
    try {
        const SlotChannelState st0 = slot_channel_state(q, state.users, cfg.altitude, cfg.pathloss_ref);
        p = optimize_powers({st0}, p, slot_min_rate(cfg, s, scale), popt).p.col(0);
    } catch (const InfeasibleError&) {
    }
    for (int k = 1; k <= cfg.limits.max_online_asm_iter; ++k) {
        TrajectoryWindow w;
        w.points = {state.position, q};
        w.pinned = {true, false};
        w.users = {state.users};
        w.powers = p;
        w.rate_enforced = {true};
        if (opt.reachability) w.anchor = AnchorDisk{1, cfg.end_point, state.s_remain(cfg)};
        const TrajectoryResult tr = with_qos_relaxation(scale, relaxations, [&](double sc) {
            w.min_rate.assign(cfg.num_groups(), std::vector<double>(1));
            for (int g = 0; g < cfg.num_groups(); ++g) w.min_rate[g][0] = cfg.min_rate[g][s] * sc;
            return optimize_window(w, topt);
        });
        const double move_q = (tr.points[1] - q).norm();
        q = tr.points[1];
        const SlotChannelState st = slot_channel_state(q, state.users, cfg.altitude, cfg.pathloss_ref);
        const PowerResult pr = with_qos_relaxation(scale, relaxations, [&](double sc) {
            return optimize_powers({st}, p, slot_min_rate(cfg, s, sc), popt);
        });
        const double move_p = (pr.p.col(0) - p).norm();
        p = pr.p.col(0);
        plan.iterations = k;
        if (move_q <= cfg.eps_traj && move_p <= cfg.eps_power) {
            plan.converged = true;
            break;
        }
    }
    plan.point = q;
    plan.powers = p;
    return plan;
}

}  // namespace

SlotPlan plan_slot(const OnlineState& state, const ScenarioConfig& cfg, const OnlineOptions& opt) {
    if (state.slot < 1 || state.slot >= cfg.num_slots) throw std::out_of_range("plan_slot: slot must be in 1..N-1");
    auto attempt = [&](const Vec2& start) {
        double scale = 1.0;
        int relaxations = 0;
        SlotPlan plan;
        try {
            plan = mini_asm(state, cfg, opt, start, scale, relaxations);
        } catch (const InfeasibleError&) {
            scale = 0.0;
            int unused = 0;
            plan = mini_asm(state, cfg, opt, start, scale, unused);
            plan.infeasible = true;
        }
        plan.relaxations = relaxations;
        plan.qos_scale = scale;
        plan.rates = rates_at(plan.point, state.users, plan.powers, cfg);
        return plan;
    };
    // The slot problem is not concave in q; a second start guards against
    // settling on the wrong side of the users.
    const Vec2 first = interior_start(state, cfg, opt.reachability);
    SlotPlan best = attempt(first);
    if (const auto second = centroid_start(state, cfg, opt.reachability, first)) {
        SlotPlan other = attempt(*second);
        const int iterations = best.iterations + other.iterations;
        if (other.qos_scale > best.qos_scale ||
            (other.qos_scale == best.qos_scale && other.rates.sum() > best.rates.sum()))
            best = std::move(other);
        best.iterations = iterations;
    }
    return best;
}

SlotPlan plan_final_slot(const OnlineState& state, const ScenarioConfig& cfg, const OnlineOptions& opt) {
    (void)opt;
    const int s = cfg.num_slots - 1;
    SlotPlan plan;
    const double s_max = cfg.step_max();
    // Reachability leaves q[N] within S_max (up to round-off); snap onto it.
    const double dist = (cfg.end_point - state.position).norm();
    plan.point = dist <= s_max + kTolGeom ? cfg.end_point : step_toward(state.position, cfg.end_point, s_max);
    const SlotChannelState st = slot_channel_state(plan.point, state.users, cfg.altitude, cfg.pathloss_ref);
    const PowerOptions popt = PowerOptions::from(cfg);
    const Eigen::VectorXd p0 = start_powers(state, cfg);
    double scale = 1.0;
    int relaxations = 0;
    try {
        const PowerResult pr = with_qos_relaxation(scale, relaxations, [&](double sc) {
            return optimize_powers({st}, p0, slot_min_rate(cfg, s, sc), popt);
        });
        plan.powers = pr.p.col(0);
        plan.converged = pr.converged;
        plan.iterations = static_cast<int>(pr.iterates.size());
    } catch (const InfeasibleError&) {
        scale = 0.0;
        const PowerResult pr = optimize_powers({st}, p0, slot_min_rate(cfg, s, 0.0), popt);
        plan.powers = pr.p.col(0);
        plan.converged = pr.converged;
        plan.infeasible = true;
    }
    plan.relaxations = relaxations;
    plan.qos_scale = scale;
    plan.rates = rates_at(plan.point, state.users, plan.powers, cfg);
    return plan;
}

RunResult run_online(const ScenarioConfig& cfg, const UserTrace& trace, const OnlineOptions& opt) {
    cfg.validate();
    if (trace.num_slots() != cfg.num_slots) throw ScenarioError("trace: slot count differs from num_slots");
    const int N = cfg.num_slots;
    const int G = cfg.num_groups();
    RunResult res;
    res.mode = opt.reachability ? "online" : "online-no-reachability";
    res.seed = cfg.rng_seed;
    res.trajectory.points.assign(N + 1, cfg.start_point);
    res.powers.p.resize(G, N);
    res.rates.resize(G, N);
    res.converged = true;
    OnlineState state;
    state.position = cfg.start_point;
    double cumulative = 0.0;
    double min_scale = 1.0;
    res.objective_history.push_back(0.0);
    for (int n = 1; n <= N; ++n) {
        state.slot = n;
        state.users = trace.slot(n - 1);
        const SlotPlan plan = n < N ? plan_slot(state, cfg, opt) : plan_final_slot(state, cfg, opt);
        res.trajectory.points[n] = plan.point;
        res.powers.p.col(n - 1) = plan.powers;
        res.rates.col(n - 1) = plan.rates;
        res.converged = res.converged && plan.converged;
        res.iterations += plan.iterations;
        if (plan.relaxations > 0 || plan.infeasible) {
            res.infeasible_slots.push_back(n);
            res.qos_relaxed = true;
        }
        min_scale = std::min(min_scale, plan.qos_scale);
        cumulative += plan.rates.sum();
        res.objective_history.push_back(cumulative);
        res.log.push_back({"online", n, plan.iterations, (plan.point - state.position).norm(), cumulative});
        state.position = plan.point;
        state.prev_powers = plan.powers;
    }
    res.qos_scale = min_scale;
    return res;
}

RunResult run_online(const ScenarioConfig& cfg, const MobilityConfig& mobility, std::uint64_t seed,
                     const OnlineOptions& opt, UserLayout layout) {
    const UserTrace trace = generate_trace(cfg, mobility, seed, layout);
    RunResult res = run_online(cfg, trace, opt);
    res.seed = seed;
    return res;
}

}  // namespace uavnoma
