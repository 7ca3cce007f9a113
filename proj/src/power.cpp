#include "uavnoma/power.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <sstream>

namespace uavnoma {

namespace {

constexpr double kRateDeadzone = 1e-8;  // nats

double interferers(const Eigen::Ref<const Eigen::VectorXd>& p, int g, const SlotChannelState& st) {
    double s = 0.0;
    for (int j : st.sic_above[g]) s += p(j);
    return s;
}

double slot_objective(const Eigen::VectorXd& p, const SlotChannelState& st, double sigma2) {
    double total = 0.0;
    for (int g = 0; g < p.size(); ++g) total += multicast_capacity(p, st, g, sigma2);
    return total;
}

double slot_shortfall(const Eigen::VectorXd& p, const SlotChannelState& st, const Eigen::VectorXd& min_rate,
                      double sigma2) {
    double total = 0.0;
    for (int g = 0; g < p.size(); ++g)
        if (min_rate(g) > 0.0)
            total += std::max(0.0, min_rate(g) - multicast_capacity(p, st, g, sigma2) - kRateDeadzone);
    return total;
}

// Restores sum power and floor after a marginally relaxed solve.
void enforce_power_box(Eigen::VectorXd& p, double p_max) {
    for (int g = 0; g < p.size(); ++g) p(g) = std::clamp(p(g), kPowerFloor, p_max);
    const double total = p.sum();
    if (total > p_max) {
        p *= p_max / total;
        for (int g = 0; g < p.size(); ++g) p(g) = std::max(p(g), kPowerFloor);
    }
}

// Euclidean projection onto {p >= floor, sum p <= p_max}.
Eigen::VectorXd project_power_set(const Eigen::VectorXd& x, double p_max) {
    Eigen::VectorXd p = x.cwiseMax(kPowerFloor);
    if (p.sum() <= p_max) return p;
    // Shifted simplex projection: p = max(x - theta, floor), sum = p_max.
    std::vector<double> v(x.data(), x.data() + x.size());
    std::sort(v.begin(), v.end(), std::greater<>());
    const int G = static_cast<int>(v.size());
    double theta = 0.0, acc = 0.0;
    for (int k = 1; k <= G; ++k) {
        acc += v[k - 1];
        const double t = (acc - (p_max - (G - k) * kPowerFloor)) / k;
        if (k == G || v[k] - t <= kPowerFloor) {
            theta = t;
            break;
        }
    }
    for (int g = 0; g < G; ++g) p(g) = std::max(x(g) - theta, kPowerFloor);
    const double total = p.sum();
    if (total > p_max) p *= p_max / total;
    return p.cwiseMax(kPowerFloor);
}

// On flat stretches of the sum rate the D.C. iterates advance by nearly
// constant steps. Doubling the step along the last direction while the
// exact rate keeps improving and every true constraint holds skips them.
Eigen::VectorXd extrapolate(const Eigen::VectorXd& prev, const Eigen::VectorXd& cand, const SlotChannelState& st,
                            const Eigen::VectorXd& min_rate, const PowerOptions& o) {
    const Eigen::VectorXd d = cand - prev;
    if (d.norm() <= 0.1 * o.eps) return cand;
    Eigen::VectorXd best = cand;
    double best_obj = slot_objective(cand, st, o.sigma2);
    const double base_short = slot_shortfall(cand, st, min_rate, o.sigma2);
    for (double tau = 2.0; tau <= 1024.0; tau *= 2.0) {
        const Eigen::VectorXd x = project_power_set(prev + tau * d, o.p_max);
        if (x.sum() > o.p_max) break;
        if (slot_shortfall(x, st, min_rate, o.sigma2) > base_short + 1e-12) break;
        const double obj = slot_objective(x, st, o.sigma2);
        if (obj <= best_obj) break;
        best = x;
        best_obj = obj;
    }
    return best;
}

// Best powers for the slot's fixed SIC order. With T_k the total power of
// group k and every group decoded after it, the sum rate increases in each
// T_k, so each group gets exactly its minimum rate, weakest first, and the
// strongest group takes the rest. Empty if the order cannot meet QoS.
std::optional<Eigen::VectorXd> ordered_chain_powers(const SlotChannelState& st, const Eigen::VectorXd& min_rate,
                                                    const PowerOptions& o) {
    const int G = static_cast<int>(st.h_rep.size());
    std::vector<int> order(G);  // weakest first
    for (int g = 0; g < G; ++g) order[g] = g;
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return st.sic_above[a].size() > st.sic_above[b].size(); });
    Eigen::VectorXd p(G);
    double T = o.p_max;
    for (int k = 0; k < G; ++k) {
        const int g = order[k];
        const double n = o.sigma2 / st.h_rep[g];
        const double c = std::max(0.0, min_rate(g));
        const int left = G - k - 1;
        double next = 0.0;
        if (left > 0) {
            next = std::min(T - kPowerFloor, (T + n) * std::exp(-c) - n);
            if (next < left * kPowerFloor) return std::nullopt;
        } else if (std::log1p(T / n) < c) {
            return std::nullopt;
        }
        p(g) = T - next;
        T = next;
    }
    return p;
}

}  // namespace

double f_term(const Eigen::Ref<const Eigen::VectorXd>& p, int g, const SlotChannelState& st, double sigma2) {
    return std::log(st.h_rep[g] * (p(g) + interferers(p, g, st)) + sigma2);
}

double g_term(const Eigen::Ref<const Eigen::VectorXd>& p, int g, const SlotChannelState& st, double sigma2) {
    return std::log(st.h_rep[g] * interferers(p, g, st) + sigma2);
}

Eigen::VectorXd g_gradient(const DcExpansionPoint& e, int g, double sigma2) {
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(e.p_prev.size());
    const double h = e.state.h_rep[g];
    const double denom = h * interferers(e.p_prev, g, e.state) + sigma2;
    for (int j : e.state.sic_above[g]) grad(j) = h / denom;
    return grad;
}

double g_linearized(const Eigen::Ref<const Eigen::VectorXd>& p, const DcExpansionPoint& e, int g, double sigma2) {
    return g_term(e.p_prev, g, e.state, sigma2) + g_gradient(e, g, sigma2).dot(p - e.p_prev);
}

PowerOptions PowerOptions::from(const ScenarioConfig& cfg) {
    PowerOptions o;
    o.p_max = cfg.p_max;
    o.sigma2 = cfg.noise_power;
    o.eps = cfg.eps_power;
    o.max_iter = cfg.limits.max_sca_iter;
    return o;
}

Eigen::VectorXd solve_power_slot(const DcExpansionPoint& e, const Eigen::VectorXd& min_rate, const PowerOptions& o) {
    using namespace convex;
    const int G = static_cast<int>(e.p_prev.size());
    ConvexProgram prog;
    prog.num_vars = G;
    std::vector<int> all(G);
    for (int g = 0; g < G; ++g) all[g] = g;

    for (int g = 0; g < G; ++g) {
        const auto& above = e.state.sic_above[g];
        const double h = e.state.h_rep[g];
        std::vector<int> fvars{g};
        fvars.insert(fvars.end(), above.begin(), above.end());
        const Eigen::VectorXd grad = g_gradient(e, g, o.sigma2);
        std::vector<double> gcoef;
        for (int j : above) gcoef.push_back(grad(j));
        const double g0 = g_term(e.p_prev, g, e.state, o.sigma2);
        double anchor = 0.0;
        for (int j : above) anchor += grad(j) * e.p_prev(j);

        // -F_g + grad G . p
        prog.objective.add(neg_log_affine(fvars, std::vector<double>(fvars.size(), h), o.sigma2));
        if (!above.empty()) prog.objective.add(affine(above, gcoef));

        if (min_rate(g) > 0.0) {
            // C - F_g + G(p_prev) + grad G . (p - p_prev) <= 0
            ConvexFunction c(neg_log_affine(fvars, std::vector<double>(fvars.size(), h), o.sigma2));
            c.add(affine(above, gcoef, min_rate(g) + g0 - anchor));
            prog.add_constraint(std::move(c), "min-rate[" + std::to_string(g + 1) + "]");
        }
    }
    prog.add_constraint(ConvexFunction(affine(all, std::vector<double>(G, 1.0), -o.p_max)), "sum-power");
    prog.lower = Eigen::VectorXd::Constant(G, kPowerFloor);
    prog.upper = Eigen::VectorXd::Constant(G, o.p_max);
    prog.warm_start = e.p_prev;

    const SolveReport rep = solve(prog, o.solver);
    if (rep.status == SolveStatus::Infeasible) {
        const std::string label = rep.worst_constraint >= 0 ? prog.labels[rep.worst_constraint] : "sum-power";
        const std::string family = label.substr(0, label.find('['));
        std::ostringstream os;
        os << "power subproblem infeasible; worst constraint " << label << " violated by " << rep.max_violation;
        throw InfeasibleError(family, os.str());
    }
    Eigen::VectorXd p = rep.x;
    enforce_power_box(p, o.p_max);
    return p;
}

PowerResult optimize_powers(const std::vector<SlotChannelState>& states, const Eigen::MatrixXd& init,
                            const Eigen::MatrixXd& min_rate, const PowerOptions& o) {
    const int S = static_cast<int>(states.size());
    PowerResult res;
    res.p = init;
    for (int s = 0; s < S; ++s) {
        Eigen::VectorXd col = res.p.col(s);
        enforce_power_box(col, o.p_max);
        res.p.col(s) = col;
    }
    auto total = [&](const Eigen::MatrixXd& p) {
        double t = 0.0;
        for (int s = 0; s < S; ++s) t += slot_objective(p.col(s), states[s], o.sigma2);
        return t;
    };
    for (int t2 = 1; t2 <= o.max_iter; ++t2) {
        Eigen::MatrixXd next = res.p;
        for (int s = 0; s < S; ++s) {
            const DcExpansionPoint e{res.p.col(s), states[s]};
            const Eigen::VectorXd rates = min_rate.col(s);
            Eigen::VectorXd cand = solve_power_slot(e, rates, o);
            // Take the candidate if it reduces the QoS shortfall; otherwise
            // only if the exact slot rate does not drop and QoS holds level.
            const double old_obj = slot_objective(e.p_prev, states[s], o.sigma2);
            const double new_obj = slot_objective(cand, states[s], o.sigma2);
            const double old_short = slot_shortfall(e.p_prev, states[s], rates, o.sigma2);
            const double new_short = slot_shortfall(cand, states[s], rates, o.sigma2);
            if (new_short < old_short - 1e-12)
                next.col(s) = cand;
            else if (new_obj >= old_obj - 1e-12 * std::max(1.0, std::abs(old_obj)) && new_short <= old_short + 1e-12)
                next.col(s) = extrapolate(e.p_prev, cand, states[s], rates, o);
            if (const auto chain = ordered_chain_powers(states[s], rates, o)) {
                const Eigen::VectorXd cur = next.col(s);
                if (slot_shortfall(*chain, states[s], rates, o.sigma2) <= slot_shortfall(cur, states[s], rates, o.sigma2) &&
                    slot_objective(*chain, states[s], o.sigma2) > slot_objective(cur, states[s], o.sigma2))
                    next.col(s) = *chain;
            }
        }
        const double movement = (next - res.p).norm();
        res.p = next;
        res.iterates.push_back({t2, movement, total(res.p)});
        if (movement <= o.eps) {
            res.converged = true;
            break;
        }
    }
    for (int s = 0; s < S; ++s) {
        const double short_s = slot_shortfall(res.p.col(s), states[s], min_rate.col(s), o.sigma2);
        if (short_s > kTolRate)
            throw InfeasibleError("min-rate", "power step left slot " + std::to_string(s + 1) +
                                                  " short of its minimum rate by " + std::to_string(short_s));
    }
    return res;
}

PowerResult solve_power(const Trajectory& traj, const UserTrace& trace, const ScenarioConfig& cfg,
                        const PowerSchedule& init, double qos_scale) {
    const int N = traj.num_slots();
    std::vector<SlotChannelState> states;
    for (int s = 0; s < N; ++s)
        states.push_back(slot_channel_state(traj.points[s + 1], trace.slot(s), cfg.altitude, cfg.pathloss_ref));
    Eigen::MatrixXd rates(cfg.num_groups(), N);
    for (int g = 0; g < cfg.num_groups(); ++g)
        for (int s = 0; s < N; ++s) rates(g, s) = cfg.min_rate[g][s] * qos_scale;
    return optimize_powers(states, init.p, rates, PowerOptions::from(cfg));
}

PowerSchedule initial_powers(const ScenarioConfig& cfg) {
    return PowerSchedule::uniform(cfg.num_groups(), cfg.num_slots, cfg.p_max / (2.0 * cfg.num_groups()));
}

}  // namespace uavnoma
