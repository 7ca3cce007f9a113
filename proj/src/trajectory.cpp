#include "uavnoma/trajectory.hpp"

#include "uavnoma/geometric_program.hpp"
#include "uavnoma/gp_approx.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace uavnoma {

namespace {

// Below this slack (m) a run of free points between two pinned points has a
// single feasible path and is fixed to it rather than optimized.
constexpr double kForcedSlack = 1e-4;
constexpr double kRateDeadzone = 1e-8;  // nats
constexpr int kMaxBacktrack = 20;

std::string family_of(const std::string& label) {
    const auto pos = label.find('[');
    return pos == std::string::npos ? label : label.substr(0, pos);
}

double window_shortfall(const TrajectoryWindow& w, const std::vector<Vec2>& points, const TrajectoryOptions& o) {
    double total = 0.0;
    for (int s = 0; s < w.num_slots(); ++s) {
        if (!w.rate_enforced[s]) continue;
        const SlotChannelState st = slot_channel_state(points[s + 1], w.users[s], o.altitude, o.mu0);
        for (int g = 0; g < static_cast<int>(w.users[s].size()); ++g) {
            const double c = multicast_capacity(w.powers.col(s), st, g, o.sigma2);
            total += std::max(0.0, w.min_rate[g][s] - c - kRateDeadzone);
        }
    }
    return total;
}

bool geometry_ok(const TrajectoryWindow& w, const std::vector<Vec2>& points, double s_max) {
    for (int n = 1; n <= w.num_slots(); ++n)
        if ((points[n] - points[n - 1]).norm() > s_max + kTolGeom) return false;
    if (w.anchor && (points[w.anchor->index] - w.anchor->center).norm() > w.anchor->radius + kTolGeom)
        return false;
    return true;
}

Vec2 project_disk(const Vec2& p, const Vec2& c, double r) {
    const Vec2 d = p - c;
    const double n = d.norm();
    return n <= r ? p : Vec2(c + d * (r / n));
}

// Pulls a free anchored point back inside its anchor disk and the speed
// disks of pinned neighbours when the solver left it marginally outside.
void repair_anchor(const TrajectoryWindow& w, std::vector<Vec2>& points, double s_max) {
    if (!w.anchor) return;
    const int i = w.anchor->index;
    if (w.pinned[i]) return;
    for (int k = 0; k < 200; ++k) {
        bool inside = true;
        Vec2& p = points[i];
        if ((p - w.anchor->center).norm() > w.anchor->radius) {
            p = project_disk(p, w.anchor->center, w.anchor->radius);
            inside = false;
        }
        for (int j : {i - 1, i + 1}) {
            if (j < 0 || j >= static_cast<int>(points.size()) || !w.pinned[j]) continue;
            if ((p - points[j]).norm() > s_max) {
                p = project_disk(p, points[j], s_max);
                inside = false;
            }
        }
        if (inside) break;
    }
}

// Fixes free points whose feasible set has collapsed to a single path.
void pin_forced_points(TrajectoryWindow& w, double s_max) {
    const int P = static_cast<int>(w.points.size());
    int a = 0;
    while (a < P) {
        int b = a + 1;
        while (b < P && !w.pinned[b]) ++b;
        if (b == a + 1) {
            a = b;
            continue;
        }
        if (b < P && w.pinned[a]) {
            const double dist = (w.points[b] - w.points[a]).norm();
            if ((b - a) * s_max - dist < kForcedSlack) {
                for (int k = a + 1; k < b; ++k) {
                    w.points[k] = w.points[a] + (w.points[b] - w.points[a]) * (double(k - a) / (b - a));
                    w.pinned[k] = true;
                }
            }
        } else if (b == P && w.pinned[a] && b == a + 2 && w.anchor && w.anchor->index == a + 1) {
            const Vec2 d = w.anchor->center - w.points[a];
            const double dist = d.norm();
            if (dist > 0.0 && s_max + w.anchor->radius - dist < kForcedSlack) {
                w.points[a + 1] = w.points[a] + d * (s_max / dist);
                w.pinned[a + 1] = true;
            }
        }
        a = b;
    }
}

double stacked_distance(const std::vector<Vec2>& a, const std::vector<Vec2>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]).squaredNorm();
    return std::sqrt(s);
}

struct BuiltGp {
    gp::GeometricProgram program;
    Eigen::VectorXd warm;
    std::vector<int> var_x, var_y;  // -1 for pinned points
};

BuiltGp build_gp(const TrajectoryWindow& w, const std::vector<Vec2>& current, const TrajectoryOptions& o) {
    using gp::Monomial;
    using gp::Posynomial;
    const int P = static_cast<int>(current.size());
    const int S = w.num_slots();
    const int G = static_cast<int>(w.powers.rows());
    BuiltGp out;
    auto& prog = out.program;
    std::vector<double> warm;
    const Vec2 shift = Vec2::Constant(o.coord_offset);
    std::vector<Vec2> shifted(P);
    for (int i = 0; i < P; ++i) shifted[i] = current[i] + shift;

    auto add_var = [&](const std::string& name, double value) {
        prog.var_names.push_back(name);
        warm.push_back(std::log(value));
        return prog.num_vars++;
    };
    out.var_x.assign(P, -1);
    out.var_y.assign(P, -1);
    for (int i = 0; i < P; ++i) {
        if (w.pinned[i]) continue;
        if (shifted[i].minCoeff() <= 0.0)
            throw std::domain_error("trajectory point leaves the positive GP frame; increase coord_offset");
        out.var_x[i] = add_var("x" + std::to_string(i), shifted[i].x());
        out.var_y[i] = add_var("y" + std::to_string(i), shifted[i].y());
    }
    auto X = [&](int i) { return out.var_x[i] < 0 ? Monomial::constant(shifted[i].x()) : Monomial::variable(out.var_x[i]); };
    auto Y = [&](int i) { return out.var_y[i] < 0 ? Monomial::constant(shifted[i].y()) : Monomial::variable(out.var_y[i]); };

    const Epigraphs epi = initialize_epigraphs(current, w.users, w.powers, o.altitude, o.mu0, o.sigma2);
    std::vector<std::vector<int>> var_L(G, std::vector<int>(S)), var_Psi(G, std::vector<int>(S));
    for (int g = 0; g < G; ++g)
        for (int s = 0; s < S; ++s) {
            var_L[g][s] = add_var("L" + std::to_string(g) + "_" + std::to_string(s), epi.L[g][s]);
            var_Psi[g][s] = add_var("Psi" + std::to_string(g) + "_" + std::to_string(s), epi.Psi[g][s]);
        }

    Monomial objective = Monomial::constant(1.0);
    for (int s = 0; s < S; ++s) {
        const int n = s + 1;
        if (!(w.pinned[n] && w.pinned[n - 1])) {
            const auto wt = gp::speed_weights(shifted[n], shifted[n - 1], o.s_max);
            prog.add_constraint(gp::speed_posynomial(X(n), Y(n), X(n - 1), Y(n - 1), wt, o.s_max),
                                "speed[" + std::to_string(n) + "]");
        }
        const SlotChannelState st = slot_channel_state(current[n], w.users[s], o.altitude, o.mu0);
        for (int g = 0; g < G; ++g) {
            const Monomial L = Monomial::variable(var_L[g][s]);
            const Monomial Psi = Monomial::variable(var_Psi[g][s]);
            const std::string tag = "[" + std::to_string(g + 1) + "," + std::to_string(n) + "]";
            for (std::size_t u = 0; u < w.users[s][g].size(); ++u) {
                const Vec2 r = w.users[s][g][u] + shift;
                const auto wt = gp::distance_epigraph_weights(shifted[n], r, epi.L[g][s]);
                prog.add_constraint(gp::distance_posynomial(X(n), Y(n), L, r, o.altitude, wt),
                                    "distance" + tag);
            }
            double interferers = 0.0;
            for (int j : st.sic_above[g]) interferers += w.powers(j, s);
            prog.add_constraint(gp::interference_posynomial(L, Psi, interferers, o.sigma2, o.mu0),
                                "interference" + tag);
            const auto ow = gp::objective_term_weights(epi.L[g][s], epi.Psi[g][s], w.powers(g, s), o.mu0);
            const Monomial gamma = gp::gamma_monomial(L, Psi, w.powers(g, s), o.mu0, ow);
            objective *= gamma;
            if (w.rate_enforced[s] && w.min_rate[g][s] > 0.0) {
                // A point short by less than kTolRate counts as feasible; keep it inside the GP.
                const double c = multicast_capacity(w.powers.col(s), st, g, o.sigma2);
                const double target = c >= w.min_rate[g][s] - kTolRate ? std::min(w.min_rate[g][s], c) : w.min_rate[g][s];
                prog.add_constraint(Posynomial{gp::min_rate_monomial(gamma, target)}, "min-rate" + tag);
            }
        }
    }
    if (w.anchor && !w.pinned[w.anchor->index]) {
        const int i = w.anchor->index;
        const Vec2 c = w.anchor->center + shift;
        const auto wt = gp::speed_weights(shifted[i], c, w.anchor->radius);
        prog.add_constraint(gp::speed_posynomial(X(i), Y(i), Monomial::constant(c.x()), Monomial::constant(c.y()), wt,
                                                 w.anchor->radius),
                            "anchor[" + std::to_string(i) + "]");
    }
    // Only the exponents matter for the minimizer; the constant can overflow.
    objective.coef = 1.0;
    prog.objective = Posynomial{objective};
    out.warm = Eigen::Map<Eigen::VectorXd>(warm.data(), static_cast<Eigen::Index>(warm.size()));
    return out;
}

}  // namespace

TrajectoryOptions TrajectoryOptions::from(const ScenarioConfig& cfg) {
    TrajectoryOptions o;
    o.s_max = cfg.step_max();
    o.altitude = cfg.altitude;
    o.mu0 = cfg.pathloss_ref;
    o.sigma2 = cfg.noise_power;
    o.coord_offset = cfg.coord_offset;
    o.eps = cfg.eps_traj;
    o.max_iter = cfg.limits.max_sca_iter;
    return o;
}

Epigraphs initialize_epigraphs(const std::vector<Vec2>& points, const std::vector<SlotUsers>& users,
                               const Eigen::MatrixXd& powers, double altitude, double mu0, double sigma2) {
    const int S = static_cast<int>(points.size()) - 1;
    const int G = static_cast<int>(powers.rows());
    Epigraphs e;
    e.L.assign(G, std::vector<double>(S));
    e.Psi.assign(G, std::vector<double>(S));
    for (int s = 0; s < S; ++s) {
        SlotChannelState st = slot_channel_state(points[s + 1], users[s], altitude, mu0);
        fill_interference(st, powers.col(s), sigma2);
        for (int g = 0; g < G; ++g) {
            e.L[g][s] = st.L[g];
            e.Psi[g][s] = st.Psi[g];
        }
    }
    return e;
}

Epigraphs initialize_epigraphs(const Trajectory& traj, const UserTrace& trace, const PowerSchedule& powers,
                               const ScenarioConfig& cfg) {
    return initialize_epigraphs(traj.points, trace.positions, powers.p, cfg.altitude, cfg.pathloss_ref,
                                cfg.noise_power);
}

double window_objective(const TrajectoryWindow& w, const std::vector<Vec2>& points, double altitude, double mu0,
                        double sigma2) {
    double total = 0.0;
    for (int s = 0; s < w.num_slots(); ++s) {
        const SlotChannelState st = slot_channel_state(points[s + 1], w.users[s], altitude, mu0);
        for (int g = 0; g < static_cast<int>(w.users[s].size()); ++g)
            total += multicast_capacity(w.powers.col(s), st, g, sigma2);
    }
    return total;
}

TrajectoryResult optimize_window(const TrajectoryWindow& input, const TrajectoryOptions& o) {
    TrajectoryWindow w = input;
    pin_forced_points(w, o.s_max);
    TrajectoryResult res;
    std::vector<Vec2> current = w.points;
    const bool any_free = std::any_of(w.pinned.begin(), w.pinned.end(), [](bool p) { return !p; });
    double obj = window_objective(w, current, o.altitude, o.mu0, o.sigma2);
    double shortfall = window_shortfall(w, current, o);

    if (!any_free) {
        res.converged = true;
    } else {
        for (int t1 = 1; t1 <= o.max_iter; ++t1) {
            BuiltGp built = build_gp(w, current, o);
            convex::ConvexProgram cp = gp::gp_to_convex(built.program);
            cp.warm_start = built.warm;
            const convex::SolveReport rep = convex::solve(cp, o.solver);
            if (rep.status == convex::SolveStatus::Infeasible) {
                // A start that already meets the exact constraints only lacks an
                // interior (tight QoS rows); treat it as stationary.
                if (t1 == 1 && (shortfall > kTolRate || !geometry_ok(w, current, o.s_max))) {
                    const std::string label =
                        rep.worst_constraint >= 0 ? built.program.labels[rep.worst_constraint] : "unknown";
                    std::ostringstream os;
                    os << "trajectory subproblem infeasible; worst constraint " << label << " violated by "
                       << rep.max_violation;
                    throw InfeasibleError(family_of(label), os.str());
                }
                res.iterates.push_back({t1, 0.0, obj, false});
                res.converged = true;
                break;
            }
            std::vector<Vec2> proposal = current;
            for (std::size_t i = 0; i < current.size(); ++i)
                if (built.var_x[i] >= 0)
                    proposal[i] = Vec2(std::exp(rep.x(built.var_x[i])), std::exp(rep.x(built.var_y[i]))) -
                                  Vec2::Constant(o.coord_offset);
            repair_anchor(w, proposal, o.s_max);

            // Safeguarded step: exact ascent, exact geometry, no QoS loss.
            bool accepted = false;
            double tau = 1.0;
            std::vector<Vec2> cand = proposal;
            double cand_obj = obj;
            for (int k = 0; k < kMaxBacktrack; ++k, tau *= 0.5) {
                for (std::size_t i = 0; i < current.size(); ++i)
                    cand[i] = current[i] + tau * (proposal[i] - current[i]);
                if (!geometry_ok(w, cand, o.s_max)) continue;
                cand_obj = window_objective(w, cand, o.altitude, o.mu0, o.sigma2);
                if (cand_obj < obj - 1e-12 * std::max(1.0, std::abs(obj))) continue;
                if (window_shortfall(w, cand, o) > shortfall + 1e-12) continue;
                accepted = true;
                break;
            }
            if (!accepted) {
                res.iterates.push_back({t1, 0.0, obj, false});
                res.converged = true;
                break;
            }
            const double movement = stacked_distance(cand, current);
            current = cand;
            obj = cand_obj;
            shortfall = window_shortfall(w, current, o);
            res.iterates.push_back({t1, movement, obj, true});
            if (movement <= o.eps) {
                res.converged = true;
                break;
            }
        }
    }
    res.points = current;
    res.epigraphs = initialize_epigraphs(current, w.users, w.powers, o.altitude, o.mu0, o.sigma2);
    return res;
}

TrajectoryWindow offline_window(const Trajectory& init, const PowerSchedule& powers, const UserTrace& trace,
                                const ScenarioConfig& cfg, double qos_scale) {
    const int N = init.num_slots();
    TrajectoryWindow w;
    w.points = init.points;
    w.points.front() = cfg.start_point;
    w.points.back() = cfg.end_point;
    w.pinned.assign(N + 1, false);
    w.pinned.front() = w.pinned.back() = true;
    w.users = trace.positions;
    w.powers = powers.p;
    w.min_rate = cfg.min_rate;
    for (auto& row : w.min_rate)
        for (double& c : row) c *= qos_scale;
    w.rate_enforced.resize(N);
    for (int s = 0; s < N; ++s) w.rate_enforced[s] = cfg.rate_enforced_in_gp(s);
    return w;
}

TrajectoryResult solve_trajectory(const PowerSchedule& powers, const UserTrace& trace, const ScenarioConfig& cfg,
                                  const Trajectory& init, double qos_scale) {
    return optimize_window(offline_window(init, powers, trace, cfg, qos_scale), TrajectoryOptions::from(cfg));
}

}  // namespace uavnoma
