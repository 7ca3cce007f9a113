#include "uavnoma/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace uavnoma {

void ScenarioConfig::set_uniform_min_rate(double nats) {
    min_rate.assign(users_per_group.size(), std::vector<double>(num_slots, nats));
}

void ScenarioConfig::validate() const {
    auto fail = [](const std::string& field, const std::string& why) {
        throw ScenarioError(field + ": " + why);
    };
    if (users_per_group.empty()) fail("num_groups", "must be >= 1");
    for (int u : users_per_group)
        if (u < 1) fail("users_per_group", "every group needs at least one user");
    if (num_slots < 1) fail("num_slots", "must be >= 1");
    if (!(horizon > 0)) fail("horizon", "must be > 0");
    if (!(v_max > 0)) fail("v_max", "must be > 0");
    if (!(altitude > 0)) fail("altitude", "must be > 0");
    if (!(p_max > 0)) fail("p_max", "must be > 0");
    if (!(noise_power > 0)) fail("noise_power", "must be > 0");
    if (!(pathloss_ref > 0)) fail("pathloss_ref", "must be > 0");
    if (!(coverage_radius > 0)) fail("coverage_radius", "must be > 0");
    if (!(eps_traj > 0)) fail("eps_traj", "must be > 0");
    if (!(eps_power > 0)) fail("eps_power", "must be > 0");
    if (static_cast<int>(min_rate.size()) != num_groups()) fail("min_rate", "needs one row per group");
    for (const auto& row : min_rate) {
        if (static_cast<int>(row.size()) != num_slots) fail("min_rate", "needs one entry per slot");
        for (double c : row)
            if (!(c >= 0)) fail("min_rate", "must be >= 0");
    }
    for (const Vec2* pt : {&start_point, &end_point})
        if ((pt->array() + coord_offset).minCoeff() < 1.0)
            fail("coord_offset", "start/end point lies outside the positive GP frame");
    const double reach = num_slots * step_max();
    const double dist = (end_point - start_point).norm();
    if (dist > reach + kTolGeom) {
        std::ostringstream os;
        os << "end point unreachable: |q[N]-q[0]| = " << dist << " m exceeds N*S_max = " << reach
           << " m (speed constraint ||q[n]-q[n-1]|| <= V_max T / N)";
        fail("end_point", os.str());
    }
}

bool UserTrace::is_static() const {
    for (std::size_t s = 1; s < positions.size(); ++s)
        if (positions[s] != positions[0]) return false;
    return true;
}

UserTrace UserTrace::constant(const std::vector<std::vector<Vec2>>& users, int num_slots) {
    UserTrace t;
    t.positions.assign(num_slots, users);
    return t;
}

Trajectory Trajectory::straight_line(const Vec2& start, const Vec2& end, int num_slots) {
    Trajectory t;
    t.points.resize(num_slots + 1);
    for (int n = 0; n <= num_slots; ++n) {
        const double a = static_cast<double>(n) / num_slots;
        t.points[n] = (1.0 - a) * start + a * end;
    }
    t.points.front() = start;
    t.points.back() = end;
    return t;
}

double trajectory_distance(const Trajectory& a, const Trajectory& b) {
    double sq = 0.0;
    for (std::size_t n = 0; n < a.points.size(); ++n) sq += (a.points[n] - b.points[n]).squaredNorm();
    return std::sqrt(sq);
}

PowerSchedule PowerSchedule::uniform(int groups, int slots, double value) {
    return PowerSchedule{Eigen::MatrixXd::Constant(groups, slots, value)};
}

double channel_gain(const Vec2& q, const Vec2& r, double altitude, double mu0) {
    return mu0 / (altitude * altitude + (q - r).squaredNorm());
}

double representative_gain(std::span<const double> gains) {
    if (gains.empty()) throw ScenarioError("representative_gain: multicast group has no users");
    return *std::min_element(gains.begin(), gains.end());
}

std::vector<std::vector<int>> sic_order(std::span<const double> h_rep) {
    const int G = static_cast<int>(h_rep.size());
    std::vector<std::vector<int>> above(G);
    for (int g = 0; g < G; ++g)
        for (int j = 0; j < G; ++j) {
            if (j == g) continue;
            if (h_rep[j] > h_rep[g] || (h_rep[j] == h_rep[g] && j > g)) above[g].push_back(j);
        }
    return above;
}

SlotChannelState slot_channel_state(const Vec2& q, const std::vector<std::vector<Vec2>>& users,
                                    double altitude, double mu0) {
    SlotChannelState st;
    const int G = static_cast<int>(users.size());
    st.h.resize(G);
    st.h_rep.resize(G);
    st.L.resize(G);
    st.Psi.assign(G, 0.0);
    for (int g = 0; g < G; ++g) {
        double worst = 0.0;
        for (const Vec2& r : users[g]) {
            st.h[g].push_back(channel_gain(q, r, altitude, mu0));
            worst = std::max(worst, altitude * altitude + (q - r).squaredNorm());
        }
        st.h_rep[g] = representative_gain(st.h[g]);
        st.L[g] = worst;
    }
    st.sic_above = sic_order(st.h_rep);
    return st;
}

void fill_interference(SlotChannelState& state, const Eigen::Ref<const Eigen::VectorXd>& p_slot,
                       double sigma2) {
    for (std::size_t g = 0; g < state.h_rep.size(); ++g) {
        double sum = 0.0;
        for (int j : state.sic_above[g]) sum += p_slot(j);
        state.Psi[g] = state.h_rep[g] * sum + sigma2;
    }
}

double multicast_capacity(const Eigen::Ref<const Eigen::VectorXd>& p_slot,
                          const SlotChannelState& state, int g, double sigma2) {
    double interferers = 0.0;
    for (int j : state.sic_above[g]) interferers += p_slot(j);
    const double h = state.h_rep[g];
    return std::log1p(p_slot(g) * h / (h * interferers + sigma2));
}

Eigen::MatrixXd slot_rates(const Trajectory& traj, const PowerSchedule& powers,
                           const UserTrace& trace, const ScenarioConfig& cfg) {
    const int N = traj.num_slots();
    const int G = static_cast<int>(powers.p.rows());
    Eigen::MatrixXd rates(G, N);
    for (int s = 0; s < N; ++s) {
        const SlotChannelState st =
            slot_channel_state(traj.points[s + 1], trace.slot(s), cfg.altitude, cfg.pathloss_ref);
        for (int g = 0; g < G; ++g) rates(g, s) = multicast_capacity(powers.p.col(s), st, g, cfg.noise_power);
    }
    return rates;
}

double total_objective(const Trajectory& traj, const PowerSchedule& powers, const UserTrace& trace,
                       const ScenarioConfig& cfg) {
    return slot_rates(traj, powers, trace, cfg).sum();
}

double objective_upper_bound(const ScenarioConfig& cfg) {
    const double H2 = cfg.altitude * cfg.altitude;
    return cfg.num_slots * cfg.num_groups() *
           std::log1p(cfg.p_max * cfg.pathloss_ref / (H2 * cfg.noise_power));
}

std::string to_string(ViolationKind kind) {
    switch (kind) {
        case ViolationKind::Speed: return "speed";
        case ViolationKind::MinRate: return "min-rate";
        case ViolationKind::SumPower: return "sum-power";
        case ViolationKind::PowerFloor: return "power-floor";
        case ViolationKind::Endpoint: return "endpoint";
    }
    return "unknown";
}

std::string FeasibilityReport::describe() const {
    std::ostringstream os;
    for (const auto& v : violations) {
        os << to_string(v.kind) << " slot=" << v.slot;
        if (v.group >= 0) os << " group=" << v.group + 1;
        os << " excess=" << v.magnitude << "\n";
    }
    return os.str();
}

FeasibilityReport check_feasibility(const Trajectory& traj, const PowerSchedule& powers,
                                    const UserTrace& trace, const ScenarioConfig& cfg,
                                    const FeasibilityTolerances& tol) {
    FeasibilityReport rep;
    const int N = traj.num_slots();
    const double s_max = cfg.step_max();
    const double d0 = (traj.points.front() - cfg.start_point).norm();
    if (d0 > tol.geom) rep.violations.push_back({ViolationKind::Endpoint, 0, -1, d0});
    const double dN = (traj.points.back() - cfg.end_point).norm();
    if (dN > tol.geom) rep.violations.push_back({ViolationKind::Endpoint, N, -1, dN});
    for (int n = 1; n <= N; ++n) {
        const double excess = (traj.points[n] - traj.points[n - 1]).norm() - s_max;
        if (excess > tol.geom) rep.violations.push_back({ViolationKind::Speed, n, -1, excess});
    }
    const int G = static_cast<int>(powers.p.rows());
    for (int s = 0; s < N; ++s) {
        const double excess = powers.p.col(s).sum() - cfg.p_max;
        if (excess > tol.power) rep.violations.push_back({ViolationKind::SumPower, s + 1, -1, excess});
        for (int g = 0; g < G; ++g)
            if (powers.p(g, s) < kPowerFloor * (1.0 - 1e-9))
                rep.violations.push_back({ViolationKind::PowerFloor, s + 1, g, kPowerFloor - powers.p(g, s)});
    }
    const Eigen::MatrixXd rates = slot_rates(traj, powers, trace, cfg);
    for (int s = 0; s < N; ++s)
        for (int g = 0; g < G; ++g) {
            const double shortfall = cfg.min_rate[g][s] - rates(g, s);
            if (shortfall > tol.rate) rep.violations.push_back({ViolationKind::MinRate, s + 1, g, shortfall});
        }
    return rep;
}

double min_rate_shortfall(const Eigen::MatrixXd& rates, const ScenarioConfig& cfg) {
    double total = 0.0;
    for (int g = 0; g < rates.rows(); ++g)
        for (int s = 0; s < rates.cols(); ++s) total += std::max(0.0, cfg.min_rate[g][s] - rates(g, s));
    return total;
}

}  // namespace uavnoma
