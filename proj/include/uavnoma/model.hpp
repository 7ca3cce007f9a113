#pragma once

// Domain types and the exact physical model of a UAV multicasting to G
// groups with power-domain NOMA: free-space channel gains, the per-group
// minimum-gain representative, SIC ordering, multicast capacity and the
// constraint checks of the joint trajectory/power problem.
//
// Indexing: breaking points are q[0..N]; slot s (0-based, s = n - 1) is
// served from breaking point q[s + 1]. Rates are in nats.

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace uavnoma {

using Vec2 = Eigen::Vector2d;

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed or inconsistent scenario input.
class ScenarioError : public Error {
public:
    using Error::Error;
};

// A subproblem stayed infeasible after the QoS relaxation policy.
class InfeasibleError : public Error {
public:
    InfeasibleError(std::string family, const std::string& what)
        : Error(what), family_(std::move(family)) {}
    const std::string& family() const noexcept { return family_; }

private:
    std::string family_;
};

inline constexpr double kPowerFloor = 1e-8;  // W, lower bound on every p_g[n]
inline constexpr double kTolGeom = 1e-6;     // m
inline constexpr double kTolPow = 1e-9;      // W
inline constexpr double kTolRate = 1e-7;     // nats

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }
inline double bits_to_nats(double bits) { return bits * std::log(2.0); }
inline double nats_to_bits(double nats) { return nats / std::log(2.0); }

// Which slots carry the min-rate constraint inside the trajectory subproblem.
enum class RateSlots { All, AllButLast };

struct IterationLimits {
    int max_asm_iter = 30;
    int max_sca_iter = 50;
    int max_online_asm_iter = 10;
};

struct ScenarioConfig {
    std::string name = "scenario";
    std::vector<int> users_per_group;  // U_g, size G
    int num_slots = 1;                 // N
    double horizon = 1.0;              // T [s]
    double v_max = 10.0;               // [m/s]
    double altitude = 25.0;            // H [m]
    double p_max = 2.0;                // [W]
    double noise_power = 1e-9;         // sigma^2 [W]
    double pathloss_ref = 1e-3;        // mu0, linear gain at 1 m
    double coverage_radius = 50.0;     // R [m]
    Vec2 start_point{-25.0, 0.0};
    Vec2 end_point{25.0, 0.0};
    std::vector<std::vector<double>> min_rate;  // [g][s], nats
    double eps_traj = 1e-2;                     // [m]
    double eps_power = 1e-3;                    // [W]
    double coord_offset = 101.0;                // GP frame shift [m]
    std::uint64_t rng_seed = 1;
    RateSlots rate_slots = RateSlots::All;
    IterationLimits limits;

    int num_groups() const { return static_cast<int>(users_per_group.size()); }
    double step_max() const { return v_max * horizon / num_slots; }
    double slot_duration() const { return horizon / num_slots; }
    bool rate_enforced_in_gp(int slot) const {
        return rate_slots == RateSlots::All || slot < num_slots - 1;
    }
    // Sets every C_rsv[g][s] to `nats`.
    void set_uniform_min_rate(double nats);
    // Throws ScenarioError naming the first violated invariant.
    void validate() const;
};

// r[g][u] at every slot; group sizes may differ between slots (online mode
// with arrivals/departures).
struct UserTrace {
    // positions[s][g][u]
    std::vector<std::vector<std::vector<Vec2>>> positions;

    int num_slots() const { return static_cast<int>(positions.size()); }
    int num_groups() const { return positions.empty() ? 0 : static_cast<int>(positions[0].size()); }
    const std::vector<std::vector<Vec2>>& slot(int s) const { return positions.at(s); }
    bool is_static() const;

    static UserTrace constant(const std::vector<std::vector<Vec2>>& users, int num_slots);
};

struct Trajectory {
    std::vector<Vec2> points;  // q[0..N]

    int num_slots() const { return static_cast<int>(points.size()) - 1; }
    static Trajectory straight_line(const Vec2& start, const Vec2& end, int num_slots);
};

// Euclidean norm of the stacked difference of two trajectories.
double trajectory_distance(const Trajectory& a, const Trajectory& b);

struct PowerSchedule {
    Eigen::MatrixXd p;  // G x N, p(g, s) [W]

    static PowerSchedule uniform(int groups, int slots, double value);
};

// Per-slot derived quantities at one breaking point.
struct SlotChannelState {
    std::vector<std::vector<double>> h;    // [g][u]
    std::vector<double> h_rep;             // [g]
    std::vector<std::vector<int>> sic_above;  // [g]: groups g cannot cancel
    std::vector<double> L;                 // [g] tight: max_u H^2 + |q - r|^2
    std::vector<double> Psi;               // [g] tight: I_g + sigma^2 (filled when powers known)
};

struct LogRecord {
    std::string stage;  // "asm", "trajectory", "power", "online"
    int outer = 0;      // ASM iteration or slot
    int inner = 0;
    double movement = 0.0;
    double objective = 0.0;
};

struct RunResult {
    Trajectory trajectory;
    PowerSchedule powers;
    Eigen::MatrixXd rates;  // C[g][s] nats
    std::vector<double> objective_history;
    bool converged = false;
    int iterations = 0;
    std::vector<int> infeasible_slots;  // 1-based slot numbers (online)
    bool qos_relaxed = false;
    double qos_scale = 1.0;  // factor applied to every C_rsv after relaxation
    std::string mode;
    std::uint64_t seed = 0;
    std::vector<LogRecord> log;

    double objective() const { return rates.sum(); }
};

double channel_gain(const Vec2& q, const Vec2& r, double altitude, double mu0);

// Minimum over the group. Throws ScenarioError on an empty group.
double representative_gain(std::span<const double> gains);

// sic_above[g] = { j : h_rep[j] > h_rep[g] }, ties broken by index: among
// equal gains the lower index is treated as weaker.
std::vector<std::vector<int>> sic_order(std::span<const double> h_rep);

// Gains, representatives, order sets and tight L at breaking point q.
SlotChannelState slot_channel_state(const Vec2& q, const std::vector<std::vector<Vec2>>& users,
                                    double altitude, double mu0);

// Fills state.Psi with h_rep[g] * sum_{j in O_g} p_j + sigma^2.
void fill_interference(SlotChannelState& state, const Eigen::Ref<const Eigen::VectorXd>& p_slot,
                       double sigma2);

// ln(1 + p_g h_g / (h_g sum_{j in O_g} p_j + sigma^2)).
double multicast_capacity(const Eigen::Ref<const Eigen::VectorXd>& p_slot,
                          const SlotChannelState& state, int g, double sigma2);

// C[g][s] through the exact model.
Eigen::MatrixXd slot_rates(const Trajectory& traj, const PowerSchedule& powers,
                           const UserTrace& trace, const ScenarioConfig& cfg);

double total_objective(const Trajectory& traj, const PowerSchedule& powers,
                       const UserTrace& trace, const ScenarioConfig& cfg);

// Upper bound of every iterate: zero interference, overhead, full power.
double objective_upper_bound(const ScenarioConfig& cfg);

enum class ViolationKind { Speed, MinRate, SumPower, PowerFloor, Endpoint };

std::string to_string(ViolationKind kind);

struct Violation {
    ViolationKind kind;
    int slot = 0;   // 1-based slot, or breaking point index for Endpoint
    int group = -1;
    double magnitude = 0.0;
};

struct FeasibilityReport {
    std::vector<Violation> violations;
    bool feasible() const { return violations.empty(); }
    std::string describe() const;
};

struct FeasibilityTolerances {
    double geom = kTolGeom;
    double power = kTolPow;
    double rate = kTolRate;
};

FeasibilityReport check_feasibility(const Trajectory& traj, const PowerSchedule& powers,
                                    const UserTrace& trace, const ScenarioConfig& cfg,
                                    const FeasibilityTolerances& tol = {});

// Sum of min-rate shortfalls, used to compare iterates that are not yet QoS-feasible.
double min_rate_shortfall(const Eigen::MatrixXd& rates, const ScenarioConfig& cfg);

}  // namespace uavnoma
