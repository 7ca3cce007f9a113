#pragma once

// SCA-GP trajectory step: powers fixed, breaking points and the epigraph
// variables L, Psi optimized through successive condensed GPs.
//
// The engine works on a window of breaking points, some of them pinned.
// Offline runs pin q[0] and q[N]; the online planner uses a window with
// one pinned point, one free point and an optional anchor disk around the
// terminal point.

#include "uavnoma/convex.hpp"
#include "uavnoma/model.hpp"

#include <optional>
#include <vector>

namespace uavnoma {

using SlotUsers = std::vector<std::vector<Vec2>>;  // [g][u]

// ||points[index] - center|| <= radius
struct AnchorDisk {
    int index = 0;
    Vec2 center = Vec2::Zero();
    double radius = 0.0;
};

struct TrajectoryWindow {
    std::vector<Vec2> points;          // original coordinates
    std::vector<bool> pinned;          // same size as points
    std::vector<SlotUsers> users;      // slot s is served at points[s + 1]
    Eigen::MatrixXd powers;            // G x S, held fixed
    std::vector<std::vector<double>> min_rate;  // [g][s], nats
    std::vector<bool> rate_enforced;   // [s]
    std::optional<AnchorDisk> anchor;

    int num_slots() const { return static_cast<int>(points.size()) - 1; }
};

struct TrajectoryOptions {
    double s_max = 1.0;
    double altitude = 25.0;
    double mu0 = 1e-3;
    double sigma2 = 1e-9;
    double coord_offset = 101.0;
    double eps = 1e-2;
    int max_iter = 50;
    convex::SolverOptions solver;

    static TrajectoryOptions from(const ScenarioConfig& cfg);
};

struct Epigraphs {
    std::vector<std::vector<double>> L;    // [g][s]
    std::vector<std::vector<double>> Psi;  // [g][s]
};

struct TrajectoryIterate {
    int t1 = 0;
    double movement = 0.0;
    double objective = 0.0;  // exact, powers fixed
    bool accepted = true;
};

struct TrajectoryResult {
    std::vector<Vec2> points;
    Epigraphs epigraphs;  // tight at the returned points
    std::vector<TrajectoryIterate> iterates;
    bool converged = false;
};

// Tight L and Psi at the given points with the given powers.
Epigraphs initialize_epigraphs(const std::vector<Vec2>& points, const std::vector<SlotUsers>& users,
                               const Eigen::MatrixXd& powers, double altitude, double mu0, double sigma2);
Epigraphs initialize_epigraphs(const Trajectory& traj, const UserTrace& trace, const PowerSchedule& powers,
                               const ScenarioConfig& cfg);

// Exact sum rate of the window with its fixed powers.
double window_objective(const TrajectoryWindow& w, const std::vector<Vec2>& points, double altitude,
                        double mu0, double sigma2);

// Runs the SCA loop. Throws InfeasibleError when the first condensed GP
// has no feasible point; the family names the worst constraint group.
TrajectoryResult optimize_window(const TrajectoryWindow& w, const TrajectoryOptions& opt);

// Offline window: q[0], q[N] pinned, min rates scaled by qos_scale.
TrajectoryWindow offline_window(const Trajectory& init, const PowerSchedule& powers, const UserTrace& trace,
                                const ScenarioConfig& cfg, double qos_scale = 1.0);

TrajectoryResult solve_trajectory(const PowerSchedule& powers, const UserTrace& trace, const ScenarioConfig& cfg,
                                  const Trajectory& init, double qos_scale = 1.0);

}  // namespace uavnoma
