#pragma once

// SCA-D.C. power step: trajectory fixed, per-slot powers optimized by
// linearizing the subtracted concave part of each capacity
//
//   C_g = F_g - G_g,  F_g = ln(h_g sum_{j in O_g + g} p_j + s2),
//                     G_g = ln(h_g sum_{j in O_g} p_j + s2).

#include "uavnoma/convex.hpp"
#include "uavnoma/model.hpp"

#include <vector>

namespace uavnoma {

struct DcExpansionPoint {
    Eigen::VectorXd p_prev;  // size G
    SlotChannelState state;  // gains and order sets of the fixed trajectory
};

double f_term(const Eigen::Ref<const Eigen::VectorXd>& p, int g, const SlotChannelState& st, double sigma2);
double g_term(const Eigen::Ref<const Eigen::VectorXd>& p, int g, const SlotChannelState& st, double sigma2);
// dG_g/dp_j at the expansion point; zero outside O_g.
Eigen::VectorXd g_gradient(const DcExpansionPoint& e, int g, double sigma2);
// First-order expansion of G_g at e.p_prev; never below G_g.
double g_linearized(const Eigen::Ref<const Eigen::VectorXd>& p, const DcExpansionPoint& e, int g, double sigma2);

struct PowerOptions {
    double p_max = 2.0;
    double sigma2 = 1e-9;
    double eps = 1e-3;
    int max_iter = 50;
    // The slot rate is nearly flat along the sum-power face, so a loose gap
    // lets the solution wander by more than eps.
    convex::SolverOptions solver{1e-11, 1e-8, 500};

    static PowerOptions from(const ScenarioConfig& cfg);
};

struct PowerIterate {
    int t2 = 0;
    double movement = 0.0;
    double objective = 0.0;
};

struct PowerResult {
    Eigen::MatrixXd p;  // G x S
    std::vector<PowerIterate> iterates;
    bool converged = false;
};

// One convexified solve of a single slot. min_rate[g] in nats, 0 to skip.
// Throws InfeasibleError when the linearized QoS constraints admit no point.
Eigen::VectorXd solve_power_slot(const DcExpansionPoint& e, const Eigen::VectorXd& min_rate, const PowerOptions& opt);

// SCA loop over all slots. states[s] holds the slot gains and order sets.
PowerResult optimize_powers(const std::vector<SlotChannelState>& states, const Eigen::MatrixXd& init,
                            const Eigen::MatrixXd& min_rate, const PowerOptions& opt);

PowerResult solve_power(const Trajectory& traj, const UserTrace& trace, const ScenarioConfig& cfg,
                        const PowerSchedule& init, double qos_scale = 1.0);

// Initial schedule p_max / (2G) everywhere.
PowerSchedule initial_powers(const ScenarioConfig& cfg);

}  // namespace uavnoma
