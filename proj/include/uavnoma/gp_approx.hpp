#pragma once

// Monomial condensation of the trajectory subproblem.
//
// Each non-posynomial constraint is written as  numerator / denominator <= 1
// with a posynomial denominator; the denominator is replaced by the
// weighted AM-GM monomial that is tight at the expansion point, giving a
// posynomial constraint whose feasible set lies inside the exact one.
//
// All coordinates here live in the shifted GP frame (strictly positive).

#include "uavnoma/geometric_program.hpp"
#include "uavnoma/model.hpp"

#include <vector>

namespace uavnoma::gp {

inline constexpr double kMinWeight = 1e-9;

// Weights of the three denominator terms  2 x x' + 2 y y' + c.
struct CrossWeights {
    double x = 0.0;     // alpha / eta
    double y = 0.0;     // beta / kappa
    double rest = 0.0;  // gamma / vartheta
};

// Weights of  L Psi + p mu0.
struct ObjectiveWeights {
    double nu = 0.0;
    double xi = 0.0;
};

struct GpExpansionPoint {
    std::vector<Vec2> q;                         // q[0..N], shifted frame
    std::vector<std::vector<double>> L;          // [g][s]
    std::vector<std::vector<double>> Psi;        // [g][s]
    Eigen::MatrixXd p;                           // G x N, powers of the last ASM iterate
};

struct GpWeights {
    std::vector<CrossWeights> speed;                          // [s] for step q[s] -> q[s+1]
    std::vector<std::vector<std::vector<CrossWeights>>> dist; // [g][u][s]
    std::vector<std::vector<ObjectiveWeights>> objective;     // [g][s]
};

// Throws std::domain_error unless every term is positive; clamps weights
// below kMinWeight and renormalizes.
CrossWeights speed_weights(const Vec2& q, const Vec2& q_prev, double s_max);
CrossWeights distance_epigraph_weights(const Vec2& q, const Vec2& r, double L_prev);
ObjectiveWeights objective_term_weights(double L_prev, double Psi_prev, double p_fixed, double mu0);

// users[s][g][u] in the shifted frame.
GpWeights compute_weights(const GpExpansionPoint& e,
                          const std::vector<std::vector<std::vector<Vec2>>>& users, double s_max,
                          double mu0);

// ---- GP building blocks; each argument is a GP variable or a constant ----

// (x^2 + x'^2 + y^2 + y'^2) / monomial(2 x x' + 2 y y' + s^2) <= 1
Posynomial speed_posynomial(const Monomial& x, const Monomial& y, const Monomial& x_prev,
                            const Monomial& y_prev, const CrossWeights& w, double s_max);

// (x^2 + xr^2 + y^2 + yr^2 + H^2) / monomial(2 x xr + 2 y yr + L) <= 1
Posynomial distance_posynomial(const Monomial& x, const Monomial& y, const Monomial& L,
                               const Vec2& r, double altitude, const CrossWeights& w);

// Gamma = (L Psi) (L Psi / nu)^-nu (p mu0 / xi)^-xi
Monomial gamma_monomial(const Monomial& L, const Monomial& Psi, double p_fixed, double mu0,
                        const ObjectiveWeights& w);

// (mu0 S / L + sigma^2) / Psi with S the frozen interferer power sum.
Posynomial interference_posynomial(const Monomial& L, const Monomial& Psi, double interferer_power,
                                   double sigma2, double mu0);

// Gamma exp(C_rsv) <= 1
Monomial min_rate_monomial(const Monomial& gamma, double c_rsv_nats);

// ---- Scalar evaluation of the condensed forms ----

double speed_constraint_monomial(const Vec2& q, const Vec2& q_prev, const CrossWeights& w, double s_max);
double distance_epigraph_monomial(const Vec2& q, double L, const Vec2& r, double altitude,
                                 const CrossWeights& w);
double gamma_term(double L, double Psi, double p_fixed, double mu0, const ObjectiveWeights& w);
double interference_epigraph_constraint(double Psi, double L, double interferer_power, double sigma2,
                                     double mu0);
double min_rate_constraint_gp(double gamma, double c_rsv_nats);

}  // namespace uavnoma::gp
