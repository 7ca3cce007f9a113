#include "uavnoma/gp_approx.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

namespace uavnoma::gp {

namespace {

template <std::size_t K>
std::array<double, K> normalized(const std::array<double, K>& terms, const char* what) {
    double total = 0.0;
    for (double t : terms) {
        if (!(t > 0.0) || !std::isfinite(t))
            throw std::domain_error(std::string(what) + ": expansion terms must be strictly positive");
        total += t;
    }
    std::array<double, K> w;
    bool clamped = false;
    for (std::size_t k = 0; k < K; ++k) {
        w[k] = terms[k] / total;
        if (w[k] < kMinWeight) {
            w[k] = kMinWeight;
            clamped = true;
        }
    }
    if (clamped) {
        double s = 0.0;
        for (double v : w) s += v;
        for (double& v : w) v /= s;
    }
    return w;
}

CrossWeights cross(const std::array<double, 3>& terms, const char* what) {
    const auto w = normalized(terms, what);
    return {w[0], w[1], w[2]};
}

Monomial constant_of(const Vec2& v, int axis) { return Monomial::constant(v(axis)); }

// Reciprocal of the AM-GM monomial (a/wa)^wa (b/wb)^wb (c/wc)^wc.
Monomial inverse_condensed(const Monomial& a, const Monomial& b, const Monomial& c, const CrossWeights& w) {
    Monomial m = (a * Monomial::constant(1.0 / w.x)).pow(-w.x);
    m *= (b * Monomial::constant(1.0 / w.y)).pow(-w.y);
    m *= (c * Monomial::constant(1.0 / w.rest)).pow(-w.rest);
    return m;
}

}  // namespace

CrossWeights speed_weights(const Vec2& q, const Vec2& q_prev, double s_max) {
    return cross({2.0 * q.x() * q_prev.x(), 2.0 * q.y() * q_prev.y(), s_max * s_max}, "speed_weights");
}

CrossWeights distance_epigraph_weights(const Vec2& q, const Vec2& r, double L_prev) {
    return cross({2.0 * q.x() * r.x(), 2.0 * q.y() * r.y(), L_prev}, "distance_epigraph_weights");
}

ObjectiveWeights objective_term_weights(double L_prev, double Psi_prev, double p_fixed, double mu0) {
    const auto w = normalized(std::array<double, 2>{L_prev * Psi_prev, p_fixed * mu0}, "objective_term_weights");
    return {w[0], w[1]};
}

GpWeights compute_weights(const GpExpansionPoint& e, const std::vector<std::vector<std::vector<Vec2>>>& users,
                          double s_max, double mu0) {
    const int N = static_cast<int>(e.q.size()) - 1;
    const int G = static_cast<int>(e.L.size());
    GpWeights w;
    for (int s = 0; s < N; ++s) w.speed.push_back(speed_weights(e.q[s + 1], e.q[s], s_max));
    w.dist.resize(G);
    w.objective.resize(G);
    for (int g = 0; g < G; ++g) {
        for (int s = 0; s < N; ++s) w.objective[g].push_back(objective_term_weights(e.L[g][s], e.Psi[g][s], e.p(g, s), mu0));
        const int U = static_cast<int>(users[0][g].size());
        w.dist[g].resize(U);
        for (int u = 0; u < U; ++u)
            for (int s = 0; s < N; ++s)
                w.dist[g][u].push_back(distance_epigraph_weights(e.q[s + 1], users[s][g][u], e.L[g][s]));
    }
    return w;
}

Posynomial speed_posynomial(const Monomial& x, const Monomial& y, const Monomial& x_prev, const Monomial& y_prev,
                            const CrossWeights& w, double s_max) {
    Posynomial num{x.pow(2.0), x_prev.pow(2.0), y.pow(2.0), y_prev.pow(2.0)};
    num *= inverse_condensed(Monomial::constant(2.0) * x * x_prev, Monomial::constant(2.0) * y * y_prev,
                             Monomial::constant(s_max * s_max), w);
    return num;
}

Posynomial distance_posynomial(const Monomial& x, const Monomial& y, const Monomial& L, const Vec2& r,
                               double altitude, const CrossWeights& w) {
    const Monomial xr = constant_of(r, 0), yr = constant_of(r, 1);
    Posynomial num{x.pow(2.0), xr.pow(2.0), y.pow(2.0), yr.pow(2.0), Monomial::constant(altitude * altitude)};
    num *= inverse_condensed(Monomial::constant(2.0) * x * xr, Monomial::constant(2.0) * y * yr, L, w);
    return num;
}

Monomial gamma_monomial(const Monomial& L, const Monomial& Psi, double p_fixed, double mu0,
                        const ObjectiveWeights& w) {
    const Monomial lp = L * Psi;
    Monomial g = lp * (lp * Monomial::constant(1.0 / w.nu)).pow(-w.nu);
    g *= Monomial::constant(std::pow(p_fixed * mu0 / w.xi, -w.xi));
    return g;
}

Posynomial interference_posynomial(const Monomial& L, const Monomial& Psi, double interferer_power, double sigma2,
                                   double mu0) {
    Posynomial p{Monomial::constant(sigma2) * Psi.pow(-1.0)};
    if (interferer_power > 0.0) p += Monomial::constant(mu0 * interferer_power) * L.pow(-1.0) * Psi.pow(-1.0);
    return p;
}

Monomial min_rate_monomial(const Monomial& gamma, double c_rsv_nats) {
    return gamma * Monomial::constant(std::exp(c_rsv_nats));
}

double speed_constraint_monomial(const Vec2& q, const Vec2& q_prev, const CrossWeights& w, double s_max) {
    return speed_posynomial(constant_of(q, 0), constant_of(q, 1), constant_of(q_prev, 0), constant_of(q_prev, 1), w,
                            s_max)
        .evaluate({});
}

double distance_epigraph_monomial(const Vec2& q, double L, const Vec2& r, double altitude, const CrossWeights& w) {
    return distance_posynomial(constant_of(q, 0), constant_of(q, 1), Monomial::constant(L), r, altitude, w)
        .evaluate({});
}

double gamma_term(double L, double Psi, double p_fixed, double mu0, const ObjectiveWeights& w) {
    return gamma_monomial(Monomial::constant(L), Monomial::constant(Psi), p_fixed, mu0, w).evaluate({});
}

double interference_epigraph_constraint(double Psi, double L, double interferer_power, double sigma2, double mu0) {
    return interference_posynomial(Monomial::constant(L), Monomial::constant(Psi), interferer_power, sigma2, mu0)
        .evaluate({});
}

double min_rate_constraint_gp(double gamma, double c_rsv_nats) {
    return min_rate_monomial(Monomial::constant(gamma), c_rsv_nats).evaluate({});
}

}  // namespace uavnoma::gp
