#include "uavnoma/convex.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace uavnoma::convex {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kBarrierGrowth = 20.0;
constexpr double kNewtonTol = 1e-9;  // half squared Newton decrement
constexpr double kArmijo = 0.01;
// Phase I keeps going until every constraint has this much slack (or it
// converges); a start barely inside leaves the barrier Hessian too stiff.
constexpr double kPhase1Margin = 1e-3;
// Phase I is unbounded when a constraint can be driven to -inf; it searches
// inside this box around the start for any variable without a bound.
constexpr double kPhase1Reach = 25.0;

Eigen::VectorXd gather(const Eigen::VectorXd& x, const std::vector<int>& vars) {
    Eigen::VectorXd local(vars.size());
    for (std::size_t i = 0; i < vars.size(); ++i) local(i) = x(vars[i]);
    return local;
}

}  // namespace

Piece affine(std::vector<int> vars, std::vector<double> coefs, double constant) {
    if (vars.size() != coefs.size()) throw std::invalid_argument("affine: vars/coefs size mismatch");
    Eigen::VectorXd a = Eigen::Map<const Eigen::VectorXd>(coefs.data(), coefs.size());
    return {std::move(vars), [a, constant](const Eigen::VectorXd& x, Eigen::VectorXd* g, Eigen::MatrixXd* H) {
                if (g) *g = a;
                if (H) H->setZero(a.size(), a.size());
                return constant + a.dot(x);
            }};
}

Piece log_sum_exp(std::vector<int> vars, Eigen::MatrixXd A, Eigen::VectorXd b) {
    if (A.cols() != static_cast<Eigen::Index>(vars.size()) || A.rows() != b.size() || A.rows() == 0)
        throw std::invalid_argument("log_sum_exp: inconsistent term matrix");
    return {std::move(vars), [A = std::move(A), b = std::move(b)](const Eigen::VectorXd& x, Eigen::VectorXd* g,
                                                                  Eigen::MatrixXd* H) {
                const Eigen::VectorXd z = A * x + b;
                const double zmax = z.maxCoeff();
                const Eigen::VectorXd w = (z.array() - zmax).exp().matrix();
                const double total = w.sum();
                if (g || H) {
                    const Eigen::VectorXd pi = w / total;
                    if (g) *g = A.transpose() * pi;
                    if (H) {
                        const Eigen::VectorXd Api = A.transpose() * pi;
                        *H = A.transpose() * pi.asDiagonal() * A - Api * Api.transpose();
                    }
                }
                return zmax + std::log(total);
            }};
}

Piece neg_log_affine(std::vector<int> vars, std::vector<double> coefs, double constant) {
    if (vars.size() != coefs.size()) throw std::invalid_argument("neg_log_affine: vars/coefs size mismatch");
    Eigen::VectorXd a = Eigen::Map<const Eigen::VectorXd>(coefs.data(), coefs.size());
    return {std::move(vars), [a, constant](const Eigen::VectorXd& x, Eigen::VectorXd* g, Eigen::MatrixXd* H) {
                const double u = constant + a.dot(x);
                if (!(u > 0)) return kInf;
                if (g) *g = -a / u;
                if (H) *H = a * a.transpose() / (u * u);
                return -std::log(u);
            }};
}

Piece square(int var, double weight) {
    return {{var}, [weight](const Eigen::VectorXd& x, Eigen::VectorXd* g, Eigen::MatrixXd* H) {
                if (g) *g = Eigen::VectorXd::Constant(1, 2.0 * weight * x(0));
                if (H) *H = Eigen::MatrixXd::Constant(1, 1, 2.0 * weight);
                return weight * x(0) * x(0);
            }};
}

ConvexFunction& ConvexFunction::add(Piece piece) {
    pieces_.push_back(std::move(piece));
    std::vector<int> all;
    for (const auto& p : pieces_) all.insert(all.end(), p.vars.begin(), p.vars.end());
    std::sort(all.begin(), all.end());
    all.erase(std::unique(all.begin(), all.end()), all.end());
    support_ = std::move(all);
    slot_.clear();
    for (const auto& p : pieces_) {
        std::vector<int> pos;
        for (int v : p.vars)
            pos.push_back(static_cast<int>(std::lower_bound(support_.begin(), support_.end(), v) - support_.begin()));
        slot_.push_back(std::move(pos));
    }
    return *this;
}

double ConvexFunction::value(const Eigen::VectorXd& x) const {
    double total = 0.0;
    for (const auto& p : pieces_) total += p.eval(gather(x, p.vars), nullptr, nullptr);
    return total;
}

double ConvexFunction::evaluate(const Eigen::VectorXd& x, Eigen::VectorXd& grad, Eigen::MatrixXd& hess) const {
    const Eigen::Index k = static_cast<Eigen::Index>(support_.size());
    grad.setZero(k);
    hess.setZero(k, k);
    double total = 0.0;
    Eigen::VectorXd g;
    Eigen::MatrixXd H;
    for (std::size_t i = 0; i < pieces_.size(); ++i) {
        const auto& pos = slot_[i];
        total += pieces_[i].eval(gather(x, pieces_[i].vars), &g, &H);
        for (std::size_t a = 0; a < pos.size(); ++a) {
            grad(pos[a]) += g(a);
            for (std::size_t b = 0; b < pos.size(); ++b) hess(pos[a], pos[b]) += H(a, b);
        }
    }
    return total;
}

void ConvexProgram::add_constraint(ConvexFunction f, std::string label) {
    constraints.push_back(std::move(f));
    labels.resize(constraints.size() - 1);
    labels.push_back(std::move(label));
}

std::string to_string(SolveStatus status) {
    switch (status) {
        case SolveStatus::Optimal: return "optimal";
        case SolveStatus::MaxIter: return "max_iter";
        case SolveStatus::Infeasible: return "infeasible";
    }
    return "unknown";
}

namespace {

struct BarrierOutcome {
    Eigen::VectorXd x;
    double t = 1.0;
    bool finished = false;  // reached the gap tolerance
    bool stopped_early = false;
    double stationarity = 0.0;
};

class BarrierSolver {
public:
    explicit BarrierSolver(const ConvexProgram& prog) : prog_(prog), n_(prog.num_vars) {
        lo_ = prog.lower.size() == n_ ? prog.lower : Eigen::VectorXd::Constant(n_, -kInf);
        hi_ = prog.upper.size() == n_ ? prog.upper : Eigen::VectorXd::Constant(n_, kInf);
        m_ = static_cast<int>(prog.constraints.size());
        for (int i = 0; i < n_; ++i) m_ += std::isfinite(lo_(i)) + std::isfinite(hi_(i));
    }

    int barrier_terms() const { return m_; }
    const Eigen::VectorXd& lower() const { return lo_; }
    const Eigen::VectorXd& upper() const { return hi_; }

    bool strictly_feasible_bounds(const Eigen::VectorXd& x) const {
        for (int i = 0; i < n_; ++i)
            if (!(x(i) > lo_(i) && x(i) < hi_(i))) return false;
        return true;
    }

    bool strictly_feasible(const Eigen::VectorXd& x) const {
        if (!strictly_feasible_bounds(x)) return false;
        for (const auto& c : prog_.constraints) {
            const double v = c.value(x);
            if (!(v < 0.0)) return false;
        }
        return true;
    }

    // t f0 + barrier; +inf outside the strict interior.
    double phi(const Eigen::VectorXd& x, double t) const {
        double total = 0.0;
        for (int i = 0; i < n_; ++i) {
            if (std::isfinite(lo_(i))) {
                if (!(x(i) > lo_(i))) return kInf;
                total -= std::log(x(i) - lo_(i));
            }
            if (std::isfinite(hi_(i))) {
                if (!(x(i) < hi_(i))) return kInf;
                total -= std::log(hi_(i) - x(i));
            }
        }
        for (const auto& c : prog_.constraints) {
            const double v = c.value(x);
            if (!(v < 0.0)) return kInf;
            total -= std::log(-v);
        }
        const double f0 = prog_.objective.value(x);
        if (!std::isfinite(f0)) return kInf;
        return total + t * f0;
    }

    double derivatives(const Eigen::VectorXd& x, double t, Eigen::VectorXd& grad,
                       std::vector<Eigen::Triplet<double>>& trip) const {
        grad.setZero(n_);
        trip.clear();
        Eigen::VectorXd g;
        Eigen::MatrixXd H;
        double total = 0.0;
        auto scatter = [&](const std::vector<int>& sup, double gscale, double hscale, bool outer) {
            for (std::size_t a = 0; a < sup.size(); ++a) {
                grad(sup[a]) += gscale * g(a);
                for (std::size_t b = 0; b < sup.size(); ++b) {
                    double v = hscale * H(a, b);
                    if (outer) v += g(a) * g(b) * gscale * gscale;
                    if (v != 0.0) trip.emplace_back(sup[a], sup[b], v);
                }
            }
        };
        total += t * prog_.objective.evaluate(x, g, H);
        scatter(prog_.objective.support(), t, t, false);
        for (const auto& c : prog_.constraints) {
            const double v = c.evaluate(x, g, H);
            total -= std::log(-v);
            // -log(-f): grad = g / (-f), Hess = H / (-f) + g g^T / f^2
            scatter(c.support(), 1.0 / -v, 1.0 / -v, true);
        }
        for (int i = 0; i < n_; ++i) {
            if (std::isfinite(lo_(i))) {
                const double d = x(i) - lo_(i);
                total -= std::log(d);
                grad(i) -= 1.0 / d;
                trip.emplace_back(i, i, 1.0 / (d * d));
            }
            if (std::isfinite(hi_(i))) {
                const double d = hi_(i) - x(i);
                total -= std::log(d);
                grad(i) += 1.0 / d;
                trip.emplace_back(i, i, 1.0 / (d * d));
            }
        }
        return total;
    }

    BarrierOutcome run(Eigen::VectorXd x, double gap_tol, int max_iter, int& iterations,
                       const std::function<bool(const Eigen::VectorXd&)>& early_stop) const {
        BarrierOutcome out;
        double t = 1.0;
        Eigen::VectorXd grad, d;
        std::vector<Eigen::Triplet<double>> trip;
        Eigen::SparseMatrix<double> H(n_, n_);
        Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
        bool analyzed = false;
        for (;;) {
            // centering
            for (;;) {
                const double phi0 = derivatives(x, t, grad, trip);
                H.setFromTriplets(trip.begin(), trip.end());
                if (!analyzed) {
                    ldlt.analyzePattern(H);
                    analyzed = true;
                }
                double reg = 0.0;
                const double scale = 1.0 + H.diagonal().cwiseAbs().maxCoeff();
                for (int attempt = 0; attempt < 12; ++attempt) {
                    Eigen::SparseMatrix<double> Hr = H;
                    if (reg > 0.0)
                        for (int i = 0; i < n_; ++i) Hr.coeffRef(i, i) += reg;
                    ldlt.factorize(Hr);
                    if (ldlt.info() == Eigen::Success && ldlt.vectorD().minCoeff() > 0.0) {
                        d = ldlt.solve(-grad);
                        if (d.allFinite()) break;
                    }
                    reg = reg == 0.0 ? 1e-14 * scale : reg * 100.0;
                }
                if (!d.allFinite()) d = -grad / scale;
                const double decrement = -grad.dot(d);
                out.stationarity = grad.cwiseAbs().maxCoeff() / t;
                if (decrement / 2.0 <= kNewtonTol) break;
                if (iterations >= max_iter) {
                    out.x = x;
                    out.t = t;
                    return out;
                }
                // Near the center the Armijo decrease drops below the
                // rounding of phi; allow for it so full steps still pass.
                const double slack = 64.0 * std::numeric_limits<double>::epsilon() * std::abs(phi0);
                double alpha = 1.0;
                double phi1 = phi(x + alpha * d, t);
                int shrink = 0;
                while ((!std::isfinite(phi1) || phi1 > phi0 - kArmijo * alpha * decrement + slack) && shrink < 60) {
                    alpha *= 0.5;
                    phi1 = phi(x + alpha * d, t);
                    ++shrink;
                }
                ++iterations;
                if (shrink == 60 || !std::isfinite(phi1)) break;  // no progress possible at this t
                x += alpha * d;
                if (early_stop && early_stop(x)) {
                    out.x = x;
                    out.t = t;
                    out.stopped_early = true;
                    return out;
                }
            }
            if (m_ == 0 || m_ / t <= gap_tol) break;
            t *= kBarrierGrowth;
        }
        out.x = x;
        out.t = t;
        out.finished = true;
        return out;
    }

private:
    const ConvexProgram& prog_;
    int n_;
    int m_ = 0;
    Eigen::VectorXd lo_, hi_;
};

Eigen::VectorXd interior_start(const ConvexProgram& prog, const BarrierSolver& solver) {
    Eigen::VectorXd x = prog.warm_start ? *prog.warm_start : Eigen::VectorXd::Zero(prog.num_vars);
    if (x.size() != prog.num_vars) throw std::invalid_argument("solve: warm start has wrong size");
    const auto& lo = solver.lower();
    const auto& hi = solver.upper();
    for (int i = 0; i < prog.num_vars; ++i) {
        const bool flo = std::isfinite(lo(i)), fhi = std::isfinite(hi(i));
        if (flo && fhi) {
            if (!(hi(i) > lo(i))) throw std::invalid_argument("solve: empty box for a variable");
            const double margin = 1e-6 * (hi(i) - lo(i));
            x(i) = std::clamp(x(i), lo(i) + margin, hi(i) - margin);
        } else if (flo && !(x(i) > lo(i))) {
            x(i) = lo(i) + 1e-6 * std::max(1.0, std::abs(lo(i)));
        } else if (fhi && !(x(i) < hi(i))) {
            x(i) = hi(i) - 1e-6 * std::max(1.0, std::abs(hi(i)));
        }
    }
    return x;
}

void measure(const ConvexProgram& prog, SolveReport& rep) {
    rep.objective = prog.objective.value(rep.x);
    rep.max_violation = 0.0;
    rep.worst_constraint = -1;
    for (std::size_t i = 0; i < prog.constraints.size(); ++i) {
        const double v = prog.constraints[i].value(rep.x);
        const double viol = std::isfinite(v) ? std::max(0.0, v) : kInf;
        if (viol > rep.max_violation) {
            rep.max_violation = viol;
            rep.worst_constraint = static_cast<int>(i);
        }
    }
    for (int i = 0; i < prog.num_vars; ++i) {
        if (prog.lower.size() == prog.num_vars)
            rep.max_violation = std::max(rep.max_violation, prog.lower(i) - rep.x(i));
        if (prog.upper.size() == prog.num_vars)
            rep.max_violation = std::max(rep.max_violation, rep.x(i) - prog.upper(i));
    }
}

}  // namespace

SolveReport solve(const ConvexProgram& program, const SolverOptions& options) {
    BarrierSolver solver(program);
    SolveReport rep;
    Eigen::VectorXd x0 = interior_start(program, solver);

    const ConvexProgram* working = &program;
    ConvexProgram relaxed;
    int phase1_iters = 0;
    if (!solver.strictly_feasible(x0)) {
        // Phase I: minimize s  s.t.  f_i(x) <= s, s >= -1.
        const int n = program.num_vars;
        ConvexProgram p1;
        p1.num_vars = n + 1;
        p1.objective = ConvexFunction(affine({n}, {1.0}));
        double worst = 0.0;
        for (const auto& c : program.constraints) {
            ConvexFunction f = c;
            f.add(affine({n}, {-1.0}));
            p1.constraints.push_back(std::move(f));
            worst = std::max(worst, c.value(x0));
        }
        if (!std::isfinite(worst)) {
            rep.x = x0;
            measure(program, rep);
            rep.status = SolveStatus::Infeasible;
            return rep;
        }
        p1.lower = Eigen::VectorXd::Constant(n + 1, -kInf);
        p1.upper = Eigen::VectorXd::Constant(n + 1, kInf);
        if (program.lower.size() == n) p1.lower.head(n) = program.lower;
        if (program.upper.size() == n) p1.upper.head(n) = program.upper;
        for (int i = 0; i < n; ++i) {
            if (!std::isfinite(p1.lower(i))) p1.lower(i) = x0(i) - kPhase1Reach;
            if (!std::isfinite(p1.upper(i))) p1.upper(i) = x0(i) + kPhase1Reach;
        }
        p1.lower(n) = -1.0;
        Eigen::VectorXd z(n + 1);
        z << x0, worst + 1.0;
        BarrierSolver s1(p1);
        const double phase1_gap = std::min(options.kkt_tol, options.feas_tol) * 0.1;
        const auto out = s1.run(z, phase1_gap, options.max_iter, phase1_iters,
                                [n](const Eigen::VectorXd& v) { return v(n) < -kPhase1Margin; });
        const double s = out.x(n);
        x0 = out.x.head(n);
        if (s < 0.0 && solver.strictly_feasible(x0)) {
            // strictly feasible start found
        } else if (s <= 0.5 * options.feas_tol) {
            relaxed = program;
            const double loosen = std::max(s, 0.0) + 0.25 * options.feas_tol;
            for (auto& c : relaxed.constraints) c.add(affine({}, {}, -loosen));
            working = &relaxed;
            rep.relaxed = true;
        } else {
            rep.x = x0;
            rep.iterations = phase1_iters;
            measure(program, rep);
            rep.status = SolveStatus::Infeasible;
            return rep;
        }
    }

    BarrierSolver main(*working);
    int iters = 0;
    const auto out = main.run(x0, options.kkt_tol, options.max_iter, iters, {});
    rep.x = out.x;
    rep.iterations = iters + phase1_iters;
    measure(program, rep);
    const double complementarity = main.barrier_terms() > 0 ? main.barrier_terms() / out.t : 0.0;
    rep.kkt_residual = std::max(out.stationarity, complementarity);
    if (out.finished && rep.kkt_residual <= options.kkt_tol && rep.max_violation <= options.feas_tol)
        rep.status = SolveStatus::Optimal;
    else if (rep.max_violation > options.feas_tol)
        rep.status = SolveStatus::Infeasible;
    else
        rep.status = SolveStatus::MaxIter;
    return rep;
}

}  // namespace uavnoma::convex
