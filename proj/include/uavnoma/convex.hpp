#pragma once

// Smooth convex programs and a log-barrier interior-point solver.
//
//   minimize f0(x)  s.t.  f_i(x) <= 0,  lower <= x <= upper
//
// Functions are sums of pieces, each touching a handful of variables, so the
// barrier Hessian is assembled sparsely and factorized with a sparse LDL^T.

#include <Eigen/Core>

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace uavnoma::convex {

// A smooth convex term restricted to `vars`. `eval` receives the values of
// those variables and fills the local gradient/Hessian when the pointers are
// non-null. It must return +inf outside its domain.
struct Piece {
    std::vector<int> vars;
    std::function<double(const Eigen::VectorXd& local, Eigen::VectorXd* grad, Eigen::MatrixXd* hess)>
        eval;
};

// c + a.x
Piece affine(std::vector<int> vars, std::vector<double> coefs, double constant = 0.0);
// ln sum_k exp(A_k . x + b_k); rows of A are terms, columns follow `vars`.
Piece log_sum_exp(std::vector<int> vars, Eigen::MatrixXd A, Eigen::VectorXd b);
// -ln(c + a.x), +inf when the argument is not positive.
Piece neg_log_affine(std::vector<int> vars, std::vector<double> coefs, double constant);
// w * x_i^2
Piece square(int var, double weight = 1.0);

class ConvexFunction {
public:
    ConvexFunction() = default;
    explicit ConvexFunction(Piece piece) { add(std::move(piece)); }

    ConvexFunction& add(Piece piece);

    double value(const Eigen::VectorXd& x) const;
    // Value plus gradient and Hessian over support(), in support order.
    double evaluate(const Eigen::VectorXd& x, Eigen::VectorXd& grad, Eigen::MatrixXd& hess) const;
    const std::vector<int>& support() const { return support_; }

private:
    std::vector<Piece> pieces_;
    std::vector<int> support_;
    std::vector<std::vector<int>> slot_;  // piece-local -> support position
};

struct ConvexProgram {
    int num_vars = 0;
    ConvexFunction objective;
    std::vector<ConvexFunction> constraints;
    std::vector<std::string> labels;  // optional, one per constraint
    Eigen::VectorXd lower;            // empty or size num_vars; -inf allowed
    Eigen::VectorXd upper;            // empty or size num_vars; +inf allowed
    std::optional<Eigen::VectorXd> warm_start;

    void add_constraint(ConvexFunction f, std::string label = {});
};

enum class SolveStatus { Optimal, MaxIter, Infeasible };

std::string to_string(SolveStatus status);

struct SolveReport {
    Eigen::VectorXd x;
    double objective = 0.0;
    double max_violation = 0.0;
    double kkt_residual = 0.0;
    int iterations = 0;
    SolveStatus status = SolveStatus::Infeasible;
    // The feasible set had no usable interior; constraints were loosened by
    // less than feas_tol to run the barrier.
    bool relaxed = false;
    int worst_constraint = -1;
};

struct SolverOptions {
    double kkt_tol = 1e-6;
    double feas_tol = 1e-8;
    int max_iter = 500;
};

SolveReport solve(const ConvexProgram& program, const SolverOptions& options = {});

}  // namespace uavnoma::convex
