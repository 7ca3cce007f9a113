#include "uavnoma/geometric_program.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace uavnoma::gp {

Monomial& Monomial::operator*=(const Monomial& other) {
    coef *= other.coef;
    for (const auto& [var, a] : other.exponents) {
        auto it = std::find_if(exponents.begin(), exponents.end(), [v = var](const auto& e) { return e.first == v; });
        if (it == exponents.end())
            exponents.emplace_back(var, a);
        else
            it->second += a;
    }
    return *this;
}

Monomial operator*(Monomial a, const Monomial& b) { return a *= b; }

Monomial Monomial::pow(double a) const {
    Monomial m{std::pow(coef, a), exponents};
    for (auto& e : m.exponents) e.second *= a;
    return m;
}

double Monomial::evaluate(std::span<const double> x) const {
    double v = coef;
    for (const auto& [var, a] : exponents) v *= std::pow(x[var], a);
    return v;
}

double Monomial::log_evaluate(std::span<const double> log_x) const {
    double v = std::log(coef);
    for (const auto& [var, a] : exponents) v += a * log_x[var];
    return v;
}

Posynomial& Posynomial::operator*=(const Monomial& m) {
    for (auto& t : terms) t *= m;
    return *this;
}

double Posynomial::evaluate(std::span<const double> x) const {
    double v = 0.0;
    for (const auto& t : terms) v += t.evaluate(x);
    return v;
}

convex::Piece log_posynomial(const Posynomial& p, const std::string& label) {
    if (p.terms.empty()) throw std::invalid_argument(label + ": empty posynomial");
    std::map<int, int> column;
    for (std::size_t k = 0; k < p.terms.size(); ++k) {
        const auto& t = p.terms[k];
        if (!(t.coef > 0.0) || !std::isfinite(t.coef)) {
            std::ostringstream os;
            os << label << ": term " << k << " has non-positive coefficient " << t.coef;
            throw std::invalid_argument(os.str());
        }
        for (const auto& e : t.exponents) column.emplace(e.first, 0);
    }
    std::vector<int> vars;
    for (auto& [var, col] : column) {
        col = static_cast<int>(vars.size());
        vars.push_back(var);
    }
    if (p.terms.size() == 1) {
        std::vector<double> a(vars.size(), 0.0);
        for (const auto& [var, e] : p.terms[0].exponents) a[column[var]] += e;
        return convex::affine(std::move(vars), std::move(a), std::log(p.terms[0].coef));
    }
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(p.terms.size(), vars.size());
    Eigen::VectorXd b(p.terms.size());
    for (std::size_t k = 0; k < p.terms.size(); ++k) {
        b(k) = std::log(p.terms[k].coef);
        for (const auto& [var, e] : p.terms[k].exponents) A(k, column[var]) += e;
    }
    return convex::log_sum_exp(std::move(vars), std::move(A), std::move(b));
}

convex::ConvexProgram gp_to_convex(const GeometricProgram& gp) {
    convex::ConvexProgram prog;
    prog.num_vars = gp.num_vars;
    prog.objective = convex::ConvexFunction(log_posynomial(gp.objective, "objective"));
    for (std::size_t i = 0; i < gp.constraints.size(); ++i) {
        const std::string label = i < gp.labels.size() ? gp.labels[i] : "constraint " + std::to_string(i);
        prog.add_constraint(convex::ConvexFunction(log_posynomial(gp.constraints[i], label)), label);
    }
    return prog;
}

namespace {

void write_posynomial(std::ostream& os, const Posynomial& p, const GeometricProgram& gp) {
    for (const auto& t : p.terms) {
        os << "  " << t.coef;
        for (const auto& [var, a] : t.exponents) {
            os << " * ";
            if (var < static_cast<int>(gp.var_names.size()))
                os << gp.var_names[var];
            else
                os << "x" << var;
            os << "^" << a;
        }
        os << "\n";
    }
}

}  // namespace

void write_text(std::ostream& os, const GeometricProgram& gp) {
    os << "variables " << gp.num_vars << "\n";
    for (int i = 0; i < gp.num_vars; ++i)
        os << "  x" << i << " " << (i < static_cast<int>(gp.var_names.size()) ? gp.var_names[i] : "") << "\n";
    os << "minimize\n";
    write_posynomial(os, gp.objective, gp);
    for (std::size_t i = 0; i < gp.constraints.size(); ++i) {
        os << "constraint " << (i < gp.labels.size() ? gp.labels[i] : std::to_string(i)) << " <= 1\n";
        write_posynomial(os, gp.constraints[i], gp);
    }
}

}  // namespace uavnoma::gp
