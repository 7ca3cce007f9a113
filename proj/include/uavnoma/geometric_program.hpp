#pragma once

// Geometric programs in posynomial form and their log-space convex form.
//
//   minimize  f(x)  s.t.  p_i(x) <= 1,  x > 0
//
// with f a posynomial and p_i posynomials. Substituting y = ln x turns every
// monomial into an affine function and every posynomial into log-sum-exp.

#include "uavnoma/convex.hpp"

#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace uavnoma::gp {

struct Monomial {
    double coef = 1.0;
    std::vector<std::pair<int, double>> exponents;  // (variable, power)

    static Monomial constant(double c) { return Monomial{c, {}}; }
    static Monomial variable(int var, double power = 1.0) { return Monomial{1.0, {{var, power}}}; }

    Monomial& operator*=(const Monomial& other);
    Monomial pow(double a) const;
    double evaluate(std::span<const double> x) const;
    double log_evaluate(std::span<const double> log_x) const;  // ln c + a . y
};

Monomial operator*(Monomial a, const Monomial& b);

struct Posynomial {
    std::vector<Monomial> terms;

    Posynomial() = default;
    Posynomial(std::initializer_list<Monomial> t) : terms(t) {}

    Posynomial& operator+=(const Monomial& m) {
        terms.push_back(m);
        return *this;
    }
    Posynomial& operator*=(const Monomial& m);
    double evaluate(std::span<const double> x) const;
};

struct GeometricProgram {
    int num_vars = 0;
    std::vector<std::string> var_names;  // optional
    Posynomial objective;
    std::vector<Posynomial> constraints;  // each <= 1
    std::vector<std::string> labels;

    void add_constraint(Posynomial p, std::string label) {
        constraints.push_back(std::move(p));
        labels.push_back(std::move(label));
    }
};

// Log transform. Throws std::invalid_argument naming the offending term if
// any coefficient is not strictly positive and finite.
convex::ConvexProgram gp_to_convex(const GeometricProgram& gp);

// ln of a posynomial as a convex piece over y = ln x.
convex::Piece log_posynomial(const Posynomial& p, const std::string& label = "posynomial");

// Plain-text dump: one line per variable, then each term as
// "coef * var^exp * ...", grouped by objective and labelled constraints.
void write_text(std::ostream& os, const GeometricProgram& gp);

}  // namespace uavnoma::gp
