#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "polycycle/polynomial.hpp"

namespace polycycle {

using Rational = boost::multiprecision::cpp_rational;

struct ExprNode;
using ExprPtr = std::shared_ptr<const ExprNode>;

struct ExprNode {
    enum class Kind { number, ident, neg, add, sub, mul, div, pow };

    Kind kind;
    Rational value;        // number
    std::string name;      // ident
    ExprPtr lhs, rhs;      // neg uses lhs only
    unsigned exponent = 0; // pow
};

/// Parsed expression together with the scope it was parsed in.
class Expression {
public:
    Expression() = default;
    Expression(ExprPtr root, std::vector<std::string> vars, std::vector<std::string> params)
        : root_(std::move(root)), vars_(std::move(vars)), params_(std::move(params)) {}

    const ExprPtr& root() const { return root_; }
    const std::vector<std::string>& variables() const { return vars_; }
    const std::vector<std::string>& parameters() const { return params_; }

    /// Parameter names that actually occur in the tree.
    std::vector<std::string> free_parameters() const;

private:
    ExprPtr root_;
    std::vector<std::string> vars_;
    std::vector<std::string> params_;
};

using Binding = std::map<std::string, double>;

/// `vars` are the polynomial variables (at most two; the first maps to the x exponent).
Expression parse_expression(const std::string& text, const std::vector<std::string>& params,
                            const std::vector<std::string>& vars = {"x", "y"});

/// Fully parenthesized text that parses back to a structurally equal tree.
std::string print(const Expression& e);

bool structurally_equal(const ExprPtr& a, const ExprPtr& b);

BivariatePolynomial instantiate(const Expression& e, const Binding& binding);

/// Value of a variable-free expression; a variable occurring in it is a ModelError.
double evaluate_constant(const Expression& e, const Binding& binding);

}  // namespace polycycle
