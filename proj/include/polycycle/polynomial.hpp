#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

namespace polycycle {

/// Real polynomial in (x, y). Zero coefficients are never stored.
class BivariatePolynomial {
public:
    using Exponent = std::pair<int, int>;
    using Terms = std::map<Exponent, double>;

    BivariatePolynomial() = default;
    explicit BivariatePolynomial(double constant);
    explicit BivariatePolynomial(Terms terms);

    static BivariatePolynomial x();
    static BivariatePolynomial y();

    const Terms& terms() const { return terms_; }
    double coefficient(int i, int j) const;
    int total_degree() const;
    bool is_zero() const { return terms_.empty(); }
    bool is_constant() const;
    double constant_term() const { return coefficient(0, 0); }

    double operator()(double x, double y) const;

    BivariatePolynomial operator+(const BivariatePolynomial& o) const;
    BivariatePolynomial operator-(const BivariatePolynomial& o) const;
    BivariatePolynomial operator*(const BivariatePolynomial& o) const;
    BivariatePolynomial operator*(double c) const;
    BivariatePolynomial operator-() const;
    BivariatePolynomial pow(unsigned k) const;

    BivariatePolynomial dx() const;
    BivariatePolynomial dy() const;
    /// p(y, x).
    BivariatePolynomial swapped() const;

    /// Substitutes x -> x0 + a*X + b*Y and y -> y0 + c*X + d*Y.
    BivariatePolynomial affine_substitute(double x0, double a, double b, double y0, double c,
                                          double d) const;

    /// Exact quotient by x (resp. y). Terms with zero power whose magnitude is below `tol`
    /// relative to the largest coefficient are dropped; larger ones throw DegeneracyError.
    BivariatePolynomial divide_by_x(double tol = 1e-12) const;
    BivariatePolynomial divide_by_y(double tol = 1e-12) const;

    /// Coefficients in x of p(x, 0), index = power.
    std::vector<double> restrict_y0() const;
    /// Coefficients in y of p(0, y).
    std::vector<double> restrict_x0() const;

    std::string to_string() const;

private:
    void prune();
    Terms terms_;
};

struct Point {
    double x = 0.0;
    double y = 0.0;
};

/// Instantiated planar polynomial vector field (dot x, dot y).
struct PolynomialField {
    BivariatePolynomial fx;
    BivariatePolynomial fy;

    Point operator()(double x, double y) const { return {fx(x, y), fy(x, y)}; }
};

}  // namespace polycycle
