#pragma once

#include <stdexcept>
#include <string>

namespace polycycle {

/// Base of every error raised by the library. The category decides the CLI exit code.
class Error : public std::runtime_error {
public:
    enum class Category { usage, model, numeric };

    Error(Category category, const std::string& what)
        : std::runtime_error(what), category_(category) {}

    Category category() const noexcept { return category_; }

private:
    Category category_;
};

class UsageError : public Error {
public:
    explicit UsageError(const std::string& what) : Error(Category::usage, what) {}
};

class ModelError : public Error {
public:
    explicit ModelError(const std::string& what) : Error(Category::model, what) {}
};

/// Syntax error in an expression or model file, with 1-based position.
class ParseError : public ModelError {
public:
    ParseError(const std::string& message, int line, int column)
        : ModelError("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " +
                     message),
          line_(line), column_(column) {}

    int line() const noexcept { return line_; }
    int column() const noexcept { return column_; }

private:
    int line_;
    int column_;
};

class NumericError : public Error {
public:
    explicit NumericError(const std::string& what) : Error(Category::numeric, what) {}
};

/// Domain violation in series arithmetic (zero divisor, log of nonpositive constant).
class DomainError : public NumericError {
public:
    using NumericError::NumericError;
};

/// Quadrature or root polish did not reach the requested tolerance.
class ToleranceError : public NumericError {
public:
    using NumericError::NumericError;
};

/// Mellin transform requested too close to a nonremovable pole.
class PoleError : public NumericError {
public:
    PoleError(const std::string& what, double exponent) : NumericError(what), exponent_(exponent) {}
    double exponent() const noexcept { return exponent_; }

private:
    double exponent_;
};

/// Non-hyperbolic corner or inconsistent chart.
class DegeneracyError : public NumericError {
public:
    using NumericError::NumericError;
};

/// Corner geometry outside what the affine normalization handles.
class GeometryError : public ModelError {
public:
    using ModelError::ModelError;
};

class IntegrationError : public NumericError {
public:
    IntegrationError(const std::string& what, double t, double x, double y)
        : NumericError(what), t_(t), x_(x), y_(y) {}
    double time() const noexcept { return t_; }
    double x() const noexcept { return x_; }
    double y() const noexcept { return y_; }

private:
    double t_, x_, y_;
};

class MaxTimeError : public IntegrationError {
public:
    using IntegrationError::IntegrationError;
};

/// Orbit left the neighbourhood where the return map is defined.
class OutOfBasinError : public NumericError {
public:
    using NumericError::NumericError;
};

}  // namespace polycycle
