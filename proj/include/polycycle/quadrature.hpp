#pragma once

#include <functional>

namespace polycycle {

struct QuadratureOptions {
    double abs_tol = 1e-12;
    double rel_tol = 1e-10;
    unsigned max_depth = 13;  // 2^13 = 8192 subintervals at most
};

struct QuadratureResult {
    double value;
    double error;
};

/// Adaptive Gauss-Kronrod (21 points). Throws ToleranceError when the error estimate stays
/// above max(abs_tol, rel_tol * |value|).
QuadratureResult integrate_gk(const std::function<double(double)>& f, double a, double b,
                              const QuadratureOptions& opt = {});

}  // namespace polycycle
