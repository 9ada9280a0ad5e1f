#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "polycycle/polynomial.hpp"
#include "polycycle/saddle.hpp"

namespace polycycle {

struct IntegratorOptions {
    double abs_tol = 1e-12;
    double rel_tol = 1e-10;
    double max_time = 1e3;
    double min_step = 1e-13;
};

/// Section for `integrate`: crossings of condition(p) = 0. direction +1 keeps only crossings
/// where the condition increases, -1 decreasing ones, 0 both.
struct SectionEvent {
    std::function<double(Point)> condition;
    int direction = 0;
    std::string name;
};

struct EventRecord {
    int section = -1;
    double t = 0.0;
    Point state;
};

struct Trajectory {
    std::vector<double> times;
    std::vector<Point> states;
    std::vector<EventRecord> events;
};

/// Integrates the field from `start` until the first crossing of any event section.
/// Throws MaxTimeError if no event occurs before opt.max_time.
Trajectory integrate(const PolynomialField& field, Point start, const std::vector<SectionEvent>& events,
                     const IntegratorOptions& opt = {});

/// D(s): the chart transit from sigma_1(s) to sigma_2, integrated in logarithmic local
/// coordinates. Returns the parameter on sigma_2.
double numeric_dulac(const LocalChart& chart, const SectionPair& sections, double s,
                     const IntegratorOptions& opt = {});

/// A polycycle given by its corner charts and sections in traversal order. The exit section of
/// corner i and the entry section of corner i+1 may coincide (then no regular transit is needed).
struct PolycycleGeometry {
    std::vector<LocalChart> charts;
    std::vector<SectionPair> sections;
};

/// Local coordinates in chart `to` of the point with local coordinates (X, Y) in chart `from`.
/// Exact in the small coordinate for axis-aligned charts.
Point chart_transfer(const LocalChart& from, const LocalChart& to, double X, double Y);

/// One full transit from sigma_1 of corner 1 back to itself.
double numeric_return(const PolycycleGeometry& geometry, double s, const IntegratorOptions& opt = {});

/// Return map on a straight segment a -> b for fields without a polycycle; s is arclength from a.
double segment_return(const PolynomialField& field, Point a, Point b, double s,
                      const IntegratorOptions& opt = {});

using ScalarMap = std::function<double(double)>;

struct FitReport {
    double exponent = 0.0;
    double leading = 0.0;
    std::optional<double> second;
    double second_exponent = 0.0;  // relative to the leading power
    double residual_slope = 0.0;   // +inf when the remainder is below resolution
    double rms = 0.0;              // relative rms residual of the full fit
    std::vector<double> s_grid;
    bool confident = false;
    std::string note;
};

/// Fits s^e (c0 + c1 s^e2 + ...) over generalized monomials s^(i + j e); e starts from the guess.
FitReport fit_expansion(const std::vector<std::pair<double, double>>& samples, double exponent_guess);

/// s0 2^-k, k = 0..count-1.
std::vector<double> geometric_grid(double s0 = 1e-2, int count = 13);

/// Evaluates a map on a grid; failures leave NaN. Serial reference and OpenMP kernel.
std::vector<double> evaluate_grid_serial(const ScalarMap& f, const std::vector<double>& grid,
                                         std::vector<std::string>* errors = nullptr);
std::vector<double> evaluate_grid_parallel(const ScalarMap& f, const std::vector<double>& grid,
                                           std::vector<std::string>* errors = nullptr);

enum class Stability { attracting, repelling, semistable };

const char* to_string(Stability s);

struct FixedPoint {
    double s = 0.0;
    Stability stability = Stability::semistable;
};

struct CycleScanOptions {
    int grid = 64;
    bool geometric = true;
    double rel_tol = 1e-10;  // bisection stops when the bracket is below rel_tol * s
    bool parallel = true;
};

struct CycleScan {
    std::vector<FixedPoint> fixed_points;
    std::vector<double> s;
    std::vector<double> displacement;  // R(s) - s, NaN where integration failed
    std::vector<std::string> failures;
    double coverage = 1.0;
};

/// Sign changes of R(s) - s on [lo, hi], refined by bisection.
CycleScan count_limit_cycles(const ScalarMap& return_map, double lo, double hi,
                             const CycleScanOptions& opt = {});

}  // namespace polycycle
