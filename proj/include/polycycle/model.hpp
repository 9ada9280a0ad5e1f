#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "polycycle/cyclicity.hpp"
#include "polycycle/expr.hpp"
#include "polycycle/flow.hpp"

namespace polycycle {

struct ModelParam {
    std::string name;
    std::string text;
    double value = 0.0;
};

/// Tunables from the [options] section, overridable with --tol.
struct ModelOptions {
    IntegratorOptions integrator;
    DulacOptions dulac;
    double zero_tol = kZeroTol;
    double gradient_step = kGradientStep;
    double resonance_band = kAtOneBand;
    double fit_s0 = 1e-2;
    int fit_count = 13;
    double bisection_tol = 1e-10;
    int cycles_grid = 64;
    double s_min = 1e-4;
    double s_max = 1e-2;
    std::optional<std::pair<Point, Point>> return_segment;

    /// Sets one option from its textual value; unknown names and bad values are usage errors.
    void set(const std::string& name, const std::string& value);
    /// Cross-option checks, run after a batch of `set` calls.
    void validate() const;
    /// Numeric options by name, for provenance.
    std::map<std::string, double> values() const;
};

struct Model {
    std::string origin;
    std::string digest;  // SHA-1 of the source text
    std::vector<ModelParam> params;
    std::string dot_x, dot_y;
    Expression fx, fy;
    std::vector<std::pair<Expression, Expression>> corners;
    // A single corner names the points its separatrices come from and go to.
    std::optional<std::pair<Expression, Expression>> incoming, outgoing;
    std::string orientation = "ccw";
    double section_h = 0.5;
    std::map<int, double> corner_h;  // 1-based corner index
    ModelOptions options;

    bool has_corners() const { return !corners.empty(); }
    bool has_polycycle() const { return corners.size() >= 2; }
    std::vector<std::string> param_names() const;
    Binding defaults() const;
    /// Defaults with overrides applied; an undeclared name is a usage error.
    Binding bind(const std::map<std::string, double>& overrides = {}) const;

    ParamVector to_vector(const Binding& b) const;
    Binding from_vector(const ParamVector& v) const;

    PolynomialField field(const Binding& b) const;
    std::vector<Point> corner_points(const Binding& b) const;
    SectionPair sections(int corner) const;
    std::vector<LocalChart> charts(const Binding& b) const;
    PolycycleGeometry geometry(const Binding& b) const;
};

/// Parses the sectioned model format and validates the orientation at the defaults.
Model parse_model(const std::string& text, const std::string& origin = "<string>");
Model load_model(const std::string& path);

/// Short integrations from each edge midpoint must move toward the next corner, and the signed
/// area of the corner list must match the declared orientation.
void validate_orientation(const Model& m, const Binding& b);

/// NAME=VALUE pairs; a malformed pair is a usage error.
std::map<std::string, std::string> parse_assignments(const std::vector<std::string>& items);
std::map<std::string, double> parse_overrides(const std::vector<std::string>& items);

}  // namespace polycycle
