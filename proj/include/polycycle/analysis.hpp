#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "polycycle/calculus.hpp"
#include "polycycle/cyclicity.hpp"
#include "polycycle/model.hpp"

namespace polycycle {

/// Everything the expansions give at one parameter point.
struct Evaluation {
    std::vector<LocalChart> charts;
    PolycycleSpec spec;
    ReturnExpansion ret;
    std::optional<DisplacementExpansion> disp;
    std::string disp_note;  // why disp is absent
};

Evaluation evaluate(const Model& m, const Binding& b);

/// Thread-safe memo of `evaluate` over parameter vectors, for gradients and probes.
class Evaluator {
public:
    explicit Evaluator(const Model& m) : model_(m) {}

    std::shared_ptr<const Evaluation> at(const ParamVector& mu);
    /// Value of return level k (0-based); throws NumericError if the level does not exist there.
    double return_level(const ParamVector& mu, size_t k);
    double displacement_level(const ParamVector& mu, size_t k);

private:
    const Model& model_;
    std::mutex mutex_;
    std::map<ParamVector, std::shared_ptr<const Evaluation>> cache_;
};

struct AnalysisOptions {
    bool flow_probe = true;
    std::vector<double> probe_s{1e-3, 1e-2, 1e-1};
    bool displacement = true;
};

struct LadderResult {
    std::vector<ConditionLevel> levels;
    CyclicityVerdict verdict;
};

struct Analysis {
    Binding mu;
    Evaluation at;
    LadderResult ret;
    std::optional<LadderResult> disp;
    std::optional<NotIdentityEvidence> flow_probe;
};

/// normalize -> Dulac coefficients -> expansions -> verdict. Errors carry the stage name.
Analysis analyze(const Model& m, const Binding& b, const AnalysisOptions& opt = {});

/// Leading conditions of the ladder that vanish within tol.
size_t leading_zeros(const std::vector<ConditionLevel>& levels, double tol);

/// One grid axis "name=lo:hi:count" (or "name=value").
struct GridAxis {
    std::string name;
    double lo = 0.0, hi = 0.0;
    int count = 1;
    double at(int k) const { return count == 1 ? lo : lo + (hi - lo) * k / (count - 1); }
};

GridAxis parse_grid_axis(const std::string& spec);

constexpr long kMaxScanPoints = 1000000;

struct ScanRow {
    Binding mu;
    std::vector<double> values;  // NaN where evaluation failed
    std::string error;
};

struct ScanTable {
    std::vector<std::string> axes;
    std::vector<std::string> columns;
    std::vector<ScanRow> rows;
};

/// Cartesian product of the axes (first axis slowest); columns r-1, A_1n-1, next return
/// coefficient, Psi_1..3. Axis names must be declared parameters.
ScanTable scan_serial(const Model& m, const Binding& base, const std::vector<GridAxis>& axes);
ScanTable scan_parallel(const Model& m, const Binding& base, const std::vector<GridAxis>& axes);

/// RFC 4180 CSV with a header row.
std::string to_csv(const ScanTable& t);

}  // namespace polycycle
