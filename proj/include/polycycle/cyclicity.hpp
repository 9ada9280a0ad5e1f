#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "polycycle/calculus.hpp"
#include "polycycle/flow.hpp"

namespace polycycle {

using ParamVector = std::vector<double>;
using ParamFunction = std::function<double(const ParamVector&)>;

constexpr double kGradientStep = 1e-6;
constexpr double kZeroTol = 1e-9;

struct GradientReport {
    std::vector<double> value;
    std::vector<double> step;       // absolute step per component
    std::vector<bool> consistent;   // Richardson check at half step
    bool all_consistent() const;
};

/// Central differences, component step h * max(|mu_i|, 1), checked against the half step.
GradientReport gradient(const ParamFunction& f, const ParamVector& mu0, double h = kGradientStep);

struct IndependenceReport {
    std::vector<std::vector<double>> matrix;  // one gradient per row
    std::vector<double> singular_values;
    int rank = 0;
    std::vector<int> prefix_rank;  // rank of the first k rows, k = 1..rows
    double threshold = 0.0;
    double step = kGradientStep;
    bool consistent = true;
    std::string label = "independence: sufficient-condition";
};

/// Numerical rank of stacked gradients. Threshold max(rows, cols) * eps * sigma_max * 1e3.
IndependenceReport independence_rank(const std::vector<ParamFunction>& fs, const ParamVector& mu0,
                                     double h = kGradientStep);
IndependenceReport independence_from_matrix(std::vector<std::vector<double>> matrix, double step = kGradientStep);

struct SignWitness {
    ParamVector mu1, mu2;
    double f1 = 0.0, f2 = 0.0;
};

/// Searches f(mu1) f(mu2) < 0 among probes mu0 +- rho d for d along the axes and the gradient,
/// rho = radius * max(|mu0|, 1) * {1e-3, 1e-2, 1e-1, 1}. Probes with |f| <= zero_tol do not count.
std::optional<SignWitness> find_sign_change(const ParamFunction& f, const ParamVector& mu0, double radius = 1e-3,
                                            double zero_tol = kZeroTol);

struct NotIdentityEvidence {
    bool found = false;
    std::string source;  // "flow" or "expansion"
    double s = 0.0;
    double displacement = 0.0;
    double threshold = 0.0;
    std::string note;
};

/// First sample with |R(s) - s| > 10 (abs_tol + rel_tol s); integration failures propagate.
NotIdentityEvidence not_identity_probe(const ScalarMap& return_map, const std::vector<double>& samples,
                                       const IntegratorOptions& tol = {});

/// One rung of the verdict ladder: condition value phi_k, the item giving Cycl <= k-1 when
/// phi_k != 0 and the item giving Cycl >= k when phi_1..phi_k vanish independently.
struct ConditionLevel {
    std::string name;
    double value = 0.0;
    std::string upper_item;
    std::string lower_item;
};

struct FiredCondition {
    std::string item;
    std::vector<std::pair<std::string, double>> quantities;
    bool pass = false;
    std::string detail;
};

struct CyclicityVerdict {
    std::optional<int> lower;
    std::optional<int> upper;
    std::vector<FiredCondition> conditions;
    std::optional<IndependenceReport> independence;
    std::optional<NotIdentityEvidence> not_identity;
    std::optional<SignWitness> witness;
    std::vector<std::string> rationale;
};

struct VerdictInput {
    std::vector<ConditionLevel> levels;
    std::optional<IndependenceReport> independence;  // rows in level order
    std::optional<SignWitness> first_sign_change;
    std::optional<NotIdentityEvidence> not_identity;
    double zero_tol = kZeroTol;
};

CyclicityVerdict verdict(const VerdictInput& in);

/// Conditions r - 1, A_1n - 1 and, on the -+ pattern, the second return coefficient.
std::vector<ConditionLevel> return_levels(const ReturnExpansion& e);

/// Psi_1..Psi_3, divided by max(1, A_1m, A*) so that the absolute zero test is scale-free.
std::vector<ConditionLevel> displacement_levels(const DisplacementExpansion& e);
double displacement_scale(const DisplacementExpansion& e);

/// Nonvanishing of a coefficient beyond the leading identity term rules out R = Id.
NotIdentityEvidence not_identity_from_levels(const std::vector<ConditionLevel>& levels, double zero_tol = kZeroTol);

}  // namespace polycycle
