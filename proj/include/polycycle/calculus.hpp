#pragma once

#include <optional>
#include <string>
#include <vector>

#include "polycycle/saddle.hpp"

namespace polycycle {

/// Dulac expansions of the corners in traversal order. Public indices are 1-based.
struct PolycycleSpec {
    std::vector<DulacExpansion> corners;

    int n() const { return static_cast<int>(corners.size()); }
    const DulacExpansion& at(int i) const;
};

double lambda_product(const PolycycleSpec& spec, int i, int k);
double a_product(const PolycycleSpec& spec, int j, int k);
double b_product(const PolycycleSpec& spec, int j, int k);
double c_product(const PolycycleSpec& spec, int j, int k);
double a_star(const PolycycleSpec& spec, int j, int k);
double b_star(const PolycycleSpec& spec, int j, int k);

/// (s^-alpha - 1)/alpha, and -ln s at alpha = 0.
double compensator(double s, double alpha);

DulacExpansion compose_pair(const DulacExpansion& d1, const DulacExpansion& d2,
                            double resonance_band = kAtOneBand);

DulacExpansion inverse_dulac(const DulacExpansion& d);

enum class Pattern { minus_plus, plus_minus, all_above, all_below, mixed };

const char* to_string(Pattern p);

/// Corner ratios below one then above one (m >= 1 of the first kind) etc. Returns the split m.
Pattern classify_pattern(const PolycycleSpec& spec, int* m = nullptr);

struct ReturnExpansion {
    double r = 1.0;
    double a1n = 1.0;
    Pattern pattern = Pattern::mixed;
    int m = 0;
    CaseTag tag = CaseTag::at_one;  // r against one
    std::optional<SecondTerm> next;
    std::string next_name;  // "A", "B", "C", "A_omega" or empty
    std::optional<double> b_quantity;  // S1^{m+1} - S2^m on the -+ pattern
    Interval ell;
    bool leading_only = true;
    std::string note;

    /// s^r (A_{1,n} + second term).
    double predict(double s) const;
};

ReturnExpansion return_expansion(const PolycycleSpec& spec, double resonance_band = kAtOneBand);

struct DisplacementExpansion {
    int rotation = 0;  // new corner 1 is old corner rotation + 1
    int m = 0;
    int n = 0;
    double lambda0m = 1.0;
    double lambdamn_inv = 1.0;
    double alpha = 0.0;
    double a1m = 1.0;
    double a_star = 1.0;
    double psi1 = 0.0;
    double psi2 = 0.0;
    double psi3 = 0.0;
    double u1 = 0.0;  // coefficient of s in U(s)
    CaseTag tag = CaseTag::at_one;
    Interval ell;

    double predict(double s) const;
};

/// Rotates the corners to the +- pattern required by the displacement formulas.
PolycycleSpec rotate(const PolycycleSpec& spec, int k);
DisplacementExpansion displacement_expansion(const PolycycleSpec& spec, double resonance_band = kAtOneBand);

}  // namespace polycycle
