#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "polycycle/calculus.hpp"

namespace polycycle {

/// Generalized-monomial fit of y(s) / s^exponent = sum_k c_k s^(e_k).
struct MonomialFit {
    double exponent = 0.0;
    std::vector<double> exponents;  // e_k, ascending, e_0 = 0
    std::vector<double> coefficients;
    double truncation = 0.0;  // estimated relative size of the first omitted monomial

    /// Coefficient at relative exponent e, or nullopt if e is not in the basis.
    std::optional<double> at(double e) const;
};

/// Composes the two-term truncations s^l (c0 + c1 s^e) of d1 then d2 pointwise in
/// multiprecision on a geometric grid and fits the result.
MonomialFit oracle_compose(const DulacExpansion& d1, const DulacExpansion& d2);

/// Inverts the two-term truncation of d pointwise by Newton's method and fits the result.
MonomialFit oracle_inverse(const DulacExpansion& d);

enum class LemmaCase {
    leading,
    above_above,
    below_below,
    above_below,
    below_above,
    inverse_below,
    inverse_above,
};

const char* to_string(LemmaCase c);
const std::vector<LemmaCase>& all_lemma_cases();

struct CaseDeviation {
    LemmaCase which = LemmaCase::leading;
    int count = 0;
    double max_leading = 0.0;  // relative
    double max_second = 0.0;   // relative
    int flagged = 0;
    std::vector<std::string> examples;  // first few flagged cases
};

/// Test hook: alters the formula result before it is compared with the oracle.
using FormulaHook = std::function<void(LemmaCase, DulacExpansion&)>;

struct ComposeCheckOptions {
    double leading_tol = 1e-10;
    double second_tol = 1e-8;
    double resonance_band = 0.05;  // wide enough that the compensated form is exercised off resonance
    bool parallel = true;
    FormulaHook corrupt;
};

struct ComposeCheckReport {
    std::uint64_t seed = 0;
    int count = 0;
    std::vector<CaseDeviation> cases;
    bool pass = true;
};

/// `count` random cases per lemma case; inputs are drawn serially from `seed`, so the
/// parallel and serial runs see identical cases.
ComposeCheckReport compose_check(std::uint64_t seed, int count, const ComposeCheckOptions& opt = {});

/// Relative deviation with the scale floored at 1e-6 |leading| so near-zero second
/// coefficients are judged against the size of the expansion.
double coefficient_deviation(double formula, double oracle, double leading);

}  // namespace polycycle
