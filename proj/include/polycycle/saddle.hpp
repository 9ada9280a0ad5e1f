#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "polycycle/polynomial.hpp"
#include "polycycle/quadrature.hpp"
#include "polycycle/series.hpp"

namespace polycycle {

/// Open interval (lo, hi).
struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    bool empty() const { return !(lo < hi); }
    bool contains(double v) const { return lo < v && v < hi; }
    bool contains(const Interval& o) const { return lo <= o.lo && o.hi <= hi; }
};

enum class CaseTag { below_one, above_one, at_one };

const char* to_string(CaseTag t);

inline constexpr double kAtOneBand = 1e-9;
inline constexpr double kMellinPoleBand = 1e-6;

CaseTag classify_ratio(double lambda, double band = kAtOneBand);

/// Saddle at the origin of local coordinates (X, Y) with field X*P d/dX + Y*Q d/dY.
/// Model point = origin + X*e_out + Y*e_in; e_out follows the unstable separatrix.
struct LocalChart {
    Point origin;
    Point e_out;
    Point e_in;
    BivariatePolynomial P;
    BivariatePolynomial Q;
    int n1 = 0;
    int n2 = 0;
    double lambda = 0.0;

    Point to_model(double X, double Y) const;
    Point to_local(double x, double y) const;
};

/// Builds the chart of the corner `saddle` whose incoming separatrix arrives from `prev`
/// and whose outgoing separatrix leaves toward `next`.
LocalChart normalize_saddle(const PolynomialField& field, Point saddle, Point prev, Point next);

/// Chart of the same corner for the time-reversed field.
LocalChart reverse_chart(const LocalChart& chart);

/// sigma_1(s) = (s11(s), s12(s)) on the entry side, sigma_2(s) = (s21(s), s22(s)) on the exit
/// side, each component a polynomial in s given by its coefficients.
struct SectionPair {
    std::vector<double> s11, s12, s21, s22;

    static SectionPair defaults(double h = 0.5);

    /// k-th derivative at s = 0 of component j of sigma_i.
    double jet(int i, int j, int k) const;
    Point sigma1(double s) const;
    Point sigma2(double s) const;
    SectionPair reversed() const;
    /// sigma_1(c s), leaves sigma_2 alone.
    SectionPair rescaled_entry(double c) const;

    void validate() const;
};

double eval_poly(const std::vector<double>& c, double s);

/// L_1 (which = 1) or L_2 (which = 2) of the chart at u.
double transition_L(const LocalChart& chart, int which, double u, const QuadratureOptions& q = {});
PowerSeries transition_L_series(const LocalChart& chart, int which, int order = kDefaultSeriesOrder);
double transition_M(const LocalChart& chart, int which, double u, const QuadratureOptions& q = {});
PowerSeries transition_M_series(const LocalChart& chart, int which, int order = kDefaultSeriesOrder);

/// Incomplete Mellin transform: the solution of x f' - alpha f = f at x > 0, with the Taylor
/// data taken from `series` and the remainder integrated from `f` itself.
double mellin_hat(const PowerSeries& series, const std::function<double(double)>& f, double alpha,
                  double x, const QuadratureOptions& q = {});

/// Compensated second-order term u1 + (1 + alpha*omega(s; alpha))*u2, multiplying s.
struct Compensated {
    double u1 = 0.0;
    double u2 = 0.0;
    double alpha = 0.0;

    double at(double s) const;
};

/// Relative second term: D(s) = s^lambda (d00 + coefficient * s^exponent + ...).
struct SecondTerm {
    double exponent = 0.0;
    double coefficient = 0.0;
    std::optional<Compensated> compensated;  // exponent is 1 when set

    double value(double s) const;
};

struct DulacExpansion {
    double lambda = 1.0;
    double d00 = 1.0;
    CaseTag tag = CaseTag::at_one;
    std::optional<double> d10;
    std::optional<double> d01;
    std::optional<double> s1;
    std::optional<double> s2;
    Interval ell;
    /// Set for composed expansions whose second term is not one of the two elementary shapes.
    std::optional<SecondTerm> second;
    bool leading_only = false;
    std::string note;

    /// Second term implied by the tag, or `second` when present. Empty if unavailable.
    std::optional<SecondTerm> second_term() const;
};

/// Builds an elementary expansion from (lambda, d00) and whichever of d10/d01 are given.
DulacExpansion make_dulac(double lambda, double d00, std::optional<double> d10,
                          std::optional<double> d01);

Interval dulac_ell(double lambda, CaseTag tag);

struct DulacOptions {
    QuadratureOptions quadrature;
    int series_order = kDefaultSeriesOrder;
    double at_one_band = kAtOneBand;
};

DulacExpansion dulac_coefficients(const LocalChart& chart, const SectionPair& sections,
                                  const DulacOptions& opt = {});

}  // namespace polycycle
