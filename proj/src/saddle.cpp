#include "polycycle/saddle.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "polycycle/errors.hpp"

namespace polycycle {

const char* to_string(CaseTag t) {
    switch (t) {
        case CaseTag::below_one: return "below-one";
        case CaseTag::above_one: return "above-one";
        case CaseTag::at_one: return "at-one";
    }
    return "?";
}

CaseTag classify_ratio(double lambda, double band) {
    if (std::abs(lambda - 1.0) <= band) return CaseTag::at_one;
    return lambda < 1.0 ? CaseTag::below_one : CaseTag::above_one;
}

Point LocalChart::to_model(double X, double Y) const {
    return {origin.x + X * e_out.x + Y * e_in.x, origin.y + X * e_out.y + Y * e_in.y};
}

Point LocalChart::to_local(double x, double y) const {
    const double dx = x - origin.x, dy = y - origin.y;
    return {dx * e_out.x + dy * e_out.y, dx * e_in.x + dy * e_in.y};
}

namespace {

Point unit_axis(Point from, Point to, const char* what) {
    const double dx = to.x - from.x, dy = to.y - from.y;
    const double n = std::hypot(dx, dy);
    if (n == 0.0) throw GeometryError(std::string(what) + " corner coincides with the saddle");
    Point u{dx / n, dy / n};
    if (std::abs(u.x) < 1e-12) u = {0.0, u.y > 0 ? 1.0 : -1.0};
    else if (std::abs(u.y) < 1e-12) u = {u.x > 0 ? 1.0 : -1.0, 0.0};
    else
        throw GeometryError(std::string("separatrix toward the ") + what +
                            " corner is not axis-parallel");
    return u;
}

std::string point_text(Point p) {
    std::ostringstream os;
    os << "(" << p.x << ", " << p.y << ")";
    return os.str();
}

}  // namespace

LocalChart normalize_saddle(const PolynomialField& field, Point saddle, Point prev, Point next) {
    LocalChart c;
    c.origin = saddle;
    c.e_out = unit_axis(saddle, next, "next");
    c.e_in = unit_axis(saddle, prev, "previous");
    if (std::abs(c.e_out.x * c.e_in.x + c.e_out.y * c.e_in.y) > 1e-12)
        throw GeometryError("separatrices at " + point_text(saddle) + " are not perpendicular");

    const auto sub = [&](const BivariatePolynomial& p) {
        return p.affine_substitute(saddle.x, c.e_out.x, c.e_in.x, saddle.y, c.e_out.y, c.e_in.y);
    };
    const BivariatePolynomial fx = sub(field.fx), fy = sub(field.fy);
    const BivariatePolynomial xdot = fx * c.e_out.x + fy * c.e_out.y;
    const BivariatePolynomial ydot = fx * c.e_in.x + fy * c.e_in.y;
    try {
        c.P = xdot.divide_by_x();
        c.Q = ydot.divide_by_y();
    } catch (const DegeneracyError& e) {
        throw GeometryError("separatrix lines at " + point_text(saddle) + " are not invariant: " +
                            e.what());
    }
    const double p0 = c.P.constant_term(), q0 = c.Q.constant_term();
    if (std::abs(p0) < 1e-12 || std::abs(q0) < 1e-12)
        throw DegeneracyError("corner " + point_text(saddle) + " is not hyperbolic");
    if (p0 < 0 && q0 > 0)
        throw ModelError("corner order runs against the flow at " + point_text(saddle));
    if ((p0 > 0) == (q0 > 0)) throw DegeneracyError("corner " + point_text(saddle) + " is not a saddle");
    c.lambda = -q0 / p0;
    return c;
}

LocalChart reverse_chart(const LocalChart& chart) {
    LocalChart r;
    r.origin = chart.origin;
    r.e_out = chart.e_in;
    r.e_in = chart.e_out;
    r.P = (-chart.Q).swapped();
    r.Q = (-chart.P).swapped();
    r.n1 = chart.n2;
    r.n2 = chart.n1;
    r.lambda = 1.0 / chart.lambda;
    return r;
}

double eval_poly(const std::vector<double>& c, double s) {
    double acc = 0.0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * s + *it;
    return acc;
}

SectionPair SectionPair::defaults(double h) { return SectionPair{{0.0, 1.0}, {h}, {h}, {0.0, 1.0}}; }

double SectionPair::jet(int i, int j, int k) const {
    const std::vector<double>& c = i == 1 ? (j == 1 ? s11 : s12) : (j == 1 ? s21 : s22);
    if (static_cast<size_t>(k) >= c.size()) return 0.0;
    double f = 1.0;
    for (int m = 2; m <= k; ++m) f *= m;
    return f * c[static_cast<size_t>(k)];
}

Point SectionPair::sigma1(double s) const { return {eval_poly(s11, s), eval_poly(s12, s)}; }
Point SectionPair::sigma2(double s) const { return {eval_poly(s21, s), eval_poly(s22, s)}; }

SectionPair SectionPair::reversed() const { return SectionPair{s22, s21, s12, s11}; }

SectionPair SectionPair::rescaled_entry(double c) const {
    SectionPair r = *this;
    for (auto* v : {&r.s11, &r.s12}) {
        double f = 1.0;
        for (double& a : *v) {
            a *= f;
            f *= c;
        }
    }
    return r;
}

void SectionPair::validate() const {
    if (std::abs(jet(1, 1, 0)) > 1e-14 || !(jet(1, 2, 0) > 0))
        throw ModelError("entry section must start on the positive stable axis");
    if (std::abs(jet(2, 2, 0)) > 1e-14 || !(jet(2, 1, 0) > 0))
        throw ModelError("exit section must start on the positive unstable axis");
    if (!(jet(1, 1, 1) > 0) || !(jet(2, 2, 1) > 0))
        throw ModelError("sections must point into the sector between the separatrices");
}

namespace {

// Root test on the upper half of the coefficients; early ones say little about the radius.
double radius_estimate(const PowerSeries& s) {
    double m = 0.0;
    for (int i = std::max(1, s.order() / 2); i <= s.order(); ++i)
        m = std::max(m, std::pow(std::abs(s[i]), 1.0 / i));
    return m > 0.0 ? 1.0 / m : 1e300;
}

/// One side of the saddle: along the stable axis for which = 1, unstable axis for which = 2.
struct Side {
    std::vector<double> num, den, num_d, den_d;
    double cst;
    PowerSeries g;   // integrand of log L, already divided by t
    PowerSeries L;
    PowerSeries M;
    double series_cut;

    Side(const LocalChart& c, int which, int order) {
        if (which == 1) {
            num = c.P.restrict_x0();
            den = c.Q.restrict_x0();
            num_d = c.P.dx().restrict_x0();
            den_d = c.Q.dx().restrict_x0();
            cst = 1.0 / c.lambda;
        } else if (which == 2) {
            num = c.Q.restrict_y0();
            den = c.P.restrict_y0();
            num_d = c.Q.dy().restrict_y0();
            den_d = c.P.dy().restrict_y0();
            cst = c.lambda;
        } else {
            throw UsageError("saddle side must be 1 or 2");
        }
        const int K = order + 1;
        const PowerSeries ns(num, K), ds(den, K), nds(num_d, K), dds(den_d, K);
        PowerSeries r = ps_div(ns, ds);
        r[0] += cst;
        if (std::abs(r[0]) > 1e-9)
            throw DegeneracyError("transition integrand does not cancel at the saddle (residual " +
                                  std::to_string(r[0]) + "); chart and ratio are inconsistent");
        g = PowerSeries(order);
        for (int i = 0; i <= order; ++i) g[i] = r[i + 1];
        L = ps_exp(ps_integrate(g));
        const PowerSeries d = ps_div(nds * ds - ns * dds, ds * ds);
        M = L * PowerSeries(d.coefficients(), order);
        series_cut = std::min(1e-2, radius_estimate(g) / 8.0);
    }

    double integrand(double t) const {
        if (std::abs(t) <= series_cut) return g(t);
        return (eval_poly(num, t) / eval_poly(den, t) + cst) / t;
    }

    double L_value(double u, const QuadratureOptions& q) const {
        if (std::abs(u) <= series_cut) return L(u);
        return std::exp(integrate_gk([this](double t) { return integrand(t); }, 0.0, u, q).value);
    }

    double ratio_derivative(double u) const {
        const double n = eval_poly(num, u), d = eval_poly(den, u);
        return (eval_poly(num_d, u) * d - n * eval_poly(den_d, u)) / (d * d);
    }

    double M_value(double u, const QuadratureOptions& q) const { return L_value(u, q) * ratio_derivative(u); }
};

}  // namespace

double transition_L(const LocalChart& chart, int which, double u, const QuadratureOptions& q) {
    return Side(chart, which, kDefaultSeriesOrder).L_value(u, q);
}

PowerSeries transition_L_series(const LocalChart& chart, int which, int order) {
    return Side(chart, which, order).L;
}

double transition_M(const LocalChart& chart, int which, double u, const QuadratureOptions& q) {
    return Side(chart, which, kDefaultSeriesOrder).M_value(u, q);
}

PowerSeries transition_M_series(const LocalChart& chart, int which, int order) {
    return Side(chart, which, order).M;
}

double mellin_hat(const PowerSeries& series, const std::function<double(double)>& f, double alpha,
                  double x, const QuadratureOptions& q) {
    if (!(x > 0.0)) throw UsageError("mellin_hat needs x > 0");
    const int k = std::max(0, static_cast<int>(std::ceil(alpha)) + 2);
    const int K = series.order();
    if (K < k + 2)
        throw UsageError("series order " + std::to_string(K) + " too low for exponent " +
                         std::to_string(alpha));

    double scale = 1.0;
    for (int i = 0; i <= K; ++i) scale = std::max(scale, std::abs(series[i]));

    double head = 0.0;
    for (int i = 0; i < k; ++i) {
        if (std::abs(alpha - i) <= kMellinPoleBand) {
            if (std::abs(series[i]) > 1e-10 * scale) {
                std::ostringstream os;
                os << "Mellin transform exponent " << alpha << " is within " << kMellinPoleBand
                   << " of the pole " << i;
                throw PoleError(os.str(), alpha);
            }
            continue;
        }
        head += series[i] / (i - alpha) * std::pow(x, i);
    }

    const double delta = std::min({0.05, x / 10.0, radius_estimate(series) / 4.0});
    double tail = 0.0;
    for (int i = k; i <= K; ++i) tail += series[i] * std::pow(delta, i - alpha) / (i - alpha);

    // The Taylor part T of the remainder f - T integrates in closed form over [delta, x]; only
    // f s^(-alpha-1) goes to quadrature, which avoids the cancellation inside f - T.
    double taylor_part = 0.0;
    for (int i = 0; i < k; ++i) {
        if (std::abs(alpha - i) <= kMellinPoleBand) continue;
        taylor_part += series[i] * (std::pow(x, i - alpha) - std::pow(delta, i - alpha)) / (i - alpha);
    }
    const double xa = std::pow(x, alpha);
    QuadratureOptions qb = q;
    qb.abs_tol = q.abs_tol * std::max(1.0, std::abs(head)) / xa;
    const double body =
        integrate_gk([&](double s) { return f(s) * std::pow(s, -alpha - 1.0); }, delta, x, qb).value;
    return head + xa * (tail + body - taylor_part);
}

double SecondTerm::value(double s) const {
    if (compensated) return compensated->at(s) * s;
    return coefficient * std::pow(s, exponent);
}

std::optional<SecondTerm> DulacExpansion::second_term() const {
    if (second) return second;
    switch (tag) {
        case CaseTag::below_one:
            if (d01) return SecondTerm{lambda, *d01, std::nullopt};
            break;
        case CaseTag::above_one:
            if (d10) return SecondTerm{1.0, *d10, std::nullopt};
            break;
        case CaseTag::at_one:
            if (d10 && d01) return SecondTerm{1.0, *d10 + *d01, Compensated{*d10, *d01, 1.0 - lambda}};
            break;
    }
    return std::nullopt;
}

Interval dulac_ell(double lambda, CaseTag tag) {
    switch (tag) {
        case CaseTag::below_one: return {lambda, std::min(2.0 * lambda, 1.0)};
        case CaseTag::above_one: return {1.0, std::min(lambda, 2.0)};
        case CaseTag::at_one: return {1.0, 2.0};
    }
    return {};
}

DulacExpansion make_dulac(double lambda, double d00, std::optional<double> d10, std::optional<double> d01) {
    DulacExpansion d;
    d.lambda = lambda;
    d.d00 = d00;
    d.tag = classify_ratio(lambda);
    d.d10 = d10;
    d.d01 = d01;
    d.ell = dulac_ell(lambda, d.tag);
    return d;
}

DulacExpansion dulac_coefficients(const LocalChart& chart, const SectionPair& sections,
                                  const DulacOptions& opt) {
    sections.validate();
    const double lam = chart.lambda;
    if (!(lam > 0)) throw DegeneracyError("hyperbolicity ratio must be positive");

    const double s111 = sections.jet(1, 1, 1), s112 = sections.jet(1, 1, 2);
    const double s120 = sections.jet(1, 2, 0), s121 = sections.jet(1, 2, 1);
    const double s210 = sections.jet(2, 1, 0), s211 = sections.jet(2, 1, 1);
    const double s221 = sections.jet(2, 2, 1), s222 = sections.jet(2, 2, 2);

    for (int i = 0; i <= 64; ++i) {
        const double t = i / 64.0;
        if (!(chart.P(t * s210, 0.0) > 0))
            throw DegeneracyError("P(x, 0) is not positive on the exit section footprint");
        if (!(chart.Q(0.0, t * s120) < 0))
            throw DegeneracyError("Q(0, y) is not negative on the entry section footprint");
    }

    const int order1 = std::max(opt.series_order, static_cast<int>(std::ceil(1.0 / lam)) + 10);
    const int order2 = std::max(opt.series_order, static_cast<int>(std::ceil(lam)) + 10);
    const Side side1(chart, 1, order1), side2(chart, 2, order2);
    const auto& q = opt.quadrature;

    const double L1 = side1.L_value(s120, q), L2 = side2.L_value(s210, q);

    DulacExpansion d;
    d.lambda = lam;
    d.tag = classify_ratio(lam, opt.at_one_band);
    d.ell = dulac_ell(lam, d.tag);
    d.d00 = std::pow(s111, lam) * s120 / std::pow(L1, lam) * L2 / (s221 * std::pow(s210, lam));

    const bool need1 = d.tag != CaseTag::below_one, need2 = d.tag != CaseTag::above_one;
    try {
        const double mh = mellin_hat(side1.M, [&](double u) { return side1.M_value(u, q); }, 1.0 / lam, s120, q);
        const double pq = chart.P(0.0, s120) / chart.Q(0.0, s120);
        d.s1 = s112 / (2.0 * s111) - (s121 / s120) * pq - (s111 / L1) * mh;
        d.d10 = lam * d.d00 * *d.s1;
    } catch (const PoleError& e) {
        if (need1) throw;
        d.note += std::string("S1 unavailable: ") + e.what() + "; ";
    }
    try {
        const double mh = mellin_hat(side2.M, [&](double u) { return side2.M_value(u, q); }, lam, s210, q);
        const double qp = chart.Q(s210, 0.0) / chart.P(s210, 0.0);
        d.s2 = s222 / (2.0 * s221) - (s211 / s210) * qp - (s221 / L2) * mh;
        d.d01 = -d.d00 * d.d00 * *d.s2;
    } catch (const PoleError& e) {
        if (need2) throw;
        d.note += std::string("S2 unavailable: ") + e.what() + "; ";
    }
    return d;
}

}  // namespace polycycle
