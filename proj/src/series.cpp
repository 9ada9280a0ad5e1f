#include "polycycle/series.hpp"

#include <algorithm>
#include <cmath>

#include "polycycle/errors.hpp"

namespace polycycle {

PowerSeries::PowerSeries(int order) : order_(order), c_(static_cast<size_t>(order) + 1, 0.0) {
    if (order < 0) throw UsageError("series order must be nonnegative");
}

PowerSeries::PowerSeries(std::vector<double> coeffs, int order) : PowerSeries(order) {
    for (size_t i = 0; i < coeffs.size() && i < c_.size(); ++i) c_[i] = coeffs[i];
}

PowerSeries PowerSeries::constant(double c, int order) {
    PowerSeries r(order);
    r.c_[0] = c;
    return r;
}

PowerSeries PowerSeries::variable(int order) {
    PowerSeries r(order);
    if (order >= 1) r.c_[1] = 1.0;
    return r;
}

double PowerSeries::operator()(double t) const {
    double acc = 0.0;
    for (int i = order_; i >= 0; --i) acc = acc * t + c_[static_cast<size_t>(i)];
    return acc;
}

double PowerSeries::tail(double t, int first) const {
    double acc = 0.0;
    for (int i = order_; i >= first; --i) acc = acc * t + c_[static_cast<size_t>(i)];
    return first > 0 ? acc * std::pow(t, first) : acc;
}

PowerSeries PowerSeries::operator+(const PowerSeries& o) const {
    PowerSeries r(std::min(order_, o.order_));
    for (int i = 0; i <= r.order_; ++i) r[i] = (*this)[i] + o[i];
    return r;
}

PowerSeries PowerSeries::operator-(const PowerSeries& o) const {
    PowerSeries r(std::min(order_, o.order_));
    for (int i = 0; i <= r.order_; ++i) r[i] = (*this)[i] - o[i];
    return r;
}

PowerSeries PowerSeries::operator*(const PowerSeries& o) const {
    PowerSeries r(std::min(order_, o.order_));
    for (int n = 0; n <= r.order_; ++n) {
        double acc = 0.0;
        for (int k = 0; k <= n; ++k) acc += (*this)[k] * o[n - k];
        r[n] = acc;
    }
    return r;
}

PowerSeries PowerSeries::operator*(double k) const {
    PowerSeries r(*this);
    for (double& v : r.c_) v *= k;
    return r;
}

PowerSeries PowerSeries::derivative() const {
    PowerSeries r(order_);
    for (int i = 1; i <= order_; ++i) r[i - 1] = i * (*this)[i];
    return r;
}

PowerSeries ps_div(const PowerSeries& f, const PowerSeries& g) {
    if (g[0] == 0.0) throw DomainError("series division by a series with zero constant term");
    PowerSeries q(std::min(f.order(), g.order()));
    for (int n = 0; n <= q.order(); ++n) {
        double acc = f[n];
        for (int k = 0; k < n; ++k) acc -= q[k] * g[n - k];
        q[n] = acc / g[0];
    }
    return q;
}

PowerSeries ps_exp(const PowerSeries& f) {
    // g' = f' g, solved coefficientwise.
    PowerSeries g(f.order());
    g[0] = std::exp(f[0]);
    for (int n = 1; n <= f.order(); ++n) {
        double acc = 0.0;
        for (int k = 1; k <= n; ++k) acc += k * f[k] * g[n - k];
        g[n] = acc / n;
    }
    return g;
}

PowerSeries ps_log(const PowerSeries& f) {
    if (!(f[0] > 0.0)) throw DomainError("series logarithm needs a positive constant term");
    PowerSeries g = ps_integrate(ps_div(f.derivative(), f));
    g[0] = std::log(f[0]);
    return g;
}

PowerSeries ps_integrate(const PowerSeries& f) {
    PowerSeries g(f.order());
    for (int i = 1; i <= f.order(); ++i) g[i] = f[i - 1] / i;
    return g;
}

double gbt_coefficient(double alpha, int k) {
    if (k < 0) throw UsageError("binomial index must be nonnegative");
    double c = 1.0;
    for (int i = 0; i < k; ++i) c *= (alpha - i) / (i + 1);
    return c;
}

}  // namespace polycycle
