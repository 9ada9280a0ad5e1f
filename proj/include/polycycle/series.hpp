#pragma once

#include <vector>

namespace polycycle {

inline constexpr int kDefaultSeriesOrder = 16;

/// Truncated univariate power series c_0 + c_1 t + ... + c_K t^K.
class PowerSeries {
public:
    PowerSeries() : PowerSeries(kDefaultSeriesOrder) {}
    explicit PowerSeries(int order);
    /// Coefficients beyond `order` are dropped, missing ones are zero.
    PowerSeries(std::vector<double> coeffs, int order);

    static PowerSeries constant(double c, int order = kDefaultSeriesOrder);
    static PowerSeries variable(int order = kDefaultSeriesOrder);

    int order() const { return order_; }
    double operator[](int i) const { return c_[static_cast<size_t>(i)]; }
    double& operator[](int i) { return c_[static_cast<size_t>(i)]; }
    const std::vector<double>& coefficients() const { return c_; }

    double operator()(double t) const;
    /// Sum of terms i >= first only.
    double tail(double t, int first) const;

    PowerSeries operator+(const PowerSeries& o) const;
    PowerSeries operator-(const PowerSeries& o) const;
    PowerSeries operator*(const PowerSeries& o) const;
    PowerSeries operator*(double k) const;
    PowerSeries operator-() const { return *this * -1.0; }

    PowerSeries derivative() const;

private:
    int order_;
    std::vector<double> c_;
};

PowerSeries ps_div(const PowerSeries& f, const PowerSeries& g);
PowerSeries ps_exp(const PowerSeries& f);
PowerSeries ps_log(const PowerSeries& f);
PowerSeries ps_integrate(const PowerSeries& f);

/// alpha (alpha-1) ... (alpha-k+1) / k!
double gbt_coefficient(double alpha, int k);

}  // namespace polycycle
