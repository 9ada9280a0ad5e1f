#include "polycycle/polynomial.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "polycycle/errors.hpp"

namespace polycycle {

BivariatePolynomial::BivariatePolynomial(double constant) {
    if (constant != 0.0) terms_[{0, 0}] = constant;
}

BivariatePolynomial::BivariatePolynomial(Terms terms) : terms_(std::move(terms)) { prune(); }

BivariatePolynomial BivariatePolynomial::x() { return BivariatePolynomial(Terms{{{1, 0}, 1.0}}); }
BivariatePolynomial BivariatePolynomial::y() { return BivariatePolynomial(Terms{{{0, 1}, 1.0}}); }

void BivariatePolynomial::prune() {
    std::erase_if(terms_, [](const auto& kv) { return kv.second == 0.0; });
}

double BivariatePolynomial::coefficient(int i, int j) const {
    auto it = terms_.find({i, j});
    return it == terms_.end() ? 0.0 : it->second;
}

int BivariatePolynomial::total_degree() const {
    int d = 0;
    for (const auto& [e, c] : terms_) d = std::max(d, e.first + e.second);
    return d;
}

bool BivariatePolynomial::is_constant() const {
    return terms_.empty() || (terms_.size() == 1 && terms_.begin()->first == Exponent{0, 0});
}

double BivariatePolynomial::operator()(double x, double y) const {
    double acc = 0.0;
    for (const auto& [e, c] : terms_) {
        double t = c;
        for (int k = 0; k < e.first; ++k) t *= x;
        for (int k = 0; k < e.second; ++k) t *= y;
        acc += t;
    }
    return acc;
}

BivariatePolynomial BivariatePolynomial::operator+(const BivariatePolynomial& o) const {
    Terms t = terms_;
    for (const auto& [e, c] : o.terms_) t[e] += c;
    return BivariatePolynomial(std::move(t));
}

BivariatePolynomial BivariatePolynomial::operator-(const BivariatePolynomial& o) const {
    Terms t = terms_;
    for (const auto& [e, c] : o.terms_) t[e] -= c;
    return BivariatePolynomial(std::move(t));
}

BivariatePolynomial BivariatePolynomial::operator*(const BivariatePolynomial& o) const {
    Terms t;
    for (const auto& [e1, c1] : terms_)
        for (const auto& [e2, c2] : o.terms_) t[{e1.first + e2.first, e1.second + e2.second}] += c1 * c2;
    return BivariatePolynomial(std::move(t));
}

BivariatePolynomial BivariatePolynomial::operator*(double k) const {
    Terms t = terms_;
    for (auto& [e, c] : t) c *= k;
    return BivariatePolynomial(std::move(t));
}

BivariatePolynomial BivariatePolynomial::operator-() const { return *this * -1.0; }

BivariatePolynomial BivariatePolynomial::pow(unsigned k) const {
    BivariatePolynomial r(1.0), base = *this;
    while (k) {
        if (k & 1u) r = r * base;
        k >>= 1u;
        if (k) base = base * base;
    }
    return r;
}

BivariatePolynomial BivariatePolynomial::dx() const {
    Terms t;
    for (const auto& [e, c] : terms_)
        if (e.first > 0) t[{e.first - 1, e.second}] += c * e.first;
    return BivariatePolynomial(std::move(t));
}

BivariatePolynomial BivariatePolynomial::dy() const {
    Terms t;
    for (const auto& [e, c] : terms_)
        if (e.second > 0) t[{e.first, e.second - 1}] += c * e.second;
    return BivariatePolynomial(std::move(t));
}

BivariatePolynomial BivariatePolynomial::swapped() const {
    Terms t;
    for (const auto& [e, c] : terms_) t[{e.second, e.first}] = c;
    return BivariatePolynomial(std::move(t));
}

BivariatePolynomial BivariatePolynomial::affine_substitute(double x0, double a, double b, double y0,
                                                           double c, double d) const {
    const BivariatePolynomial X = BivariatePolynomial::x(), Y = BivariatePolynomial::y();
    const BivariatePolynomial nx = BivariatePolynomial(x0) + X * a + Y * b;
    const BivariatePolynomial ny = BivariatePolynomial(y0) + X * c + Y * d;
    BivariatePolynomial r;
    for (const auto& [e, coef] : terms_) r = r + nx.pow(e.first) * ny.pow(e.second) * coef;
    return r;
}

namespace {

double max_abs(const BivariatePolynomial::Terms& t) {
    double m = 0.0;
    for (const auto& kv : t) m = std::max(m, std::abs(kv.second));
    return m;
}

}  // namespace

BivariatePolynomial BivariatePolynomial::divide_by_x(double tol) const {
    const double scale = std::max(max_abs(terms_), 1.0);
    Terms t;
    for (const auto& [e, c] : terms_) {
        if (e.first == 0) {
            if (std::abs(c) > tol * scale)
                throw DegeneracyError("polynomial is not divisible by x: term y^" +
                                      std::to_string(e.second) + " survives");
            continue;
        }
        t[{e.first - 1, e.second}] = c;
    }
    return BivariatePolynomial(std::move(t));
}

BivariatePolynomial BivariatePolynomial::divide_by_y(double tol) const {
    const double scale = std::max(max_abs(terms_), 1.0);
    Terms t;
    for (const auto& [e, c] : terms_) {
        if (e.second == 0) {
            if (std::abs(c) > tol * scale)
                throw DegeneracyError("polynomial is not divisible by y: term x^" +
                                      std::to_string(e.first) + " survives");
            continue;
        }
        t[{e.first, e.second - 1}] = c;
    }
    return BivariatePolynomial(std::move(t));
}

std::vector<double> BivariatePolynomial::restrict_y0() const {
    std::vector<double> r;
    for (const auto& [e, c] : terms_) {
        if (e.second != 0) continue;
        if (r.size() <= static_cast<size_t>(e.first)) r.resize(static_cast<size_t>(e.first) + 1, 0.0);
        r[static_cast<size_t>(e.first)] += c;
    }
    return r;
}

std::vector<double> BivariatePolynomial::restrict_x0() const {
    std::vector<double> r;
    for (const auto& [e, c] : terms_) {
        if (e.first != 0) continue;
        if (r.size() <= static_cast<size_t>(e.second)) r.resize(static_cast<size_t>(e.second) + 1, 0.0);
        r[static_cast<size_t>(e.second)] += c;
    }
    return r;
}

std::string BivariatePolynomial::to_string() const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    os.precision(17);
    bool first = true;
    for (const auto& [e, c] : terms_) {
        if (!first) os << (c < 0 ? " - " : " + ");
        else if (c < 0) os << "-";
        first = false;
        os << std::abs(c);
        if (e.first) os << "*x^" << e.first;
        if (e.second) os << "*y^" << e.second;
    }
    return os.str();
}

}  // namespace polycycle
