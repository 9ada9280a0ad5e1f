#include "polycycle/calculus.hpp"

#include <algorithm>
#include <cmath>

#include "polycycle/errors.hpp"

namespace polycycle {

const DulacExpansion& PolycycleSpec::at(int i) const {
    if (i < 1 || i > n()) throw UsageError("corner index " + std::to_string(i) + " out of range");
    return corners[static_cast<size_t>(i - 1)];
}

double lambda_product(const PolycycleSpec& spec, int i, int k) {
    if (i < 0 || k > spec.n() || i > k)
        throw UsageError("lambda product indices (" + std::to_string(i) + ", " + std::to_string(k) +
                         ") out of range");
    double p = 1.0;
    for (int j = i + 1; j <= k; ++j) p *= spec.at(j).lambda;
    return p;
}

double a_product(const PolycycleSpec& spec, int j, int k) {
    if (j == k + 1) return 1.0;
    if (j < 1 || k > spec.n() || j > k) throw UsageError("A product indices out of range");
    double p = 1.0;
    for (int i = j; i <= k; ++i) p *= std::pow(spec.at(i).d00, lambda_product(spec, i, k));
    return p;
}

double b_product(const PolycycleSpec& spec, int j, int k) {
    const DulacExpansion& dj = spec.at(j);
    if (!dj.d10) throw UsageError("B product needs the coefficient Delta10 of corner " + std::to_string(j));
    return lambda_product(spec, j, k) * (*dj.d10 / dj.d00) * a_product(spec, j, k);
}

double c_product(const PolycycleSpec& spec, int j, int k) {
    const DulacExpansion& dk = spec.at(k);
    if (!dk.d01) throw UsageError("C product needs the coefficient Delta01 of corner " + std::to_string(k));
    return std::pow(a_product(spec, j, k - 1), 2.0 * dk.lambda) * *dk.d01;
}

double a_star(const PolycycleSpec& spec, int j, int k) {
    if (j < 1 || k > spec.n() || j > k) throw UsageError("A* indices out of range");
    double p = 1.0;
    for (int i = 0; i <= k - j; ++i)
        p *= std::pow(spec.at(k - i).d00, -1.0 / lambda_product(spec, j - 1, k - i));
    return p;
}

double b_star(const PolycycleSpec& spec, int j, int k) {
    const DulacExpansion& dk = spec.at(k);
    if (!dk.d01) throw UsageError("B* needs the coefficient Delta01 of corner " + std::to_string(k));
    return -(1.0 / lambda_product(spec, j - 1, k)) * *dk.d01 / (dk.d00 * dk.d00) * a_star(spec, j, k);
}

double compensator(double s, double alpha) {
    if (!(s > 0)) throw UsageError("compensator needs s > 0");
    const double L = -std::log(s);
    const double x = alpha * L;
    if (std::abs(x) < 1e-8) return L * (1.0 + x / 2.0 + x * x / 6.0);
    return std::expm1(x) / alpha;
}

double Compensated::at(double s) const { return u1 + (1.0 + alpha * compensator(s, alpha)) * u2; }

namespace {

bool standard_shape(const DulacExpansion& d) { return !d.second.has_value(); }

DulacExpansion leading_only(double lambda, double d00, Interval ell, std::string note) {
    DulacExpansion out;
    out.lambda = lambda;
    out.d00 = d00;
    out.tag = classify_ratio(lambda);
    out.ell = ell;
    out.leading_only = true;
    out.note = std::move(note);
    return out;
}

double require(const std::optional<double>& v, const char* what, int which) {
    if (!v)
        throw UsageError(std::string("composition needs ") + what + " of map " + std::to_string(which));
    return *v;
}

double s1_of(const DulacExpansion& d) {
    if (d.s1) return *d.s1;
    if (d.d10) return *d.d10 / (d.lambda * d.d00);
    throw UsageError("corner lacks S1 and Delta10");
}

double s2_of(const DulacExpansion& d) {
    if (d.s2) return *d.s2;
    if (d.d01) return -*d.d01 / (d.d00 * d.d00);
    throw UsageError("corner lacks S2 and Delta01");
}

}  // namespace

DulacExpansion compose_pair(const DulacExpansion& d1, const DulacExpansion& d2, double resonance_band) {
    const double l1 = d1.lambda, l2 = d2.lambda, a = d1.d00, c = d2.d00;
    const double lam = l1 * l2;
    const double u0 = std::pow(a, l2) * c;

    if (d1.leading_only || d2.leading_only || d1.tag == CaseTag::at_one || d2.tag == CaseTag::at_one)
        return leading_only(lam, u0, {0.0, std::min({1.0, l1, lam})},
                            "leading term only: an input has ratio at one or no second term");
    if (!standard_shape(d1) || !standard_shape(d2))
        return leading_only(lam, u0, {0.0, std::min({1.0, l1, lam})},
                            "leading term only: an input has a non-elementary second term");

    const auto upsilon1 = [&] { return l2 * std::pow(a, l2 - 1.0) * c * require(d1.d10, "Delta10", 1); };
    const auto upsilon2 = [&] { return std::pow(a, 2.0 * l2) * require(d2.d01, "Delta01", 2); };

    DulacExpansion out;
    out.lambda = lam;
    out.d00 = u0;
    const bool above1 = d1.tag == CaseTag::above_one, above2 = d2.tag == CaseTag::above_one;
    if (above1 && above2) {
        out.tag = CaseTag::above_one;
        out.d10 = upsilon1();
        out.ell = {1.0, std::min(l1, 2.0)};
    } else if (!above1 && !above2) {
        out.tag = CaseTag::below_one;
        out.d01 = upsilon2();
        out.ell = {lam, std::min(l1, 2.0 * lam)};
    } else if (above1 && !above2) {
        if (std::abs(lam - 1.0) <= resonance_band) {
            out.tag = CaseTag::at_one;
            out.d10 = upsilon1();
            out.d01 = upsilon2();
            out.ell = {1.0, std::min(l1, 2.0)};
            out.note = "compensated second term";
        } else if (lam > 1.0) {
            out.tag = CaseTag::above_one;
            out.d10 = upsilon1();
            out.ell = {1.0, std::min(lam, 2.0)};
        } else {
            out.tag = CaseTag::below_one;
            out.d01 = upsilon2();
            out.ell = {lam, std::min(2.0 * lam, 1.0)};
        }
    } else {
        const double u3 = l2 * std::pow(a, l2 - 1.0) * c * require(d1.d01, "Delta01", 1) +
                          std::pow(a, l2 + 1.0) * require(d2.d10, "Delta10", 2);
        out.tag = classify_ratio(lam);
        out.second = SecondTerm{l1, u3, std::nullopt};
        out.ell = {l1, std::min({lam, 2.0 * l1, 1.0})};
    }
    return out;
}

DulacExpansion inverse_dulac(const DulacExpansion& d) {
    if (d.tag == CaseTag::at_one) throw UsageError("inverse of a Dulac map with ratio at one");
    if (!standard_shape(d)) throw UsageError("inverse of a non-elementary expansion");
    const double rho = 1.0 / d.lambda;
    const double o00 = std::pow(d.d00, -rho);
    if (d.tag == CaseTag::below_one) {
        if (!d.d01) return leading_only(rho, o00, dulac_ell(rho, CaseTag::above_one), "no Delta01");
        return make_dulac(rho, o00, -rho * std::pow(d.d00, -(2.0 + rho)) * *d.d01, std::nullopt);
    }
    if (!d.d10) return leading_only(rho, o00, dulac_ell(rho, CaseTag::below_one), "no Delta10");
    return make_dulac(rho, o00, std::nullopt, -rho * std::pow(d.d00, -(1.0 + 2.0 * rho)) * *d.d10);
}

const char* to_string(Pattern p) {
    switch (p) {
        case Pattern::minus_plus: return "below-then-above";
        case Pattern::plus_minus: return "above-then-below";
        case Pattern::all_above: return "all-above";
        case Pattern::all_below: return "all-below";
        case Pattern::mixed: return "mixed";
    }
    return "?";
}

Pattern classify_pattern(const PolycycleSpec& spec, int* m_out) {
    const int n = spec.n();
    int m = 0;
    const auto set = [&](int v) {
        if (m_out) *m_out = v;
    };
    set(0);
    for (const auto& d : spec.corners)
        if (d.tag == CaseTag::at_one) return Pattern::mixed;
    while (m < n && spec.at(m + 1).tag == CaseTag::below_one) ++m;
    if (m == n) {
        set(n);
        return Pattern::all_below;
    }
    if (m > 0) {
        for (int i = m + 1; i <= n; ++i)
            if (spec.at(i).tag != CaseTag::above_one) return Pattern::mixed;
        set(m);
        return Pattern::minus_plus;
    }
    while (m < n && spec.at(m + 1).tag == CaseTag::above_one) ++m;
    if (m == n) return Pattern::all_above;
    for (int i = m + 1; i <= n; ++i)
        if (spec.at(i).tag != CaseTag::below_one) return Pattern::mixed;
    set(m);
    return Pattern::plus_minus;
}

double ReturnExpansion::predict(double s) const {
    return std::pow(s, r) * (a1n + (next ? next->value(s) : 0.0));
}

ReturnExpansion return_expansion(const PolycycleSpec& spec, double resonance_band) {
    const int n = spec.n();
    if (n < 1) throw UsageError("polycycle needs at least one corner");
    ReturnExpansion R;
    R.r = lambda_product(spec, 0, n);
    R.a1n = a_product(spec, 1, n);
    R.tag = classify_ratio(R.r, resonance_band);
    R.pattern = classify_pattern(spec, &R.m);
    const int m = R.m;
    switch (R.pattern) {
        case Pattern::minus_plus: {
            const double l0m = lambda_product(spec, 0, m);
            const double b = s1_of(spec.at(m + 1)) - s2_of(spec.at(m));
            R.b_quantity = b;
            R.next = SecondTerm{l0m, lambda_product(spec, m, n) * a_product(spec, 1, m) * R.a1n * b, std::nullopt};
            R.next_name = "A";
            // The tail of the above-one block, composed with s^l0m, caps the remainder too.
            R.ell = {l0m, std::min({R.r, 2.0 * l0m, 1.0, l0m * std::min(spec.at(m + 1).lambda, 2.0)})};
            break;
        }
        case Pattern::plus_minus: {
            const double B = R.r * R.a1n * s1_of(spec.at(1));
            const double C = -R.a1n * R.a1n * s2_of(spec.at(n));
            if (R.tag == CaseTag::at_one) {
                R.next = SecondTerm{1.0, B + C, Compensated{B, C, 1.0 - R.r}};
                R.next_name = "A_omega";
                R.ell = {1.0, std::min(lambda_product(spec, 0, m), 2.0)};
            } else if (R.r > 1.0) {
                R.next = SecondTerm{1.0, B, std::nullopt};
                R.next_name = "B";
                R.ell = {1.0, std::min(R.r, 2.0)};
            } else {
                R.next = SecondTerm{R.r, C, std::nullopt};
                R.next_name = "C";
                R.ell = {R.r, std::min(2.0 * R.r, 1.0)};
            }
            break;
        }
        case Pattern::all_above:
            R.next = SecondTerm{1.0, b_product(spec, 1, n), std::nullopt};
            R.next_name = "B_1n";
            R.ell = {1.0, std::min(spec.at(1).lambda, 2.0)};
            break;
        case Pattern::all_below:
            R.next = SecondTerm{R.r, c_product(spec, 1, n), std::nullopt};
            R.next_name = "C_1n";
            R.ell = {R.r, std::min(lambda_product(spec, 0, n - 1), 2.0 * R.r)};
            break;
        case Pattern::mixed: {
            double lo = 1.0;
            for (int i = 0; i <= n; ++i) lo = std::min(lo, lambda_product(spec, 0, i));
            R.ell = {0.0, lo};
            R.note = "leading term only: corner ratios are interleaved or at one";
            break;
        }
    }
    R.leading_only = !R.next.has_value();
    return R;
}

double DisplacementExpansion::predict(double s) const {
    if (tag != CaseTag::at_one) return a1m * std::pow(s, lambda0m) - a_star * std::pow(s, lambdamn_inv);
    return std::pow(s, lambdamn_inv) * (1.0 + u1 * s) * (psi1 * compensator(s, alpha) + psi2 + psi3 * s);
}

PolycycleSpec rotate(const PolycycleSpec& spec, int k) {
    PolycycleSpec out;
    const int n = spec.n();
    for (int i = 0; i < n; ++i) out.corners.push_back(spec.corners[static_cast<size_t>((i + k) % n)]);
    return out;
}

DisplacementExpansion displacement_expansion(const PolycycleSpec& spec, double resonance_band) {
    const int n = spec.n();
    for (int k = 0; k < n; ++k) {
        const PolycycleSpec rot = rotate(spec, k);
        int m = 0;
        if (classify_pattern(rot, &m) != Pattern::plus_minus) continue;
        DisplacementExpansion D;
        D.rotation = k;
        D.m = m;
        D.n = n;
        D.lambda0m = lambda_product(rot, 0, m);
        D.lambdamn_inv = 1.0 / lambda_product(rot, m, n);
        D.alpha = D.lambdamn_inv - D.lambda0m;
        D.a1m = a_product(rot, 1, m);
        D.a_star = a_star(rot, m + 1, n);
        D.psi1 = D.alpha * D.a1m;
        D.psi2 = D.a1m - D.a_star;
        const double s1 = s1_of(rot.at(1)), s2 = s2_of(rot.at(n));
        D.psi3 = D.a_star * (D.lambda0m * s1 - D.lambdamn_inv * s2);
        D.u1 = D.lambda0m * s1;
        D.tag = classify_ratio(lambda_product(rot, 0, n), resonance_band);
        if (D.tag == CaseTag::at_one)
            D.ell = {1.0, std::min({rot.at(1).lambda, 1.0 / rot.at(n).lambda, 2.0})};
        else
            D.ell = {std::max(D.lambda0m, D.lambdamn_inv), std::min(D.lambda0m, D.lambdamn_inv) + 1.0};
        return D;
    }
    throw ModelError("no rotation of the corners puts the ratios above one before those below one");
}

}  // namespace polycycle
