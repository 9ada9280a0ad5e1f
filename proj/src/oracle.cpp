#include "polycycle/oracle.hpp"

#include <boost/multiprecision/eigen.hpp>
#include <boost/multiprecision/mpfr.hpp>
#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "polycycle/errors.hpp"

namespace polycycle {

namespace {

using mp = boost::multiprecision::number<boost::multiprecision::mpfr_float_backend<120>,
                                         boost::multiprecision::et_off>;
using MpMatrix = Eigen::Matrix<mp, Eigen::Dynamic, Eigen::Dynamic>;
using MpVector = Eigen::Matrix<mp, Eigen::Dynamic, 1>;

constexpr int kTopLevel = 40;        // largest grid point 2^-40
constexpr double kExponentSpan = 3;  // monomials kept up to the compared exponent + this
constexpr double kMergeTol = 1e-12;

struct Truncation {
    double lambda, c0, c1, e;

    mp operator()(const mp& s) const {
        return pow(s, mp(lambda)) * (mp(c0) + mp(c1) * pow(s, mp(e)));
    }
};

Truncation truncate(const DulacExpansion& d) {
    const auto second = d.second_term();
    if (!second || second->compensated) return {d.lambda, d.d00, 0.0, 1.0};
    return {d.lambda, d.d00, second->coefficient, second->exponent};
}

struct Exponent {
    double value;
    mp exact;  // evaluated in multiprecision; a double exponent would leave s^(1e-16) drifts the fit chases
};

/// Exponents o + k g for each offset o, up to `top`, merged when they coincide.
std::vector<Exponent> basis(const std::vector<mp>& offsets, const mp& g, double top) {
    std::vector<Exponent> e;
    for (const mp& o : offsets)
        for (int k = 0; static_cast<double>(o + k * g) <= top; ++k) {
            const mp v = o + k * g;
            e.push_back({static_cast<double>(v), v});
        }
    std::sort(e.begin(), e.end(), [](const Exponent& a, const Exponent& b) { return a.value < b.value; });
    std::vector<Exponent> out;
    for (const auto& v : e)
        if (out.empty() || v.value - out.back().value > kMergeTol) out.push_back(v);
    return out;
}

MonomialFit fit(const std::function<mp(const mp&)>& rel, double exponent, const std::vector<Exponent>& exps,
                double next_omitted) {
    const Eigen::Index m = static_cast<Eigen::Index>(exps.size());
    const Eigen::Index n = 2 * m + 4;
    MpMatrix A(n, m);
    MpVector y(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        const mp s = pow(mp(2), -static_cast<int>(kTopLevel + 2 * k));
        y(k) = rel(s);
        for (Eigen::Index q = 0; q < m; ++q) A(k, q) = pow(s, exps[static_cast<size_t>(q)].exact);
    }
    MpVector scale(m);
    for (Eigen::Index q = 0; q < m; ++q) {
        scale(q) = A.col(q).norm();
        A.col(q) /= scale(q);
    }
    const MpVector c = A.colPivHouseholderQr().solve(y);
    MonomialFit f;
    f.exponent = exponent;
    for (const auto& e : exps) f.exponents.push_back(e.value);
    for (Eigen::Index q = 0; q < m; ++q) f.coefficients.push_back(static_cast<double>(c(q) / scale(q)));
    f.truncation = std::pow(2.0, -kTopLevel * next_omitted);
    return f;
}

double first_omitted(const std::vector<mp>& offsets, const mp& g, double top) {
    double next = std::numeric_limits<double>::infinity();
    for (const mp& o : offsets) {
        const double gd = static_cast<double>(g), od = static_cast<double>(o);
        const double k = std::floor((top - od) / gd) + 1.0;
        next = std::min(next, od + std::max(k, 0.0) * gd);
    }
    return next;
}

}  // namespace

std::optional<double> MonomialFit::at(double e) const {
    for (size_t k = 0; k < exponents.size(); ++k)
        if (std::abs(exponents[k] - e) <= 1e-9) return coefficients[k];
    return std::nullopt;
}

MonomialFit oracle_compose(const DulacExpansion& d1, const DulacExpansion& d2) {
    const Truncation t1 = truncate(d1), t2 = truncate(d2);
    if (!(t1.c0 > 0) || !(t2.c0 > 0)) throw UsageError("oracle needs positive leading coefficients");
    const mp mlam = mp(t1.lambda) * mp(t2.lambda);
    const std::vector<mp> offsets{mp(0), mp(t1.lambda) * mp(t2.e)};
    const mp g(t1.e);
    const double top = std::max({1.0, t1.e, t1.lambda * t2.e}) + kExponentSpan;
    return fit([&](const mp& s) { return t2(t1(s)) / pow(s, mlam); }, t1.lambda * t2.lambda, basis(offsets, g, top),
               first_omitted(offsets, g, top));
}

MonomialFit oracle_inverse(const DulacExpansion& d) {
    const Truncation t = truncate(d);
    if (!(t.c0 > 0)) throw UsageError("oracle needs a positive leading coefficient");
    const mp ml(t.lambda), me(t.e), a(t.c0), b(t.c1);
    const mp mrho = 1 / ml;
    const mp g = me * mrho;
    const double top = std::max(1.0, static_cast<double>(g)) + kExponentSpan;
    const auto inverse = [&](const mp& s) {
        // Newton on lambda ln t + ln(a + b t^e) = ln s.
        mp x = pow(s / a, mrho);
        const mp ls = log(s);
        for (int it = 0; it < 200; ++it) {
            const mp te = pow(x, me);
            const mp f = ml * log(x) + log(a + b * te) - ls;
            const mp df = ml / x + b * me * te / (x * (a + b * te));
            const mp step = f / df;
            x -= step;
            if (abs(step) <= abs(x) * mp(1e-110)) break;
        }
        return x / pow(s, mrho);
    };
    return fit(inverse, 1.0 / t.lambda, basis({mp(0)}, g, top), first_omitted({mp(0)}, g, top));
}

const char* to_string(LemmaCase c) {
    switch (c) {
        case LemmaCase::leading: return "leading";
        case LemmaCase::above_above: return "above-above";
        case LemmaCase::below_below: return "below-below";
        case LemmaCase::above_below: return "above-below";
        case LemmaCase::below_above: return "below-above";
        case LemmaCase::inverse_below: return "inverse-below";
        case LemmaCase::inverse_above: return "inverse-above";
    }
    return "?";
}

const std::vector<LemmaCase>& all_lemma_cases() {
    static const std::vector<LemmaCase> v{LemmaCase::leading,      LemmaCase::above_above,   LemmaCase::below_below,
                                          LemmaCase::above_below,  LemmaCase::below_above,   LemmaCase::inverse_below,
                                          LemmaCase::inverse_above};
    return v;
}

double coefficient_deviation(double formula, double oracle, double leading) {
    return std::abs(formula - oracle) / std::max(std::abs(oracle), 1e-6 * std::abs(leading));
}

namespace {

struct Case {
    LemmaCase which;
    DulacExpansion d1, d2;  // d2 unused for inverses
};

struct Outcome {
    double lead = 0.0, second = 0.0;
    bool flagged = false;
    std::string detail;
};

Case draw(LemmaCase which, int index, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> below(0.3, 0.7), above(1.4, 3.0), d00(0.5, 3.0), mag(0.2, 2.0), unit(0, 1);
    const auto coef = [&] {
        const double sign = unit(rng) < 0.5 ? -1.0 : 1.0;
        return sign * mag(rng);
    };
    // Draws are sequenced explicitly so a seed means the same cases on every compiler.
    const auto up = [&](double l) {
        const double a = d00(rng);
        return make_dulac(l, a, coef(), std::nullopt);
    };
    const auto down = [&](double l) {
        const double a = d00(rng);
        return make_dulac(l, a, std::nullopt, coef());
    };

    LemmaCase shape = which;
    if (which == LemmaCase::leading) {
        const LemmaCase pick[] = {LemmaCase::above_above, LemmaCase::below_below, LemmaCase::above_below,
                                  LemmaCase::below_above};
        shape = pick[index % 4];
    }
    switch (shape) {
        case LemmaCase::above_above: {
            DulacExpansion d1 = up(above(rng));
            return {which, d1, up(above(rng))};
        }
        case LemmaCase::below_below: {
            DulacExpansion d1 = down(below(rng));
            return {which, d1, down(below(rng))};
        }
        case LemmaCase::above_below: {
            // Product below one, above one, and inside the resonance band, in turn.
            double lam;
            switch (index % 3) {
                case 0: lam = std::uniform_real_distribution<double>(0.5, 0.9)(rng); break;
                case 1: lam = std::uniform_real_distribution<double>(1.1, 1.8)(rng); break;
                default: {
                    const double off = std::uniform_real_distribution<double>(0.02, 0.05)(rng);
                    lam = unit(rng) < 0.5 ? 1.0 - off : 1.0 + off;
                }
            }
            const double l1 = std::uniform_real_distribution<double>(std::max(1.4, lam / 0.9), 3.0)(rng);
            DulacExpansion d1 = up(l1);
            return {which, d1, down(lam / l1)};
        }
        case LemmaCase::below_above: {
            DulacExpansion d1 = down(below(rng));
            return {which, d1, up(above(rng))};
        }
        case LemmaCase::inverse_below: return {which, down(below(rng)), {}};
        case LemmaCase::inverse_above: return {which, up(above(rng)), {}};
        default: break;
    }
    return {which, {}, {}};
}

/// (relative exponent, coefficient) of every second-order term the formula states.
std::vector<std::pair<double, double>> second_terms(const DulacExpansion& d) {
    std::vector<std::pair<double, double>> out;
    if (d.second) {
        if (!d.second->compensated) out.push_back({d.second->exponent, d.second->coefficient});
        return out;
    }
    if (d.d10) out.push_back({1.0, *d.d10});
    if (d.d01) out.push_back({d.lambda, *d.d01});
    return out;
}

std::string describe(const Case& c) {
    std::ostringstream os;
    os.precision(17);
    os << to_string(c.which) << ": lambda1 = " << c.d1.lambda << ", d00_1 = " << c.d1.d00;
    if (c.which != LemmaCase::inverse_below && c.which != LemmaCase::inverse_above)
        os << ", lambda2 = " << c.d2.lambda << ", d00_2 = " << c.d2.d00;
    return os.str();
}

Outcome evaluate(const Case& c, const ComposeCheckOptions& opt) {
    Outcome o;
    try {
        const bool inverse = c.which == LemmaCase::inverse_below || c.which == LemmaCase::inverse_above;
        DulacExpansion formula = inverse ? inverse_dulac(c.d1) : compose_pair(c.d1, c.d2, opt.resonance_band);
        if (opt.corrupt) opt.corrupt(c.which, formula);
        const MonomialFit fit = inverse ? oracle_inverse(c.d1) : oracle_compose(c.d1, c.d2);
        const double lead = fit.coefficients.front();
        o.lead = std::abs(formula.d00 - lead) / std::abs(lead);
        if (c.which != LemmaCase::leading) {
            const auto terms = second_terms(formula);
            if (terms.empty()) {
                o.flagged = true;
                o.detail = "formula has no second-order term";
            }
            for (const auto& [e, v] : terms) {
                const auto fitted = fit.at(e);
                if (!fitted) {
                    o.flagged = true;
                    o.detail = "exponent " + std::to_string(e) + " absent from the oracle basis";
                    continue;
                }
                o.second = std::max(o.second, coefficient_deviation(v, *fitted, lead));
            }
        }
        if (o.lead > opt.leading_tol || o.second > opt.second_tol) o.flagged = true;
    } catch (const std::exception& e) {
        o.flagged = true;
        o.detail = e.what();
    }
    return o;
}

}  // namespace

ComposeCheckReport compose_check(std::uint64_t seed, int count, const ComposeCheckOptions& opt) {
    if (count < 0) throw UsageError("count must be nonnegative");
    ComposeCheckReport rep;
    rep.seed = seed;
    rep.count = count;
    if (count == 0) return rep;

    std::mt19937_64 rng(seed);
    std::vector<Case> cases;
    for (LemmaCase w : all_lemma_cases())
        for (int i = 0; i < count; ++i) cases.push_back(draw(w, i, rng));

    std::vector<Outcome> out(cases.size());
    const long n = static_cast<long>(cases.size());
    if (opt.parallel) {
#pragma omp parallel for schedule(dynamic)
        for (long k = 0; k < n; ++k) out[static_cast<size_t>(k)] = evaluate(cases[static_cast<size_t>(k)], opt);
    } else {
        for (long k = 0; k < n; ++k) out[static_cast<size_t>(k)] = evaluate(cases[static_cast<size_t>(k)], opt);
    }

    for (LemmaCase w : all_lemma_cases()) {
        CaseDeviation dev;
        dev.which = w;
        for (size_t k = 0; k < cases.size(); ++k) {
            if (cases[k].which != w) continue;
            ++dev.count;
            dev.max_leading = std::max(dev.max_leading, out[k].lead);
            dev.max_second = std::max(dev.max_second, out[k].second);
            if (out[k].flagged) {
                ++dev.flagged;
                if (dev.examples.size() < 3)
                    dev.examples.push_back(describe(cases[k]) + (out[k].detail.empty() ? "" : " (" + out[k].detail + ")"));
            }
        }
        rep.pass = rep.pass && dev.flagged == 0;
        rep.cases.push_back(dev);
    }
    return rep;
}

}  // namespace polycycle
