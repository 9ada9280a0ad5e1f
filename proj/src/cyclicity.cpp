#include "polycycle/cyclicity.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "polycycle/errors.hpp"

namespace polycycle {

namespace {

double eval_at(const ParamFunction& f, const ParamVector& mu, size_t component) {
    try {
        return f(mu);
    } catch (const Error& e) {
        const std::string what = "gradient component " + std::to_string(component + 1) + ": " + e.what();
        switch (e.category()) {
            case Error::Category::usage: throw UsageError(what);
            case Error::Category::model: throw ModelError(what);
            case Error::Category::numeric: throw NumericError(what);
        }
        throw;
    }
}

std::vector<double> central(const ParamFunction& f, const ParamVector& mu0, const std::vector<double>& step) {
    std::vector<double> g(mu0.size());
    for (size_t i = 0; i < mu0.size(); ++i) {
        ParamVector up = mu0, down = mu0;
        up[i] += step[i];
        down[i] -= step[i];
        g[i] = (eval_at(f, up, i) - eval_at(f, down, i)) / (2.0 * step[i]);
    }
    return g;
}

int rank_of(const Eigen::MatrixXd& m, double threshold) {
    if (m.size() == 0) return 0;
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    const auto& sv = svd.singularValues();
    int r = 0;
    for (Eigen::Index k = 0; k < sv.size(); ++k) r += sv(k) > threshold ? 1 : 0;
    return r;
}

bool is_zero(double v, double tol) { return std::abs(v) <= tol; }

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(12);
    os << v;
    return os.str();
}

}  // namespace

bool GradientReport::all_consistent() const {
    return std::all_of(consistent.begin(), consistent.end(), [](bool b) { return b; });
}

GradientReport gradient(const ParamFunction& f, const ParamVector& mu0, double h) {
    if (!(h > 0.0)) throw UsageError("gradient step must be positive");
    GradientReport rep;
    for (double m : mu0) rep.step.push_back(h * std::max(std::abs(m), 1.0));
    rep.value = central(f, mu0, rep.step);
    std::vector<double> half = rep.step;
    for (double& s : half) s /= 2.0;
    const std::vector<double> g2 = central(f, mu0, half);
    double norm = 0.0;
    for (double v : rep.value) norm = std::max(norm, std::abs(v));
    for (size_t i = 0; i < mu0.size(); ++i) {
        // Near-zero components are judged against the gradient as a whole.
        const double scale = std::max(std::abs(rep.value[i]), norm);
        rep.consistent.push_back(std::abs(rep.value[i] - g2[i]) <= 1e-4 * scale);
    }
    return rep;
}

IndependenceReport independence_from_matrix(std::vector<std::vector<double>> matrix, double step) {
    IndependenceReport rep;
    rep.step = step;
    const Eigen::Index rows = static_cast<Eigen::Index>(matrix.size());
    const Eigen::Index cols = rows ? static_cast<Eigen::Index>(matrix[0].size()) : 0;
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = matrix[static_cast<size_t>(i)][static_cast<size_t>(j)];
    rep.matrix = std::move(matrix);
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    for (Eigen::Index k = 0; k < svd.singularValues().size(); ++k) rep.singular_values.push_back(svd.singularValues()(k));
    const double smax = rep.singular_values.empty() ? 0.0 : rep.singular_values.front();
    rep.threshold = static_cast<double>(std::max(rows, cols)) * std::numeric_limits<double>::epsilon() * smax * 1e3;
    rep.rank = rank_of(m, rep.threshold);
    for (Eigen::Index k = 1; k <= rows; ++k) rep.prefix_rank.push_back(rank_of(m.topRows(k), rep.threshold));
    return rep;
}

IndependenceReport independence_rank(const std::vector<ParamFunction>& fs, const ParamVector& mu0, double h) {
    if (fs.empty()) throw UsageError("independence_rank needs at least one function");
    if (mu0.size() < fs.size()) throw UsageError("more functions than parameters");
    std::vector<std::vector<double>> rows;
    bool consistent = true;
    for (const auto& f : fs) {
        const GradientReport g = gradient(f, mu0, h);
        consistent = consistent && g.all_consistent();
        rows.push_back(g.value);
    }
    IndependenceReport rep = independence_from_matrix(std::move(rows), h);
    rep.consistent = consistent;
    return rep;
}

std::optional<SignWitness> find_sign_change(const ParamFunction& f, const ParamVector& mu0, double radius,
                                            double zero_tol) {
    const size_t dim = mu0.size();
    std::vector<ParamVector> dirs;
    try {
        const GradientReport g = gradient(f, mu0);
        double norm = 0.0;
        for (double v : g.value) norm += v * v;
        norm = std::sqrt(norm);
        if (norm > 0.0) {
            ParamVector d(dim);
            for (size_t i = 0; i < dim; ++i) d[i] = g.value[i] / norm;
            dirs.push_back(d);
        }
    } catch (const Error&) {
        // Axis probes still apply.
    }
    for (size_t i = 0; i < dim; ++i) {
        ParamVector d(dim, 0.0);
        d[i] = 1.0;
        dirs.push_back(d);
    }

    std::vector<ParamVector> probes;
    for (double frac : {1e-3, 1e-2, 1e-1, 1.0}) {
        for (const auto& d : dirs) {
            for (double sign : {1.0, -1.0}) {
                ParamVector mu = mu0;
                for (size_t i = 0; i < dim; ++i) mu[i] += sign * frac * radius * std::max(std::abs(mu0[i]), 1.0) * d[i];
                probes.push_back(mu);
            }
        }
    }
    std::vector<double> vals(probes.size(), std::numeric_limits<double>::quiet_NaN());
    const long n = static_cast<long>(probes.size());
#pragma omp parallel for schedule(dynamic)
    for (long k = 0; k < n; ++k) {
        try {
            vals[static_cast<size_t>(k)] = f(probes[static_cast<size_t>(k)]);
        } catch (const std::exception&) {
        }
    }
    // Fixed probe order: pairs at the smallest radius first.
    for (size_t j = 1; j < probes.size(); ++j) {
        for (size_t i = 0; i < j; ++i) {
            const double a = vals[i], b = vals[j];
            if (std::isfinite(a) && std::isfinite(b) && std::abs(a) > zero_tol && std::abs(b) > zero_tol &&
                a * b < 0.0)
                return SignWitness{probes[i], probes[j], a, b};
        }
    }
    return std::nullopt;
}

NotIdentityEvidence not_identity_probe(const ScalarMap& R, const std::vector<double>& samples,
                                       const IntegratorOptions& tol) {
    NotIdentityEvidence ev;
    ev.source = "flow";
    for (double s : samples) {
        const double d = R(s) - s;
        const double threshold = 10.0 * (tol.abs_tol + tol.rel_tol * s);
        if (std::abs(d) > threshold) {
            ev.found = true;
            ev.s = s;
            ev.displacement = d;
            ev.threshold = threshold;
            return ev;
        }
    }
    ev.note = "inconclusive: |R(s) - s| within ten times the integration tolerance at every sample";
    return ev;
}

NotIdentityEvidence not_identity_from_levels(const std::vector<ConditionLevel>& levels, double zero_tol) {
    NotIdentityEvidence ev;
    ev.source = "expansion";
    for (const auto& l : levels) {
        if (!is_zero(l.value, zero_tol)) {
            ev.found = true;
            ev.displacement = l.value;
            ev.threshold = zero_tol;
            ev.note = l.name + " != 0";
            return ev;
        }
    }
    ev.note = "inconclusive: all computed coefficients vanish";
    return ev;
}

CyclicityVerdict verdict(const VerdictInput& in) {
    CyclicityVerdict v;
    v.independence = in.independence;
    v.not_identity = in.not_identity;
    v.witness = in.first_sign_change;
    const double tol = in.zero_tol;
    const bool not_id = in.not_identity && in.not_identity->found;

    const auto quantities = [&](size_t upto) {
        std::vector<std::pair<std::string, double>> q;
        for (size_t k = 0; k <= upto && k < in.levels.size(); ++k) q.push_back({in.levels[k].name, in.levels[k].value});
        return q;
    };

    for (size_t k = 0; k < in.levels.size(); ++k) {
        const ConditionLevel& lv = in.levels[k];
        const int order = static_cast<int>(k) + 1;

        // Upper bound: phi_order != 0 gives Cycl <= order - 1 (exactly 0 at the first rung).
        {
            FiredCondition c{lv.upper_item, {{lv.name, lv.value}}, !is_zero(lv.value, tol), ""};
            if (c.pass) {
                const int bound = order - 1;
                if (!v.upper || bound < *v.upper) v.upper = bound;
                if (k == 0) v.lower = 0;
                c.detail = "|" + lv.name + "| = " + fmt(std::abs(lv.value)) + " > " + fmt(tol) + " => Cycl " +
                           (k == 0 ? "= 0" : "<= " + std::to_string(bound));
                v.rationale.push_back(lv.upper_item + ": " + c.detail);
            } else {
                c.detail = lv.name + " vanishes within " + fmt(tol);
            }
            v.conditions.push_back(c);
        }

        // Lower bound: phi_1..phi_order vanish, independence, R not the identity.
        {
            bool zeros = true;
            for (size_t j = 0; j <= k; ++j) zeros = zeros && is_zero(in.levels[j].value, tol);
            bool independent = false;
            std::string why;
            if (k == 0) {
                independent = in.first_sign_change.has_value();
                why = independent ? lv.name + " changes sign (witnesses " + fmt(in.first_sign_change->f1) + ", " +
                                        fmt(in.first_sign_change->f2) + ")"
                                  : "no sign-change witness for " + lv.name;
            } else if (in.independence && in.independence->prefix_rank.size() > k) {
                independent = in.independence->consistent && in.independence->prefix_rank[k] == order;
                why = "gradient rank " + std::to_string(in.independence->prefix_rank[k]) + " of " +
                      std::to_string(order) + " (" + in.independence->label + ")";
                if (!in.independence->consistent) why += ", finite differences inconsistent";
            } else {
                why = "no independence report";
            }
            FiredCondition c{lv.lower_item, quantities(k), zeros && independent && not_id, ""};
            if (c.pass) {
                if (!v.lower || order > *v.lower) v.lower = order;
                c.detail = why + "; R is not the identity => Cycl >= " + std::to_string(order);
                v.rationale.push_back(lv.lower_item + ": " + c.detail);
            } else {
                c.detail = !zeros ? "conditions do not all vanish" : !independent ? why : "R = Id not excluded";
            }
            v.conditions.push_back(c);
        }
    }
    if (v.lower && v.upper && *v.lower > *v.upper) {
        v.rationale.push_back("inconsistent bounds; both withdrawn");
        v.lower.reset();
        v.upper.reset();
    }
    return v;
}

std::vector<ConditionLevel> return_levels(const ReturnExpansion& e) {
    std::vector<ConditionLevel> out{{"r - 1", e.r - 1.0, "Thm A(a)", "Thm A(b)"},
                                    {"A_1n - 1", e.a1n - 1.0, "Thm A(c)", "Thm A(d)"}};
    if (e.pattern == Pattern::minus_plus && e.next && e.next_name == "A")
        out.push_back({"A", e.next->coefficient, "Thm B(a)", "Thm B(b)"});
    return out;
}

double displacement_scale(const DisplacementExpansion& e) { return std::max({1.0, std::abs(e.a1m), std::abs(e.a_star)}); }

std::vector<ConditionLevel> displacement_levels(const DisplacementExpansion& e) {
    const double k = displacement_scale(e);
    return {{"Psi_1", e.psi1 / k, "Thm C(a)", "Thm C(b)"},
            {"Psi_2", e.psi2 / k, "Thm C(c)", "Thm C(d)"},
            {"Psi_3", e.psi3 / k, "Thm C(e)", "Thm C(f)"}};
}

}  // namespace polycycle
