#include "polycycle/analysis.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "polycycle/errors.hpp"

namespace polycycle {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

[[noreturn]] void rethrow_in(const std::string& stage, const Error& e) {
    const std::string what = stage + ": " + e.what();
    switch (e.category()) {
        case Error::Category::usage: throw UsageError(what);
        case Error::Category::model: throw ModelError(what);
        case Error::Category::numeric: break;
    }
    throw NumericError(what);
}

template <class F>
auto stage(const std::string& name, F&& f) {
    try {
        return f();
    } catch (const Error& e) {
        rethrow_in(name, e);
    }
}

double parse_number(const std::string& text) {
    try {
        return evaluate_constant(parse_expression(text, {}), {});
    } catch (const Error& e) {
        throw UsageError("grid value '" + text + "': " + e.what());
    }
}

LadderResult ladder(std::vector<ConditionLevel> levels, const std::function<double(const ParamVector&, size_t)>& level,
                    const ParamVector& mu0, const std::optional<NotIdentityEvidence>& not_id, const ModelOptions& o) {
    LadderResult out;
    VerdictInput in;
    in.zero_tol = o.zero_tol;
    in.not_identity = not_id;
    const size_t dim = mu0.size(), z = leading_zeros(levels, o.zero_tol);
    const size_t rows = std::min({levels.size(), dim, std::max<size_t>(2, z)});
    if (rows > 0) {
        std::vector<ParamFunction> fs;
        for (size_t k = 0; k < rows; ++k) fs.push_back([&level, k](const ParamVector& mu) { return level(mu, k); });
        in.independence = stage("independence", [&] { return independence_rank(fs, mu0, o.gradient_step); });
        if (z >= 1)
            in.first_sign_change = find_sign_change(fs[0], mu0, 1e-3, o.zero_tol);
    }
    in.levels = std::move(levels);
    out.verdict = verdict(in);
    out.levels = std::move(in.levels);
    return out;
}

}  // namespace

Evaluation evaluate(const Model& m, const Binding& b) {
    Evaluation ev;
    ev.charts = stage("normalize", [&] { return m.charts(b); });
    for (size_t i = 0; i < ev.charts.size(); ++i) {
        ev.spec.corners.push_back(stage("dulac corner " + std::to_string(i + 1), [&] {
            return dulac_coefficients(ev.charts[i], m.sections(static_cast<int>(i) + 1), m.options.dulac);
        }));
    }
    ev.ret = stage("return expansion", [&] { return return_expansion(ev.spec, m.options.resonance_band); });
    try {
        ev.disp = displacement_expansion(ev.spec, m.options.resonance_band);
    } catch (const ModelError& e) {
        ev.disp_note = e.what();
    }
    return ev;
}

std::shared_ptr<const Evaluation> Evaluator::at(const ParamVector& mu) {
    {
        std::lock_guard<std::mutex> lock(mutex_);
        const auto it = cache_.find(mu);
        if (it != cache_.end()) return it->second;
    }
    auto ev = std::make_shared<const Evaluation>(evaluate(model_, model_.from_vector(mu)));
    std::lock_guard<std::mutex> lock(mutex_);
    return cache_.emplace(mu, std::move(ev)).first->second;
}

double Evaluator::return_level(const ParamVector& mu, size_t k) {
    const auto lv = return_levels(at(mu)->ret);
    if (k >= lv.size()) throw NumericError("return condition " + std::to_string(k + 1) + " undefined at this point");
    return lv[k].value;
}

double Evaluator::displacement_level(const ParamVector& mu, size_t k) {
    const auto ev = at(mu);
    if (!ev->disp) throw NumericError("displacement undefined at this point: " + ev->disp_note);
    return displacement_levels(*ev->disp).at(k).value;
}

size_t leading_zeros(const std::vector<ConditionLevel>& levels, double tol) {
    size_t z = 0;
    while (z < levels.size() && std::abs(levels[z].value) <= tol) ++z;
    return z;
}

Analysis analyze(const Model& m, const Binding& b, const AnalysisOptions& opt) {
    if (!m.has_polycycle()) throw UsageError("analyze needs a polycycle with at least two corners");
    Analysis a;
    a.mu = b;
    a.at = evaluate(m, b);
    const ModelOptions& o = m.options;
    const ParamVector mu0 = m.to_vector(b);
    Evaluator E(m);

    if (opt.flow_probe) {
        const PolycycleGeometry g = stage("normalize", [&] { return m.geometry(b); });
        std::vector<std::string> failures;
        const ScalarMap R = [&](double s) {
            try {
                return numeric_return(g, s, o.integrator);
            } catch (const NumericError& e) {
                failures.push_back("s = " + std::to_string(s) + ": " + e.what());
                return kNaN;
            }
        };
        a.flow_probe = not_identity_probe(R, opt.probe_s, o.integrator);
        for (const auto& f : failures) a.flow_probe->note += (a.flow_probe->note.empty() ? "" : "; ") + f;
    }

    std::vector<ConditionLevel> levels = return_levels(a.at.ret);
    NotIdentityEvidence not_id = not_identity_from_levels(levels, o.zero_tol);
    if (a.flow_probe && (a.flow_probe->found || !not_id.found)) not_id = *a.flow_probe;

    a.ret = stage("verdict", [&] {
        return ladder(levels, [&](const ParamVector& mu, size_t k) { return E.return_level(mu, k); }, mu0, not_id, o);
    });
    if (opt.displacement && a.at.disp) {
        a.disp = stage("displacement verdict", [&] {
            return ladder(displacement_levels(*a.at.disp),
                          [&](const ParamVector& mu, size_t k) { return E.displacement_level(mu, k); }, mu0, not_id, o);
        });
    }
    return a;
}

GridAxis parse_grid_axis(const std::string& spec) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos || eq == 0) throw UsageError("grid axis must be NAME=LO:HI:COUNT or NAME=VALUE");
    GridAxis ax;
    ax.name = spec.substr(0, eq);
    std::vector<std::string> parts;
    std::stringstream ss(spec.substr(eq + 1));
    for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
    if (parts.size() == 1) {
        ax.lo = ax.hi = parse_number(parts[0]);
    } else if (parts.size() == 3) {
        ax.lo = parse_number(parts[0]);
        ax.hi = parse_number(parts[1]);
        const double c = parse_number(parts[2]);
        if (c < 1 || c != std::floor(c) || c > static_cast<double>(kMaxScanPoints))
            throw UsageError("grid axis " + ax.name + ": count must be a positive integer");
        ax.count = static_cast<int>(c);
        if (ax.count == 1 && ax.lo != ax.hi) throw UsageError("grid axis " + ax.name + ": one point needs lo = hi");
    } else {
        throw UsageError("grid axis must be NAME=LO:HI:COUNT or NAME=VALUE");
    }
    return ax;
}

namespace {

ScanTable scan_setup(const Model& m, const Binding& base, const std::vector<GridAxis>& axes) {
    if (axes.empty()) throw UsageError("scan needs at least one grid axis");
    ScanTable t;
    long total = 1;
    for (const auto& ax : axes) {
        if (!base.count(ax.name)) throw UsageError("grid names undeclared parameter '" + ax.name + "'");
        for (const auto& name : t.axes)
            if (name == ax.name) throw UsageError("grid axis '" + ax.name + "' given twice");
        t.axes.push_back(ax.name);
        total *= ax.count;
        if (total > kMaxScanPoints) throw UsageError("grid has more than 10^6 points");
    }
    if (!m.has_polycycle()) throw UsageError("scan needs a polycycle");
    t.columns = {"r-1", "A_1n-1", "next", "psi1", "psi2", "psi3"};
    t.rows.resize(static_cast<size_t>(total));
    for (long k = 0; k < total; ++k) {
        Binding b = base;
        long rem = k;
        for (size_t a = axes.size(); a-- > 0;) {
            b[axes[a].name] = axes[a].at(static_cast<int>(rem % axes[a].count));
            rem /= axes[a].count;
        }
        t.rows[static_cast<size_t>(k)].mu = std::move(b);
    }
    return t;
}

void scan_row(const Model& m, ScanRow& row) {
    row.values.assign(6, kNaN);
    try {
        const Evaluation ev = evaluate(m, row.mu);
        row.values[0] = ev.ret.r - 1.0;
        row.values[1] = ev.ret.a1n - 1.0;
        if (ev.ret.next) row.values[2] = ev.ret.next->coefficient;
        if (ev.disp) {
            row.values[3] = ev.disp->psi1;
            row.values[4] = ev.disp->psi2;
            row.values[5] = ev.disp->psi3;
        }
    } catch (const Error& e) {
        row.error = e.what();
    }
}

}  // namespace

ScanTable scan_serial(const Model& m, const Binding& base, const std::vector<GridAxis>& axes) {
    ScanTable t = scan_setup(m, base, axes);
    for (auto& row : t.rows) scan_row(m, row);
    return t;
}

ScanTable scan_parallel(const Model& m, const Binding& base, const std::vector<GridAxis>& axes) {
    ScanTable t = scan_setup(m, base, axes);
    const long n = static_cast<long>(t.rows.size());
#pragma omp parallel for schedule(dynamic)
    for (long k = 0; k < n; ++k) scan_row(m, t.rows[static_cast<size_t>(k)]);
    return t;
}

namespace {

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string csv_number(double v) {
    if (std::isnan(v)) return "";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

std::string to_csv(const ScanTable& t) {
    std::ostringstream os;
    std::vector<std::string> head = t.axes;
    head.insert(head.end(), t.columns.begin(), t.columns.end());
    head.push_back("error");
    for (size_t i = 0; i < head.size(); ++i) os << (i ? "," : "") << csv_field(head[i]);
    os << "\r\n";
    for (const auto& row : t.rows) {
        bool first = true;
        const auto put = [&](const std::string& f) {
            os << (first ? "" : ",") << f;
            first = false;
        };
        for (const auto& a : t.axes) put(csv_number(row.mu.at(a)));
        for (double v : row.values) put(csv_number(v));
        put(csv_field(row.error));
        os << "\r\n";
    }
    return os.str();
}

}  // namespace polycycle
