#include "polycycle/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <limits>

#include "polycycle/document.hpp"
#include "polycycle/errors.hpp"

namespace polycycle {

namespace {

struct Common {
    std::string model;
    std::vector<std::string> set, tol;
    std::string out;
};

void add_common(CLI::App* cmd, Common& c, bool model_required) {
    auto* m = cmd->add_option("--model", c.model, "model file");
    if (model_required) m->required();
    cmd->add_option("--set", c.set, "parameter override NAME=VALUE (repeatable)");
    cmd->add_option("--tol", c.tol, "option override NAME=VALUE (repeatable)");
    cmd->add_option("--out", c.out, "output path (default stdout)");
}

Model load(const Common& c) {
    Model m = load_model(c.model);
    for (const auto& [k, v] : parse_assignments(c.tol)) m.options.set(k, v);
    m.options.validate();
    return m;
}

void emit(const Common& c, const std::string& text, std::ostream& out) {
    if (c.out.empty()) {
        out << text;
        return;
    }
    std::ofstream f(c.out, std::ios::binary);
    if (!f) throw UsageError("cannot write '" + c.out + "'");
    f << text;
}

std::vector<double> s_grid(const ModelOptions& o, bool geometric, int count) {
    std::vector<double> g;
    for (int k = 0; k < count; ++k) {
        const double t = count == 1 ? 0.0 : static_cast<double>(k) / (count - 1);
        g.push_back(geometric ? o.s_max * std::pow(o.s_min / o.s_max, t) : o.s_max + (o.s_min - o.s_max) * t);
    }
    return g;
}

Json table(const std::vector<double>& s, const std::vector<double>& v) {
    Json t = Json::array();
    for (size_t k = 0; k < s.size(); ++k) t.push_back(Json::array({number(s[k]), number(v[k])}));
    return t;
}

std::vector<std::pair<double, double>> finite_samples(const std::vector<double>& s, const std::vector<double>& v) {
    std::vector<std::pair<double, double>> out;
    for (size_t k = 0; k < s.size(); ++k)
        if (std::isfinite(v[k])) out.push_back({s[k], v[k]});
    return out;
}

Json oracle_tolerance(const ModelOptions& o) {
    return {{"abs_tol", number(o.integrator.abs_tol)},
            {"rel_tol", number(o.integrator.rel_tol)},
            {"max_time", number(o.integrator.max_time)}};
}

Json cmd_oracle(const Model& m, const Binding& b, const std::string& what, int corner, bool serial, int count,
                bool explicit_range) {
    const ModelOptions& o = m.options;
    Json doc;
    doc["provenance"] = provenance("oracle " + what, &m, &b);
    doc["s_range"] = Json::array({number(o.s_min), number(o.s_max)});
    doc["tolerance"] = oracle_tolerance(o);
    const auto grid_eval = serial ? evaluate_grid_serial : evaluate_grid_parallel;
    std::vector<std::string> errors;

    if (what == "dulac") {
        const auto charts = m.charts(b);
        if (corner < 1 || corner > static_cast<int>(charts.size()))
            throw UsageError("corner must be in 1.." + std::to_string(charts.size()));
        const LocalChart& c = charts[static_cast<size_t>(corner - 1)];
        const SectionPair sec = m.sections(corner);
        // The fit wants three decades; the default s range is narrower.
        const std::vector<double> s = explicit_range ? s_grid(o, true, count) : geometric_grid(o.fit_s0, o.fit_count);
        const auto D = grid_eval([&](double x) { return numeric_dulac(c, sec, x, o.integrator); }, s, &errors);
        const auto samples = finite_samples(s, D);
        if (samples.empty()) throw NumericError("every sample failed: " + errors.front());
        const FitReport fit = fit_expansion(samples, c.lambda);
        const DulacExpansion an = dulac_coefficients(c, sec, o.dulac);
        doc["corner"] = corner;
        doc["chart"] = to_json(c);
        doc["fit"] = to_json(fit);
        doc["analytic"] = to_json(an);
        doc["d00_relative_deviation"] = number(std::abs(fit.leading - an.d00) / std::abs(an.d00));
        doc["table"] = table(s, D);
    } else if (what == "return" || what == "cycles") {
        ScalarMap R;
        std::optional<Evaluation> ev;
        if (m.has_polycycle()) {
            const PolycycleGeometry g = m.geometry(b);
            R = [g, &o](double x) { return numeric_return(g, x, o.integrator); };
            ev = evaluate(m, b);
        } else if (o.return_segment) {
            const PolynomialField f = m.field(b);
            const auto [a, e] = *o.return_segment;
            R = [f, a = a, e = e, &o](double x) { return segment_return(f, a, e, x, o.integrator); };
        } else {
            throw ModelError("model has neither a polycycle nor a return_segment option");
        }
        const bool geometric = m.has_polycycle();
        if (what == "return") {
            const std::vector<double> s = s_grid(o, geometric, count);
            const auto v = grid_eval(R, s, &errors);
            const auto samples = finite_samples(s, v);
            if (samples.empty()) throw NumericError("every sample failed: " + errors.front());
            doc["table"] = table(s, v);
            if (ev) {
                std::vector<double> pred;
                for (double x : s) pred.push_back(ev->ret.predict(x));
                doc["expansion"] = to_json(ev->ret);
                doc["prediction_table"] = table(s, pred);
                doc["fit"] = to_json(fit_expansion(samples, ev->ret.r));
            }
        } else {
            CycleScanOptions co;
            co.grid = o.cycles_grid;
            co.geometric = geometric;
            co.rel_tol = o.bisection_tol;
            co.parallel = !serial;
            const CycleScan scan = count_limit_cycles(R, o.s_min, o.s_max, co);
            if (scan.coverage == 0.0) throw NumericError("every sample failed");
            doc["cycles"] = to_json(scan);
            doc["bisection_tol"] = number(o.bisection_tol);
        }
    } else {
        throw UsageError("oracle expects dulac <corner>, return or cycles");
    }
    Json errs = Json::array();
    for (const auto& e : errors)
        if (!e.empty()) errs.push_back(e);
    doc["failures"] = errs;
    return doc;
}

int exit_code(const Error& e) {
    switch (e.category()) {
        case Error::Category::usage: return kExitUsage;
        case Error::Category::model: return kExitModel;
        case Error::Category::numeric: return kExitNumeric;
    }
    return kExitNumeric;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Cyclicity analysis of hyperbolic polycycles", "polycycle"};
    app.require_subcommand(1);

    Common ca, co, cc, cs;
    bool no_flow = false;
    auto* analyze_cmd = app.add_subcommand("analyze", "expansions and cyclicity verdict");
    add_common(analyze_cmd, ca, true);
    analyze_cmd->add_flag("--no-flow", no_flow, "skip the numerical not-identity probe");

    std::string what;
    int corner = 1, count = 13;
    bool oracle_serial = false;
    std::optional<double> s_min, s_max;
    auto* oracle_cmd = app.add_subcommand("oracle", "numerical maps, fits and limit-cycle counts");
    add_common(oracle_cmd, co, true);
    oracle_cmd->add_option("what", what, "dulac, return or cycles")->required();
    oracle_cmd->add_option("corner", corner, "corner index for dulac");
    oracle_cmd->add_option("--s-min", s_min, "lower end of the s range");
    oracle_cmd->add_option("--s-max", s_max, "upper end of the s range");
    oracle_cmd->add_option("--count", count, "samples for dulac/return")->check(CLI::Range(1, 100000));
    oracle_cmd->add_flag("--serial", oracle_serial, "serial reference kernels");

    std::uint64_t seed = 42;
    int check_count = 100;
    bool check_serial = false;
    auto* check_cmd = app.add_subcommand("compose-check", "composition lemmas against the multiprecision oracle");
    add_common(check_cmd, cc, false);
    check_cmd->add_option("--seed", seed, "random seed");
    check_cmd->add_option("--count", check_count, "cases per lemma case");
    check_cmd->add_flag("--serial", check_serial, "serial reference kernel");

    std::vector<std::string> grid;
    bool scan_serial_flag = false;
    auto* scan_cmd = app.add_subcommand("scan", "condition values over a parameter grid (CSV)");
    add_common(scan_cmd, cs, true);
    scan_cmd->add_option("--grid", grid, "axis NAME=LO:HI:COUNT or NAME=VALUE (repeatable)")->required();
    scan_cmd->add_flag("--serial", scan_serial_flag, "serial reference kernel");

    std::vector<std::string> argv{"polycycle"};
    argv.insert(argv.end(), args.begin(), args.end());
    std::vector<const char*> cargv;
    for (const auto& a : argv) cargv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(cargv.size()), cargv.data());
    } catch (const CLI::Success& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kExitUsage;
    }

    try {
        if (analyze_cmd->parsed()) {
            const Model m = load(ca);
            const Binding b = m.bind(parse_overrides(ca.set));
            AnalysisOptions opt;
            opt.flow_probe = !no_flow;
            const Analysis a = analyze(m, b, opt);
            emit(ca, analysis_document(m, a).dump(2) + "\n", out);
        } else if (oracle_cmd->parsed()) {
            Model m = load(co);
            if (s_min) m.options.s_min = *s_min;
            if (s_max) m.options.s_max = *s_max;
            if (!(m.options.s_min > 0.0) || !(m.options.s_min < m.options.s_max))
                throw UsageError("empty s range [" + std::to_string(m.options.s_min) + ", " +
                                 std::to_string(m.options.s_max) + "]");
            const Binding b = m.bind(parse_overrides(co.set));
            emit(co, cmd_oracle(m, b, what, corner, oracle_serial, count, s_min || s_max).dump(2) + "\n", out);
        } else if (check_cmd->parsed()) {
            ComposeCheckOptions opt;
            opt.parallel = !check_serial;
            Json doc;
            doc["provenance"] = provenance("compose-check", nullptr, nullptr);
            doc["tolerance"] = {{"leading", number(opt.leading_tol)},
                                {"second", number(opt.second_tol)},
                                {"resonance_band", number(opt.resonance_band)}};
            doc["report"] = to_json(compose_check(seed, check_count, opt));
            emit(cc, doc.dump(2) + "\n", out);
        } else if (scan_cmd->parsed()) {
            const Model m = load(cs);
            const Binding b = m.bind(parse_overrides(cs.set));
            std::vector<GridAxis> axes;
            for (const auto& g : grid) axes.push_back(parse_grid_axis(g));
            const ScanTable t = scan_serial_flag ? scan_serial(m, b, axes) : scan_parallel(m, b, axes);
            emit(cs, to_csv(t), out);
        }
    } catch (const Error& e) {
        err << "polycycle: " << e.what() << "\n";
        return exit_code(e);
    } catch (const std::exception& e) {
        err << "polycycle: internal error: " << e.what() << "\n";
        return kExitNumeric;
    }
    return kExitOk;
}

}  // namespace polycycle
