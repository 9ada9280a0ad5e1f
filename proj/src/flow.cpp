#include "polycycle/flow.hpp"

#include <Eigen/Dense>
#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>
#include <boost/numeric/odeint.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "polycycle/errors.hpp"

namespace polycycle {

namespace {

using State = std::array<double, 2>;
using Rhs = std::function<void(const State&, State&)>;

struct Event {
    std::function<double(const State&)> g;
    int direction = 0;
    std::function<bool(const State&)> accept;  // crossing counted only if this holds (when set)
};

struct Run {
    std::vector<double> t;
    std::vector<State> x;
    int event = -1;
    double te = 0.0;
    State xe{};
};

bool crosses(double a, double b, int direction) {
    const bool up = a < 0.0 && b >= 0.0;
    const bool down = a > 0.0 && b <= 0.0;
    return direction > 0 ? up : direction < 0 ? down : (up || down);
}

/// Dormand-Prince 5(4) with dense output; events are located on the interpolant.
Run run(const Rhs& rhs, const State& x0, const std::vector<Event>& events, const IntegratorOptions& opt,
        const std::function<bool(const State&)>& inside, bool record, bool start_events = true) {
    namespace ode = boost::numeric::odeint;
    Run out;
    if (record) {
        out.t.push_back(0.0);
        out.x.push_back(x0);
    }
    for (size_t i = 0; start_events && i < events.size(); ++i) {
        if (std::abs(events[i].g(x0)) <= 1e-14 && (!events[i].accept || events[i].accept(x0))) {
            out.event = static_cast<int>(i);
            out.xe = x0;
            return out;
        }
    }
    auto stepper = ode::make_dense_output(opt.abs_tol, opt.rel_tol, ode::runge_kutta_dopri5<State>());
    const auto sys = [&](const State& x, State& dx, double) { rhs(x, dx); };
    stepper.initialize(x0, 0.0, 1e-3);
    std::vector<double> gprev(events.size());
    for (size_t i = 0; i < events.size(); ++i) gprev[i] = events[i].g(x0);

    while (true) {
        std::pair<double, double> span;
        try {
            span = stepper.do_step(sys);
        } catch (const ode::step_adjustment_error& e) {
            const State& x = stepper.current_state();
            throw IntegrationError(std::string("step adjustment failed: ") + e.what(), stepper.current_time(), x[0],
                                   x[1]);
        }
        const State x1 = stepper.current_state();
        if (!std::isfinite(x1[0]) || !std::isfinite(x1[1]))
            throw IntegrationError("state became non-finite", span.second, x1[0], x1[1]);
        if (record) {
            out.t.push_back(span.second);
            out.x.push_back(x1);
        }

        int hit = -1;
        double t_hit = span.second;
        State x_hit = x1;
        for (size_t i = 0; i < events.size(); ++i) {
            const double g1 = events[i].g(x1);
            if (crosses(gprev[i], g1, events[i].direction)) {
                const auto phi = [&](double t) {
                    State x;
                    stepper.calc_state(t, x);
                    return events[i].g(x);
                };
                double te = span.second;
                if (g1 != 0.0) {
                    boost::uintmax_t iters = 200;
                    const auto r = boost::math::tools::toms748_solve(
                        phi, span.first, span.second, gprev[i], g1,
                        boost::math::tools::eps_tolerance<double>(std::numeric_limits<double>::digits - 2), iters);
                    // Take the endpoint with the smaller residual.
                    te = std::abs(phi(r.first)) <= std::abs(phi(r.second)) ? r.first : r.second;
                }
                State xe;
                stepper.calc_state(te, xe);
                if (events[i].accept && !events[i].accept(xe)) continue;
                if (hit < 0 || te < t_hit) {
                    hit = static_cast<int>(i);
                    t_hit = te;
                    x_hit = xe;
                }
            }
        }
        if (hit >= 0) {
            out.event = hit;
            out.te = t_hit;
            out.xe = x_hit;
            if (record) {
                out.t.back() = t_hit;
                out.x.back() = x_hit;
            }
            return out;
        }
        for (size_t i = 0; i < events.size(); ++i) gprev[i] = events[i].g(x1);

        if (inside && !inside(x1)) {
            std::ostringstream os;
            os << "orbit left the region of validity at t = " << span.second;
            throw OutOfBasinError(os.str());
        }
        if (span.second > opt.max_time)
            throw MaxTimeError("no section crossing before the time limit", span.second, x1[0], x1[1]);
        if (stepper.current_time_step() < opt.min_step)
            throw IntegrationError("step size underflow", span.second, x1[0], x1[1]);
    }
}

/// Dense coefficient table with nested Horner evaluation.
class CompiledPoly {
public:
    explicit CompiledPoly(const BivariatePolynomial& p) {
        for (const auto& [e, c] : p.terms()) {
            nx_ = std::max(nx_, e.first);
            ny_ = std::max(ny_, e.second);
        }
        c_.assign(static_cast<size_t>((nx_ + 1) * (ny_ + 1)), 0.0);
        for (const auto& [e, c] : p.terms()) c_[static_cast<size_t>(e.first * (ny_ + 1) + e.second)] = c;
    }

    double operator()(double x, double y) const {
        double acc = 0.0;
        for (int i = nx_; i >= 0; --i) {
            double row = 0.0;
            for (int j = ny_; j >= 0; --j) row = row * y + c_[static_cast<size_t>(i * (ny_ + 1) + j)];
            acc = acc * x + row;
        }
        return acc;
    }

private:
    int nx_ = 0, ny_ = 0;
    std::vector<double> c_;
};

std::vector<double> derivative(const std::vector<double>& c) {
    std::vector<double> d;
    for (size_t i = 1; i < c.size(); ++i) d.push_back(static_cast<double>(i) * c[i]);
    return d;
}

/// Solves poly(t) = value for t near value / poly'(0) by Newton's method.
double solve_component(const std::vector<double>& poly, double value) {
    const std::vector<double> d = derivative(poly);
    const double slope0 = eval_poly(d, 0.0);
    const double c0 = poly.empty() ? 0.0 : poly[0];
    if (poly.size() == 2) return (value - c0) / poly[1];
    double t = (value - c0) / slope0;
    for (int k = 0; k < 60; ++k) {
        const double step = (eval_poly(poly, t) - value) / eval_poly(d, t);
        t -= step;
        if (std::abs(step) <= 1e-16 * std::abs(t)) break;
    }
    return t;
}

struct LogChartFlow {
    CompiledPoly P, Q;
    double sign;

    LogChartFlow(const LocalChart& c, double time_sign) : P(c.P), Q(c.Q), sign(time_sign) {}

    void operator()(const State& w, State& dw) const {
        const double X = std::exp(w[0]), Y = std::exp(w[1]);
        dw[0] = sign * P(X, Y);
        dw[1] = sign * Q(X, Y);
    }
};

double section_limit(const SectionPair& sec) {
    return 4.0 * std::max({sec.jet(1, 2, 0), sec.jet(2, 1, 0), 1e-300});
}

/// Local point (X, Y) -> parameter on sigma_1, integrating to it if not already there.
double enter_section(const LocalChart& chart, const SectionPair& sec, Point q, const IntegratorOptions& opt) {
    if (!(q.x > 0.0) || !(q.y > 0.0)) throw OutOfBasinError("orbit left the polycycle sector");
    const double s = solve_component(sec.s11, q.x);
    const double gap = q.y - eval_poly(sec.s12, s);
    if (std::abs(gap) <= 1e-13 * std::max(1.0, std::abs(q.y))) return s;

    // Near sigma_1 the orbit moves toward the stable axis: Y decreases in forward time.
    const LogChartFlow flow(chart, gap > 0.0 ? 1.0 : -1.0);
    const Event ev{[&](const State& w) {
                       const double X = std::exp(w[0]);
                       return std::exp(w[1]) - eval_poly(sec.s12, solve_component(sec.s11, X));
                   },
                   0, nullptr};
    const double lim = section_limit(sec);
    const Run r = run([&](const State& w, State& dw) { flow(w, dw); }, {std::log(q.x), std::log(q.y)}, {ev}, opt,
                      [&](const State& w) { return std::exp(w[0]) <= lim && std::exp(w[1]) <= lim; }, false);
    return solve_component(sec.s11, std::exp(r.xe[0]));
}

}  // namespace

Trajectory integrate(const PolynomialField& field, Point start, const std::vector<SectionEvent>& events,
                     const IntegratorOptions& opt) {
    const CompiledPoly fx(field.fx), fy(field.fy);
    std::vector<Event> evs;
    for (const auto& e : events)
        evs.push_back({[c = e.condition](const State& x) { return c({x[0], x[1]}); }, e.direction, nullptr});
    const Run r = run([&](const State& x, State& dx) {
                          dx[0] = fx(x[0], x[1]);
                          dx[1] = fy(x[0], x[1]);
                      },
                      {start.x, start.y}, evs, opt, nullptr, true);
    Trajectory t;
    t.times = r.t;
    for (const auto& x : r.x) t.states.push_back({x[0], x[1]});
    if (r.event >= 0) t.events.push_back({r.event, r.te, {r.xe[0], r.xe[1]}});
    return t;
}

double numeric_dulac(const LocalChart& chart, const SectionPair& sections, double s, const IntegratorOptions& opt) {
    const Point p = sections.sigma1(s);
    if (!(p.x > 0.0) || !(p.y > 0.0)) throw UsageError("sigma_1(s) must lie in the open quadrant");
    const LogChartFlow flow(chart, 1.0);

    Event exit;
    const bool straight = sections.s21.size() == 1;
    if (straight) {
        const double lh = std::log(sections.s21[0]);
        exit = {[lh](const State& w) { return w[0] - lh; }, 1, nullptr};
    } else {
        exit = {[&sections](const State& w) {
                    const double t = solve_component(sections.s22, std::exp(w[1]));
                    return std::exp(w[0]) - eval_poly(sections.s21, t);
                },
                1, nullptr};
    }
    const double lim = section_limit(sections);
    const Run r = run([&](const State& w, State& dw) { flow(w, dw); }, {std::log(p.x), std::log(p.y)}, {exit}, opt,
                      [&](const State& w) { return std::exp(w[0]) <= lim && std::exp(w[1]) <= lim; }, false);
    return solve_component(sections.s22, std::exp(r.xe[1]));
}

Point chart_transfer(const LocalChart& from, const LocalChart& to, double X, double Y) {
    const auto dot = [](Point a, Point b) { return a.x * b.x + a.y * b.y; };
    const Point d{from.origin.x - to.origin.x, from.origin.y - to.origin.y};
    const double ox = dot(d, to.e_out), oy = dot(d, to.e_in);
    return {ox + X * dot(to.e_out, from.e_out) + Y * dot(to.e_out, from.e_in),
            oy + X * dot(to.e_in, from.e_out) + Y * dot(to.e_in, from.e_in)};
}

double numeric_return(const PolycycleGeometry& g, double s, const IntegratorOptions& opt) {
    const size_t n = g.charts.size();
    if (n == 0 || g.sections.size() != n) throw UsageError("polycycle geometry needs one section pair per corner");
    double cur = s;
    for (size_t i = 0; i < n; ++i) {
        const double t = numeric_dulac(g.charts[i], g.sections[i], cur, opt);
        const Point p = g.sections[i].sigma2(t);
        const size_t j = (i + 1) % n;
        const Point q = chart_transfer(g.charts[i], g.charts[j], p.x, p.y);
        cur = enter_section(g.charts[j], g.sections[j], q, opt);
    }
    return cur;
}

double segment_return(const PolynomialField& field, Point a, Point b, double s, const IntegratorOptions& opt) {
    const double len = std::hypot(b.x - a.x, b.y - a.y);
    if (!(len > 0.0)) throw UsageError("return segment has zero length");
    if (!(s > 0.0) || !(s < len)) throw UsageError("segment parameter outside (0, length)");
    const Point dir{(b.x - a.x) / len, (b.y - a.y) / len};
    const Point nrm{-dir.y, dir.x};
    const Point p0{a.x + s * dir.x, a.y + s * dir.y};
    const double flux = nrm.x * field.fx(p0.x, p0.y) + nrm.y * field.fy(p0.x, p0.y);
    if (flux == 0.0) throw OutOfBasinError("field is tangent to the return segment");
    const double side = flux > 0.0 ? 1.0 : -1.0;

    const CompiledPoly fx(field.fx), fy(field.fy);
    const auto along = [&](const State& x) { return (x[0] - a.x) * dir.x + (x[1] - a.y) * dir.y; };
    const Event ev{[&](const State& x) { return side * ((x[0] - a.x) * nrm.x + (x[1] - a.y) * nrm.y); }, 1,
                   [&](const State& x) {
                       const double u = along(x);
                       return u > 0.0 && u < len;
                   }};
    // The start point lies on the segment; only the next crossing counts.
    const Run r = run([&](const State& x, State& dx) {
                          dx[0] = fx(x[0], x[1]);
                          dx[1] = fy(x[0], x[1]);
                      },
                      {p0.x, p0.y}, {ev}, opt, nullptr, false, false);
    return along(r.xe);
}

std::vector<double> geometric_grid(double s0, int count) {
    std::vector<double> g;
    for (int k = 0; k < count; ++k) g.push_back(std::ldexp(s0, -k));
    return g;
}

namespace {

struct Basis {
    std::vector<std::pair<int, int>> pairs;  // exponent i + j * lambda

    double exponent(size_t k, double lambda) const { return pairs[k].first + pairs[k].second * lambda; }
};

Basis choose_basis(double lambda, size_t count) {
    std::vector<std::pair<int, int>> all;
    for (int i = 0; i <= 3; ++i)
        for (int j = 0; j <= 8; ++j)
            if (i + j * lambda <= 3.0) all.push_back({i, j});
    std::sort(all.begin(), all.end(), [&](auto a, auto b) {
        return a.first + a.second * lambda < b.first + b.second * lambda;
    });
    Basis b;
    double last = -1.0;
    for (auto p : all) {
        const double e = p.first + p.second * lambda;
        if (e - last < 0.02) continue;  // near-coincident exponents are not separable on the grid
        b.pairs.push_back(p);
        last = e;
        if (b.pairs.size() == count) break;
    }
    return b;
}

struct LinearFit {
    Eigen::VectorXd c;
    double rss = 0.0;
};

/// Least squares of D/s^lambda on the basis, relative residuals.
LinearFit linear_fit(const std::vector<double>& s, const std::vector<double>& D, const Basis& b, double lambda) {
    const Eigen::Index n = static_cast<Eigen::Index>(s.size()), m = static_cast<Eigen::Index>(b.pairs.size());
    Eigen::MatrixXd A(n, m);
    Eigen::VectorXd y(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        const double sk = s[static_cast<size_t>(k)];
        const double yk = D[static_cast<size_t>(k)] / std::pow(sk, lambda);
        y(k) = 1.0;
        for (Eigen::Index q = 0; q < m; ++q) A(k, q) = std::pow(sk, b.exponent(static_cast<size_t>(q), lambda)) / yk;
    }
    Eigen::VectorXd scale = A.colwise().norm().transpose();
    for (Eigen::Index q = 0; q < m; ++q) A.col(q) /= scale(q);
    LinearFit f;
    f.c = A.colPivHouseholderQr().solve(y);
    f.rss = (A * f.c - y).squaredNorm();
    f.c = f.c.cwiseQuotient(scale);
    return f;
}

}  // namespace

FitReport fit_expansion(const std::vector<std::pair<double, double>>& samples, double exponent_guess) {
    if (samples.size() < 3) throw UsageError("fit needs at least three samples");
    if (!(exponent_guess > 0.0)) throw UsageError("fit needs a positive exponent guess");
    std::vector<std::pair<double, double>> sorted = samples;
    std::sort(sorted.begin(), sorted.end());
    FitReport rep;
    std::vector<double> s, D;
    for (const auto& [a, b] : sorted) {
        if (!(a > 0.0) || !(b > 0.0)) throw UsageError("fit needs positive s and positive values");
        s.push_back(a);
        D.push_back(b);
    }
    rep.s_grid = s;
    bool monotone = true;
    for (size_t k = 1; k < D.size(); ++k) monotone = monotone && D[k] > D[k - 1];
    const double decades = std::log10(s.back() / s.front());

    const size_t nb = std::min<size_t>(6, s.size() > 4 ? s.size() - 3 : 1);
    const Basis basis = choose_basis(exponent_guess, nb);
    const auto rss = [&](double lam) { return linear_fit(s, D, basis, lam).rss; };
    const double w = 0.05 * exponent_guess;
    double lam = boost::math::tools::brent_find_minima(rss, exponent_guess - w, exponent_guess + w,
                                                       std::numeric_limits<double>::digits / 2)
                     .first;

    // Gauss-Newton on (lambda, c) for the last digits Brent cannot resolve.
    LinearFit fit = linear_fit(s, D, basis, lam);
    const Eigen::Index n = static_cast<Eigen::Index>(s.size()), m = static_cast<Eigen::Index>(basis.pairs.size());
    for (int it = 0; it < 20; ++it) {
        Eigen::MatrixXd J(n, m + 1);
        Eigen::VectorXd r(n);
        for (Eigen::Index k = 0; k < n; ++k) {
            const double sk = s[static_cast<size_t>(k)], ls = std::log(sk);
            double model = 0.0, dmodel = 0.0;
            for (Eigen::Index q = 0; q < m; ++q) {
                const auto [i, j] = basis.pairs[static_cast<size_t>(q)];
                const double term = std::pow(sk, lam + i + j * lam);
                J(k, q) = term / D[static_cast<size_t>(k)];
                model += fit.c(q) * term;
                dmodel += fit.c(q) * term * (1 + j) * ls;
            }
            J(k, m) = dmodel / D[static_cast<size_t>(k)];
            r(k) = model / D[static_cast<size_t>(k)] - 1.0;
        }
        Eigen::VectorXd scale = J.colwise().norm().transpose();
        for (Eigen::Index q = 0; q <= m; ++q)
            if (scale(q) > 0) J.col(q) /= scale(q);
        Eigen::VectorXd step = J.colPivHouseholderQr().solve(-r);
        for (Eigen::Index q = 0; q <= m; ++q)
            if (scale(q) > 0) step(q) /= scale(q);
        fit.c += step.head(m);
        lam += step(m);
        if (std::abs(step(m)) <= 1e-15 * lam) break;
    }
    fit = linear_fit(s, D, basis, lam);
    rep.exponent = lam;
    rep.rms = std::sqrt(fit.rss / static_cast<double>(n));

    size_t lead_idx = 0, second_idx = basis.pairs.size();
    const CaseTag tag = classify_ratio(lam, 0.02);
    const std::pair<int, int> want = tag == CaseTag::below_one ? std::pair{0, 1} : std::pair{1, 0};
    for (size_t q = 0; q < basis.pairs.size(); ++q)
        if (basis.pairs[q] == want) second_idx = q;
    rep.leading = fit.c(static_cast<Eigen::Index>(lead_idx));
    if (tag == CaseTag::at_one) {
        rep.note = "ratio near one: second term is compensated and not fitted as a monomial";
    } else if (second_idx < basis.pairs.size()) {
        rep.second = fit.c(static_cast<Eigen::Index>(second_idx));
        rep.second_exponent = basis.exponent(second_idx, lam);
    }

    // Remainder after the two-term model, relative to s^lambda.
    std::vector<double> xs, ys;
    const double noise = 100.0 * (rep.rms + 1e-15) * std::abs(rep.leading);
    for (size_t k = 0; k < s.size(); ++k) {
        double r = D[k] / std::pow(s[k], lam) - rep.leading;
        if (rep.second) r -= *rep.second * std::pow(s[k], rep.second_exponent);
        if (std::abs(r) > noise) {
            xs.push_back(std::log(s[k]));
            ys.push_back(std::log(std::abs(r)));
        }
    }
    if (xs.size() >= 3) {
        const double N = static_cast<double>(xs.size());
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (size_t k = 0; k < xs.size(); ++k) {
            sx += xs[k];
            sy += ys[k];
            sxx += xs[k] * xs[k];
            sxy += xs[k] * ys[k];
        }
        rep.residual_slope = (N * sxy - sx * sy) / (N * sxx - sx * sx);
    } else {
        rep.residual_slope = std::numeric_limits<double>::infinity();
        if (!rep.note.empty()) rep.note += "; ";
        rep.note += "remainder below resolution";
    }
    rep.confident = s.size() >= 8 && decades >= 3.0 - 1e-9 && monotone && rep.rms < 1e-6;
    if (!monotone) rep.note += rep.note.empty() ? "non-monotone samples" : "; non-monotone samples";
    return rep;
}

std::vector<double> evaluate_grid_serial(const ScalarMap& f, const std::vector<double>& grid,
                                         std::vector<std::string>* errors) {
    std::vector<double> out(grid.size(), std::numeric_limits<double>::quiet_NaN());
    std::vector<std::string> err(grid.size());
    for (size_t k = 0; k < grid.size(); ++k) {
        try {
            out[k] = f(grid[k]);
        } catch (const std::exception& e) {
            err[k] = e.what();
        }
    }
    if (errors) *errors = std::move(err);
    return out;
}

std::vector<double> evaluate_grid_parallel(const ScalarMap& f, const std::vector<double>& grid,
                                           std::vector<std::string>* errors) {
    std::vector<double> out(grid.size(), std::numeric_limits<double>::quiet_NaN());
    std::vector<std::string> err(grid.size());
    const long n = static_cast<long>(grid.size());
#pragma omp parallel for schedule(dynamic)
    for (long k = 0; k < n; ++k) {
        const size_t i = static_cast<size_t>(k);
        try {
            out[i] = f(grid[i]);
        } catch (const std::exception& e) {
            err[i] = e.what();
        }
    }
    if (errors) *errors = std::move(err);
    return out;
}

const char* to_string(Stability s) {
    switch (s) {
        case Stability::attracting: return "attracting";
        case Stability::repelling: return "repelling";
        case Stability::semistable: return "semistable";
    }
    return "?";
}

CycleScan count_limit_cycles(const ScalarMap& R, double lo, double hi, const CycleScanOptions& opt) {
    if (!(lo > 0.0) || !(hi > lo)) throw UsageError("cycle scan needs 0 < lo < hi");
    if (opt.grid < 2) throw UsageError("cycle scan needs at least two grid points");
    CycleScan scan;
    const bool geo = opt.geometric && hi / lo >= 10.0;
    for (int k = 0; k < opt.grid; ++k) {
        const double u = static_cast<double>(k) / (opt.grid - 1);
        scan.s.push_back(geo ? lo * std::pow(hi / lo, u) : lo + (hi - lo) * u);
    }
    const ScalarMap d = [&](double s) { return R(s) - s; };
    std::vector<std::string> errs;
    scan.displacement = opt.parallel ? evaluate_grid_parallel(d, scan.s, &errs) : evaluate_grid_serial(d, scan.s, &errs);
    size_t ok = 0;
    for (size_t k = 0; k < errs.size(); ++k) {
        if (errs[k].empty()) {
            ++ok;
        } else {
            std::ostringstream os;
            os << "s = " << scan.s[k] << ": " << errs[k];
            scan.failures.push_back(os.str());
        }
    }
    scan.coverage = static_cast<double>(ok) / static_cast<double>(scan.s.size());

    struct Bracket {
        double a, b, da, db;
    };
    std::vector<Bracket> brackets;
    size_t prev = scan.s.size();
    for (size_t k = 0; k < scan.s.size(); ++k) {
        if (!std::isfinite(scan.displacement[k])) continue;
        if (prev < scan.s.size()) {
            const double da = scan.displacement[prev], db = scan.displacement[k];
            if ((da < 0.0 && db > 0.0) || (da > 0.0 && db < 0.0) || (db == 0.0 && da != 0.0))
                brackets.push_back({scan.s[prev], scan.s[k], da, db});
        }
        prev = k;
    }

    std::vector<std::optional<FixedPoint>> found(brackets.size());
    std::vector<std::string> bfail(brackets.size());
    const auto refine = [&](size_t i) {
        Bracket br = brackets[i];
        try {
            if (br.db != 0.0) {
                while (br.b - br.a > opt.rel_tol * br.b) {
                    const double mid = 0.5 * (br.a + br.b);
                    const double dm = d(mid);
                    if (dm == 0.0) {
                        br.a = br.b = mid;
                        break;
                    }
                    if ((dm < 0.0) == (br.da < 0.0)) {
                        br.a = mid;
                        br.da = dm;
                    } else {
                        br.b = mid;
                        br.db = dm;
                    }
                }
            }
            const double left = brackets[i].da, right = brackets[i].db;
            Stability st = Stability::semistable;
            if (left > 0.0 && right <= 0.0) st = Stability::attracting;
            if (left < 0.0 && right >= 0.0) st = Stability::repelling;
            found[i] = FixedPoint{0.5 * (br.a + br.b), st};
        } catch (const std::exception& e) {
            bfail[i] = e.what();
        }
    };
    const long nb = static_cast<long>(brackets.size());
    if (opt.parallel) {
#pragma omp parallel for schedule(dynamic)
        for (long i = 0; i < nb; ++i) refine(static_cast<size_t>(i));
    } else {
        for (long i = 0; i < nb; ++i) refine(static_cast<size_t>(i));
    }
    for (size_t i = 0; i < brackets.size(); ++i) {
        if (found[i]) scan.fixed_points.push_back(*found[i]);
        if (!bfail[i].empty()) scan.failures.push_back("refinement near s = " + std::to_string(brackets[i].a) + ": " + bfail[i]);
    }
    return scan;
}

}  // namespace polycycle
