#include "polycycle/model.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <boost/uuid/detail/sha1.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "polycycle/errors.hpp"

namespace polycycle {

namespace {

namespace pt = boost::property_tree;

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::optional<double> plain_number(const std::string& text) {
    const std::string t = trim(text);
    double v = 0.0;
    const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || p != t.data() + t.size() || t.empty()) return std::nullopt;
    return v;
}

double number_or_usage(const std::string& name, const std::string& text) {
    const auto v = plain_number(text);
    if (!v || !std::isfinite(*v)) throw UsageError("option " + name + ": not a number: '" + text + "'");
    return *v;
}

/// Numbers or constant expressions over the declared parameters.
double constant_value(const std::string& text, const std::vector<std::string>& names, const Binding& b) {
    if (const auto v = plain_number(text)) return *v;
    return evaluate_constant(parse_expression(text, names), b);
}

/// "(a, b), (c, d), ..." split into coordinate texts.
std::vector<std::pair<std::string, std::string>> point_list(const std::string& text) {
    std::vector<std::pair<std::string, std::string>> out;
    size_t i = 0;
    const std::string s = trim(text);
    while (i < s.size()) {
        if (s[i] == ' ' || s[i] == ',' || s[i] == '\t') {
            ++i;
            continue;
        }
        if (s[i] != '(') throw ModelError("point list: expected '(' at offset " + std::to_string(i));
        int depth = 0;
        size_t comma = std::string::npos, j = i;
        for (; j < s.size(); ++j) {
            if (s[j] == '(') ++depth;
            if (s[j] == ')' && --depth == 0) break;
            if (s[j] == ',' && depth == 1) {
                if (comma != std::string::npos) throw ModelError("point list: more than two coordinates");
                comma = j;
            }
        }
        if (j == s.size()) throw ModelError("point list: unbalanced parentheses");
        if (comma == std::string::npos) throw ModelError("point list: expected (x, y)");
        out.push_back({trim(s.substr(i + 1, comma - i - 1)), trim(s.substr(comma + 1, j - comma - 1))});
        i = j + 1;
    }
    return out;
}

std::string sha1_hex(const std::string& text) {
    boost::uuids::detail::sha1 h;
    h.process_bytes(text.data(), text.size());
    boost::uuids::detail::sha1::digest_type d;
    h.get_digest(d);
    std::ostringstream os;
    for (unsigned v : d) os << std::hex << std::setw(8) << std::setfill('0') << v;
    return os.str();
}

template <class F>
auto in_section(const std::string& where, F&& f) {
    try {
        return f();
    } catch (const ParseError& e) {
        throw ModelError(where + ": " + e.what());
    } catch (const UsageError& e) {
        throw ModelError(where + ": " + e.what());
    }
}

}  // namespace

void ModelOptions::set(const std::string& name, const std::string& value) {
    const auto num = [&] { return number_or_usage(name, value); };
    const auto positive = [&] {
        const double v = num();
        if (!(v > 0.0)) throw UsageError("option " + name + " must be positive");
        return v;
    };
    const auto count = [&] {
        const double v = num();
        if (v < 1.0 || v != std::floor(v) || v > 1e6) throw UsageError("option " + name + " must be a positive integer");
        return static_cast<int>(v);
    };
    if (name == "abs_tol") integrator.abs_tol = positive();
    else if (name == "rel_tol") integrator.rel_tol = positive();
    else if (name == "max_time") integrator.max_time = positive();
    else if (name == "min_step") integrator.min_step = positive();
    else if (name == "quad_abs_tol") dulac.quadrature.abs_tol = positive();
    else if (name == "quad_rel_tol") dulac.quadrature.rel_tol = positive();
    else if (name == "series_order") dulac.series_order = count();
    else if (name == "zero_tol") zero_tol = positive();
    else if (name == "gradient_step") gradient_step = positive();
    else if (name == "resonance_band") resonance_band = positive();
    else if (name == "fit_s0") fit_s0 = positive();
    else if (name == "fit_count") fit_count = count();
    else if (name == "bisection_tol") bisection_tol = positive();
    else if (name == "cycles_grid") cycles_grid = count();
    else if (name == "s_min") s_min = positive();
    else if (name == "s_max") s_max = positive();
    else if (name == "return_segment") {
        const auto pts = point_list(value);
        if (pts.size() != 2) throw UsageError("return_segment needs two points");
        const auto p = [&](const std::pair<std::string, std::string>& c) {
            return Point{number_or_usage(name, c.first), number_or_usage(name, c.second)};
        };
        return_segment = {p(pts[0]), p(pts[1])};
    } else {
        throw UsageError("unknown option '" + name + "'");
    }
}

void ModelOptions::validate() const {
    if (!(s_min < s_max)) throw UsageError("s_min must be below s_max");
}

std::map<std::string, double> ModelOptions::values() const {
    return {{"abs_tol", integrator.abs_tol},
            {"rel_tol", integrator.rel_tol},
            {"max_time", integrator.max_time},
            {"min_step", integrator.min_step},
            {"quad_abs_tol", dulac.quadrature.abs_tol},
            {"quad_rel_tol", dulac.quadrature.rel_tol},
            {"series_order", dulac.series_order},
            {"zero_tol", zero_tol},
            {"gradient_step", gradient_step},
            {"resonance_band", resonance_band},
            {"fit_s0", fit_s0},
            {"fit_count", fit_count},
            {"bisection_tol", bisection_tol},
            {"cycles_grid", cycles_grid},
            {"s_min", s_min},
            {"s_max", s_max}};
}

std::vector<std::string> Model::param_names() const {
    std::vector<std::string> out;
    for (const auto& p : params) out.push_back(p.name);
    return out;
}

Binding Model::defaults() const {
    Binding b;
    for (const auto& p : params) b[p.name] = p.value;
    return b;
}

Binding Model::bind(const std::map<std::string, double>& overrides) const {
    Binding b = defaults();
    for (const auto& [k, v] : overrides) {
        if (!b.count(k)) throw UsageError("undeclared parameter '" + k + "'");
        if (!std::isfinite(v)) throw UsageError("parameter '" + k + "' is not finite");
        b[k] = v;
    }
    return b;
}

ParamVector Model::to_vector(const Binding& b) const {
    ParamVector v;
    for (const auto& p : params) v.push_back(b.at(p.name));
    return v;
}

Binding Model::from_vector(const ParamVector& v) const {
    if (v.size() != params.size()) throw UsageError("parameter vector has the wrong length");
    Binding b;
    for (size_t i = 0; i < v.size(); ++i) b[params[i].name] = v[i];
    return b;
}

PolynomialField Model::field(const Binding& b) const { return {instantiate(fx, b), instantiate(fy, b)}; }

std::vector<Point> Model::corner_points(const Binding& b) const {
    std::vector<Point> out;
    for (const auto& [x, y] : corners) out.push_back({evaluate_constant(x, b), evaluate_constant(y, b)});
    return out;
}

SectionPair Model::sections(int corner) const {
    const auto it = corner_h.find(corner);
    return SectionPair::defaults(it == corner_h.end() ? section_h : it->second);
}

std::vector<LocalChart> Model::charts(const Binding& b) const {
    if (!has_corners()) throw ModelError("model has no corners");
    const PolynomialField f = field(b);
    const auto p = corner_points(b);
    const size_t n = p.size();
    const auto at = [&](const std::pair<Expression, Expression>& e) {
        return Point{evaluate_constant(e.first, b), evaluate_constant(e.second, b)};
    };
    std::vector<LocalChart> out;
    for (size_t i = 0; i < n; ++i) {
        try {
            if (n == 1)
                out.push_back(normalize_saddle(f, p[0], at(*incoming), at(*outgoing)));
            else
                out.push_back(normalize_saddle(f, p[i], p[(i + n - 1) % n], p[(i + 1) % n]));
        } catch (const Error& e) {
            const std::string what = "corner " + std::to_string(i + 1) + ": " + e.what();
            if (e.category() == Error::Category::numeric) throw NumericError(what);
            throw ModelError(what);
        }
    }
    return out;
}

PolycycleGeometry Model::geometry(const Binding& b) const {
    if (!has_polycycle()) throw ModelError("model has no polycycle (fewer than two corners)");
    PolycycleGeometry g;
    g.charts = charts(b);
    for (int i = 1; i <= static_cast<int>(g.charts.size()); ++i) g.sections.push_back(sections(i));
    return g;
}

void validate_orientation(const Model& m, const Binding& b) {
    if (!m.has_corners()) return;
    if (!m.has_polycycle()) {
        m.charts(b);  // a single corner is checked by its normalization
        return;
    }
    const auto p = m.corner_points(b);
    const size_t n = p.size();
    double area = 0.0;
    for (size_t i = 0; i < n; ++i) area += p[i].x * p[(i + 1) % n].y - p[(i + 1) % n].x * p[i].y;
    const bool ccw = area > 0.0;
    if (area == 0.0) throw ModelError("polycycle corners are collinear");
    if (ccw != (m.orientation == "ccw"))
        throw ModelError("corner list is " + std::string(ccw ? "counterclockwise" : "clockwise") +
                         " but orientation = " + m.orientation);

    const PolynomialField f = m.field(b);
    IntegratorOptions opt = m.options.integrator;
    opt.max_time = std::min(opt.max_time, 1e2);
    for (size_t i = 0; i < n; ++i) {
        const Point a = p[i], c = p[(i + 1) % n];
        const Point mid{(a.x + c.x) / 2, (a.y + c.y) / 2}, d{c.x - a.x, c.y - a.y};
        const double delta = 1e-3 * std::hypot(d.x, d.y);
        const auto along = [=](Point q) { return ((q.x - mid.x) * d.x + (q.y - mid.y) * d.y) / std::hypot(d.x, d.y); };
        const std::vector<SectionEvent> ev{{[=](Point q) { return along(q) - delta; }, 1, "forward"},
                                           {[=](Point q) { return -along(q) - delta; }, 1, "backward"}};
        const std::string edge = "edge " + std::to_string(i + 1) + " -> " + std::to_string((i + 1) % n + 1);
        Trajectory t;
        try {
            t = integrate(f, mid, ev, opt);
        } catch (const NumericError& e) {
            throw ModelError(edge + ": flow does not move along the edge (" + e.what() + ")");
        }
        if (t.events.empty() || t.events.back().section != 0)
            throw ModelError(edge + " runs against the flow; list the corners in traversal order");
    }
}

Model parse_model(const std::string& text, const std::string& origin) {
    pt::ptree tree;
    {
        std::istringstream is(text);
        try {
            pt::ini_parser::read_ini(is, tree);
        } catch (const pt::ini_parser_error& e) {
            throw ParseError(e.message(), static_cast<int>(e.line()), 1);
        }
    }
    static const std::set<std::string> known{"params", "field", "polycycle", "sections", "options"};
    for (const auto& [name, sec] : tree) {
        if (!known.count(name)) throw ModelError("unknown section [" + name + "]");
        if (sec.empty() && !sec.data().empty()) throw ModelError("key '" + name + "' outside a section");
    }

    Model m;
    m.origin = origin;
    m.digest = sha1_hex(text);

    std::vector<std::string> names;
    Binding declared;
    if (const auto params = tree.get_child_optional("params")) {
        for (const auto& [name, v] : *params) {
            in_section("[params] " + name, [&] {
                if (declared.count(name)) throw ModelError("duplicate parameter");
                if (name == "x" || name == "y") throw ModelError("x and y are the state variables");
                const std::string t = trim(v.data());
                const double value = constant_value(t, names, declared);
                names.push_back(name);
                declared[name] = value;
                m.params.push_back({name, t, value});
                return 0;
            });
        }
    }

    const auto field = tree.get_child_optional("field");
    if (!field) throw ModelError("missing [field] section");
    for (const auto& [k, v] : *field)
        if (k != "dot_x" && k != "dot_y") throw ModelError("[field] unknown key '" + k + "'");
    m.dot_x = trim(field->get<std::string>("dot_x", ""));
    m.dot_y = trim(field->get<std::string>("dot_y", ""));
    if (m.dot_x.empty() || m.dot_y.empty()) throw ModelError("[field] needs dot_x and dot_y");
    m.fx = in_section("[field] dot_x", [&] { return parse_expression(m.dot_x, names); });
    m.fy = in_section("[field] dot_y", [&] { return parse_expression(m.dot_y, names); });

    if (const auto poly = tree.get_child_optional("polycycle")) {
        for (const auto& [k, v] : *poly)
            if (k != "corners" && k != "orientation" && k != "incoming" && k != "outgoing")
                throw ModelError("[polycycle] unknown key '" + k + "'");
        const auto pts = in_section("[polycycle] corners", [&] { return point_list(poly->get<std::string>("corners", "")); });
        if (pts.empty()) throw ModelError("[polycycle] needs at least one corner");
        const auto one_point = [&](const char* key) {
            return in_section(std::string("[polycycle] ") + key, [&] {
                const auto q = point_list(poly->get<std::string>(key, ""));
                if (q.size() != 1) throw ModelError("expected one point");
                return std::make_pair(parse_expression(q[0].first, names), parse_expression(q[0].second, names));
            });
        };
        if (pts.size() == 1) {
            m.incoming = one_point("incoming");
            m.outgoing = one_point("outgoing");
        } else if (poly->count("incoming") || poly->count("outgoing")) {
            throw ModelError("[polycycle] incoming/outgoing apply to a single corner only");
        }
        for (const auto& [x, y] : pts) {
            m.corners.push_back(in_section("[polycycle] corners", [&] {
                return std::make_pair(parse_expression(x, names), parse_expression(y, names));
            }));
        }
        m.orientation = trim(poly->get<std::string>("orientation", "ccw"));
        if (m.orientation != "ccw" && m.orientation != "cw")
            throw ModelError("[polycycle] orientation must be ccw or cw");
    }

    if (const auto sec = tree.get_child_optional("sections")) {
        for (const auto& [k, v] : *sec) {
            in_section("[sections] " + k, [&] {
                const double h = constant_value(v.data(), names, declared);
                if (!(h > 0.0)) throw ModelError("section offset must be positive");
                if (k == "h") {
                    m.section_h = h;
                } else if (k.size() > 1 && k[0] == 'h') {
                    int idx = 0;
                    const auto [p, ec] = std::from_chars(k.data() + 1, k.data() + k.size(), idx);
                    if (ec != std::errc() || p != k.data() + k.size() || idx < 1 ||
                        idx > static_cast<int>(m.corners.size()))
                        throw ModelError("expected h or h<corner index>");
                    m.corner_h[idx] = h;
                } else {
                    throw ModelError("expected h or h<corner index>");
                }
                return 0;
            });
        }
    }

    if (const auto opt = tree.get_child_optional("options"))
        for (const auto& [k, v] : *opt) in_section("[options] " + k, [&] { m.options.set(k, trim(v.data())); return 0; });
    in_section("[options]", [&] { m.options.validate(); return 0; });

    validate_orientation(m, m.defaults());
    return m;
}

Model load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot open model file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_model(ss.str(), path);
}

std::map<std::string, std::string> parse_assignments(const std::vector<std::string>& items) {
    std::map<std::string, std::string> out;
    for (const auto& item : items) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw UsageError("expected NAME=VALUE, got '" + item + "'");
        const std::string k = trim(item.substr(0, eq)), v = trim(item.substr(eq + 1));
        if (k.empty() || v.empty()) throw UsageError("expected NAME=VALUE, got '" + item + "'");
        out[k] = v;
    }
    return out;
}

std::map<std::string, double> parse_overrides(const std::vector<std::string>& items) {
    std::map<std::string, double> out;
    for (const auto& [k, v] : parse_assignments(items)) {
        try {
            out[k] = constant_value(v, {}, {});
        } catch (const Error& e) {
            throw UsageError("--set " + k + ": " + e.what());
        }
    }
    return out;
}

}  // namespace polycycle
