#include "polycycle/document.hpp"

#include <cmath>

namespace polycycle {

namespace {

Json opt(const std::optional<double>& v) { return v ? number(*v) : Json(nullptr); }

Json second_term(const std::optional<SecondTerm>& t) {
    if (!t) return nullptr;
    Json j{{"exponent", number(t->exponent)}, {"coefficient", number(t->coefficient)}};
    if (t->compensated)
        j["compensated"] = {{"u1", number(t->compensated->u1)},
                            {"u2", number(t->compensated->u2)},
                            {"alpha", number(t->compensated->alpha)}};
    return j;
}

Json levels_json(const std::vector<ConditionLevel>& lv) {
    Json a = Json::array();
    for (const auto& l : lv)
        a.push_back({{"name", l.name}, {"value", number(l.value)}, {"upper_item", l.upper_item}, {"lower_item", l.lower_item}});
    return a;
}

Json bound(const std::optional<int>& v) { return v ? Json(*v) : Json(nullptr); }

Json params_json(const Binding& b) {
    Json j = Json::object();
    for (const auto& [k, v] : b) j[k] = number(v);
    return j;
}

}  // namespace

Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json to_json(const Point& p) { return Json::array({number(p.x), number(p.y)}); }

Json to_json(const Interval& i) { return Json::array({number(i.lo), number(i.hi)}); }

Json to_json(const LocalChart& c) {
    return {{"origin", to_json(c.origin)},
            {"e_out", to_json(c.e_out)},
            {"e_in", to_json(c.e_in)},
            {"lambda", number(c.lambda)},
            {"P", c.P.to_string()},
            {"Q", c.Q.to_string()}};
}

Json to_json(const DulacExpansion& d) {
    return {{"lambda", number(d.lambda)},
            {"tag", to_string(d.tag)},
            {"d00", number(d.d00)},
            {"d10", opt(d.d10)},
            {"d01", opt(d.d01)},
            {"S1", opt(d.s1)},
            {"S2", opt(d.s2)},
            {"ell", to_json(d.ell)},
            {"second", second_term(d.second_term())},
            {"leading_only", d.leading_only},
            {"note", d.note}};
}

Json to_json(const ReturnExpansion& r) {
    return {{"r", number(r.r)},
            {"A_1n", number(r.a1n)},
            {"tag", to_string(r.tag)},
            {"pattern", to_string(r.pattern)},
            {"m", r.m},
            {"next_name", r.next_name},
            {"next", second_term(r.next)},
            {"B", opt(r.b_quantity)},
            {"ell", to_json(r.ell)},
            {"leading_only", r.leading_only},
            {"note", r.note}};
}

Json to_json(const DisplacementExpansion& d) {
    return {{"rotation", d.rotation},
            {"m", d.m},
            {"n", d.n},
            {"Lambda_0m", number(d.lambda0m)},
            {"Lambda_mn_inverse", number(d.lambdamn_inv)},
            {"alpha", number(d.alpha)},
            {"A_1m", number(d.a1m)},
            {"A_star", number(d.a_star)},
            {"Psi_1", number(d.psi1)},
            {"Psi_2", number(d.psi2)},
            {"Psi_3", number(d.psi3)},
            {"u1", number(d.u1)},
            {"tag", to_string(d.tag)},
            {"ell", to_json(d.ell)}};
}

Json to_json(const IndependenceReport& r) {
    Json m = Json::array();
    for (const auto& row : r.matrix) {
        Json jr = Json::array();
        for (double v : row) jr.push_back(number(v));
        m.push_back(jr);
    }
    Json sv = Json::array();
    for (double v : r.singular_values) sv.push_back(number(v));
    return {{"label", r.label},
            {"rank", r.rank},
            {"prefix_rank", r.prefix_rank},
            {"gradients", m},
            {"singular_values", sv},
            {"threshold", number(r.threshold)},
            {"step", number(r.step)},
            {"consistent", r.consistent}};
}

Json to_json(const NotIdentityEvidence& e) {
    return {{"found", e.found},
            {"source", e.source},
            {"s", number(e.s)},
            {"displacement", number(e.displacement)},
            {"threshold", number(e.threshold)},
            {"note", e.note}};
}

Json to_json(const CyclicityVerdict& v) {
    Json conds = Json::array();
    for (const auto& c : v.conditions) {
        Json q = Json::object();
        for (const auto& [k, x] : c.quantities) q[k] = number(x);
        conds.push_back({{"item", c.item}, {"pass", c.pass}, {"quantities", q}, {"detail", c.detail}});
    }
    Json w = nullptr;
    if (v.witness) {
        Json mu1 = Json::array(), mu2 = Json::array();
        for (double x : v.witness->mu1) mu1.push_back(number(x));
        for (double x : v.witness->mu2) mu2.push_back(number(x));
        w = {{"mu1", mu1}, {"mu2", mu2}, {"f1", number(v.witness->f1)}, {"f2", number(v.witness->f2)}};
    }
    return {{"lower", bound(v.lower)},
            {"upper", bound(v.upper)},
            {"rationale", v.rationale},
            {"conditions", conds},
            {"independence", v.independence ? to_json(*v.independence) : Json(nullptr)},
            {"not_identity", v.not_identity ? to_json(*v.not_identity) : Json(nullptr)},
            {"sign_witness", w}};
}

Json to_json(const LadderResult& l) { return {{"levels", levels_json(l.levels)}, {"verdict", to_json(l.verdict)}}; }

Json to_json(const FitReport& f) {
    Json grid = Json::array();
    for (double s : f.s_grid) grid.push_back(number(s));
    return {{"exponent", number(f.exponent)},
            {"leading", number(f.leading)},
            {"second", opt(f.second)},
            {"second_exponent", number(f.second_exponent)},
            {"residual_slope", number(f.residual_slope)},
            {"rms", number(f.rms)},
            {"confident", f.confident},
            {"s_grid", grid},
            {"note", f.note}};
}

Json to_json(const CycleScan& c) {
    Json fps = Json::array();
    for (const auto& p : c.fixed_points) fps.push_back({{"s", number(p.s)}, {"stability", to_string(p.stability)}});
    Json table = Json::array();
    for (size_t k = 0; k < c.s.size(); ++k) table.push_back(Json::array({number(c.s[k]), number(c.displacement[k])}));
    return {{"count", c.fixed_points.size()},
            {"fixed_points", fps},
            {"coverage", number(c.coverage)},
            {"failures", c.failures},
            {"displacement_table", table}};
}

Json to_json(const ComposeCheckReport& r) {
    Json cases = Json::array();
    for (const auto& c : r.cases)
        cases.push_back({{"case", to_string(c.which)},
                         {"count", c.count},
                         {"max_leading_deviation", number(c.max_leading)},
                         {"max_second_deviation", number(c.max_second)},
                         {"flagged", c.flagged},
                         {"examples", c.examples}});
    return {{"seed", r.seed}, {"count", r.count}, {"pass", r.pass}, {"cases", cases}};
}

Json provenance(const std::string& command, const Model* m, const Binding* b) {
    Json p{{"tool", "polycycle"}, {"version", kVersion}, {"command", command}};
    if (m) {
        p["model"] = m->origin;
        p["model_sha1"] = m->digest;
        Json tol = Json::object();
        for (const auto& [k, v] : m->options.values()) tol[k] = number(v);
        p["tolerances"] = tol;
    }
    if (b) p["parameters"] = params_json(*b);
    return p;
}

Json analysis_document(const Model& m, const Analysis& a) {
    const ModelOptions& o = m.options;
    Json corners = Json::array();
    for (size_t i = 0; i < a.at.charts.size(); ++i) {
        const SectionPair sec = m.sections(static_cast<int>(i) + 1);
        corners.push_back({{"index", i + 1},
                           {"chart", to_json(a.at.charts[i])},
                           {"section_offset", number(sec.s12.at(0))},
                           {"dulac", to_json(a.at.spec.corners[i])}});
    }
    Json doc;
    doc["provenance"] = provenance("analyze", &m, &a.mu);
    doc["corners"] = {{"tolerance", {{"quad_abs_tol", number(o.dulac.quadrature.abs_tol)},
                                     {"quad_rel_tol", number(o.dulac.quadrature.rel_tol)},
                                     {"series_order", o.dulac.series_order}}},
                      {"items", corners}};
    doc["return"] = {{"tolerance", {{"resonance_band", number(o.resonance_band)}}},
                     {"expansion", to_json(a.at.ret)}};
    doc["displacement"] = a.at.disp ? Json{{"tolerance", {{"resonance_band", number(o.resonance_band)}}},
                                           {"expansion", to_json(*a.at.disp)},
                                           {"scale", number(displacement_scale(*a.at.disp))}}
                                    : Json{{"note", a.at.disp_note}};
    doc["flow_probe"] = a.flow_probe ? Json{{"tolerance", {{"abs_tol", number(o.integrator.abs_tol)},
                                                            {"rel_tol", number(o.integrator.rel_tol)}}},
                                            {"evidence", to_json(*a.flow_probe)}}
                                     : Json(nullptr);
    const Json vt{{"zero_tol", number(o.zero_tol)}, {"gradient_step", number(o.gradient_step)}};
    doc["verdict"] = {{"tolerance", vt}, {"cycl_lower", bound(a.ret.verdict.lower)},
                      {"cycl_upper", bound(a.ret.verdict.upper)}, {"return_ladder", to_json(a.ret)}};
    doc["verdict"]["displacement_ladder"] = a.disp ? to_json(*a.disp) : Json(nullptr);
    return doc;
}

}  // namespace polycycle
