#include "gcstab/cli.hpp"

#include "gcstab/error.hpp"
#include "gcstab/soliton.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace gcstab {

using nlohmann::json;

namespace {

Error schema_error(const std::string& msg) { return Error("cli", "Schema", msg); }

void only_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) throw schema_error(where + " must be an object");
    for (const auto& [k, v] : j.items())
        if (!allowed.count(k)) throw Error("cli", "UnknownField", "unknown field '" + k + "' in " + where);
}

const json& need(const json& j, const std::string& key, const std::string& where) {
    if (!j.contains(key)) throw schema_error("missing field '" + key + "' in " + where);
    return j.at(key);
}

Rational rational_of(const json& v, const std::string& where) {
    if (v.is_string()) return parse_rational(v.get<std::string>());
    if (v.is_number_integer()) return Rational(std::to_string(v.get<long long>()));
    throw schema_error(where + ": rationals are strings \"p/q\" or integers");
}

RVec rvec_of(const json& v, const std::string& where) {
    if (!v.is_array()) throw schema_error(where + " must be an array");
    RVec out;
    for (const auto& x : v) out.push_back(rational_of(x, where));
    return out;
}

json rat(const Rational& q) { return to_string(q); }

json rats(const RVec& v) {
    json a = json::array();
    for (const auto& q : v) a.push_back(to_string(q));
    return a;
}

json flts(const RVec& v) {
    json a = json::array();
    for (const auto& q : v) a.push_back(to_double(q));
    return a;
}

json dvec(const std::vector<double>& v) {
    json a = json::array();
    for (double x : v) a.push_back(x);
    return a;
}

void put_rat(json& j, const std::string& key, const Rational& q) {
    j[key] = rat(q);
    j[key + "_float"] = to_double(q);
}

void put_rvec(json& j, const std::string& key, const RVec& v) {
    j[key] = rats(v);
    j[key + "_float"] = flts(v);
}

std::string poly_string(const Polynomial& p) {
    std::ostringstream s;
    bool first = true;
    for (const auto& [e, c] : p.terms()) {
        s << (first ? "" : " + ") << to_string(c);
        first = false;
        for (std::size_t i = 0; i < e.size(); ++i)
            if (e[i] > 0) s << "*y" << (i + 1) << (e[i] > 1 ? "^" + std::to_string(e[i]) : "");
    }
    return first ? "0" : s.str();
}

json error_json(const Error& e) { return json{{"tag", e.tag()}, {"message", e.detail()}}; }

std::string fmt_double(double x) {
    std::ostringstream s;
    s.precision(17);
    s << x;
    return s.str();
}

}  // namespace

const std::vector<std::string>& all_analyses() {
    static const std::vector<std::string> a{"ke", "properness", "futaki", "destabilize", "soliton", "kenergy"};
    return a;
}

ProblemSpec parse_problem(const json& j) {
    only_keys(j, {"schema", "name", "root_system", "polytope", "options", "analyses"}, "problem");
    if (j.contains("schema") && j.at("schema") != kProblemSchema)
        throw schema_error("unsupported schema " + j.at("schema").dump());
    ProblemSpec p;
    if (j.contains("name")) p.name = j.at("name").get<std::string>();

    const auto& rs = need(j, "root_system", "problem");
    only_keys(rs, {"rank", "gram", "simple_roots", "cartan_type"}, "root_system");
    const auto& rank = need(rs, "rank", "root_system");
    if (!rank.is_number_integer() || rank.get<long long>() < 1) throw schema_error("rank must be a positive integer");
    p.rank = rank.get<std::size_t>();
    auto gram = rvec_of(need(rs, "gram", "root_system"), "gram");
    if (gram.size() != p.rank * p.rank) throw schema_error("gram must hold rank² entries in row-major order");
    p.gram = RMat(p.rank, p.rank);
    for (std::size_t i = 0; i < p.rank; ++i)
        for (std::size_t k = 0; k < p.rank; ++k) p.gram(i, k) = gram[i * p.rank + k];
    const auto& sr = need(rs, "simple_roots", "root_system");
    if (!sr.is_array()) throw schema_error("simple_roots must be an array");
    for (const auto& a : sr) {
        p.simple_roots.push_back(rvec_of(a, "simple_roots"));
        if (p.simple_roots.back().size() != p.rank) throw schema_error("simple root of the wrong length");
    }
    if (rs.contains("cartan_type")) p.cartan_type = rs.at("cartan_type").get<std::string>();

    const auto& poly = need(j, "polytope", "problem");
    only_keys(poly, {"facets", "vertices"}, "polytope");
    const auto& facets = need(poly, "facets", "polytope");
    if (!facets.is_array()) throw schema_error("facets must be an array");
    for (const auto& f : facets) {
        only_keys(f, {"u", "lambda"}, "facet");
        Facet fa{rvec_of(need(f, "u", "facet"), "facet u"), rational_of(need(f, "lambda", "facet"), "facet lambda")};
        if (fa.u.size() != p.rank) throw schema_error("facet normal of the wrong length");
        p.facets.push_back(std::move(fa));
    }
    if (poly.contains("vertices")) {
        std::vector<RVec> vs;
        for (const auto& v : poly.at("vertices")) vs.push_back(rvec_of(v, "vertices"));
        p.vertices = std::move(vs);
    }

    if (j.contains("options")) {
        const auto& o = j.at("options");
        only_keys(o, {"soliton_order", "soliton_tol", "kenergy_level", "wall_margin", "minimize", "degree",
                      "minimize_tol", "max_iter"},
                  "options");
        auto& po = p.options;
        if (o.contains("soliton_order")) po.soliton_order = o.at("soliton_order").get<int>();
        if (o.contains("soliton_tol")) po.soliton_tol = o.at("soliton_tol").get<double>();
        if (o.contains("kenergy_level")) po.kenergy_level = o.at("kenergy_level").get<int>();
        if (o.contains("wall_margin")) po.wall_margin = o.at("wall_margin").get<double>();
        if (o.contains("minimize")) po.minimize = o.at("minimize").get<bool>();
        if (o.contains("degree")) po.degree = o.at("degree").get<int>();
        if (o.contains("minimize_tol")) po.minimize_tol = o.at("minimize_tol").get<double>();
        if (o.contains("max_iter")) po.max_iter = o.at("max_iter").get<int>();
    }
    if (j.contains("analyses")) {
        for (const auto& a : j.at("analyses")) {
            auto s = a.get<std::string>();
            if (std::find(all_analyses().begin(), all_analyses().end(), s) == all_analyses().end())
                throw Error("cli", "UnknownAnalysis", "unknown analysis '" + s + "'");
            p.analyses.push_back(s);
        }
    } else {
        p.analyses = all_analyses();
    }
    return p;
}

ProblemSpec load_problem(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cli", "Io", "cannot read " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw schema_error(std::string("invalid JSON: ") + e.what());
    }
    try {
        return parse_problem(j);
    } catch (const json::exception& e) {
        throw schema_error(std::string("wrong field type: ") + e.what());
    }
}

json to_json(const ProblemSpec& p) {
    json j;
    j["schema"] = kProblemSchema;
    j["name"] = p.name;
    json rs;
    rs["rank"] = p.rank;
    json g = json::array();
    for (std::size_t i = 0; i < p.rank; ++i)
        for (std::size_t k = 0; k < p.rank; ++k) g.push_back(to_string(p.gram(i, k)));
    rs["gram"] = g;
    rs["simple_roots"] = json::array();
    for (const auto& a : p.simple_roots) rs["simple_roots"].push_back(rats(a));
    if (p.cartan_type) rs["cartan_type"] = *p.cartan_type;
    j["root_system"] = rs;
    json poly;
    poly["facets"] = json::array();
    for (const auto& f : p.facets) poly["facets"].push_back({{"u", rats(f.u)}, {"lambda", rat(f.lambda)}});
    if (p.vertices) {
        poly["vertices"] = json::array();
        for (const auto& v : *p.vertices) poly["vertices"].push_back(rats(v));
    }
    j["polytope"] = poly;
    const auto& o = p.options;
    j["options"] = {{"soliton_order", o.soliton_order}, {"soliton_tol", o.soliton_tol},
                    {"kenergy_level", o.kenergy_level}, {"wall_margin", o.wall_margin},
                    {"minimize", o.minimize},           {"degree", o.degree},
                    {"minimize_tol", o.minimize_tol},   {"max_iter", o.max_iter}};
    j["analyses"] = p.analyses;
    return j;
}

bool operator==(const ProblemSpec& a, const ProblemSpec& b) {
    auto same_facets = [](const std::vector<Facet>& x, const std::vector<Facet>& y) {
        if (x.size() != y.size()) return false;
        for (std::size_t i = 0; i < x.size(); ++i)
            if (x[i].u != y[i].u || x[i].lambda != y[i].lambda) return false;
        return true;
    };
    return a.name == b.name && a.rank == b.rank && a.gram == b.gram && a.simple_roots == b.simple_roots &&
           a.cartan_type == b.cartan_type && same_facets(a.facets, b.facets) && a.vertices == b.vertices &&
           a.options == b.options && a.analyses == b.analyses;
}

ChamberPolytope build_chamber(const ProblemSpec& p) {
    auto rs = build_root_system(p.rank, p.gram, p.simple_roots);
    Polytope poly(p.facets);
    if (p.vertices) {
        std::set<RVec> want(p.vertices->begin(), p.vertices->end());
        std::set<RVec> got(poly.vertices().begin(), poly.vertices().end());
        if (want != got) throw Error("cli", "VertexMismatch", "listed vertices differ from the facet description");
    }
    return restrict_to_chamber(poly, rs);
}

SmoothCandidate parse_candidate(const json& j, const ChamberPolytope& cp) {
    only_keys(j, {"guillemin", "terms"}, "candidate");
    const std::size_t r = cp.rank();
    Polynomial f(r);
    if (j.contains("terms"))
        for (const auto& t : j.at("terms")) {
            only_keys(t, {"exponents", "coeff"}, "term");
            auto e = need(t, "exponents", "term").get<std::vector<int>>();
            if (e.size() != r) throw schema_error("term exponents of the wrong length");
            f.add_term(e, rational_of(need(t, "coeff", "term"), "term coeff"));
        }
    bool g = j.value("guillemin", true);
    if (!g && f.is_zero()) throw schema_error("candidate is empty");
    if (!g) return SmoothCandidate::polynomial(f);
    if (f.is_zero()) return SmoothCandidate::guillemin(cp.polytope());
    return SmoothCandidate::with_basis(Guillemin(cp.polytope()), PolyBasis::make({f}), {1.0});
}

json soliton_report(const ChamberPolytope& cp, const ChamberMoments& m, const ProblemOptions& opt, int& exit_code) {
    SolitonOptions so;
    so.order = opt.soliton_order;
    so.tol = opt.soliton_tol;
    auto S = solve_soliton(cp, m, so);
    auto v = verdict_soliton(cp, S);
    json j;
    j["c"] = dvec(S.c);
    j["s"] = dvec(S.s);
    j["c0"] = S.c0;
    j["normalization_residual"] = S.normalization_residual;
    j["moment_residual"] = S.moment_residual;
    j["iterations"] = S.iterations;
    j["converged"] = S.converged;
    j["order"] = S.order;
    j["quadrature_error"] = S.quadrature_error;
    j["hessian_min_eigenvalue"] = dvec(S.hessian_min_eigenvalue);
    j["bar_X"] = dvec(v.bar_x.value);
    j["bar_X_error"] = v.bar_x.error;
    j["verdict"] = to_string(v.verdict);
    j["coefficients"] = dvec(v.coefficients);
    j["toric"] = dvec(v.toric);
    j["margin"] = v.margin;
    j["tau"] = v.tau;
    if (!S.converged) exit_code = std::max(exit_code, 3);
    return j;
}

json kenergy_report(const ChamberPolytope& cp, const ChamberMoments& m, const SmoothCandidate& u,
                    const std::string& label, const ProblemOptions& opt, int& exit_code) {
    KEnergyOptions ko;
    ko.level = opt.kenergy_level;
    ko.wall_margin = opt.wall_margin;
    json j;
    j["candidate"] = label;
    j["level"] = ko.level > 0 ? ko.level : default_level(cp.rank());
    j["wall_margin"] = ko.wall_margin;
    auto k = kenergy_value(cp, m, u, ko);
    j["K"] = k.K;
    j["L"] = k.L;
    j["N"] = k.N;
    j["error"] = k.error;
    j["dropped_fraction"] = k.dropped_fraction;
    if (opt.minimize) {
        MinimizeOptions mo;
        mo.degree = opt.degree;
        mo.tol = opt.minimize_tol;
        mo.max_iter = opt.max_iter;
        mo.quad = ko;
        auto res = minimize_kenergy(cp, m, mo);
        json mj;
        mj["degree"] = opt.degree;
        mj["basis"] = json::array();
        if (res.u.basis())
            for (const auto& p : res.u.basis()->polys) mj["basis"].push_back(poly_string(p));
        mj["coefficients"] = dvec(res.u.coeffs());
        mj["affine_slope"] = dvec(res.u.affine_slope());
        mj["affine_offset"] = res.u.affine_offset();
        mj["converged"] = res.converged;
        mj["note"] = res.note;
        mj["initial_K"] = res.initial.K;
        mj["K"] = res.value.K;
        mj["normalized_K"] = res.normalized_value.K;
        mj["iterations"] = res.trace.size();
        mj["trace"] = json::array();
        for (const auto& t : res.trace)
            mj["trace"].push_back({{"iter", t.iter}, {"K", t.K}, {"grad_norm", t.grad_norm}, {"step", t.step}});
        mj["label"] = "local minimizer in a finite-dimensional polynomial family, not a minimizer over all potentials";
        j["minimize"] = mj;
        if (!res.converged) exit_code = std::max(exit_code, 3);
    }
    return j;
}

RunOutcome run_problem(const ProblemSpec& p, const RunFlags& flags) {
    using clock = std::chrono::steady_clock;
    RunOutcome out;
    json& r = out.report;
    r["schema"] = kReportSchema;
    r["problem"] = {{"name", p.name}, {"input_hash", fnv1a_hex(to_json(p).dump())}, {"analyses", p.analyses}};
    r["provenance"] = {{"tool", "gcstab"}, {"version", kVersion}, {"problem_schema", kProblemSchema}};
    r["errors"] = json::array();
    r["warnings"] = json::array();
    json timings;
    auto t0 = clock::now();
    auto lap = [&](const std::string& stage) {
        auto t1 = clock::now();
        timings[stage] = std::chrono::duration<double>(t1 - t0).count();
        t0 = t1;
    };
    auto fail = [&](const Error& e) {
        r["errors"].push_back(error_json(e));
        out.exit_code = std::max(out.exit_code, 2);
    };
    auto wants = [&](const std::string& a) { return std::find(p.analyses.begin(), p.analyses.end(), a) != p.analyses.end(); };

    std::optional<ChamberPolytope> cpo;
    try {
        cpo = build_chamber(p);
    } catch (const Error& e) {
        fail(e);
        r["status"] = "error";
        return out;
    }
    const auto& cp = *cpo;
    const auto& rs = cp.roots();
    lap("rootdata_polyint");

    json rd;
    rd["rank"] = rs.rank();
    rd["declared_cartan_type"] = p.cartan_type ? json(*p.cartan_type) : json(nullptr);
    rd["n"] = rs.n();
    rd["semisimple_rank"] = rs.semisimple_rank();
    rd["toric_rank"] = rs.toric_rank();
    rd["weyl_order"] = rs.weyl_group().size();
    rd["positive_roots"] = json::array();
    for (const auto& a : rs.positive_roots()) rd["positive_roots"].push_back(rats(a));
    put_rvec(rd, "rho", rs.rho());
    put_rvec(rd, "four_rho", Rational(4) * rs.rho());
    r["rootdata"] = rd;

    json pj;
    pj["facets"] = json::array();
    for (const auto& f : cp.polytope().facets()) pj["facets"].push_back({{"u", rats(f.u)}, {"lambda", rat(f.lambda)}});
    pj["chamber_vertices"] = json::array();
    pj["chamber_vertices_float"] = json::array();
    for (const auto& v : cp.vertices()) {
        pj["chamber_vertices"].push_back(rats(v));
        pj["chamber_vertices_float"].push_back(flts(v));
    }
    pj["chamber_edges"] = json::array();
    for (const auto& [a, b] : cp.edges()) pj["chamber_edges"].push_back({a, b});
    r["polytope"] = pj;

    std::optional<ChamberMoments> mo;
    try {
        mo = chamber_moments(cp);
    } catch (const Error& e) {
        fail(e);
        r["status"] = "error";
        return out;
    }
    const auto& m = *mo;
    json mj;
    put_rat(mj, "V", m.V);
    put_rat(mj, "Sbar", m.Sbar);
    put_rvec(mj, "bar", m.bar);
    put_rvec(mj, "bar_tilde", m.bar_tilde);
    mj["outer_facets"] = json::array();
    for (std::size_t a = 0; a < cp.outer_facets().size(); ++a) {
        const auto& of = cp.outer_facets()[a];
        json f{{"facet_index", of.facet_index}, {"u", rats(of.u)}, {"lambda", rat(of.lambda)}};
        put_rat(f, "Lambda", m.Lambda[a]);
        put_rat(f, "cone_pi", m.cone_pi[a]);
        mj["outer_facets"].push_back(f);
    }
    r["moments"] = mj;
    r["fano_normalized"] = fano_normalized(cp);
    lap("moments");

    json verdicts = json::object();
    bool criteria = wants("ke") || wants("properness") || wants("futaki") || wants("destabilize");
    if (criteria) {
        try {
            auto a = analyze(cp);
            for (const auto& w : a.warnings) r["warnings"].push_back(w);
            if (wants("ke")) {
                json k;
                k["verdict"] = to_string(a.ke.verdict);
                put_rvec(k, "bar_minus_4rho", a.ke.bar_minus_4rho);
                k["in_Xi"] = a.ke.certificate.member;
                k["simple_root_coefficients"] = rats(a.ke.certificate.coefficients);
                k["toric_component"] = rats(a.ke.certificate.toric_component);
                if (!a.ke.certificate.coefficients.empty()) {
                    Rational mn = a.ke.certificate.coefficients[0];
                    for (const auto& c : a.ke.certificate.coefficients) mn = std::min(mn, c);
                    put_rat(k, "margin", mn);
                }
                r["ke"] = k;
                verdicts["KE_fano"] = to_string(a.ke.verdict);
            }
            if (wants("properness")) {
                const auto& pr = a.proper;
                json q{{"verdict", to_string(pr.verdict)},
                       {"tildebar1", pr.tildebar1},
                       {"tildebar2", pr.tildebar2},
                       {"barS", pr.barS},
                       {"futaki_vanishes", pr.futaki_vanishes}};
                put_rat(q, "min_Lambda", pr.min_Lambda);
                put_rat(q, "barS_margin", pr.barS_margin);
                r["properness"] = q;
                verdicts["properness"] = to_string(pr.verdict);
            }
            if (wants("futaki")) {
                json f;
                put_rvec(f, "toric_vector", a.futaki_toric_vector);
                f["vanishes"] = a.futaki_vanishes;
                f["values"] = json::array();
                for (const auto& v : rs.t_basis()) {
                    json e{{"direction", rats(v)}};
                    put_rat(e, "F", futaki(cp, m, v));
                    f["values"].push_back(e);
                }
                r["futaki"] = f;
            }
            if (wants("destabilize")) {
                auto d = destabilizer(cp, m);
                if (d) {
                    json dj{{"kind", d->kind}, {"index", d->index}, {"direction", rats(d->direction)}};
                    dj["pieces"] = json::array();
                    for (const auto& pc : d->u.pieces()) dj["pieces"].push_back({{"w", rats(pc.w)}, {"b", rat(pc.b)}});
                    put_rat(dj, "L", d->L);
                    r["destabilizer"] = dj;
                } else {
                    r["destabilizer"] = nullptr;
                }
            }
        } catch (const Error& e) {
            fail(e);
        }
        lap("criteria");
    }
    if (wants("soliton")) {
        try {
            r["soliton"] = soliton_report(cp, m, p.options, out.exit_code);
            verdicts["soliton"] = r["soliton"]["verdict"];
        } catch (const Error& e) {
            fail(e);
        }
        lap("soliton");
    }
    if (wants("kenergy")) {
        try {
            r["kenergy"] = kenergy_report(cp, m, SmoothCandidate::guillemin(cp.polytope()), "guillemin", p.options,
                                          out.exit_code);
            double dropped = r["kenergy"]["dropped_fraction"].get<double>();
            if (dropped > 0)
                r["warnings"].push_back("kenergy: quadrature nodes within the wall margin were dropped (mass fraction " +
                                        fmt_double(dropped) + ")");
        } catch (const Error& e) {
            fail(e);
        }
        lap("kenergy");
    }
    r["verdicts"] = verdicts;
    r["status"] = out.exit_code == 0 ? "ok" : (out.exit_code == 3 ? "not-converged" : "error");
    if (flags.timings) r["timings"] = timings;
    return out;
}

std::string dump_report(const json& report) { return report.dump(2) + "\n"; }

std::string export_plot_data(const json& report, const std::string& what, const std::string& format) {
    if (format != "csv" && format != "json") throw Error("cli", "UnknownSelector", "unknown format '" + format + "'");
    auto missing = [](const std::string& s) { return Error("cli", "MissingData", "report has no " + s); };
    std::ostringstream out;
    out.precision(17);
    if (what == "polytope") {
        if (!report.contains("polytope")) throw missing("polytope block");
        const auto& vs = report["polytope"]["chamber_vertices_float"];
        const auto& es = report["polytope"]["chamber_edges"];
        if (format == "json") return json{{"vertices", vs}, {"edges", es}}.dump(2) + "\n";
        const std::size_t r = vs.empty() ? 0 : vs[0].size();
        out << "kind,id,from,to";
        for (std::size_t i = 0; i < r; ++i) out << ",y" << (i + 1);
        out << "\n";
        for (std::size_t k = 0; k < vs.size(); ++k) {
            out << "vertex," << k << ",,";
            for (const auto& x : vs[k]) out << "," << x.get<double>();
            out << "\n";
        }
        for (std::size_t k = 0; k < es.size(); ++k) {
            out << "edge," << k << "," << es[k][0].get<std::size_t>() << "," << es[k][1].get<std::size_t>();
            for (std::size_t i = 0; i < r; ++i) out << ",";
            out << "\n";
        }
        return out.str();
    }
    if (what == "barycenters") {
        if (!report.contains("moments") || !report.contains("rootdata")) throw missing("moments block");
        std::vector<std::pair<std::string, json>> pts{{"bar", report["moments"]["bar_float"]},
                                                      {"bar_tilde", report["moments"]["bar_tilde_float"]},
                                                      {"four_rho", report["rootdata"]["four_rho_float"]}};
        if (report.contains("soliton")) pts.push_back({"bar_X", report["soliton"]["bar_X"]});
        std::vector<json> rays;
        for (const auto& a : report["rootdata"]["positive_roots"]) {
            json f = json::array();
            for (const auto& q : a) f.push_back(to_double(parse_rational(q.get<std::string>())));
            rays.push_back(f);
        }
        if (format == "json") {
            json j;
            for (const auto& [name, v] : pts) j["points"][name] = v;
            j["xi_rays"] = rays;
            return j.dump(2) + "\n";
        }
        const std::size_t r = pts[0].second.size();
        out << "kind,name";
        for (std::size_t i = 0; i < r; ++i) out << ",y" << (i + 1);
        out << "\n";
        for (const auto& [name, v] : pts) {
            out << "point," << name;
            for (const auto& x : v) out << "," << x.get<double>();
            out << "\n";
        }
        for (std::size_t k = 0; k < rays.size(); ++k) {
            out << "xi_ray,root" << k;
            for (const auto& x : rays[k]) out << "," << x.get<double>();
            out << "\n";
        }
        return out.str();
    }
    if (what == "descent-trace") {
        if (!report.contains("kenergy") || !report["kenergy"].contains("minimize")) throw missing("minimization trace");
        const auto& tr = report["kenergy"]["minimize"]["trace"];
        if (format == "json") return tr.dump(2) + "\n";
        out << "iter,K,grad_norm,step\n";
        for (const auto& t : tr)
            out << t["iter"].get<int>() << "," << t["K"].get<double>() << "," << t["grad_norm"].get<double>() << ","
                << t["step"].get<double>() << "\n";
        return out.str();
    }
    throw Error("cli", "UnknownSelector", "unknown export selector '" + what + "'");
}

namespace {

void compare_into(const json& e, const json& a, const std::string& path, double tol, std::vector<std::string>& out) {
    auto num = [](const json& v) { return v.is_number(); };
    if (num(e) && num(a)) {
        if (e.is_number_float() || a.is_number_float()) {
            double x = e.get<double>(), y = a.get<double>();
            if (std::isnan(x) != std::isnan(y) ||
                (!std::isnan(x) && std::abs(x - y) > tol * std::max({1.0, std::abs(x), std::abs(y)})))
                out.push_back(path + ": expected " + e.dump() + ", got " + a.dump());
        } else if (e != a) {
            out.push_back(path + ": expected " + e.dump() + ", got " + a.dump());
        }
        return;
    }
    if (e.type() != a.type()) {
        out.push_back(path + ": type differs");
        return;
    }
    if (e.is_object()) {
        for (const auto& [k, v] : e.items()) {
            if (k == "provenance" || k == "timings") continue;
            if (!a.contains(k)) {
                out.push_back(path + "/" + k + ": missing");
                continue;
            }
            compare_into(v, a.at(k), path + "/" + k, tol, out);
        }
        for (const auto& [k, v] : a.items())
            if (!e.contains(k) && k != "provenance" && k != "timings") out.push_back(path + "/" + k + ": unexpected");
        return;
    }
    if (e.is_array()) {
        if (e.size() != a.size()) {
            out.push_back(path + ": length " + std::to_string(e.size()) + " vs " + std::to_string(a.size()));
            return;
        }
        for (std::size_t i = 0; i < e.size(); ++i) compare_into(e[i], a[i], path + "/" + std::to_string(i), tol, out);
        return;
    }
    if (e != a) out.push_back(path + ": expected " + e.dump() + ", got " + a.dump());
}

}  // namespace

std::vector<std::string> compare_reports(const json& expected, const json& actual, double rel_tol) {
    std::vector<std::string> out;
    compare_into(expected, actual, "", rel_tol, out);
    return out;
}

std::string fnv1a_hex(const std::string& text) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    std::ostringstream s;
    s << std::hex;
    s.width(16);
    s.fill('0');
    s << h;
    return s.str();
}

}  // namespace gcstab
