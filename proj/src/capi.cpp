#include "qrlab.h"

#include <cmath>
#include <cstring>
#include <new>
#include <string>

#include <json.hpp>

#include "qrlab/error.hpp"
#include "qrlab/fixtures.hpp"
#include "qrlab/flow.hpp"
#include "qrlab/index.hpp"
#include "qrlab/inject.hpp"
#include "qrlab/jet.hpp"
#include "qrlab/parse.hpp"
#include "qrlab/potential.hpp"
#include "qrlab/verify.hpp"

using json = nlohmann::json;
using namespace qrlab;

struct qrlab_map {
    PiecewiseMap map;
};

namespace {

thread_local std::string g_last_error;

qrlab_status status_of(ErrorCode c) {
    switch (c) {
        case ErrorCode::parse_error: return QRLAB_ERR_PARSE;
        case ErrorCode::undeclared_parameter: return QRLAB_ERR_UNDECLARED_PARAMETER;
        case ErrorCode::non_real_guard: return QRLAB_ERR_NON_REAL_GUARD;
        case ErrorCode::out_of_domain: return QRLAB_ERR_OUT_OF_DOMAIN;
        case ErrorCode::guard_gap: return QRLAB_ERR_GUARD_GAP;
        case ErrorCode::singularity: return QRLAB_ERR_SINGULARITY;
        case ErrorCode::boundary_band: return QRLAB_ERR_BOUNDARY_BAND;
        case ErrorCode::parameter_range: return QRLAB_ERR_PARAMETER_RANGE;
        case ErrorCode::precondition: return QRLAB_ERR_PRECONDITION;
        case ErrorCode::unresolved: return QRLAB_ERR_UNRESOLVED;
        case ErrorCode::bad_config: return QRLAB_ERR_BAD_CONFIG;
    }
    return QRLAB_ERR_UNKNOWN;
}

template <typename Fn>
qrlab_status guarded(Fn&& fn) {
    try {
        fn();
        g_last_error.clear();
        return QRLAB_OK;
    } catch (const Error& e) {
        g_last_error = e.what();
        return status_of(e.code());
    } catch (const json::exception& e) {
        g_last_error = e.what();
        return QRLAB_ERR_BAD_CONFIG;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return QRLAB_ERR_UNKNOWN;
    }
}

char* dup_string(const std::string& s) {
    char* out = new (std::nothrow) char[s.size() + 1];
    if (out) std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

json to_json(cplx z) { return json::array({z.real(), z.imag()}); }

cplx cplx_of(const json& j, const char* what) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        fail(ErrorCode::bad_config, std::string(what) + ": expected [re, im]");
    return cplx(j[0].get<double>(), j[1].get<double>());
}

// Config accessor that rejects unknown keys so typos fail loudly.
struct Config {
    json j;

    Config(const char* text, std::initializer_list<const char*> allowed) {
        j = (text && *text) ? json::parse(text) : json::object();
        if (!j.is_object()) fail(ErrorCode::bad_config, "config must be a JSON object");
        for (const auto& kv : j.items()) {
            bool ok = false;
            for (const char* k : allowed) ok = ok || kv.key() == k;
            if (!ok) fail(ErrorCode::bad_config, "unknown config key '" + kv.key() + "'");
        }
    }

    double num(const char* key, double dflt) const {
        return j.contains(key) ? j.at(key).get<double>() : dflt;
    }
    int integer(const char* key, int dflt) const {
        return j.contains(key) ? j.at(key).get<int>() : dflt;
    }
    std::string str(const char* key, const std::string& dflt) const {
        return j.contains(key) ? j.at(key).get<std::string>() : dflt;
    }
    Rect region(Rect dflt) const {
        if (!j.contains("region")) return dflt;
        const json& r = j.at("region");
        if (!r.is_array() || r.size() != 4)
            fail(ErrorCode::bad_config, "region: expected [x0, x1, y0, y1]");
        Rect out{r[0].get<double>(), r[1].get<double>(), r[2].get<double>(), r[3].get<double>()};
        if (out.x0 >= out.x1 || out.y0 >= out.y1)
            fail(ErrorCode::bad_config, "region: empty rectangle");
        return out;
    }
    cplx point(const char* key, cplx dflt) const {
        return j.contains(key) ? cplx_of(j.at(key), key) : dflt;
    }
};

json distortion_json(const DistortionReport& r) {
    json out;
    out["samples"] = r.samples;
    out["excluded"] = r.excluded;
    out["k_hat"] = r.k_hat;
    out["K_hat"] = r.K_hat;
    out["degenerate"] = r.degenerate;
    out["k_argmax"] = to_json(r.k_argmax);
    out["min_jacobian"] = r.min_jacobian;
    out["max_jacobian"] = r.max_jacobian;
    out["violations"] = r.violations;
    out["violation_fraction"] = r.violation_fraction;
    json worst = json::array();
    for (cplx w : r.worst_points) worst.push_back(to_json(w));
    out["worst_points"] = worst;
    json trail = json::array();
    for (const auto& s : r.refinement) trail.push_back({{"resolution", s.resolution}, {"k_hat", s.k_hat}});
    out["refinement"] = trail;
    if (!r.predicate.empty()) {
        out["predicate"] = r.predicate;
        out["lambda_sup"] = r.lambda_sup;
        out["lambda_undefined"] = r.lambda_undefined;
    }
    return out;
}

json index_json(const IndexResult& r) {
    json out;
    out["center"] = to_json(r.center);
    out["radius"] = r.radius;
    out["raw"] = r.raw;
    out["index"] = r.snapped;
    out["resolved"] = r.resolved;
    out["radius_retries"] = r.radius_retries;
    json trail = json::array();
    for (const auto& s : r.trail) trail.push_back({{"samples", s.samples}, {"raw", s.raw}});
    out["trail"] = trail;
    return out;
}

const char* seed_class_name(SeedClass c) {
    switch (c) {
        case SeedClass::elliptic: return "elliptic";
        case SeedClass::hyperbolic: return "hyperbolic";
        case SeedClass::transit: return "transit";
        case SeedClass::unresolved: return "unresolved";
    }
    return "?";
}

json sectors_json(const SectorSummary& s) {
    json out;
    out["center"] = to_json(s.center);
    out["ring_radius"] = s.ring_radius;
    out["n_e"] = s.n_e;
    out["n_h"] = s.n_h;
    out["unresolved"] = s.unresolved;
    out["predicted_index"] = s.predicted_index;
    out["counts_even"] = s.counts_even;
    out["winding_index"] = s.winding_index;
    out["agreement"] = s.agreement;
    out["resolved"] = s.resolved;
    json seeds = json::array();
    for (SeedClass c : s.seeds) seeds.push_back(seed_class_name(c));
    out["seeds"] = seeds;
    return out;
}

json run_op(const qrlab_map* handle, const std::string& op, const char* config) {
    json result;
    json effective;

    auto need_map = [&]() -> const PiecewiseMap& {
        if (!handle) fail(ErrorCode::bad_config, op + ": a map is required");
        return handle->map;
    };

    if (op == "analyze") {
        Config cfg(config, {"region", "grid", "predicate", "jobs", "refine"});
        Rect region = cfg.region({-1, 1, -1, 1});
        int grid = cfg.integer("grid", 256);
        int jobs = cfg.integer("jobs", 1);
        std::string predicate = cfg.str("predicate", "");
        bool refine = cfg.integer("refine", 1) != 0;
        result = distortion_json(
            distortion_sweep(need_map(), region, grid, predicate, jobs, refine));
        effective = {{"region", {region.x0, region.x1, region.y0, region.y1}},
                     {"grid", grid},
                     {"predicate", predicate},
                     {"jobs", jobs},
                     {"refine", refine}};
    } else if (op == "index") {
        Config cfg(config, {"center", "radius", "samples"});
        cplx center = cfg.point("center", 0.0);
        double radius = cfg.num("radius", 0.0);
        int samples = cfg.integer("samples", 256);
        result = index_json(local_index(need_map(), center, radius, samples));
        effective = {{"center", to_json(center)}, {"radius", radius}, {"samples", samples}};
    } else if (op == "sectors") {
        Config cfg(config, {"center", "seeds", "ring_radius", "rho", "R", "jobs"});
        cplx center = cfg.point("center", 0.0);
        int seeds = cfg.integer("seeds", 64);
        double ring = cfg.num("ring_radius", 0.5);
        int jobs = cfg.integer("jobs", 1);
        TraceConfig tc;
        tc.center = center;
        tc.R = cfg.num("R", 2.0);
        tc.rho = cfg.num("rho", 0.0);
        result = sectors_json(classify_sectors(need_map(), center, seeds, ring, tc, jobs));
        effective = {{"center", to_json(center)}, {"seeds", seeds}, {"ring_radius", ring},
                     {"rho", tc.rho},             {"R", tc.R},      {"jobs", jobs}};
    } else if (op == "portrait") {
        Config cfg(config, {"center", "seeds", "ring_radius", "R", "max_step"});
        cplx center = cfg.point("center", 0.0);
        int seeds = cfg.integer("seeds", 32);
        double ring = cfg.num("ring_radius", 0.5);
        TraceConfig tc;
        tc.center = center;
        tc.R = cfg.num("R", 2.0);
        tc.max_step = cfg.num("max_step", 0.05);
        const PiecewiseMap& m = need_map();
        std::vector<Trajectory> trajs;
        for (int i = 0; i < seeds; ++i) {
            double th = 2.0 * 3.14159265358979323846 * i / seeds;
            cplx seed = center + ring * cplx(std::cos(th), std::sin(th));
            trajs.push_back(trace(m, seed, true, tc));
            trajs.push_back(trace(m, seed, false, tc));
        }
        json verdicts = json::array();
        for (const auto& t : trajs) verdicts.push_back(verdict_name(t.verdict));
        result["verdicts"] = verdicts;
        result["svg"] = portrait_svg(trajs, center, ring, tc.R);
        result["csv"] = trajectories_csv(trajs);
        effective = {{"center", to_json(center)}, {"seeds", seeds}, {"ring_radius", ring},
                     {"R", tc.R},                 {"max_step", tc.max_step}};
    } else if (op == "collide") {
        Config cfg(config, {"region", "grid", "jobs"});
        Rect region = cfg.region({-1, 1, -1, 1});
        int grid = cfg.integer("grid", 256);
        int jobs = cfg.integer("jobs", 1);
        auto ws = find_collisions(need_map(), region, grid, jobs);
        json arr = json::array();
        for (const auto& w : ws) {
            arr.push_back({{"z1", to_json(w.z1)},
                           {"z2", to_json(w.z2)},
                           {"separation", w.separation},
                           {"image_distance", w.image_distance},
                           {"refinement_steps", w.refinement.size()}});
        }
        result["witnesses"] = arr;
        result["count"] = ws.size();
        result["csv"] = witnesses_csv(ws);
        effective = {{"region", {region.x0, region.x1, region.y0, region.y1}},
                     {"grid", grid},
                     {"jobs", jobs}};
    } else if (op == "potential") {
        Config cfg(config, {"region", "base", "anchors", "seed"});
        Rect region = cfg.region({-1, 1, -1, 1});
        cplx base = cfg.point("base", cplx(0.5 * (region.x0 + region.x1),
                                           0.5 * (region.y0 + region.y1)));
        int anchors = cfg.integer("anchors", 20);
        unsigned seed = unsigned(cfg.integer("seed", 0));
        const PiecewiseMap& m = need_map();
        Potential psi = reconstruct_potential(m, base, region);
        DichotomyReport rep = dichotomy_scan(m, region, anchors, seed);
        result["loop_residual"] = psi.loop_residual();
        result["uniform"] = rep.uniform;
        result["verdict"] = gauge_verdict_name(rep.verdict);
        json gauges = json::array();
        for (const auto& g : rep.gauges)
            gauges.push_back({{"anchor", to_json(g.anchor)},
                              {"verdict", gauge_verdict_name(g.verdict)}});
        result["gauges"] = gauges;
        if (rep.counterexample) {
            result["counterexample"] = {to_json(rep.counterexample->first),
                                        to_json(rep.counterexample->second)};
            json section = json::array();
            for (const auto& s : rep.section) section.push_back({{"t", s.t}, {"value", s.value}});
            result["section"] = section;
        }
        effective = {{"region", {region.x0, region.x1, region.y0, region.y1}},
                     {"base", to_json(base)},
                     {"anchors", anchors},
                     {"seed", seed}};
    } else if (op == "hessian3d") {
        Config cfg(config, {"samples", "seed"});
        int samples = cfg.integer("samples", 1000);
        unsigned seed = unsigned(cfg.integer("seed", 0));
        Hessian3Report r = hessian_example_3d(samples, seed);
        result = {{"samples", r.samples},
                  {"max_det_mismatch", r.max_det_mismatch},
                  {"min_det_d2u", r.min_det_d2u},
                  {"max_det_d2u", r.max_det_d2u},
                  {"min_det_d2psi", r.min_det_d2psi},
                  {"max_det_d2psi", r.max_det_d2psi},
                  {"max_quotient", r.max_quotient},
                  {"max_entry", r.max_entry},
                  {"max_grad_mismatch", r.max_grad_mismatch},
                  {"max_homogeneity_residual", r.max_homogeneity_residual}};
        effective = {{"samples", samples}, {"seed", seed}};
    } else if (op == "homotopy") {
        Config cfg(config, {"region", "grid", "ts", "jobs"});
        Rect region = cfg.region({-1, 1, -1, 1});
        int grid = cfg.integer("grid", 96);
        int jobs = cfg.integer("jobs", 1);
        std::vector<double> ts;
        if (cfg.j.contains("ts"))
            for (const auto& t : cfg.j.at("ts")) ts.push_back(t.get<double>());
        else
            for (int i = 0; i <= 9; ++i) ts.push_back(0.1 * i);
        HomotopyReport rep = homotopy_distortion(need_map(), region, grid, ts, jobs);
        json rows = json::array();
        for (const auto& row : rep.rows)
            rows.push_back({{"t", row.t},
                            {"k_hat", row.k_hat},
                            {"max_formula_residual", row.max_formula_residual}});
        result = {{"samples", rep.samples},
                  {"excluded", rep.excluded},
                  {"rows", rows},
                  {"monotone_nonincreasing", rep.monotone_nonincreasing}};
        effective = {{"region", {region.x0, region.x1, region.y0, region.y1}},
                     {"grid", grid},
                     {"ts", ts},
                     {"jobs", jobs}};
    } else if (op == "bilipschitz") {
        Config cfg(config, {"region", "lambda", "K", "cloud", "jobs"});
        if (!cfg.j.contains("lambda") || !cfg.j.contains("K"))
            fail(ErrorCode::bad_config, "bilipschitz: lambda and K are required");
        Rect region = cfg.region({-1, 1, -1, 1});
        double lambda = cfg.num("lambda", 0.0), K = cfg.num("K", 1.0);
        int cloud = cfg.integer("cloud", 48);
        int jobs = cfg.integer("jobs", 1);
        BiLipschitzCheck chk = bilipschitz_check(need_map(), region, lambda, K, cloud, jobs);
        result = {{"lambda", chk.lambda},
                  {"K", chk.K},
                  {"pairs", chk.pairs},
                  {"min_ratio", chk.min_ratio},
                  {"bound", chk.bound},
                  {"argmin", {to_json(chk.argmin_p), to_json(chk.argmin_q)}},
                  {"pass", chk.pass}};
        effective = {{"region", {region.x0, region.x1, region.y0, region.y1}},
                     {"lambda", lambda},
                     {"K", K},
                     {"cloud", cloud},
                     {"jobs", jobs}};
    } else if (op == "verify") {
        Config cfg(config, {"only", "jobs", "seed"});
        std::string only = cfg.str("only", "");
        int jobs = cfg.integer("jobs", 1);
        unsigned seed = unsigned(cfg.integer("seed", 0));
        auto results = run_verification(only, jobs, seed);
        result = verification_report(results);
        result["table"] = verification_table(results);
        effective = {{"only", only}, {"jobs", jobs}, {"seed", seed}};
    } else {
        fail(ErrorCode::bad_config, "unknown operation '" + op + "'");
    }

    json report;
    report["schema_version"] = 1;
    report["kind"] = op;
    report["config"] = effective;
    if (handle) report["map"] = handle->map.name();
    report["result"] = result;
    return report;
}

} // namespace

extern "C" {

const char* qrlab_version(void) { return "qrlab 1.0.0"; }

const char* qrlab_last_error(void) { return g_last_error.c_str(); }

qrlab_status qrlab_map_from_source(const char* source, qrlab_map** out) {
    if (!source || !out) {
        g_last_error = "null argument";
        return QRLAB_ERR_BAD_CONFIG;
    }
    *out = nullptr;
    return guarded([&] { *out = new qrlab_map{parse_map(source)}; });
}

qrlab_status qrlab_map_from_fixture(const char* spec, qrlab_map** out) {
    if (!spec || !out) {
        g_last_error = "null argument";
        return QRLAB_ERR_BAD_CONFIG;
    }
    *out = nullptr;
    return guarded([&] {
        FixtureSpec fs = parse_fixture_spec(spec);
        *out = new qrlab_map{make_fixture(fs.name, fs.params)};
    });
}

void qrlab_map_free(qrlab_map* map) { delete map; }

qrlab_status qrlab_map_eval(const qrlab_map* map, double re, double im, double out_f[2]) {
    if (!map || !out_f) {
        g_last_error = "null argument";
        return QRLAB_ERR_BAD_CONFIG;
    }
    return guarded([&] {
        cplx f = map->map.eval(cplx(re, im));
        out_f[0] = f.real();
        out_f[1] = f.imag();
    });
}

qrlab_status qrlab_map_jet(const qrlab_map* map, double re, double im, double out_jet[6]) {
    if (!map || !out_jet) {
        g_last_error = "null argument";
        return QRLAB_ERR_BAD_CONFIG;
    }
    return guarded([&] {
        WirtingerJet j = jet_autodiff(map->map, cplx(re, im));
        out_jet[0] = j.f.real();
        out_jet[1] = j.f.imag();
        out_jet[2] = j.fz.real();
        out_jet[3] = j.fz.imag();
        out_jet[4] = j.fzbar.real();
        out_jet[5] = j.fzbar.imag();
    });
}

qrlab_status qrlab_map_print(const qrlab_map* map, char** out_source) {
    if (!map || !out_source) {
        g_last_error = "null argument";
        return QRLAB_ERR_BAD_CONFIG;
    }
    return guarded([&] { *out_source = dup_string(map->map.print()); });
}

qrlab_status qrlab_run(const qrlab_map* map, const char* op, const char* config_json,
                       char** out_report_json) {
    if (!op || !out_report_json) {
        g_last_error = "null argument";
        return QRLAB_ERR_BAD_CONFIG;
    }
    *out_report_json = nullptr;
    return guarded([&] {
        json report = run_op(map, op, config_json);
        *out_report_json = dup_string(report.dump(2) + "\n");
    });
}

void qrlab_free_string(char* s) { delete[] s; }

} // extern "C"
