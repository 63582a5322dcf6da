// qrlab command-line front end. Thin shell over the C API: parses flags,
// builds the JSON config, runs the operation, writes reports and artifacts.
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qrlab.h"

using nlohmann::json;

namespace {

struct CommonFlags {
    std::string map_spec;
    std::string region;
    std::string center;
    std::string out_dir;
    std::string assert_expr;
    std::vector<std::string> tolerances;
    int grid = 0;
    double radius = 0.0;
    int jobs = 1;
    int seed = 0;
};

void add_common(CLI::App* cmd, CommonFlags& fl, bool needs_map) {
    auto* m = cmd->add_option("--map", fl.map_spec, "map source file or fixture:name?p=v,...");
    if (needs_map) m->required();
    cmd->add_option("--region", fl.region, "region as x0:x1,y0:y1");
    cmd->add_option("--center", fl.center, "point as re,im");
    cmd->add_option("--grid", fl.grid, "grid resolution per axis");
    cmd->add_option("--radius", fl.radius, "circle radius");
    cmd->add_option("--jobs", fl.jobs, "worker count");
    cmd->add_option("--seed", fl.seed, "sampling seed");
    cmd->add_option("--out", fl.out_dir, "output directory (default env QRLAB_OUT or stdout)");
    cmd->add_option("--assert", fl.assert_expr, "predicate to assert (exit 1 on violations)");
    cmd->add_option("--tolerance", fl.tolerances, "key=value config override")->take_all();
}

int usage_error(const std::string& msg) {
    std::fprintf(stderr, "qrlab: %s\n", msg.c_str());
    return 2;
}

bool parse_pair(const std::string& text, char sep, double& a, double& b) {
    std::istringstream is(text);
    char c;
    return bool(is >> a >> c) && c == sep && bool(is >> b) && is.eof();
}

// "x0:x1,y0:y1" -> [x0, x1, y0, y1]
bool parse_region(const std::string& text, json& out) {
    auto comma = text.find(',');
    if (comma == std::string::npos) return false;
    double x0, x1, y0, y1;
    if (!parse_pair(text.substr(0, comma), ':', x0, x1)) return false;
    if (!parse_pair(text.substr(comma + 1), ':', y0, y1)) return false;
    out = {x0, x1, y0, y1};
    return true;
}

int build_config(const CommonFlags& fl, json& cfg) {
    if (!fl.region.empty()) {
        json r;
        if (!parse_region(fl.region, r)) return usage_error("bad --region, want x0:x1,y0:y1");
        cfg["region"] = r;
    }
    if (!fl.center.empty()) {
        double re, im;
        if (!parse_pair(fl.center, ',', re, im)) return usage_error("bad --center, want re,im");
        cfg["center"] = {re, im};
    }
    if (fl.grid > 0) cfg["grid"] = fl.grid;
    if (fl.radius > 0) cfg["radius"] = fl.radius;
    for (const std::string& t : fl.tolerances) {
        auto eq = t.find('=');
        if (eq == std::string::npos) return usage_error("bad --tolerance, want key=value");
        try {
            cfg[t.substr(0, eq)] = std::stod(t.substr(eq + 1));
        } catch (...) {
            return usage_error("bad --tolerance value in '" + t + "'");
        }
    }
    return 0;
}

int load_map(const std::string& spec, qrlab_map** out) {
    qrlab_status st;
    if (spec.rfind("fixture:", 0) == 0) {
        st = qrlab_map_from_fixture(spec.c_str(), out);
    } else {
        std::ifstream in(spec);
        if (!in) return usage_error("cannot open map file '" + spec + "'");
        std::stringstream ss;
        ss << in.rdbuf();
        st = qrlab_map_from_source(ss.str().c_str(), out);
    }
    if (st != QRLAB_OK) return usage_error(qrlab_last_error());
    return 0;
}

int write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) return usage_error("cannot write '" + path + "'");
    out << content;
    return 0;
}

// Pull embedded artifacts (svg/csv) out of the report into files next to it.
int emit(const std::string& op, const std::string& report_text, const std::string& out_dir) {
    if (out_dir.empty()) {
        std::fputs(report_text.c_str(), stdout);
        return 0;
    }
    json rep = json::parse(report_text);
    for (const char* kind : {"svg", "csv"}) {
        if (rep["result"].contains(kind)) {
            int rc = write_file(out_dir + "/" + op + "." + kind,
                                rep["result"][kind].get<std::string>());
            if (rc) return rc;
        }
    }
    return write_file(out_dir + "/" + op + ".json", rep.dump(2) + "\n");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"quasiregular map analysis toolkit"};
    app.require_subcommand(1);

    const char* ops[] = {"analyze", "index",     "sectors",  "portrait",    "collide",
                         "potential", "hessian3d", "homotopy", "bilipschitz", "verify"};
    struct Sub {
        CLI::App* cmd;
        CommonFlags fl;
        std::string only;
        double lambda = 0.0, K = 0.0;
    };
    std::vector<Sub> subs(10);
    for (int i = 0; i < 10; ++i) {
        bool needs_map = std::string(ops[i]) != "hessian3d" && std::string(ops[i]) != "verify";
        subs[i].cmd = app.add_subcommand(ops[i]);
        add_common(subs[i].cmd, subs[i].fl, needs_map);
        if (std::string(ops[i]) == "verify")
            subs[i].cmd->add_option("--only", subs[i].only, "run only criteria with this tag");
        if (std::string(ops[i]) == "bilipschitz") {
            subs[i].cmd->add_option("--lambda", subs[i].lambda, "Jacobian floor sqrt")->required();
            subs[i].cmd->add_option("--K", subs[i].K, "distortion bound")->required();
        }
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) ? 2 : 0;
    }

    int which = -1;
    for (int i = 0; i < 10; ++i)
        if (subs[i].cmd->parsed()) which = i;
    if (which < 0) return usage_error("missing subcommand");
    const std::string op = ops[which];
    Sub& sub = subs[which];

    json cfg = json::object();
    int rc = build_config(sub.fl, cfg);
    if (rc) return rc;
    if (op == "index" && cfg.contains("grid")) cfg.erase("grid");
    if (op == "sectors" || op == "portrait") {
        if (cfg.contains("grid")) {
            cfg["seeds"] = cfg["grid"];
            cfg.erase("grid");
        }
        if (cfg.contains("radius")) {
            cfg["ring_radius"] = cfg["radius"];
            cfg.erase("radius");
        }
    }
    if (op == "analyze" && !sub.fl.assert_expr.empty()) cfg["predicate"] = sub.fl.assert_expr;
    if (op == "potential" || op == "hessian3d" || op == "collide" || op == "homotopy") {
        if (cfg.contains("radius")) cfg.erase("radius");
    }
    if (op == "hessian3d" && cfg.contains("grid")) {
        cfg["samples"] = cfg["grid"];
        cfg.erase("grid");
    }
    if (op == "bilipschitz") {
        cfg["lambda"] = sub.lambda;
        cfg["K"] = sub.K;
        if (cfg.contains("grid")) {
            cfg["cloud"] = cfg["grid"];
            cfg.erase("grid");
        }
    }
    if (op == "verify") {
        if (!sub.only.empty()) cfg["only"] = sub.only;
        cfg["seed"] = sub.fl.seed;
        cfg["jobs"] = sub.fl.jobs;
    } else if (op == "potential") {
        cfg["seed"] = sub.fl.seed;
    } else if (op == "hessian3d") {
        cfg["seed"] = sub.fl.seed;
    } else if (op == "analyze" || op == "sectors" || op == "collide" || op == "homotopy" ||
               op == "bilipschitz") {
        cfg["jobs"] = sub.fl.jobs;
    }

    qrlab_map* map = nullptr;
    if (!sub.fl.map_spec.empty()) {
        rc = load_map(sub.fl.map_spec, &map);
        if (rc) return rc;
    }

    char* report = nullptr;
    qrlab_status st = qrlab_run(map, op.c_str(), cfg.dump().c_str(), &report);
    if (st != QRLAB_OK) {
        std::fprintf(stderr, "qrlab: %s\n", qrlab_last_error());
        qrlab_map_free(map);
        return (st == QRLAB_ERR_BAD_CONFIG || st == QRLAB_ERR_PARSE) ? 2 : 1;
    }
    std::string report_text = report;
    qrlab_free_string(report);
    qrlab_map_free(map);

    std::string out_dir = sub.fl.out_dir;
    if (out_dir.empty()) {
        const char* env = std::getenv("QRLAB_OUT");
        if (env && *env) out_dir = env;
    }
    rc = emit(op, report_text, out_dir);
    if (rc) return rc;

    json rep = json::parse(report_text);
    if (op == "verify") {
        std::fputs(rep["result"]["table"].get<std::string>().c_str(), stderr);
        if (!rep["result"]["all_pass"].get<bool>()) return 1;
    }
    if (op == "analyze" && !sub.fl.assert_expr.empty() &&
        rep["result"]["violations"].get<long long>() > 0)
        return 1;
    if (op == "bilipschitz" && !rep["result"]["pass"].get<bool>()) return 1;
    return 0;
}
