#include <doctest.h>

#include <cmath>
#include <string>

#include <json.hpp>

#include "qrlab.h"

using nlohmann::json;

namespace {

struct MapHandle {
    qrlab_map* m = nullptr;
    ~MapHandle() { qrlab_map_free(m); }
};

std::string run(qrlab_map* m, const char* op, const char* cfg) {
    char* rep = nullptr;
    qrlab_status st = qrlab_run(m, op, cfg, &rep);
    REQUIRE(st == QRLAB_OK);
    std::string out = rep;
    qrlab_free_string(rep);
    return out;
}

} // namespace

TEST_CASE("c api: construct, eval, jet, print") {
    MapHandle h;
    REQUIRE(qrlab_map_from_fixture("fixture:roti", &h.m) == QRLAB_OK);

    double f[2];
    REQUIRE(qrlab_map_eval(h.m, 1.0, 0.0, f) == QRLAB_OK);
    CHECK(f[0] == 0.0);
    CHECK(f[1] == 1.0);

    double jet[6];
    REQUIRE(qrlab_map_jet(h.m, 0.3, -0.2, jet) == QRLAB_OK);
    CHECK(jet[2] == 0.0); // fz = i
    CHECK(jet[3] == 1.0);
    CHECK(jet[4] == 0.0); // fzbar = 0
    CHECK(jet[5] == 0.0);

    char* src = nullptr;
    REQUIRE(qrlab_map_print(h.m, &src) == QRLAB_OK);
    qrlab_map* back = nullptr;
    REQUIRE(qrlab_map_from_source(src, &back) == QRLAB_OK);
    double g[2];
    REQUIRE(qrlab_map_eval(back, 0.7, 0.4, g) == QRLAB_OK);
    CHECK(g[0] == -0.4);
    CHECK(g[1] == 0.7);
    qrlab_map_free(back);
    qrlab_free_string(src);
}

TEST_CASE("c api: errors set status and message") {
    qrlab_map* m = nullptr;
    CHECK(qrlab_map_from_source("piece: 3 ->", &m) == QRLAB_ERR_PARSE);
    CHECK(m == nullptr);
    CHECK(std::string(qrlab_last_error()) != "");

    CHECK(qrlab_map_from_fixture("branch?eps=9", &m) == QRLAB_ERR_PARAMETER_RANGE);
    CHECK(qrlab_map_from_fixture("grad3d", &m) == QRLAB_ERR_BAD_CONFIG);

    MapHandle disk;
    REQUIRE(qrlab_map_from_source("domain: disk(0, 1)\npiece: true -> z", &disk.m) == QRLAB_OK);
    double f[2];
    CHECK(qrlab_map_eval(disk.m, 5.0, 0.0, f) == QRLAB_ERR_OUT_OF_DOMAIN);
}

TEST_CASE("c api: analyze report") {
    MapHandle h;
    REQUIRE(qrlab_map_from_fixture("branch?eps=2", &h.m) == QRLAB_OK);
    json rep = json::parse(run(h.m, "analyze", R"({"region": [-2, 2, -2, 2], "grid": 128})"));
    CHECK(rep["schema_version"] == 1);
    CHECK(rep["kind"] == "analyze");
    double k = rep["result"]["k_hat"].get<double>();
    CHECK(std::abs(k - 1.0 / std::sqrt(5.0)) < 1e-6);
}

TEST_CASE("c api: unknown config key rejected") {
    MapHandle h;
    REQUIRE(qrlab_map_from_fixture("identity", &h.m) == QRLAB_OK);
    char* rep = nullptr;
    CHECK(qrlab_run(h.m, "analyze", R"({"grd": 32})", &rep) == QRLAB_ERR_BAD_CONFIG);
    CHECK(rep == nullptr);
    CHECK(qrlab_run(h.m, "frobnicate", "{}", &rep) == QRLAB_ERR_BAD_CONFIG);
}

TEST_CASE("c api: index and sectors") {
    MapHandle h;
    REQUIRE(qrlab_map_from_fixture("grad2d", &h.m) == QRLAB_OK);
    json rep = json::parse(run(h.m, "index", R"({"center": [0, 0], "radius": 0.3})"));
    CHECK(rep["result"]["index"] == -3);
    CHECK(rep["result"]["resolved"] == true);

    MapHandle p;
    REQUIRE(qrlab_map_from_fixture("power?n=2", &p.m) == QRLAB_OK);
    json sec = json::parse(run(p.m, "sectors", R"({"jobs": 4})"));
    CHECK(sec["result"]["n_e"] == 2);
    CHECK(sec["result"]["n_h"] == 0);
    CHECK(sec["result"]["agreement"] == true);
}

TEST_CASE("c api: portrait artifacts") {
    MapHandle h;
    REQUIRE(qrlab_map_from_fixture("roti", &h.m) == QRLAB_OK);
    json rep = json::parse(run(h.m, "portrait", R"({"seeds": 8})"));
    std::string svg = rep["result"]["svg"].get<std::string>();
    CHECK(svg.find("<svg") != std::string::npos);
    std::string csv = rep["result"]["csv"].get<std::string>();
    CHECK(csv.find("seed_re,seed_im,direction,t,x,y") == 0);
}

TEST_CASE("c api: run without a map only for map-free ops") {
    char* rep = nullptr;
    CHECK(qrlab_run(nullptr, "analyze", "{}", &rep) == QRLAB_ERR_BAD_CONFIG);
    json h = json::parse(run(nullptr, "hessian3d", R"({"samples": 100})"));
    CHECK(h["result"]["samples"] == 100);
    CHECK(h["result"]["max_det_mismatch"].get<double>() <= 1e-9);
}

TEST_CASE("c api: byte-identical reports across jobs") {
    MapHandle h;
    REQUIRE(qrlab_map_from_fixture("branch?eps=1", &h.m) == QRLAB_OK);
    std::string a = run(h.m, "analyze", R"({"region": [-2, 2, -2, 2], "grid": 96, "jobs": 1})");
    std::string b = run(h.m, "analyze", R"({"region": [-2, 2, -2, 2], "grid": 96, "jobs": 8})");
    // jobs is part of the effective config header; compare result bodies.
    CHECK(json::parse(a)["result"].dump() == json::parse(b)["result"].dump());
}
