#include <doctest.h>

#include <cmath>

#include "qrlab/error.hpp"
#include "qrlab/fixtures.hpp"
#include "qrlab/flow.hpp"
#include "qrlab/parse.hpp"

using namespace qrlab;

namespace {
constexpr double kTwoPi = 6.283185307179586;

std::vector<cplx> unit_circle(int n, double r = 1.0) {
    std::vector<cplx> c;
    for (int k = 0; k < n; ++k) {
        double th = kTwoPi * k / n;
        c.push_back(r * cplx(std::cos(th), std::sin(th)));
    }
    return c;
}
} // namespace

TEST_CASE("trace verdicts on linear fields") {
    SUBCASE("z' = z backward flows into the origin") {
        Trajectory t = trace(make_fixture("identity"), cplx(0.5, 0), false);
        CHECK(t.verdict == Verdict::reaches_critical_point);
    }
    SUBCASE("z' = z forward exits") {
        Trajectory t = trace(make_fixture("identity"), cplx(0.5, 0), true);
        CHECK(t.verdict == Verdict::exits_annulus);
    }
    SUBCASE("z' = iz orbits and closes up after one period") {
        Trajectory t = trace(make_fixture("roti"), cplx(1, 0), true);
        CHECK(t.verdict == Verdict::closes_up);
        CHECK(std::abs(t.end_time - kTwoPi) < 0.01);
    }
    SUBCASE("saddle field reaches 0 along the stable axis") {
        PiecewiseMap saddle = make_fixture("conjpower", {{"n", 1.0}});
        Trajectory t = trace(saddle, cplx(0, 0.5), true);
        CHECK(t.verdict == Verdict::reaches_critical_point);
    }
    SUBCASE("seed outside the annulus is an error") {
        CHECK_THROWS_AS(trace(make_fixture("identity"), cplx(5, 0), true), Error);
    }
}

TEST_CASE("time reversal: forward trace of f equals backward trace of -f") {
    Trajectory a = trace(make_fixture("roti"), cplx(1, 0), true);
    PiecewiseMap neg = parse_map("piece: true -> -(i*z)");
    Trajectory b = trace(neg, cplx(1, 0), false);
    REQUIRE(a.points.size() == b.points.size());
    for (size_t i = 0; i < a.points.size(); ++i)
        CHECK(std::abs(a.points[i].z - b.points[i].z) < 1e-9);
}

TEST_CASE("integrator order: error shrinks at embedded 4/5 rate") {
    // one period of z' = iz; global error at T = 2pi under two tolerances
    auto orbit_error = [&](double tol) {
        TraceConfig cfg;
        cfg.tolerance = tol;
        cfg.max_steps = 2000000;
        PiecewiseMap rot = make_fixture("roti");
        Trajectory t = trace(rot, cplx(1, 0), true, cfg);
        REQUIRE(t.verdict == Verdict::closes_up);
        return std::abs(t.end_time - kTwoPi);
    };
    double coarse = orbit_error(1e-6);
    double fine = orbit_error(1e-6 / 32.0);
    CHECK(fine * 16.0 <= coarse + 1e-12);
}

TEST_CASE("sector classification vs the winding index") {
    struct Case {
        const char* name;
        int ne, nh, index;
    };
    for (Case c : {Case{"identity", 0, 0, 1}, Case{"conjpower", 0, 4, -1},
                   Case{"grad2d", 0, 8, -3}}) {
        CAPTURE(c.name);
        TraceConfig tc;
        // the gradient field's separatrices shear transversally; a looser
        // reach threshold keeps on-ray trajectories from being blown off
        if (std::string(c.name) == "grad2d") tc.rho = 0.02;
        SectorSummary s = classify_sectors(make_fixture(c.name), 0.0, 64, 0.5, tc);
        CHECK(s.n_e == c.ne);
        CHECK(s.n_h == c.nh);
        CHECK(s.predicted_index == double(c.index));
        CHECK(s.winding_index == c.index);
        CHECK(s.agreement);
        CHECK(s.resolved);
    }
}

TEST_CASE("sector classification of z^2 and z^3: elliptic petals") {
    SectorSummary s = classify_sectors(make_fixture("power", {{"n", 2.0}}), 0.0);
    CHECK(s.n_e == 2);
    CHECK(s.n_h == 0);
    CHECK(s.predicted_index == 2.0);
    CHECK(s.winding_index == 2);
    CHECK(s.agreement);

    s = classify_sectors(make_fixture("power", {{"n", 3.0}}), 0.0);
    CHECK(s.n_e == 4);
    CHECK(s.n_h == 0);
    CHECK(s.predicted_index == 3.0);
    CHECK(s.winding_index == 3);
    CHECK(s.agreement);
}

TEST_CASE("sector precondition: zero on the seed ring") {
    PiecewiseMap m = parse_map("piece: true -> z*(z-0.5)");
    CHECK_THROWS_AS(classify_sectors(m, 0.0, 64, 0.5), Error);
}

TEST_CASE("green identity on analytic circles") {
    auto rel_residual = [](const LoopIntegralReport& r) {
        return r.residual / (1.0 + std::abs(r.contour_fdzbar));
    };
    std::vector<cplx> circle = unit_circle(2048);
    SUBCASE("f = z") {
        LoopIntegralReport r = green_identity(make_fixture("identity"), circle);
        CHECK(std::abs(r.area_fz - cplx(3.14159265358979, 0)) < 1e-4);
        CHECK(rel_residual(r) < 1e-6);
    }
    SUBCASE("f = z^2") {
        LoopIntegralReport r = green_identity(make_fixture("power", {{"n", 2.0}}), circle);
        CHECK(std::abs(r.area_fz) < 1e-9);
        CHECK(rel_residual(r) < 1e-6);
    }
    SUBCASE("f = iz") {
        LoopIntegralReport r = green_identity(make_fixture("roti"), circle);
        CHECK(std::abs(r.area_fz - cplx(0, 3.14159265358979)) < 1e-4);
        CHECK(rel_residual(r) < 1e-6);
        CHECK(std::abs(r.area_re_fz) < 1e-12);
    }
    SUBCASE("constant map") {
        PiecewiseMap c = parse_map("piece: true -> 2-3i");
        LoopIntegralReport r = green_identity(c, circle);
        CHECK(std::abs(r.contour_fdzbar) < 1e-12);
        CHECK(std::abs(r.area_fz) < 1e-12);
    }
    SUBCASE("clockwise input is reoriented") {
        std::vector<cplx> cw(circle.rbegin(), circle.rend());
        LoopIntegralReport r = green_identity(make_fixture("identity"), cw);
        CHECK(r.reoriented);
        CHECK(r.area_fz.real() > 3.0);
    }
    SUBCASE("figure-eight rejected") {
        std::vector<cplx> eight{{-1, -1}, {1, 1}, {1, -1}, {-1, 1}};
        CHECK_THROWS_AS(green_identity(make_fixture("identity"), eight), Error);
    }
}

TEST_CASE("green identity along the traced orbit of iz") {
    TraceConfig cfg;
    cfg.max_step = 0.002;
    Trajectory orbit = trace(make_fixture("roti"), cplx(1, 0), true, cfg);
    REQUIRE(orbit.verdict == Verdict::closes_up);
    LoopIntegralReport r = green_identity(make_fixture("roti"), orbit);
    // along a trajectory the contour integral is the real positive time
    // integral of |f|^2
    CHECK(std::abs(r.contour_fdzbar - kTwoPi) < 1e-5);
    CHECK(std::abs(r.contour_fdzbar.imag()) < 1e-6 * kTwoPi);
    CHECK(r.has_time_integral);
    CHECK(std::abs(r.time_integral - kTwoPi) < 1e-5);
    CHECK(std::abs(r.contour_fdzbar.real() - r.time_integral) < 1e-6 * kTwoPi);
    CHECK(std::abs(r.area_re_fz) < 1e-6);
    CHECK(r.unresolved_nodes == 0);
}

TEST_CASE("elliptic loop search") {
    SUBCASE("re fz >= 1/2 near 0: no closed orbits") {
        PiecewiseMap m = parse_map("piece: true -> z + z^2/2");
        EllipticLoopReport r =
            elliptic_loop_contradiction(m, 0.0, {-0.45, 0.45, -0.45, 0.45}, 64, 0.3);
        CHECK(r.hypothesis_holds);
        CHECK(r.lambda >= 0.5);
        CHECK(r.closed_found == 0);
        CHECK(!r.counterexample);
    }
    SUBCASE("f = iz: closed orbits but the hypothesis fails") {
        EllipticLoopReport r = elliptic_loop_contradiction(make_fixture("roti"), 0.0,
                                                           {-0.45, 0.45, -0.45, 0.45}, 16, 0.3);
        CHECK(!r.hypothesis_holds);
        CHECK(r.closed_found > 0);
        CHECK(!r.counterexample);
        CHECK(!r.loop_lower_bounds.empty());
    }
    SUBCASE("punctured-disk boundary term") {
        PiecewiseMap m = parse_map("domain: disk(0+0i, 1.2)\npiece: true -> z");
        EllipticLoopReport r =
            elliptic_loop_contradiction(m, 0.0, {-0.9, 0.9, -0.9, 0.9}, 8, 0.3, {}, 1e-3);
        CHECK(r.inner_bound == doctest::Approx(3.14159265358979 * 1e-3 * r.sup_f));
    }
}

TEST_CASE("svg and csv artifacts") {
    Trajectory t = trace(make_fixture("roti"), cplx(1, 0), true);
    std::string svg = portrait_svg({t}, 0.0, 0.5, 2.0);
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(svg.find("traj-0") != std::string::npos);
    CHECK(svg.find("#2ca02c") != std::string::npos); // closes-up color
    std::string csv = trajectories_csv({t});
    CHECK(csv.rfind("seed_re,seed_im,direction,t,x,y", 0) == 0);
    CHECK(csv.find("forward") != std::string::npos);
}
