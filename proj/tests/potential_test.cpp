#include <doctest.h>

#include <cmath>

#include "qrlab/error.hpp"
#include "qrlab/fixtures.hpp"
#include "qrlab/parse.hpp"
#include "qrlab/potential.hpp"
#include "qrlab/sampling.hpp"

using namespace qrlab;

TEST_CASE("potential of f = iz is -|z|^2/2") {
    PiecewiseMap rot = make_fixture("roti");
    Potential psi = reconstruct_potential(rot, 0.0, {-1, 1, -1, 1});
    CHECK(psi.loop_residual() <= 1e-8);
    Halton seq(4);
    for (int i = 0; i < 50; ++i) {
        cplx p = seq.next({-1, 1, -1, 1});
        CHECK(psi.eval(p) == doctest::Approx(-0.5 * std::norm(p)).epsilon(1e-8));
    }
    CHECK(psi.eval(0.0) == 0.0);
}

TEST_CASE("potential of a constant field f = ic is -c x") {
    PiecewiseMap m = parse_map("param c = 1.5\npiece: true -> i*c");
    Potential psi = reconstruct_potential(m, 0.0, {-1, 1, -1, 1});
    CHECK(psi.eval(cplx(0.8, -0.3)) == doctest::Approx(-1.5 * 0.8).epsilon(1e-10));
}

TEST_CASE("potential of f = i conj(z) comes out as (y^2 - x^2)/2") {
    PiecewiseMap m = parse_map("piece: true -> i*conj(z)");
    Potential psi = reconstruct_potential(m, 0.0, {-1, 1, -1, 1});
    Halton seq(9);
    for (int i = 0; i < 50; ++i) {
        cplx p = seq.next({-1, 1, -1, 1});
        double want = 0.5 * (p.imag() * p.imag() - p.real() * p.real());
        CHECK(psi.eval(p) == doctest::Approx(want).epsilon(1e-8));
    }
}

TEST_CASE("finite-difference gradient of psi matches (-v, u)") {
    PiecewiseMap rot = make_fixture("roti");
    Potential psi = reconstruct_potential(rot, 0.0, {-1, 1, -1, 1});
    Halton seq(6);
    const double h = 1e-5;
    for (int i = 0; i < 100; ++i) {
        cplx p = seq.next({-0.9, 0.9, -0.9, 0.9});
        double px = (psi.eval(p + h) - psi.eval(p - h)) / (2 * h);
        double py = (psi.eval(p + cplx(0, h)) - psi.eval(p - cplx(0, h))) / (2 * h);
        cplx f = rot.eval(p);
        CHECK(std::abs(px - (-f.imag())) < 1e-4);
        CHECK(std::abs(py - f.real()) < 1e-4);
    }
}

TEST_CASE("hypothesis violation is rejected") {
    CHECK_THROWS_AS(reconstruct_potential(make_fixture("identity"), 0.0, {-1, 1, -1, 1}),
                    Error);
}

TEST_CASE("taylor gauge verdicts") {
    PiecewiseMap rot = make_fixture("roti");
    Potential psi = reconstruct_potential(rot, 0.0, {-2, 2, -2, 2});
    SUBCASE("f = iz at the origin: strictly negative") {
        TaylorGauge g = taylor_gauge_test(psi, 0.0);
        CHECK(g.verdict == GaugeVerdict::negative);
    }
    SUBCASE("f = iz at (1,1): concavity is anchor independent") {
        TaylorGauge g = taylor_gauge_test(psi, cplx(1, 1));
        CHECK(g.verdict == GaugeVerdict::negative);
    }
    SUBCASE("saddle potential: mixed") {
        PiecewiseMap saddle = make_fixture("conjpower", {{"n", 1.0}});
        Potential sp = reconstruct_potential(saddle, 0.0, {-1, 1, -1, 1});
        TaylorGauge g = taylor_gauge_test(sp, 0.0);
        CHECK(g.verdict == GaugeVerdict::mixed);
    }
}

TEST_CASE("dichotomy scan") {
    SUBCASE("f = iz: uniformly negative over 20 anchors") {
        DichotomyReport r = dichotomy_scan(make_fixture("roti"), {-1, 1, -1, 1});
        CHECK(r.uniform);
        CHECK(r.verdict == GaugeVerdict::negative);
        CHECK(!r.counterexample.has_value());
    }
    SUBCASE("f = -iz: uniformly positive") {
        PiecewiseMap m = parse_map("piece: true -> -i*z");
        DichotomyReport r = dichotomy_scan(m, {-1, 1, -1, 1});
        CHECK(r.uniform);
        CHECK(r.verdict == GaugeVerdict::positive);
    }
    SUBCASE("saddle: counterexample pair with exported section") {
        PiecewiseMap saddle = make_fixture("conjpower", {{"n", 1.0}});
        DichotomyReport r = dichotomy_scan(saddle, {-1, 1, -1, 1});
        CHECK(!r.uniform);
        CHECK(r.counterexample.has_value());
        CHECK(r.section.size() == 33);
    }
    SUBCASE("non-convex region is rejected") {
        PiecewiseMap m = parse_map(
            "domain: polygon(0+0i; 2+0i; 2+0.9i; 1.1+0.9i; 1.1+2i; 0+2i)\n"
            "piece: true -> i*z");
        CHECK_THROWS_AS(dichotomy_scan(m, {0, 2, 0, 2}), Error);
    }
}

TEST_CASE("3-d Hessian example report") {
    Hessian3Report r = hessian_example_3d(1000);
    CHECK(r.samples == 1000);
    CHECK(r.max_det_mismatch <= 1e-9);
    CHECK(r.min_det_d2u >= -28.0 - 1e-9);
    CHECK(r.max_det_d2u <= -16.0 + 1e-9);
    CHECK(r.min_det_d2psi >= 16.0 - 1e-9);
    CHECK(r.max_det_d2psi <= 28.0 + 1e-9);
    CHECK(r.max_grad_mismatch <= 1e-9);
    CHECK(r.max_homogeneity_residual <= 1e-12);
    CHECK(r.max_entry < 1e3); // bounded Hessian entries off the singular line
    CHECK(r.max_quotient > 0.0);
}

TEST_CASE("3-d Hessian closed-form extremes") {
    ScalarField3 psi;
    auto H = psi.hessian({1.0, 0.0, 0.5}); // z real: z^4/zbar^4 = 1
    double det_u = H[0][0] * H[1][1] - H[0][1] * H[1][0];
    CHECK(det_u == doctest::Approx(-28.0).epsilon(1e-12));

    double c = std::cos(3.14159265358979323846 / 8), s = std::sin(3.14159265358979323846 / 8);
    auto H2 = psi.hessian({c, s, 0.0}); // z^4/zbar^4 = -1, the extremal case
    double det_u2 = H2[0][0] * H2[1][1] - H2[0][1] * H2[1][0];
    CHECK(det_u2 == doctest::Approx(-16.0).epsilon(1e-12));

    CHECK_THROWS_AS(psi.hessian({0.0, 0.0, 1.0}), Error);
    CHECK_THROWS_AS(psi.grad({0.0, 0.0, 1.0}), Error);
}

TEST_CASE("homogeneity of the 3-d field") {
    ScalarField3 psi;
    std::array<double, 3> x{0.7, -0.4, 1.1};
    double p0 = psi.eval(x);
    for (double t : {0.5, 2.0, 10.0}) {
        std::array<double, 3> tx{t * x[0], t * x[1], t * x[2]};
        CHECK(psi.eval(tx) == doctest::Approx(t * t * p0).epsilon(1e-13));
    }
}
