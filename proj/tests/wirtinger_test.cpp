#include <doctest.h>

#include <cmath>

#include "qrlab/error.hpp"
#include "qrlab/fixtures.hpp"
#include "qrlab/jet.hpp"
#include "qrlab/sampling.hpp"

using namespace qrlab;

TEST_CASE("autodiff matches finite differences on every fixture") {
    for (const std::string& name : fixture_names()) {
        CAPTURE(name);
        PiecewiseMap m = make_fixture(name);
        Rect box = name == "noninj" ? Rect{0.1, 4, -4, 4} : Rect{-2, 2, -2, 2};
        Halton seq(11);
        int checked = 0, tried = 0;
        while (checked < 200 && tried < 5000) {
            ++tried;
            cplx z = seq.next(box);
            if (std::abs(z) < 0.1) continue; // off the fixtures' singular set
            WirtingerJet a, f;
            try {
                if (m.guard_margin(z) < 1e-3) continue;
                a = jet_autodiff(m, z);
                f = jet_finite_difference(m, z);
            } catch (const Error&) {
                continue;
            }
            double tol = 1e-5 * (1.0 + std::abs(a.fz));
            CHECK(std::abs(a.fz - f.fz) <= tol);
            CHECK(std::abs(a.fzbar - f.fzbar) <= tol);
            ++checked;
        }
        CHECK(checked == 200);
    }
}

TEST_CASE("branch piece derivatives match their closed forms") {
    double eps = 1.0, delta = branch_delta(eps);
    PiecewiseMap m = make_fixture("branch", {{"eps", eps}});
    double s = std::sqrt(1.0 + delta * delta);
    Halton seq(2);
    int n = 0;
    while (n < 100) {
        cplx z = seq.next({-2, 2, 0.05, 2});
        if (z.real() <= -delta * z.imag() + 1e-3 || std::abs(z) < 0.1) continue;
        WirtingerJet j = jet_autodiff(m, z);
        double r = std::abs(z);
        CHECK(std::abs(j.fz - 3.0 * z / (r * s)) < 1e-12);
        CHECK(std::abs(j.fzbar + z * z * z / (r * r * r * s)) < 1e-12);
        ++n;
    }
}

TEST_CASE("identity and rotation jets") {
    PiecewiseMap id = make_fixture("identity");
    WirtingerJet j = jet_autodiff(id, cplx(0.3, 0.7));
    CHECK(j.fz == cplx(1, 0));
    CHECK(j.fzbar == cplx(0, 0));

    PiecewiseMap rot = make_fixture("roti");
    j = jet_autodiff(rot, cplx(0.3, 0.7));
    Matrix2 m = jet_to_matrix(j);
    CHECK(m.a11 == 0);
    CHECK(m.a12 == -1);
    CHECK(m.a21 == 1);
    CHECK(m.a22 == 0);
}

TEST_CASE("jet/matrix round trip and identities") {
    Halton seq(7);
    for (int i = 0; i < 200; ++i) {
        cplx fz = seq.next({-3, 3, -3, 3});
        cplx fzbar = seq.next({-3, 3, -3, 3});
        WirtingerJet j{0.0, 0.0, fz, fzbar};
        Matrix2 m = jet_to_matrix(j);
        cplx fz2, fzbar2;
        matrix_to_jet(m, fz2, fzbar2);
        CHECK(std::abs(fz2 - fz) <= 1e-15 * (1.0 + std::abs(fz)));
        CHECK(std::abs(fzbar2 - fzbar) <= 1e-15 * (1.0 + std::abs(fzbar)));
        CHECK(std::abs(m.det() - j.jacobian()) < 1e-12 * (1.0 + std::abs(m.det())));
        CHECK(std::abs(inner(m, Matrix2::identity()) - 2.0 * fz.real()) < 1e-12);
        CHECK(inner(m, m) >= 0.0);
        // trace relations
        CHECK(std::abs((m.a11 + m.a22) - 2.0 * fz.real()) < 1e-15);
        CHECK(std::abs((m.a11 - m.a22) - 2.0 * fzbar.real()) < 1e-15);
    }
    CHECK(inner(Matrix2::identity(), Matrix2::identity()) == 2.0);
}

TEST_CASE("halfspace classification") {
    CHECK(classify_halfspace(Matrix2::identity()) == HalfspaceClass::positive);
    CHECK(classify_halfspace({1, 0, 0, -1}) == HalfspaceClass::negative);
    CHECK(classify_halfspace({1, 0, 0, 0}) == HalfspaceClass::singular);
    CHECK_THROWS_AS(classify_halfspace({0, 0, 0, 0}), Error);
}

TEST_CASE("differential inclusion membership") {
    InclusionSpec spec(2.0, Matrix2::identity());
    InclusionResult r = in_inclusion(Matrix2::identity(), spec);
    CHECK(r.in);
    CHECK(r.det_margin == 0.0);
    CHECK(r.inner_margin == 2.0);

    r = in_inclusion({0, 1, 1, 0}, spec); // det -1: out for any K >= 1
    CHECK(!r.in);
    CHECK(r.det_margin == -4.0);

    CHECK_THROWS_AS(InclusionSpec(0.5, Matrix2::identity()), Error);
    CHECK_THROWS_AS(InclusionSpec(2.0, Matrix2{1, 0, 0, -1}), Error);
}

TEST_CASE("Frobenius inclusion follows from the distortion bound") {
    PiecewiseMap m = make_fixture("branch", {{"eps", 1.0}});
    double k = 1.0 / std::sqrt(2.0); // 1/sqrt(1+eps^2)
    double K = (1.0 + k) / (1.0 - k);
    InclusionSpec spec(K + 1.0 / K, Matrix2::identity());
    Halton seq(13);
    int n = 0;
    while (n < 300) {
        cplx z = seq.next({-2, 2, -2, 2});
        WirtingerJet j;
        try {
            if (m.guard_margin(z) < 1e-4) continue;
            j = jet_autodiff(m, z);
        } catch (const Error&) {
            continue;
        }
        Matrix2 x = jet_to_matrix(j);
        CHECK(spec.K * x.det() - inner(x, x) >= -1e-9 * inner(x, x));
        ++n;
    }
}

TEST_CASE("predicate parsing") {
    CHECK(parse_predicate(" qr ").kind == Predicate::Kind::qr);
    CHECK(parse_predicate("re_fz >= 0").kind == Predicate::Kind::re_ge_const);
    Predicate p = parse_predicate("re_fz >= -0.5*abs(im_fz)");
    CHECK(p.kind == Predicate::Kind::re_ge_scaled_abs_im);
    CHECK(p.c == -0.5);
    CHECK(parse_predicate("re_fz==0").kind == Predicate::Kind::re_zero);
    CHECK(parse_predicate("lambda").kind == Predicate::Kind::reduced_beltrami);
    CHECK(parse_predicate("").kind == Predicate::Kind::none);
    CHECK_THROWS_AS(parse_predicate("bogus"), Error);
    CHECK_THROWS_AS(parse_predicate("re_fz>=x"), Error);
}

TEST_CASE("distortion sweep: identity") {
    DistortionReport r = distortion_sweep(make_fixture("identity"), {-1, 1, -1, 1}, 64);
    CHECK(r.k_hat == 0.0);
    CHECK(r.K_hat == 1.0);
    CHECK(!r.degenerate);
    CHECK(r.min_jacobian == 1.0);
    CHECK(r.max_jacobian == 1.0);
}

TEST_CASE("distortion sweep: branch attains 1/sqrt(1+eps^2)") {
    for (double eps : {1.0, 2.0}) {
        CAPTURE(eps);
        DistortionReport r =
            distortion_sweep(make_fixture("branch", {{"eps", eps}}), {-2, 2, -2, 2}, 256);
        CHECK(std::abs(r.k_hat - 1.0 / std::sqrt(1.0 + eps * eps)) < 1e-6);
        CHECK(r.refinement.size() >= 2); // converged via doubling
        // sup is attained where the anti-analytic piece is active
        CHECK(r.k_argmax.real() < -branch_delta(eps) * r.k_argmax.imag() + 1e-9);
    }
}

TEST_CASE("distortion sweep: predicates") {
    PiecewiseMap br = make_fixture("branch", {{"eps", 1.0}});
    DistortionReport r = distortion_sweep(br, {-2, 2, -2, 2}, 128, "re_fz>=-1*abs(im_fz)");
    CHECK(r.violation_fraction == 0.0);

    r = distortion_sweep(br, {-2, 2, -2, 2}, 128, "re_fz>=0");
    CHECK(r.violations > 0); // fails in the anti-analytic region
    CHECK(!r.worst_points.empty());

    PiecewiseMap ni = make_fixture("noninj", {{"M", 1.0}});
    r = distortion_sweep(ni, {0.05, 4, -4, 4}, 128, "re_fz>=1*abs(im_fz)");
    CHECK(r.violation_fraction == 0.0);

    r = distortion_sweep(make_fixture("roti"), {-1, 1, -1, 1}, 32, "re_fz==0");
    CHECK(r.violation_fraction == 0.0);

    r = distortion_sweep(br, {-2, 2, -2, 2}, 64, "lambda");
    CHECK(r.lambda_sup > 0.0);
}

TEST_CASE("distortion sweep: conjpower is degenerate (orientation reversing)") {
    DistortionReport r =
        distortion_sweep(make_fixture("conjpower", {{"n", 1.0}}), {-1, 1, -1, 1}, 32);
    CHECK(r.degenerate);
    CHECK(r.max_jacobian == -1.0);
}

TEST_CASE("sweep determinism across worker counts") {
    PiecewiseMap br = make_fixture("branch", {{"eps", 0.7}});
    DistortionReport a = distortion_sweep(br, {-2, 2, -2, 2}, 128, "re_fz>=0", 1, false);
    DistortionReport b = distortion_sweep(br, {-2, 2, -2, 2}, 128, "re_fz>=0", 8, false);
    CHECK(a.k_hat == b.k_hat);
    CHECK(a.k_argmax == b.k_argmax);
    CHECK(a.violations == b.violations);
    CHECK(a.worst_points == b.worst_points);
    CHECK(a.min_jacobian == b.min_jacobian);
}

TEST_CASE("homotopy toward the identity") {
    std::vector<double> ts{0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
    SUBCASE("f = iz: already conformal, ratio identically zero") {
        HomotopyReport h = homotopy_distortion(make_fixture("roti"), {-1, 1, -1, 1}, 32, ts);
        for (const HomotopyRow& row : h.rows) {
            CHECK(row.k_hat == 0.0);
            CHECK(row.max_formula_residual <= 1e-9);
        }
        CHECK(h.monotone_nonincreasing);
    }
    SUBCASE("branch on the cone where re fz >= 0") {
        PiecewiseMap br = make_fixture("branch", {{"eps", 1.0}});
        Rect region{0.1, 2, -2, 2};
        HomotopyReport h = homotopy_distortion(br, region, 64, ts);
        CHECK(h.monotone_nonincreasing);
        for (const HomotopyRow& row : h.rows) CHECK(row.max_formula_residual <= 1e-9);
        // t = 0 agrees with the plain sweep
        DistortionReport d = distortion_sweep(br, region, 64, "", 1, false);
        CHECK(h.rows.front().k_hat == doctest::Approx(d.k_hat).epsilon(1e-12));
        CHECK(h.rows.back().k_hat < h.rows.front().k_hat);
    }
    SUBCASE("hypothesis violation is an error") {
        PiecewiseMap br = make_fixture("branch", {{"eps", 1.0}});
        CHECK_THROWS_AS(homotopy_distortion(br, {-2, 2, -2, 2}, 32, ts), Error);
    }
}
