#include <doctest.h>

#include "qrlab/fixtures.hpp"
#include "qrlab/index.hpp"
#include "qrlab/parse.hpp"

using namespace qrlab;

TEST_CASE("index of monomials at the origin") {
    for (int n = 1; n <= 4; ++n) {
        CAPTURE(n);
        IndexResult r = local_index(make_fixture("power", {{"n", double(n)}}), 0.0);
        CHECK(r.resolved);
        CHECK(r.snapped == n);
        r = local_index(make_fixture("conjpower", {{"n", double(n)}}), 0.0);
        CHECK(r.resolved);
        CHECK(r.snapped == -n);
    }
}

TEST_CASE("index of the gradient field is -3 at 0") {
    IndexResult r = local_index(make_fixture("grad2d"), 0.0, 0.3);
    CHECK(r.resolved);
    CHECK(r.snapped == -3);
}

TEST_CASE("branch map has index 2 at 0, stable under radius halving") {
    PiecewiseMap m = make_fixture("branch", {{"eps", 1.0}});
    RadiusStability s = index_radius_stability(m, 0.0, {0.1, 0.05});
    CHECK(s.stable);
    CHECK(s.results[0].snapped == 2);
    CHECK(s.results[1].snapped == 2);
}

TEST_CASE("noninj map at an interior regular point is a local diffeomorphism") {
    PiecewiseMap m = make_fixture("noninj", {{"M", 1.0}});
    IndexResult r = local_index(m, cplx(3.0, 0.1), 0.05);
    CHECK(r.resolved);
    CHECK(r.snapped == 1);
}

TEST_CASE("radius stability for power(2)") {
    RadiusStability s =
        index_radius_stability(make_fixture("power", {{"n", 2.0}}), 0.0, {0.1, 0.05, 0.025});
    CHECK(s.stable);
    for (const IndexResult& r : s.results) CHECK(r.snapped == 2);
}

TEST_CASE("index is invariant under postcomposition with a nonzero scalar") {
    IndexResult a = local_index(make_fixture("power", {{"n", 2.0}}), 0.0);
    PiecewiseMap scaled = parse_map("piece: true -> (2-1i)*z^2");
    IndexResult b = local_index(scaled, 0.0);
    CHECK(a.snapped == b.snapped);
}

TEST_CASE("index adds over products of monomial factors") {
    CHECK(local_index(parse_map("piece: true -> z^2*z^3"), 0.0).snapped == 5);
    CHECK(local_index(parse_map("piece: true -> conj(z)*z^2"), 0.0).snapped == 1);
    CHECK(local_index(parse_map("piece: true -> conj(z)^2*z"), 0.0).snapped == -1);
}

TEST_CASE("nonconstant quasiregular fixtures have index >= 1") {
    for (const char* name : {"identity", "roti", "branch"}) {
        CAPTURE(name);
        IndexResult r = local_index(make_fixture(name), 0.0);
        CHECK(r.resolved);
        CHECK(r.snapped >= 1);
    }
}

TEST_CASE("a zero on the ring triggers radius retries") {
    // f = z(z - 0.05): second zero sits on the default first ring choice
    PiecewiseMap m = parse_map("piece: true -> z*(z - 0.05)");
    IndexResult r = local_index(m, 0.0, 0.05);
    CHECK(r.resolved);
    CHECK(r.snapped == 1);
    CHECK(r.radius_retries >= 1);
    CHECK(r.radius < 0.05);
}

TEST_CASE("refinement trail is recorded") {
    IndexResult r = local_index(make_fixture("grad2d"), 0.0, 0.2);
    CHECK(r.trail.size() >= 2);
    CHECK(r.trail.back().samples >= 2 * r.trail.front().samples);
}
