#include "qrlab/index.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qrlab/error.hpp"

namespace qrlab {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// Unwrapped argument increment over one ring, in turns. Returns false when a
// principal-value step is too close to the +-pi ambiguity to trust.
bool ring_increment(const PiecewiseMap& map, cplx z0, cplx f0, double r, int n, double& turns,
                    double& min_mod, double& max_mod) {
    double total = 0.0;
    min_mod = std::numeric_limits<double>::infinity();
    max_mod = 0.0;
    cplx prev;
    for (int j = 0; j <= n; ++j) {
        double th = kTwoPi * double(j % n) / n;
        cplx w = map.eval(z0 + r * cplx(std::cos(th), std::sin(th))) - f0;
        double m = std::abs(w);
        min_mod = std::min(min_mod, m);
        max_mod = std::max(max_mod, m);
        if (m == 0.0) return false;
        if (j > 0) {
            double d = std::arg(w / prev); // nearest-branch continuation
            if (std::abs(d) > 2.5) return false;
            total += d;
        }
        prev = w;
    }
    turns = total / kTwoPi;
    return true;
}

} // namespace

IndexResult local_index(const PiecewiseMap& map, cplx z0, double radius, int samples) {
    IndexResult res;
    res.center = z0;
    if (radius <= 0.0) {
        double d = map.domain().boundary_distance(z0);
        radius = std::min(0.1, d / 4.0);
        if (!(radius > 0.0)) fail(ErrorCode::precondition, "center too close to the domain edge");
    }
    cplx f0 = map.eval(z0);
    samples = std::max(samples, 16);

    for (int retry = 0; retry <= 5; ++retry, radius *= 0.5, res.radius_retries = retry) {
        res.trail.clear();
        double prev = 0.0;
        bool have_prev = false;
        bool ring_bad = false;
        for (int n = samples; n <= (1 << 22); n *= 2) {
            double turns, lo, hi;
            if (!ring_increment(map, z0, f0, radius, n, turns, lo, hi) || lo <= 1e-9 * hi) {
                ring_bad = true; // a zero of f - f(z0) on (or near) this ring
                break;
            }
            res.trail.push_back({n, turns});
            if (have_prev && std::abs(turns - prev) < 1e-3) {
                res.radius = radius;
                res.raw = turns;
                res.snapped = int(std::lround(turns));
                res.resolved = std::abs(turns - res.snapped) < 0.25;
                return res;
            }
            prev = turns;
            have_prev = true;
        }
        if (!ring_bad) break; // refinement exhausted without agreement
    }
    res.radius = radius;
    res.resolved = false;
    if (!res.trail.empty()) {
        res.raw = res.trail.back().raw;
        res.snapped = int(std::lround(res.raw));
    }
    return res;
}

RadiusStability index_radius_stability(const PiecewiseMap& map, cplx z0,
                                       const std::vector<double>& radii) {
    RadiusStability out;
    for (double r : radii) out.results.push_back(local_index(map, z0, r));
    out.stable = !out.results.empty();
    for (const IndexResult& r : out.results)
        if (!r.resolved || r.snapped != out.results.front().snapped) out.stable = false;
    return out;
}

} // namespace qrlab
