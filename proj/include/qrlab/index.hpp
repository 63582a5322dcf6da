#pragma once

#include <vector>

#include "qrlab/map.hpp"

namespace qrlab {

struct IndexRefinementStep {
    int samples;
    double raw; // unwrapped argument increment / 2 pi
};

struct IndexResult {
    cplx center = 0.0;
    double radius = 0.0;
    double raw = 0.0;
    int snapped = 0;
    bool resolved = false; // |raw - snapped| < 0.25 and refinement converged
    int radius_retries = 0;
    std::vector<IndexRefinementStep> trail;
};

// Winding number of f - f(z0) around a small circle. radius <= 0 picks
// min(0.1, dist(z0, boundary)/4). Sampling doubles until two successive
// unwrapped increments agree within 1e-3 turns; a zero of f - f(z0) on the
// ring halves the radius (budget 5).
IndexResult local_index(const PiecewiseMap& map, cplx z0, double radius = 0.0,
                        int samples = 256);

struct RadiusStability {
    std::vector<IndexResult> results;
    bool stable = false; // all resolved with equal snapped index
};

RadiusStability index_radius_stability(const PiecewiseMap& map, cplx z0,
                                       const std::vector<double>& radii);

} // namespace qrlab
