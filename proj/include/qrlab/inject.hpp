#pragma once

#include <vector>

#include "qrlab/jet.hpp"
#include "qrlab/map.hpp"
#include "qrlab/sampling.hpp"

namespace qrlab {

// A refined pair of distinct domain points with (numerically) equal images.
// Absence of witnesses is never a proof of injectivity — only "none found at
// this resolution".
struct CollisionWitness {
    cplx z1, z2;           // z1 <= z2 lexicographically
    double separation = 0; // |z1 - z2|, >= 1e-6
    double image_distance = 0;
    std::vector<double> refinement; // image distance after each accepted pass
};

constexpr double kSeparationFloor = 1e-6;

// Grid-sample the region, bucket images in a spatial hash sized from a local
// stretch estimate, refine candidate pairs by coordinate descent on both
// points, and keep pairs with image distance <= 1e-8 (1 + |f|). Sorted by
// image distance, then lexicographically.
std::vector<CollisionWitness> find_collisions(const PiecewiseMap& map, const Rect& region,
                                              int resolution, int jobs = 1);

std::string witnesses_csv(const std::vector<CollisionWitness>& ws);

struct BiLipschitzCheck {
    double lambda = 0;  // claimed Jacobian floor sqrt: J >= lambda^2
    double K = 1;       // claimed distortion bound
    long long pairs = 0;
    double min_ratio = 0; // min |f(p)-f(q)| / |p-q| over the pair plan
    double bound = 0;     // lambda / sqrt(K)
    cplx argmin_p, argmin_q;
    bool pass = false; // min_ratio >= bound - 1e-9
};

// All-pairs ratio test over a 48^2 low-discrepancy cloud in the region.
// Preconditions (checked by a sweep, error on failure): J >= lambda^2 - tol
// and K_hat <= K + tol on the region.
BiLipschitzCheck bilipschitz_check(const PiecewiseMap& map, const Rect& region, double lambda,
                                   double K, int cloud = 48, int jobs = 1);

struct LambdaShift {
    PiecewiseMap shifted;
    double lambda = 0;
    long long samples = 0;
    double max_identity_residual = 0; // J_shift - (J + lambda^2 + 2 lambda Re fz)
    double min_re_fz = 0;
    double min_jacobian = 0;       // of the original map
    double min_shift_jacobian = 0; // of the shifted map
    bool hypothesis_ok = false;    // Re fz >= -tol and J >= -tol on samples
    bool floor_holds = false;      // J_shift >= lambda^2 - tol (asserted only
                                   // when the hypothesis held)
};

// The shift g(z) = f(z) + lambda z, built on the expression trees so the
// result is a first-class map. The identity
//   J_g = J_f + lambda^2 + 2 lambda Re f_z
// is verified at samples regardless; the floor J_g >= lambda^2 is only
// claimed when the sign hypothesis on f certifies.
LambdaShift lambda_shift(const PiecewiseMap& map, double lambda, const Rect& region,
                         int samples = 1000, unsigned seed = 0);

} // namespace qrlab
