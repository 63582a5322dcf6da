#pragma once

#include <array>
#include <optional>
#include <utility>
#include <vector>

#include "qrlab/map.hpp"
#include "qrlab/sampling.hpp"

namespace qrlab {

// Potential psi with grad psi = i f, i.e. psi_x = -v, psi_y = u, defined by an
// axis-aligned two-segment path integral from the base point. Only valid while
// the map it references stays alive.
class Potential {
public:
    Potential(const PiecewiseMap& map, cplx base, double loop_residual, double sup_f)
        : map_(&map), base_(base), loop_residual_(loop_residual), sup_f_(sup_f) {}

    double eval(cplx p) const; // psi(p); psi(base) = 0
    cplx gradient(cplx p) const { return cplx(0, 1) * map_->eval(p); }

    cplx base() const { return base_; }
    double loop_residual() const { return loop_residual_; }
    double sup_f() const { return sup_f_; }
    const PiecewiseMap& map() const { return *map_; }

private:
    const PiecewiseMap* map_;
    cplx base_;
    double loop_residual_;
    double sup_f_;
};

// Builds the potential after certifying |Re fz| <= 1e-6 on region samples and
// checking closed-rectangle integrals of (-v, u) vanish (path independence).
Potential reconstruct_potential(const PiecewiseMap& map, cplx base, const Rect& region);

enum class GaugeVerdict { positive, negative, mixed, unresolved };

const char* gauge_verdict_name(GaugeVerdict v);

struct TaylorGauge {
    cplx anchor = 0.0;
    cplx grad = 0.0; // grad psi at the anchor, from the map directly
    GaugeVerdict verdict = GaugeVerdict::unresolved;
    double min_value = 0.0, max_value = 0.0; // of psi^{a,b} over the probes
    cplx min_probe = 0.0, max_probe = 0.0;
};

// Sign of psi^{a,b} = psi - affine part at the anchor, probed on rings.
TaylorGauge taylor_gauge_test(const Potential& psi, cplx anchor, double radius = 0.4,
                              int probes_per_ring = 32);

struct SectionSample {
    double t;
    double value;
};

struct DichotomyReport {
    std::vector<TaylorGauge> gauges;
    bool uniform = false;
    GaugeVerdict verdict = GaugeVerdict::unresolved;
    std::optional<std::pair<cplx, cplx>> counterexample;
    std::vector<SectionSample> section; // psi along the counterexample segment
};

// Checks that one alternative (all-positive / all-negative) holds across
// anchors sampled in a convex region. Convexity is certified by sampling
// anchor segments against the map domain.
DichotomyReport dichotomy_scan(const PiecewiseMap& map, const Rect& region, int anchors = 20,
                               unsigned seed = 0);

// The 3-d scalar field psi(x1,x2,x3) = re(z^4)/|z|^2 - x3^2/2 with z = x1+ix2,
// with analytic gradient and Hessian. Points on the line x1 = x2 = 0 are
// singular.
class ScalarField3 {
public:
    double eval(const std::array<double, 3>& x) const;
    std::array<double, 3> grad(const std::array<double, 3>& x) const;
    std::array<std::array<double, 3>, 3> hessian(const std::array<double, 3>& x) const;
};

struct Hessian3Report {
    long long samples = 0;
    double max_det_mismatch = 0.0;    // entrywise det vs closed form
    double min_det_d2u = 0.0, max_det_d2u = 0.0;
    double min_det_d2psi = 0.0, max_det_d2psi = 0.0;
    double max_quotient = 0.0;        // ||D^2 psi||_F^3 / det D^2 psi
    double max_entry = 0.0;           // L-infinity bound evidence
    double max_grad_mismatch = 0.0;   // closed-form 2 u_zbar vs expression jet
    double max_homogeneity_residual = 0.0;
};

Hessian3Report hessian_example_3d(int samples = 1000, unsigned seed = 0);

} // namespace qrlab
