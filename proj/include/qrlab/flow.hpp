#pragma once

#include <string>
#include <vector>

#include "qrlab/map.hpp"
#include "qrlab/sampling.hpp"

namespace qrlab {

struct TraceConfig {
    cplx center = 0.0;
    double R = 2.0;             // outer annulus radius (exit threshold)
    double rho = 0.0;           // critical-point threshold; <=0 means 1e-4 R
    double rho_close = 0.0;     // closes-up threshold; <=0 means 1e-3 R
    double initial_step = 1e-3;
    double max_step = 1e6;      // polyline fidelity cap (tighten for quadrature)
    double tolerance = 1e-10;   // embedded-pair local error tolerance
    int max_steps = 400000;

    double rho_eff() const { return rho > 0 ? rho : 1e-4 * R; }
    double rho_close_eff() const { return rho_close > 0 ? rho_close : 1e-3 * R; }
};

enum class Verdict { reaches_critical_point, exits_annulus, closes_up, budget };

const char* verdict_name(Verdict v);

struct TrajPoint {
    double t;
    cplx z;
};

struct Trajectory {
    cplx seed = 0.0;
    bool forward = true;
    Verdict verdict = Verdict::budget;
    std::vector<TrajPoint> points;
    double end_time = 0.0;
};

// Integrate dz/dt = f(z) (or -f for backward) with an adaptive embedded 4/5
// Runge-Kutta pair until a verdict condition fires. Closes-up requires a
// return within rho_close of the seed after t > 10 * initial_step with
// velocity within 30 degrees of the departure direction.
Trajectory trace(const PiecewiseMap& map, cplx seed, bool forward,
                 const TraceConfig& cfg = {});

enum class SeedClass { elliptic, hyperbolic, transit, unresolved };

struct SectorSummary {
    cplx center = 0.0;
    double ring_radius = 0.0;
    std::vector<SeedClass> seeds; // in angle order
    int n_e = 0;                  // maximal arcs of elliptic-evidence seeds
    int n_h = 0;                  // maximal arcs of exit-exit seeds
    int unresolved = 0;
    double predicted_index = 0.0; // 1 + (n_e - n_h)/2
    bool counts_even = true;      // n_e - n_h even
    int winding_index = 0;
    bool agreement = false;
    bool resolved = false; // unresolved seeds <= 5% and winding resolved
};

SectorSummary classify_sectors(const PiecewiseMap& map, cplx center, int seed_count = 64,
                               double ring_radius = 0.5, const TraceConfig& cfg = {},
                               int jobs = 1);

struct LoopIntegralReport {
    std::vector<cplx> curve; // closed, counterclockwise
    bool reoriented = false;
    bool simple = true;
    cplx contour_fdzbar = 0.0;    // contour integral of f dzbar
    cplx area_fz = 0.0;           // area integral of f_z
    double area_re_fz = 0.0;      // area integral of Re f_z
    double residual = 0.0;        // |area_fz - (i/2) contour|
    double enclosed_area = 0.0;
    long long quadrature_nodes = 0;
    long long unresolved_nodes = 0; // nodes excluded (band/singularity)
    bool has_time_integral = false;
    double time_integral = 0.0; // integral of |f|^2 dt for trajectory curves
};

// Both sides of the Green identity over the region enclosed by a simple
// closed polyline, evaluated on the same polyline so the residual reflects
// quadrature only. Non-simple curves are an error.
LoopIntegralReport green_identity(const PiecewiseMap& map, std::vector<cplx> curve);

// Same, for a traced closed orbit; adds the |f|^2 dt line integral.
LoopIntegralReport green_identity(const PiecewiseMap& map, const Trajectory& orbit);

struct EllipticLoopReport {
    double lambda = 0.0; // min Re fz over the sampled neighborhood
    bool hypothesis_holds = false;
    int seeds = 0;
    int closed_found = 0;
    bool counterexample = false; // closed orbit while the hypothesis holds
    std::vector<double> loop_lower_bounds; // lambda * enclosed area per loop
    double sup_f = 0.0;
    double inner_eps = 0.0;
    double inner_bound = 0.0; // pi * eps * sup|f|, the punctured-disk term
};

// Search for closed orbits around center; under Re fz >= lambda > 0 none
// should exist, and any candidate loop carries the positive area bound that
// contradicts it.
EllipticLoopReport elliptic_loop_contradiction(const PiecewiseMap& map, cplx center,
                                               const Rect& region, int seed_count = 64,
                                               double ring_radius = 0.5,
                                               const TraceConfig& cfg = {},
                                               double inner_eps = 1e-3);

// Artifacts.
std::string portrait_svg(const std::vector<Trajectory>& trajectories, cplx center,
                         double ring_radius, double R);
std::string trajectories_csv(const std::vector<Trajectory>& trajectories);

} // namespace qrlab
