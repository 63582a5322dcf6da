#include "qrlab/flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "qrlab/error.hpp"
#include "qrlab/index.hpp"
#include "qrlab/jet.hpp"

namespace qrlab {

namespace {

constexpr double kPi = 3.14159265358979323846;

double seg_dist(cplx p, cplx a, cplx b) {
    cplx ab = b - a;
    double n2 = std::norm(ab);
    if (n2 == 0.0) return std::abs(p - a);
    double t = std::clamp(((p - a) * std::conj(ab)).real() / n2, 0.0, 1.0);
    return std::abs(p - (a + t * ab));
}

double angle_between(cplx a, cplx b) {
    double na = std::abs(a), nb = std::abs(b);
    if (na == 0.0 || nb == 0.0) return kPi;
    double c = std::clamp((a * std::conj(b)).real() / (na * nb), -1.0, 1.0);
    return std::acos(c);
}

} // namespace

const char* verdict_name(Verdict v) {
    switch (v) {
        case Verdict::reaches_critical_point: return "reaches-critical-point";
        case Verdict::exits_annulus: return "exits-annulus";
        case Verdict::closes_up: return "closes-up";
        case Verdict::budget: return "step-budget-exhausted";
    }
    return "?";
}

Trajectory trace(const PiecewiseMap& map, cplx seed, bool forward, const TraceConfig& cfg) {
    const double rho = cfg.rho_eff(), rho_close = cfg.rho_close_eff();
    double d0 = std::abs(seed - cfg.center);
    if (!(d0 > rho && d0 < cfg.R))
        fail(ErrorCode::precondition, "seed outside the trace annulus");

    auto rhs = [&](cplx z) -> cplx {
        cplx v = map.eval(z);
        return forward ? v : -v;
    };

    // Dormand-Prince 5(4) pair
    static const double a21 = 1.0 / 5;
    static const double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static const double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static const double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                        a54 = -212.0 / 729;
    static const double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                        a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static const double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                        b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static const double e1 = 5179.0 / 57600, e3 = 7571.0 / 16695, e4 = 393.0 / 640,
                        e5 = -92097.0 / 339200, e6 = 187.0 / 2100, e7 = 1.0 / 40;

    Trajectory traj;
    traj.seed = seed;
    traj.forward = forward;
    traj.verdict = Verdict::budget;

    cplx z = seed;
    bool armed = false; // closure detection waits until the path leaves the seed ball
    double t = 0.0, h = std::min(cfg.initial_step, cfg.max_step);
    traj.points.push_back({0.0, z});
    cplx v0;
    try {
        v0 = rhs(seed);
    } catch (const Error&) {
        traj.end_time = 0.0;
        return traj;
    }

    for (int step = 0; step < cfg.max_steps; ++step) {
        cplx z5;
        double err;
        try {
            cplx k1 = rhs(z);
            cplx k2 = rhs(z + h * (a21 * k1));
            cplx k3 = rhs(z + h * (a31 * k1 + a32 * k2));
            cplx k4 = rhs(z + h * (a41 * k1 + a42 * k2 + a43 * k3));
            cplx k5 = rhs(z + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
            cplx k6 = rhs(z + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
            z5 = z + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
            cplx k7 = rhs(z5);
            cplx z4 = z + h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
            err = std::abs(z5 - z4);
        } catch (const Error&) {
            h *= 0.5;
            if (h < 1e-14) break;
            continue;
        }
        double scale = cfg.tolerance * (1.0 + std::abs(z));
        if (err > scale) {
            h *= std::clamp(0.9 * std::pow(scale / err, 0.2), 0.1, 1.0);
            if (h < 1e-14) break;
            continue;
        }
        cplx zprev = z;
        z = z5;
        t += h;
        traj.points.push_back({t, z});
        if (err > 0.0) h *= std::clamp(0.9 * std::pow(scale / err, 0.2), 0.1, 5.0);
        h = std::min(h, cfg.max_step);

        double d = std::abs(z - cfg.center);
        if (d <= rho) {
            traj.verdict = Verdict::reaches_critical_point;
            break;
        }
        if (d >= cfg.R) {
            traj.verdict = Verdict::exits_annulus;
            break;
        }
        if (!armed && std::abs(z - seed) > 20.0 * rho_close) armed = true;
        if (armed && t > 10.0 * cfg.initial_step && seg_dist(seed, zprev, z) < rho_close) {
            cplx v;
            try {
                v = rhs(z);
            } catch (const Error&) {
                v = 0.0;
            }
            if (angle_between(v, v0) < kPi / 6.0) {
                // cut the last segment at the closest approach so the
                // polyline does not run past the seed and overlap itself
                cplx ab = z - zprev;
                double s = std::norm(ab) == 0.0
                               ? 1.0
                               : std::clamp(((seed - zprev) * std::conj(ab)).real() /
                                                std::norm(ab),
                                            0.0, 1.0);
                t += (s - 1.0) * h;
                traj.points.back() = {t, zprev + s * ab};
                traj.verdict = Verdict::closes_up;
                break;
            }
        }
    }
    traj.end_time = t;
    return traj;
}

SectorSummary classify_sectors(const PiecewiseMap& map, cplx center, int seed_count,
                               double ring_radius, const TraceConfig& cfg, int jobs) {
    (void)jobs; // traces are cheap; chunked fan-out adds nothing at 64 seeds
    SectorSummary sum;
    sum.center = center;
    sum.ring_radius = ring_radius;
    TraceConfig tc = cfg;
    tc.center = center;

    std::vector<cplx> seeds(seed_count);
    for (int k = 0; k < seed_count; ++k) {
        double th = 2.0 * kPi * k / seed_count;
        seeds[k] = center + ring_radius * cplx(std::cos(th), std::sin(th));
        if (std::abs(map.eval(seeds[k])) <= 1e-9)
            fail(ErrorCode::precondition, "zero of f on the seed ring (not isolated here)");
    }

    sum.seeds.resize(seed_count);
    for (int k = 0; k < seed_count; ++k) {
        Trajectory fwd = trace(map, seeds[k], true, tc);
        Trajectory bwd = trace(map, seeds[k], false, tc);
        if (fwd.verdict == Verdict::budget || bwd.verdict == Verdict::budget)
            sum.seeds[k] = SeedClass::unresolved;
        else if (fwd.verdict == Verdict::reaches_critical_point &&
                 bwd.verdict == Verdict::reaches_critical_point)
            sum.seeds[k] = SeedClass::elliptic;
        else if (fwd.verdict == Verdict::exits_annulus && bwd.verdict == Verdict::exits_annulus)
            sum.seeds[k] = SeedClass::hyperbolic;
        else
            sum.seeds[k] = SeedClass::transit;
    }

    auto count_arcs = [&](SeedClass c) {
        int arcs = 0;
        bool all = true;
        for (int k = 0; k < seed_count; ++k) {
            if (sum.seeds[k] != c) {
                all = false;
                continue;
            }
            int prev = (k + seed_count - 1) % seed_count;
            if (sum.seeds[prev] != c) ++arcs; // arc starts here
        }
        return all ? 1 : arcs;
    };
    sum.n_e = count_arcs(SeedClass::elliptic);
    sum.n_h = count_arcs(SeedClass::hyperbolic);
    for (SeedClass c : sum.seeds)
        if (c == SeedClass::unresolved) ++sum.unresolved;

    sum.counts_even = (sum.n_e - sum.n_h) % 2 == 0;
    sum.predicted_index = 1.0 + 0.5 * (sum.n_e - sum.n_h);
    IndexResult idx = local_index(map, center);
    sum.winding_index = idx.snapped;
    sum.agreement = idx.resolved && sum.counts_even &&
                    sum.predicted_index == double(sum.winding_index);
    sum.resolved = idx.resolved && sum.unresolved * 20 <= seed_count; // <= 5%
    return sum;
}

namespace {

double signed_area(const std::vector<cplx>& poly) {
    double a = 0.0;
    size_t n = poly.size();
    for (size_t i = 0; i < n; ++i) {
        cplx p = poly[i], q = poly[(i + 1) % n];
        a += p.real() * q.imag() - q.real() * p.imag();
    }
    return 0.5 * a;
}

bool segments_cross(cplx a, cplx b, cplx c, cplx d) {
    auto orient = [](cplx p, cplx q, cplx r) {
        double v = (q.real() - p.real()) * (r.imag() - p.imag()) -
                   (q.imag() - p.imag()) * (r.real() - p.real());
        return v > 0 ? 1 : (v < 0 ? -1 : 0);
    };
    int o1 = orient(a, b, c), o2 = orient(a, b, d);
    int o3 = orient(c, d, a), o4 = orient(c, d, b);
    return o1 != o2 && o3 != o4 && o1 != 0 && o2 != 0 && o3 != 0 && o4 != 0;
}

bool polyline_simple(const std::vector<cplx>& poly) {
    size_t n = poly.size();
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = i + 2; j < n; ++j) {
            if (i == 0 && j == n - 1) continue; // adjacent around the wrap
            if (segments_cross(poly[i], poly[(i + 1) % n], poly[j], poly[(j + 1) % n]))
                return false;
        }
    }
    return true;
}

} // namespace

LoopIntegralReport green_identity(const PiecewiseMap& map, std::vector<cplx> curve) {
    if (curve.size() > 1 && std::abs(curve.front() - curve.back()) < 1e-12)
        curve.pop_back();
    if (curve.size() < 3) fail(ErrorCode::precondition, "closed curve needs >= 3 points");

    LoopIntegralReport rep;
    double area = signed_area(curve);
    if (area < 0.0) {
        std::reverse(curve.begin(), curve.end());
        area = -area;
        rep.reoriented = true;
    }
    if (!(area > 0.0)) fail(ErrorCode::precondition, "degenerate closed curve");
    rep.simple = polyline_simple(curve);
    if (!rep.simple) fail(ErrorCode::precondition, "curve is not simple");
    rep.enclosed_area = area;

    size_t n = curve.size();
    // contour side: per-segment Simpson of f dzbar on each chord
    cplx contour = 0.0;
    for (size_t i = 0; i < n; ++i) {
        cplx a = curve[i], b = curve[(i + 1) % n];
        cplx dzb = std::conj(b - a);
        contour += dzb * (map.eval(a) + 4.0 * map.eval(0.5 * (a + b)) + map.eval(b)) / 6.0;
    }
    rep.contour_fdzbar = contour;

    // area side: signed fan triangulation from the vertex centroid, degree-5
    // Gauss nodes per triangle
    cplx g = 0.0;
    for (cplx v : curve) g += v;
    g /= double(n);
    static const double s15 = std::sqrt(15.0);
    const double w0 = 9.0 / 40, wa = (155.0 - s15) / 1200, wb = (155.0 + s15) / 1200;
    const double ba = (6.0 - s15) / 21, bb = (6.0 + s15) / 21;
    struct Node {
        double l1, l2, w;
    };
    const Node nodes[7] = {{1.0 / 3, 1.0 / 3, w0},
                           {1 - 2 * ba, ba, wa}, {ba, 1 - 2 * ba, wa}, {ba, ba, wa},
                           {1 - 2 * bb, bb, wb}, {bb, 1 - 2 * bb, wb}, {bb, bb, wb}};
    cplx area_fz = 0.0;
    double area_re = 0.0;
    for (size_t i = 0; i < n; ++i) {
        cplx v1 = curve[i], v2 = curve[(i + 1) % n];
        double tri = 0.5 * ((v1.real() - g.real()) * (v2.imag() - g.imag()) -
                            (v2.real() - g.real()) * (v1.imag() - g.imag()));
        if (tri == 0.0) continue;
        for (const Node& nd : nodes) {
            cplx p = nd.l1 * g + nd.l2 * v1 + (1.0 - nd.l1 - nd.l2) * v2;
            ++rep.quadrature_nodes;
            try {
                WirtingerJet j = jet_autodiff(map, p);
                area_fz += nd.w * tri * j.fz;
                area_re += nd.w * tri * j.fz.real();
            } catch (const Error&) {
                ++rep.unresolved_nodes;
            }
        }
    }
    rep.area_fz = area_fz;
    rep.area_re_fz = area_re;
    rep.residual = std::abs(area_fz - cplx(0, 0.5) * contour);
    rep.curve = std::move(curve);
    return rep;
}

LoopIntegralReport green_identity(const PiecewiseMap& map, const Trajectory& orbit) {
    if (orbit.verdict != Verdict::closes_up)
        fail(ErrorCode::precondition, "trajectory did not close up");
    std::vector<cplx> curve;
    curve.reserve(orbit.points.size());
    for (const TrajPoint& p : orbit.points) curve.push_back(p.z);
    LoopIntegralReport rep = green_identity(map, std::move(curve));

    double ti = 0.0;
    for (size_t i = 0; i + 1 < orbit.points.size(); ++i) {
        const TrajPoint& a = orbit.points[i];
        const TrajPoint& b = orbit.points[i + 1];
        double fa = std::norm(map.eval(a.z));
        double fm = std::norm(map.eval(0.5 * (a.z + b.z)));
        double fb = std::norm(map.eval(b.z));
        ti += (b.t - a.t) * (fa + 4.0 * fm + fb) / 6.0;
    }
    // close the small gap back to the seed at the last speed
    double gap = std::abs(orbit.points.front().z - orbit.points.back().z);
    double vend = std::abs(map.eval(orbit.points.back().z));
    if (vend > 0.0) ti += gap * vend; // |f|^2 * (gap/|f|)
    rep.has_time_integral = true;
    rep.time_integral = ti;
    return rep;
}

EllipticLoopReport elliptic_loop_contradiction(const PiecewiseMap& map, cplx center,
                                               const Rect& region, int seed_count,
                                               double ring_radius, const TraceConfig& cfg,
                                               double inner_eps) {
    EllipticLoopReport rep;
    rep.inner_eps = inner_eps;

    double lambda = std::numeric_limits<double>::infinity();
    double supf = 0.0;
    long long included = 0;
    for_grid(region, 64, [&](cplx z) {
        try {
            WirtingerJet j = jet_autodiff(map, z);
            lambda = std::min(lambda, j.fz.real());
            supf = std::max(supf, std::abs(j.f));
            ++included;
        } catch (const Error&) {
        }
    });
    if (included == 0)
        fail(ErrorCode::precondition, "no usable samples in the hypothesis region");
    rep.lambda = lambda;
    rep.hypothesis_holds = lambda > 0.0;
    rep.sup_f = supf;
    rep.inner_bound = kPi * inner_eps * supf;

    TraceConfig tc = cfg;
    tc.center = center;
    rep.seeds = seed_count;
    for (int k = 0; k < seed_count; ++k) {
        double th = 2.0 * kPi * k / seed_count;
        cplx seed = center + ring_radius * cplx(std::cos(th), std::sin(th));
        Trajectory t = trace(map, seed, true, tc);
        if (t.verdict != Verdict::closes_up) continue;
        ++rep.closed_found;
        std::vector<cplx> poly;
        for (const TrajPoint& p : t.points) poly.push_back(p.z);
        rep.loop_lower_bounds.push_back(lambda * std::abs(signed_area(poly)));
    }
    rep.counterexample = rep.hypothesis_holds && rep.closed_found > 0;
    return rep;
}

std::string portrait_svg(const std::vector<Trajectory>& trajectories, cplx center,
                         double ring_radius, double R) {
    const int w = 800;
    auto X = [&](cplx z) { return (z.real() - center.real() + R) / (2 * R) * w; };
    auto Y = [&](cplx z) { return (center.imag() + R - z.imag()) / (2 * R) * w; };
    std::ostringstream os;
    os.precision(6);
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << w << " " << w
       << "\">\n";
    os << "<rect width=\"" << w << "\" height=\"" << w << "\" fill=\"white\"/>\n";
    os << "<circle cx=\"" << X(center) << "\" cy=\"" << Y(center) << "\" r=\""
       << ring_radius / (2 * R) * w
       << "\" fill=\"none\" stroke=\"#bbbbbb\" stroke-dasharray=\"4 4\"/>\n";
    int id = 0;
    for (const Trajectory& t : trajectories) {
        const char* color = "#888888";
        switch (t.verdict) {
            case Verdict::reaches_critical_point: color = "#1f77b4"; break;
            case Verdict::exits_annulus: color = "#7f7f7f"; break;
            case Verdict::closes_up: color = "#2ca02c"; break;
            case Verdict::budget: color = "#ff7f0e"; break;
        }
        os << "<path id=\"traj-" << id++ << "\" fill=\"none\" stroke=\"" << color
           << "\" stroke-width=\"1\" d=\"";
        // thin long polylines for readability of the file
        size_t stride = std::max<size_t>(1, t.points.size() / 400);
        for (size_t i = 0; i < t.points.size(); i += stride)
            os << (i == 0 ? 'M' : 'L') << X(t.points[i].z) << ' ' << Y(t.points[i].z);
        os << "\"/>\n";
    }
    os << "<circle cx=\"" << X(center) << "\" cy=\"" << Y(center)
       << "\" r=\"4\" fill=\"#d62728\"/>\n";
    os << "</svg>\n";
    return os.str();
}

std::string trajectories_csv(const std::vector<Trajectory>& trajectories) {
    std::ostringstream os;
    os.precision(17);
    os << "seed_re,seed_im,direction,t,x,y\n";
    for (const Trajectory& t : trajectories)
        for (const TrajPoint& p : t.points)
            os << t.seed.real() << ',' << t.seed.imag() << ','
               << (t.forward ? "forward" : "backward") << ',' << p.t << ',' << p.z.real() << ','
               << p.z.imag() << "\n";
    return os.str();
}

} // namespace qrlab
