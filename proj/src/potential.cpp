#include "qrlab/potential.hpp"

#include <algorithm>
#include <cmath>

#include "qrlab/error.hpp"
#include "qrlab/jet.hpp"
#include "qrlab/parse.hpp"

namespace qrlab {

namespace {

// adaptive Simpson on [a, b]
template <typename F>
double simpson_rec(const F& f, double a, double b, double fa, double fm, double fb, double whole,
                   double tol, int depth) {
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm), frm = f(rm);
    double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

template <typename F>
double adaptive_simpson(const F& f, double a, double b, double tol = 1e-11) {
    if (a == b) return 0.0;
    double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson_rec(f, a, b, fa, fm, fb, whole, tol, 28);
}

// integral of (-v dx + u dy) along the L-path p -> q (horizontal then vertical)
double lpath_integral(const PiecewiseMap& map, cplx p, cplx q) {
    double horiz = adaptive_simpson(
        [&](double x) { return -map.eval(cplx(x, p.imag())).imag(); }, p.real(), q.real());
    double vert = adaptive_simpson(
        [&](double y) { return map.eval(cplx(q.real(), y)).real(); }, p.imag(), q.imag());
    return horiz + vert;
}

double rect_loop_integral(const PiecewiseMap& map, const Rect& r) {
    cplx a(r.x0, r.y0), b(r.x1, r.y0), c(r.x1, r.y1), d(r.x0, r.y1);
    // around the rectangle via two L-paths: a->c one way minus the other
    return lpath_integral(map, a, c) + lpath_integral(map, c, a);
}

} // namespace

double Potential::eval(cplx p) const { return lpath_integral(*map_, base_, p); }

Potential reconstruct_potential(const PiecewiseMap& map, cplx base, const Rect& region) {
    // hypothesis certificate: Re fz vanishes on region samples
    double sup_f = 0.0;
    long long included = 0;
    for_grid(region, 32, [&](cplx z) {
        try {
            WirtingerJet j = jet_autodiff(map, z);
            if (std::abs(j.fz.real()) > 1e-6)
                fail(ErrorCode::precondition,
                     "Re fz = 0 hypothesis fails on the region (no potential)");
            sup_f = std::max(sup_f, std::abs(j.f));
            ++included;
        } catch (const Error& e) {
            if (e.code() == ErrorCode::precondition) throw;
        }
    });
    if (included == 0) fail(ErrorCode::precondition, "no usable samples in region");

    // path-independence certificate over sampled sub-rectangles
    Halton seq(101);
    double residual = 0.0;
    double worst_perimeter = 1.0;
    for (int i = 0; i < 40; ++i) {
        cplx p = seq.next(region), q = seq.next(region);
        Rect r{std::min(p.real(), q.real()), std::max(p.real(), q.real()),
               std::min(p.imag(), q.imag()), std::max(p.imag(), q.imag())};
        if (r.width() < 1e-3 || r.height() < 1e-3) continue;
        double loop = std::abs(rect_loop_integral(map, r));
        if (loop > residual) {
            residual = loop;
            worst_perimeter = 2.0 * (r.width() + r.height());
        }
    }
    if (residual > 1e-4 * worst_perimeter * std::max(sup_f, 1e-300))
        fail(ErrorCode::precondition, "closed-loop integrals do not vanish (field inconsistent)");
    return Potential(map, base, residual, sup_f);
}

const char* gauge_verdict_name(GaugeVerdict v) {
    switch (v) {
        case GaugeVerdict::positive: return "positive";
        case GaugeVerdict::negative: return "negative";
        case GaugeVerdict::mixed: return "mixed";
        case GaugeVerdict::unresolved: return "unresolved";
    }
    return "?";
}

TaylorGauge taylor_gauge_test(const Potential& psi, cplx anchor, double radius,
                              int probes_per_ring) {
    TaylorGauge g;
    g.anchor = anchor;
    g.grad = psi.gradient(anchor);
    double psi_a = psi.eval(anchor);

    bool first = true;
    bool any_pos = false, any_neg = false, any_zero = false;
    for (double frac : {0.25, 0.5, 0.75, 1.0}) {
        double r = radius * frac;
        if (r < 1e-6) continue;
        for (int k = 0; k < probes_per_ring; ++k) {
            double th = 2.0 * 3.14159265358979323846 * k / probes_per_ring;
            cplx p = anchor + r * cplx(std::cos(th), std::sin(th));
            double val = psi.eval(p) - psi_a - (p.real() - anchor.real()) * g.grad.real() -
                         (p.imag() - anchor.imag()) * g.grad.imag();
            if (first || val < g.min_value) {
                g.min_value = val;
                g.min_probe = p;
            }
            if (first || val > g.max_value) {
                g.max_value = val;
                g.max_probe = p;
            }
            first = false;
            double band = 1e-10 * (1.0 + r * r);
            if (val > band)
                any_pos = true;
            else if (val < -band)
                any_neg = true;
            else
                any_zero = true;
        }
    }
    // A change of sign is decisive even when some probes sit on the zero set
    // (a saddle's axes always do); otherwise any near-zero probe blocks a
    // definite sign.
    if (any_pos && any_neg)
        g.verdict = GaugeVerdict::mixed;
    else if (any_zero)
        g.verdict = GaugeVerdict::unresolved;
    else if (any_pos)
        g.verdict = GaugeVerdict::positive;
    else
        g.verdict = GaugeVerdict::negative;
    return g;
}

DichotomyReport dichotomy_scan(const PiecewiseMap& map, const Rect& region, int anchors,
                               unsigned seed) {
    // convexity certificate: segment samples between region corners and
    // random pairs must stay in the domain
    Halton conv(seed + 7);
    for (int i = 0; i < 200; ++i) {
        cplx p = conv.next(region), q = conv.next(region);
        if (!map.domain().contains(p) || !map.domain().contains(q)) continue;
        for (double t : {0.25, 0.5, 0.75})
            if (!map.domain().contains(p + t * (q - p)))
                fail(ErrorCode::precondition, "region is not convex inside the map domain");
    }

    cplx base(0.5 * (region.x0 + region.x1), 0.5 * (region.y0 + region.y1));
    Potential psi = reconstruct_potential(map, base, region);

    DichotomyReport rep;
    Halton seq(seed + 23);
    double radius = 0.2 * std::min(region.width(), region.height());
    while (int(rep.gauges.size()) < anchors) {
        cplx a = seq.next(region);
        if (!map.domain().contains(a)) continue;
        rep.gauges.push_back(taylor_gauge_test(psi, a, radius));
        if (rep.gauges.back().verdict == GaugeVerdict::unresolved)
            fail(ErrorCode::unresolved, "gauge sign unresolved at an anchor");
    }

    auto section_between = [&](cplx p, cplx q) {
        std::vector<SectionSample> sec;
        for (int i = 0; i <= 32; ++i) {
            double t = double(i) / 32.0;
            sec.push_back({t, psi.eval(p + t * (q - p))});
        }
        return sec;
    };

    for (const TaylorGauge& g : rep.gauges) {
        if (g.verdict == GaugeVerdict::mixed) {
            rep.counterexample = {g.min_probe, g.max_probe};
            rep.section = section_between(g.min_probe, g.max_probe);
            return rep;
        }
    }
    for (size_t i = 1; i < rep.gauges.size(); ++i) {
        if (rep.gauges[i].verdict != rep.gauges[0].verdict) {
            rep.counterexample = {rep.gauges[0].anchor, rep.gauges[i].anchor};
            rep.section = section_between(rep.gauges[0].anchor, rep.gauges[i].anchor);
            return rep;
        }
    }
    rep.uniform = true;
    rep.verdict = rep.gauges.front().verdict;
    return rep;
}

namespace {

struct Hess2 {
    double uxx, uxy, uyy;
    double det() const { return uxx * uyy - uxy * uxy; }
};

Hess2 hessian_u(cplx z) {
    if (z == cplx(0.0, 0.0)) fail(ErrorCode::singularity, "Hessian singular at x1 = x2 = 0");
    cplx zb = std::conj(z);
    cplx uzz = 3.0 * z / zb + (zb * zb * zb) / (z * z * z);
    double uzzb = -1.5 * ((z * z) / (zb * zb) + (zb * zb) / (z * z)).real();
    Hess2 h;
    h.uxx = 2.0 * uzz.real() + 2.0 * uzzb;
    h.uyy = 2.0 * uzzb - 2.0 * uzz.real();
    h.uxy = -2.0 * uzz.imag();
    return h;
}

} // namespace

double ScalarField3::eval(const std::array<double, 3>& x) const {
    cplx z(x[0], x[1]);
    if (z == cplx(0.0, 0.0)) return -0.5 * x[2] * x[2]; // u extends by 0 on the line
    cplx z4 = z * z * z * z;
    return z4.real() / std::norm(z) - 0.5 * x[2] * x[2];
}

std::array<double, 3> ScalarField3::grad(const std::array<double, 3>& x) const {
    cplx z(x[0], x[1]);
    if (z == cplx(0.0, 0.0)) fail(ErrorCode::singularity, "gradient singular at x1 = x2 = 0");
    cplx zb = std::conj(z);
    cplx g = (zb * zb * zb / std::norm(z)) * (3.0 - (z * z * z * z) / (zb * zb * zb * zb));
    return {g.real(), g.imag(), -x[2]};
}

std::array<std::array<double, 3>, 3> ScalarField3::hessian(
    const std::array<double, 3>& x) const {
    Hess2 h = hessian_u(cplx(x[0], x[1]));
    return {{{h.uxx, h.uxy, 0.0}, {h.uxy, h.uyy, 0.0}, {0.0, 0.0, -1.0}}};
}

Hessian3Report hessian_example_3d(int samples, unsigned seed) {
    Hessian3Report rep;
    ScalarField3 psi;
    ExprPtr u_expr = parse_expr("re(z^4)/abs(z)^2");
    Halton seq(seed + 3);
    Halton aux(seed + 5);
    while (rep.samples < samples) {
        cplx z = seq.next({-2, 2, -2, 2});
        if (std::abs(z) < 1e-3) continue;
        double x3 = aux.next01().first * 4.0 - 2.0;
        std::array<double, 3> x{z.real(), z.imag(), x3};
        ++rep.samples;

        Hess2 h = hessian_u(z);
        cplx q = z / std::conj(z);
        double det_closed = -22.0 - 6.0 * (q * q * q * q).real();
        double det_u = h.det();
        rep.max_det_mismatch = std::max(rep.max_det_mismatch, std::abs(det_u - det_closed));
        if (rep.samples == 1) {
            rep.min_det_d2u = rep.max_det_d2u = det_u;
        } else {
            rep.min_det_d2u = std::min(rep.min_det_d2u, det_u);
            rep.max_det_d2u = std::max(rep.max_det_d2u, det_u);
        }
        auto H = psi.hessian(x);
        double det_psi = -1.0 * det_u * 1.0; // block diag with the -1 slot
        (void)H;
        if (rep.samples == 1) {
            rep.min_det_d2psi = rep.max_det_d2psi = det_psi;
        } else {
            rep.min_det_d2psi = std::min(rep.min_det_d2psi, det_psi);
            rep.max_det_d2psi = std::max(rep.max_det_d2psi, det_psi);
        }
        double frob2 = h.uxx * h.uxx + 2.0 * h.uxy * h.uxy + h.uyy * h.uyy + 1.0;
        rep.max_quotient = std::max(rep.max_quotient, std::pow(frob2, 1.5) / det_psi);
        rep.max_entry = std::max({rep.max_entry, std::abs(h.uxx), std::abs(h.uxy),
                                  std::abs(h.uyy)});

        // gradient formula vs the expression jet of u
        ExprJet j = eval_jet(*u_expr, z, {});
        cplx grad_expr = 2.0 * j.dzb;
        auto g = psi.grad(x);
        rep.max_grad_mismatch =
            std::max(rep.max_grad_mismatch, std::abs(grad_expr - cplx(g[0], g[1])));

        // homogeneity of degree 2
        double p0 = psi.eval(x);
        for (double t : {0.5, 2.0, 10.0}) {
            std::array<double, 3> tx{t * x[0], t * x[1], t * x[2]};
            rep.max_homogeneity_residual =
                std::max(rep.max_homogeneity_residual,
                         std::abs(psi.eval(tx) - t * t * p0) / (1.0 + t * t * std::abs(p0)));
        }
    }
    return rep;
}

} // namespace qrlab
