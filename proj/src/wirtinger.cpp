#include "qrlab/jet.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>

#include "qrlab/error.hpp"

namespace qrlab {

WirtingerJet jet_autodiff(const PiecewiseMap& map, cplx z) {
    int piece = map.select_piece(z);
    if (map.guard_margin(z) < kGuardBand)
        fail(ErrorCode::boundary_band, "point within guard-boundary band");
    cplx q = map.query_point(z);
    ExprJet ej = eval_jet(*map.pieces()[piece].expr, q, map.params());
    WirtingerJet jet{z, ej.v, ej.dz, ej.dzb};
    if (map.reflect_x() && z.imag() < 0.0) {
        jet.f = std::conj(ej.v);
        jet.fz = std::conj(ej.dz);
        jet.fzbar = std::conj(ej.dzb);
    }
    return jet;
}

WirtingerJet jet_finite_difference(const PiecewiseMap& map, cplx z, double h) {
    const cplx stencil[5] = {z, z + h, z - h, z + cplx(0, h), z - cplx(0, h)};
    int piece = map.select_piece(z);
    for (cplx s : stencil)
        if (map.select_piece(s) != piece)
            fail(ErrorCode::boundary_band, "finite-difference stencil crosses a guard boundary");
    cplx fx = (map.eval(stencil[1]) - map.eval(stencil[2])) / (2.0 * h);
    cplx fy = (map.eval(stencil[3]) - map.eval(stencil[4])) / (2.0 * h);
    WirtingerJet jet;
    jet.z = z;
    jet.f = map.eval(z);
    jet.fz = 0.5 * (fx - cplx(0, 1) * fy);
    jet.fzbar = 0.5 * (fx + cplx(0, 1) * fy);
    return jet;
}

Matrix2 jet_to_matrix(const WirtingerJet& jet) {
    Matrix2 m;
    m.a11 = (jet.fz + jet.fzbar).real();        // u_x
    m.a12 = -(jet.fz - jet.fzbar).imag();       // u_y
    m.a21 = (jet.fz + jet.fzbar).imag();        // v_x
    m.a22 = (jet.fz - jet.fzbar).real();        // v_y
    return m;
}

void matrix_to_jet(const Matrix2& m, cplx& fz, cplx& fzbar) {
    fz = 0.5 * cplx(m.a11 + m.a22, m.a21 - m.a12);
    fzbar = 0.5 * cplx(m.a11 - m.a22, m.a21 + m.a12);
}

double inner(const Matrix2& x, const Matrix2& y) {
    return x.a11 * y.a11 + x.a12 * y.a12 + x.a21 * y.a21 + x.a22 * y.a22;
}

HalfspaceClass classify_halfspace(const Matrix2& n) {
    if (n.a11 == 0 && n.a12 == 0 && n.a21 == 0 && n.a22 == 0)
        fail(ErrorCode::precondition, "cannot classify the zero matrix");
    double d = n.det();
    if (std::abs(d) <= 1e-12) return HalfspaceClass::singular;
    return d > 0 ? HalfspaceClass::positive : HalfspaceClass::negative;
}

InclusionSpec::InclusionSpec(double k, Matrix2 n) : K(k), N(n) {
    if (!(K >= 1.0)) fail(ErrorCode::parameter_range, "inclusion constant K must be >= 1");
    if (!(N.det() > 0.0)) fail(ErrorCode::parameter_range, "inclusion matrix N needs det N > 0");
}

InclusionResult in_inclusion(const Matrix2& x, const InclusionSpec& spec) {
    InclusionResult r;
    r.det_margin = spec.K * x.det() - inner(x, x);
    r.inner_margin = inner(x, spec.N);
    r.in = r.det_margin >= 0.0 && r.inner_margin >= 0.0;
    return r;
}

Predicate parse_predicate(const std::string& text) {
    std::string s;
    for (char c : text)
        if (!std::isspace(static_cast<unsigned char>(c))) s += c;
    Predicate p;
    if (s.empty()) return p;
    if (s == "qr") {
        p.kind = Predicate::Kind::qr;
        return p;
    }
    if (s == "lambda") {
        p.kind = Predicate::Kind::reduced_beltrami;
        return p;
    }
    if (s == "re_fz==0") {
        p.kind = Predicate::Kind::re_zero;
        return p;
    }
    const std::string prefix = "re_fz>=";
    if (s.rfind(prefix, 0) == 0) {
        std::string rest = s.substr(prefix.size());
        const std::string suffix = "*abs(im_fz)";
        bool scaled = rest.size() > suffix.size() &&
                      rest.compare(rest.size() - suffix.size(), suffix.size(), suffix) == 0;
        if (scaled) rest = rest.substr(0, rest.size() - suffix.size());
        try {
            size_t used = 0;
            p.c = std::stod(rest, &used);
            if (used != rest.size()) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            fail(ErrorCode::bad_config, "bad predicate constant in '" + text + "'");
        }
        p.kind = scaled ? Predicate::Kind::re_ge_scaled_abs_im : Predicate::Kind::re_ge_const;
        return p;
    }
    fail(ErrorCode::bad_config, "unrecognized predicate '" + text + "'");
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool violates(const Predicate& p, const WirtingerJet& j) {
    switch (p.kind) {
        case Predicate::Kind::none:
        case Predicate::Kind::reduced_beltrami: return false;
        case Predicate::Kind::qr: return !(std::abs(j.fzbar) < std::abs(j.fz));
        case Predicate::Kind::re_ge_const: return j.fz.real() < p.c - 1e-12;
        case Predicate::Kind::re_ge_scaled_abs_im:
            return j.fz.real() < p.c * std::abs(j.fz.imag()) - 1e-12;
        case Predicate::Kind::re_zero: return std::abs(j.fz.real()) > 1e-9;
    }
    return false;
}

struct Partial {
    long long samples = 0, excluded = 0, violations = 0, lambda_undefined = 0;
    double k = 0.0;
    cplx k_arg = cplx(kInf, kInf);
    double min_j = kInf, max_j = -kInf;
    double lambda_sup = 0.0;
    std::vector<cplx> worst;
};

Partial sweep_once(const PiecewiseMap& map, const Rect& region, int n, const Predicate& pred,
                   int jobs) {
    double hx = region.width() / n, hy = region.height() / n;
    int total = n * n;
    std::vector<Partial> parts(chunk_count(total));
    parallel_chunks(
        total, jobs,
        [&](int chunk, int begin, int end) {
            Partial& p = parts[chunk];
            for (int k = begin; k < end; ++k) {
                cplx z(region.x0 + (k % n) * hx, region.y0 + (k / n) * hy);
                WirtingerJet jet;
                try {
                    jet = jet_autodiff(map, z);
                } catch (const Error&) {
                    ++p.excluded;
                    continue;
                }
                ++p.samples;
                double afz = std::abs(jet.fz), afzb = std::abs(jet.fzbar);
                double ratio = afzb == 0.0 ? 0.0 : (afz == 0.0 ? kInf : afzb / afz);
                if (ratio > p.k) {
                    p.k = ratio;
                    p.k_arg = z;
                }
                double jac = jet.jacobian();
                p.min_j = std::min(p.min_j, jac);
                p.max_j = std::max(p.max_j, jac);
                if (violates(pred, jet)) {
                    ++p.violations;
                    if (p.worst.size() < 8) p.worst.push_back(z);
                }
                if (pred.kind == Predicate::Kind::reduced_beltrami) {
                    if (std::abs(jet.fz.real()) <= 1e-9 * afzb)
                        ++p.lambda_undefined;
                    else
                        p.lambda_sup =
                            std::max(p.lambda_sup, afzb / std::abs(jet.fz.real()));
                }
            }
        });
    Partial out;
    for (const Partial& p : parts) {
        out.samples += p.samples;
        out.excluded += p.excluded;
        out.violations += p.violations;
        out.lambda_undefined += p.lambda_undefined;
        if (p.k > out.k) {
            out.k = p.k;
            out.k_arg = p.k_arg;
        }
        out.min_j = std::min(out.min_j, p.min_j);
        out.max_j = std::max(out.max_j, p.max_j);
        out.lambda_sup = std::max(out.lambda_sup, p.lambda_sup);
        for (cplx w : p.worst)
            if (out.worst.size() < 8) out.worst.push_back(w);
    }
    return out;
}

} // namespace

DistortionReport distortion_sweep(const PiecewiseMap& map, const Rect& region, int resolution,
                                  const std::string& predicate, int jobs, bool refine) {
    Predicate pred = parse_predicate(predicate);
    if (resolution < 2) fail(ErrorCode::parameter_range, "sweep resolution must be >= 2");

    DistortionReport rep;
    rep.predicate = predicate;
    int n = resolution;
    Partial cur;
    double prev_k = -1.0;
    for (;;) {
        cur = sweep_once(map, region, n, pred, jobs);
        if (cur.samples == 0)
            fail(ErrorCode::precondition, "all grid samples excluded (degenerate region)");
        rep.refinement.push_back({n, cur.k});
        bool converged = prev_k >= 0.0 && std::abs(cur.k - prev_k) < 1e-6;
        prev_k = cur.k;
        if (!refine || converged || n >= 4096 || rep.refinement.size() >= 5) break;
        n *= 2;
    }

    rep.samples = cur.samples;
    rep.excluded = cur.excluded;
    rep.k_hat = cur.k;
    rep.degenerate = !(cur.k < 1.0);
    rep.K_hat = rep.degenerate ? kInf : (1.0 + cur.k) / (1.0 - cur.k);
    rep.k_argmax = cur.k_arg;
    rep.min_jacobian = cur.min_j;
    rep.max_jacobian = cur.max_j;
    rep.violations = cur.violations;
    rep.violation_fraction = double(cur.violations) / double(cur.samples);
    rep.worst_points = cur.worst;
    rep.lambda_sup = cur.lambda_sup;
    rep.lambda_undefined = cur.lambda_undefined;
    return rep;
}

HomotopyReport homotopy_distortion(const PiecewiseMap& map, const Rect& region, int resolution,
                                   const std::vector<double>& ts, int jobs) {
    for (double t : ts)
        if (!(t >= 0.0 && t < 1.0))
            fail(ErrorCode::parameter_range, "homotopy parameter t must lie in [0, 1)");
    double hx = region.width() / resolution, hy = region.height() / resolution;
    int total = resolution * resolution;
    std::vector<std::vector<WirtingerJet>> parts(chunk_count(total));
    parallel_chunks(total, jobs, [&](int chunk, int begin, int end) {
        auto& jets = parts[chunk];
        for (int k = begin; k < end; ++k) {
            cplx z(region.x0 + (k % resolution) * hx, region.y0 + (k / resolution) * hy);
            try {
                jets.push_back(jet_autodiff(map, z));
            } catch (const Error&) {
            }
        }
    });

    HomotopyReport rep;
    std::vector<WirtingerJet> jets;
    for (auto& p : parts) jets.insert(jets.end(), p.begin(), p.end());
    rep.samples = (long long)jets.size();
    rep.excluded = total - rep.samples;
    if (jets.empty())
        fail(ErrorCode::precondition, "all grid samples excluded (degenerate region)");
    for (const WirtingerJet& j : jets)
        if (j.fz.real() < -1e-12)
            fail(ErrorCode::precondition,
                 "homotopy hypothesis <Df, I> >= 0 fails at sampled points");

    for (double t : ts) {
        HomotopyRow row{t, 0.0, 0.0};
        double s = t / (1.0 - t);
        for (const WirtingerJet& j : jets) {
            double num = (1.0 - t) * std::abs(j.fzbar);
            double den = std::abs((1.0 - t) * j.fz + t);
            double ratio = num == 0.0 ? 0.0 : (den == 0.0 ? kInf : num / den);
            row.k_hat = std::max(row.k_hat, ratio);
            double formula2 = std::norm(j.fzbar) /
                              ((j.fz.real() + s) * (j.fz.real() + s) + j.fz.imag() * j.fz.imag());
            row.max_formula_residual =
                std::max(row.max_formula_residual, std::abs(ratio * ratio - formula2));
        }
        if (!rep.rows.empty() && row.k_hat > rep.rows.back().k_hat + 1e-12)
            rep.monotone_nonincreasing = false;
        rep.rows.push_back(row);
    }
    return rep;
}

} // namespace qrlab
