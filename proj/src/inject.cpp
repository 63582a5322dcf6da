#include "qrlab/inject.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <unordered_map>
#include <vector>

#include "qrlab/error.hpp"

namespace qrlab {

namespace {

struct Sample {
    cplx z, f;
};

int64_t cell_key(cplx f, double cell) {
    auto fold = [&](double v) { return (int64_t)std::floor(v / cell); };
    // Pack the two cell coordinates; collisions across the pack boundary are
    // harmless (they only add spurious candidates, which refinement rejects).
    return fold(f.real()) * 2000003 + fold(f.imag());
}

bool lex_less(cplx a, cplx b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
}

// Shrinking-step coordinate descent on (z1, z2) jointly, minimizing the
// image distance. Derivative-free on purpose: pieces are only piecewise
// smooth and gradient steps stall at guard boundaries.
bool refine_pair(const PiecewiseMap& map, const Rect& region, double step0,
                 CollisionWitness& w) {
    cplx z1 = w.z1, z2 = w.z2;
    cplx f1, f2;
    try {
        f1 = map.eval(z1);
        f2 = map.eval(z2);
    } catch (const Error&) {
        return false;
    }
    double dist = std::abs(f1 - f2);
    double step = step0;
    for (int pass = 0; pass < 200 && step > 1e-12 && dist > 1e-15; ++pass) {
        bool improved = false;
        for (int var = 0; var < 4; ++var) {
            for (double sgn : {1.0, -1.0}) {
                cplx d = (var % 2 == 0) ? cplx(sgn * step, 0) : cplx(0, sgn * step);
                cplx c1 = (var < 2) ? z1 + d : z1;
                cplx c2 = (var < 2) ? z2 : z2 + d;
                if (!region.contains(c1) || !region.contains(c2)) continue;
                if (std::abs(c1 - c2) < kSeparationFloor) continue;
                cplx g1, g2;
                try {
                    g1 = map.eval(c1);
                    g2 = map.eval(c2);
                } catch (const Error&) {
                    continue;
                }
                double nd = std::abs(g1 - g2);
                if (nd < dist) {
                    z1 = c1;
                    z2 = c2;
                    f1 = g1;
                    f2 = g2;
                    dist = nd;
                    improved = true;
                }
            }
        }
        w.refinement.push_back(dist);
        if (!improved) step *= 0.5;
    }
    if (lex_less(z2, z1)) std::swap(z1, z2);
    w.z1 = z1;
    w.z2 = z2;
    w.separation = std::abs(z1 - z2);
    w.image_distance = dist;
    return w.separation >= kSeparationFloor && dist <= 1e-8 * (1.0 + std::abs(f1));
}

} // namespace

std::vector<CollisionWitness> find_collisions(const PiecewiseMap& map, const Rect& region,
                                              int resolution, int jobs) {
    if (resolution < 2) fail(ErrorCode::bad_config, "find_collisions: resolution < 2");
    const int n = resolution;
    const double hx = region.width() / n, hy = region.height() / n;
    const double h = std::max(hx, hy);

    std::vector<Sample> pts;
    std::vector<char> valid(size_t(n) * n, 0);
    std::vector<cplx> values(size_t(n) * n);
    for_grid(region, n, [&](cplx z) {
        size_t i = size_t(std::lround((z.real() - region.x0) / hx));
        size_t j = size_t(std::lround((z.imag() - region.y0) / hy));
        try {
            values[j * n + i] = map.eval(z);
            valid[j * n + i] = 1;
            pts.push_back({z, values[j * n + i]});
        } catch (const Error&) {
        }
    });
    if (pts.size() < 2) return {};

    // Local stretch estimate from horizontal neighbors; sets the hash cell so
    // that images of nearby preimages land in adjacent cells.
    double stretch = 0.0;
    for (size_t j = 0; j < size_t(n); ++j)
        for (size_t i = 0; i + 1 < size_t(n); ++i)
            if (valid[j * n + i] && valid[j * n + i + 1])
                stretch = std::max(stretch,
                                   std::abs(values[j * n + i + 1] - values[j * n + i]) / hx);
    if (stretch <= 0) stretch = 1.0;
    const double cell = std::max(1.5 * stretch * h, 1e-12);

    std::unordered_map<int64_t, std::vector<int>> buckets;
    for (int i = 0; i < int(pts.size()); ++i) buckets[cell_key(pts[i].f, cell)].push_back(i);

    // Candidate pairs keyed by a coarse pair cell so a non-injective map with
    // a continuum of collisions (overlapping piece images) yields one
    // candidate per neighborhood instead of millions. Per key we keep the
    // pair with the smallest image distance.
    struct Candidate {
        double d;
        int i, k;
    };
    const double pair_cell = 4.0 * h;
    std::unordered_map<int64_t, Candidate> best;
    auto pair_key = [&](cplx a, cplx b) {
        auto fold = [&](double v) { return (int64_t)std::floor(v / pair_cell); };
        int64_t ka = fold(a.real()) * 2000003 + fold(a.imag());
        int64_t kb = fold(b.real()) * 2000003 + fold(b.imag());
        return ka * 1000000007LL + kb;
    };
    for (int i = 0; i < int(pts.size()); ++i) {
        for (int dj = -1; dj <= 1; ++dj)
            for (int di = -1; di <= 1; ++di) {
                cplx probe = pts[i].f + cell * cplx(di, dj);
                auto it = buckets.find(cell_key(probe, cell));
                if (it == buckets.end()) continue;
                for (int k : it->second) {
                    if (k <= i) continue;
                    double sep = std::abs(pts[i].z - pts[k].z);
                    if (sep < kSeparationFloor) continue;
                    double d = std::abs(pts[i].f - pts[k].f);
                    if (d > 2.0 * cell) continue;
                    // Discard pairs whose image distance is explained by the
                    // ambient stretch: they are just neighbors of a
                    // continuous map, not collision candidates.
                    if (d > 0.3 * stretch * sep) continue;
                    cplx a = pts[i].z, b = pts[k].z;
                    if (lex_less(b, a)) std::swap(a, b);
                    int64_t key = pair_key(a, b);
                    auto found = best.find(key);
                    if (found == best.end() || d < found->second.d)
                        best[key] = {d, i, k};
                }
            }
    }
    std::vector<Candidate> ranked;
    ranked.reserve(best.size());
    for (const auto& kv : best) ranked.push_back(kv.second);
    std::sort(ranked.begin(), ranked.end(), [&](const Candidate& a, const Candidate& b) {
        if (a.d != b.d) return a.d < b.d;
        if (pts[a.i].z != pts[b.i].z) return lex_less(pts[a.i].z, pts[b.i].z);
        return lex_less(pts[a.k].z, pts[b.k].z);
    });
    // Refinement budget: recall beyond this is out of scope for a sampling
    // search ("none found at this resolution" is the honest negative).
    const int kMaxRefine = 4000;
    if (int(ranked.size()) > kMaxRefine) ranked.resize(kMaxRefine);
    std::vector<CollisionWitness> candidates;
    for (const Candidate& c : ranked) {
        CollisionWitness w;
        w.z1 = pts[c.i].z;
        w.z2 = pts[c.k].z;
        candidates.push_back(w);
    }

    int chunks = chunk_count(int(candidates.size()));
    std::vector<std::vector<CollisionWitness>> refined(chunks);
    parallel_chunks(int(candidates.size()), jobs, [&](int chunk, int begin, int end) {
        for (int i = begin; i < end; ++i) {
            CollisionWitness w = candidates[i];
            if (refine_pair(map, region, h, w)) refined[chunk].push_back(w);
        }
    });

    std::vector<CollisionWitness> out;
    for (auto& part : refined)
        for (auto& w : part) out.push_back(std::move(w));
    std::sort(out.begin(), out.end(), [](const CollisionWitness& a, const CollisionWitness& b) {
        if (a.image_distance != b.image_distance) return a.image_distance < b.image_distance;
        if (a.z1 != b.z1) return lex_less(a.z1, b.z1);
        return lex_less(a.z2, b.z2);
    });

    // Witnesses from neighboring grid cells collapse onto the same refined
    // pair; keep the best representative per half-step neighborhood. (A map
    // can be non-injective on an open set, in which case nearby distinct
    // witnesses are all genuine; dedupe only below the grid scale.)
    const double dedupe = 0.5 * h;
    std::vector<CollisionWitness> unique;
    for (auto& w : out) {
        bool dup = false;
        for (const auto& u : unique)
            if (std::abs(w.z1 - u.z1) < dedupe && std::abs(w.z2 - u.z2) < dedupe) {
                dup = true;
                break;
            }
        if (!dup) unique.push_back(std::move(w));
    }
    return unique;
}

std::string witnesses_csv(const std::vector<CollisionWitness>& ws) {
    std::ostringstream os;
    os.precision(17);
    os << "x1,y1,x2,y2,image_distance\n";
    for (const auto& w : ws)
        os << w.z1.real() << ',' << w.z1.imag() << ',' << w.z2.real() << ',' << w.z2.imag()
           << ',' << w.image_distance << '\n';
    return os.str();
}

BiLipschitzCheck bilipschitz_check(const PiecewiseMap& map, const Rect& region, double lambda,
                                   double K, int cloud, int jobs) {
    if (lambda <= 0 || K < 1) fail(ErrorCode::parameter_range, "bilipschitz: need lambda > 0, K >= 1");
    DistortionReport cert = distortion_sweep(map, region, 64, "", jobs, false);
    if (cert.min_jacobian < lambda * lambda - 1e-9)
        fail(ErrorCode::precondition, "bilipschitz: sampled Jacobian drops below lambda^2");
    if (!cert.degenerate && cert.K_hat > K + 1e-6)
        fail(ErrorCode::precondition, "bilipschitz: sampled distortion exceeds K");

    std::vector<Sample> pts;
    Halton seq(5);
    const int want = cloud * cloud;
    for (int attempts = 0; int(pts.size()) < want && attempts < 50 * want; ++attempts) {
        cplx z = seq.next(region);
        if (!map.domain().contains(z)) continue;
        try {
            pts.push_back({z, map.eval(z)});
        } catch (const Error&) {
        }
    }
    if (int(pts.size()) < want)
        fail(ErrorCode::precondition, "bilipschitz: could not fill the sampling plan in the domain");

    BiLipschitzCheck chk;
    chk.lambda = lambda;
    chk.K = K;
    chk.bound = lambda / std::sqrt(K);

    struct Partial {
        double min = std::numeric_limits<double>::infinity();
        cplx p, q;
        long long pairs = 0;
    };
    std::vector<Partial> parts(chunk_count(want));
    parallel_chunks(want, jobs, [&](int chunk, int begin, int end) {
        Partial& pt = parts[chunk];
        for (int i = begin; i < end; ++i)
            for (int j = i + 1; j < want; ++j) {
                double dz = std::abs(pts[i].z - pts[j].z);
                if (dz <= 0) continue;
                ++pt.pairs;
                double r = std::abs(pts[i].f - pts[j].f) / dz;
                if (r < pt.min) {
                    pt.min = r;
                    pt.p = pts[i].z;
                    pt.q = pts[j].z;
                }
            }
    });
    chk.min_ratio = std::numeric_limits<double>::infinity();
    for (const Partial& pt : parts) {
        chk.pairs += pt.pairs;
        if (pt.min < chk.min_ratio) {
            chk.min_ratio = pt.min;
            chk.argmin_p = pt.p;
            chk.argmin_q = pt.q;
        }
    }
    chk.pass = chk.min_ratio >= chk.bound - 1e-9;
    return chk;
}

LambdaShift lambda_shift(const PiecewiseMap& map, double lambda, const Rect& region,
                         int samples, unsigned seed) {
    if (lambda <= 0) fail(ErrorCode::parameter_range, "lambda_shift: need lambda > 0");
    std::vector<Piece> pieces;
    for (const Piece& p : map.pieces()) {
        ExprPtr shifted = Expr::binary(
            ExprKind::add, p.expr,
            Expr::binary(ExprKind::mul, Expr::literal(lambda), Expr::variable()));
        pieces.push_back({p.guard, shifted});
    }
    PiecewiseMap g(map.name() + "_shift", map.params(), map.domain(), map.reflect_x(),
                   std::move(pieces));

    LambdaShift out{std::move(g)};
    out.lambda = lambda;
    out.min_re_fz = std::numeric_limits<double>::infinity();
    out.min_jacobian = std::numeric_limits<double>::infinity();
    out.min_shift_jacobian = std::numeric_limits<double>::infinity();

    Halton seq(seed + 41);
    for (int attempts = 0; out.samples < samples && attempts < 100 * samples; ++attempts) {
        cplx z = seq.next(region);
        WirtingerJet jf, jg;
        try {
            jf = jet_autodiff(map, z);
            jg = jet_autodiff(out.shifted, z);
        } catch (const Error&) {
            continue;
        }
        ++out.samples;
        double want = jf.jacobian() + lambda * lambda + 2.0 * lambda * jf.fz.real();
        out.max_identity_residual =
            std::max(out.max_identity_residual, std::abs(jg.jacobian() - want));
        out.min_re_fz = std::min(out.min_re_fz, jf.fz.real());
        out.min_jacobian = std::min(out.min_jacobian, jf.jacobian());
        out.min_shift_jacobian = std::min(out.min_shift_jacobian, jg.jacobian());
    }
    if (out.samples == 0) fail(ErrorCode::precondition, "lambda_shift: no usable samples in region");
    out.hypothesis_ok = out.min_re_fz >= -1e-9 && out.min_jacobian >= -1e-9;
    out.floor_holds =
        out.hypothesis_ok && out.min_shift_jacobian >= lambda * lambda - 1e-9;
    return out;
}

} // namespace qrlab
