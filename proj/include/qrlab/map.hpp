#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qrlab/expr.hpp"

namespace qrlab {

enum class Rel { le, lt, ge, gt };

struct Comparison {
    ExprPtr lhs;
    Rel rel;
    ExprPtr rhs;
};

/// Boolean combination of real comparisons.
struct Guard {
    enum class Kind { always, cmp, conj, disj, neg };
    Kind kind = Kind::always;
    Comparison cmp;
    std::vector<Guard> children;

    bool holds(cplx z, const ParamEnv& env, double slack = 0.0) const;
    /// Smallest |lhs-rhs| over every comparison in the tree (inf if none).
    double min_margin(cplx z, const ParamEnv& env) const;
};

struct Domain {
    enum class Kind { plane, disk, halfplane, polygon };
    Kind kind = Kind::plane;
    cplx center{};           // disk
    double radius = 0.0;     // disk
    cplx normal{1.0, 0.0};   // halfplane: { z : re(z * conj(normal)) > 0 }
    std::vector<cplx> vertices;  // polygon, counterclockwise

    bool contains(cplx z) const;
    /// Distance from an interior point to the domain boundary (inf for plane).
    double boundary_distance(cplx z) const;
    /// Axis-aligned box enclosing the domain (clipped to `fallback` for the plane).
    void bounding_box(double fallback, double& x0, double& x1, double& y0, double& y1) const;
};

struct Piece {
    Guard guard;
    ExprPtr expr;
};

/// A planar map defined by guarded expression pieces. Immutable after
/// construction; evaluation is pure.
class PiecewiseMap {
public:
    PiecewiseMap(std::string name, ParamEnv params, Domain domain, bool reflect_x,
                 std::vector<Piece> pieces);

    const std::string& name() const { return name_; }
    const ParamEnv& params() const { return params_; }
    const Domain& domain() const { return domain_; }
    bool reflect_x() const { return reflect_x_; }
    const std::vector<Piece>& pieces() const { return pieces_; }

    /// Value of the first matching piece; honors the reflection rule.
    cplx eval(cplx z) const;

    /// Index of the first piece whose guard holds at the (post-reflection)
    /// query point. Throws Error(guard_gap) when none matches and
    /// Error(out_of_domain) for points outside the domain.
    int select_piece(cplx z) const;

    /// Point actually fed to the pieces (conj z when reflection applies).
    cplx query_point(cplx z) const;

    /// Smallest comparison margin over all guards at z (post-reflection);
    /// small values mean z sits near a piece boundary.
    double guard_margin(cplx z) const;

    /// DSL text that parses back to an equivalent map.
    std::string print() const;

private:
    std::string name_;
    ParamEnv params_;
    Domain domain_;
    bool reflect_x_ = false;
    std::vector<Piece> pieces_;
};

struct ConsistencyReport {
    int boundary_samples = 0;
    double max_disagreement = 0.0;
    cplx worst_point{};
};

/// Sample guard-boundary bands and report the maximal disagreement between
/// pieces that both fire within the band.
ConsistencyReport piece_consistency(const PiecewiseMap& map, int samples = 1000,
                                    double band = 1e-6, unsigned seed = 0);

/// Sampled check that the guards cover the domain: returns the first
/// uncovered point found, or nullopt.
std::optional<cplx> coverage_gap(const PiecewiseMap& map, int samples = 10000,
                                 unsigned seed = 0);

} // namespace qrlab
