#pragma once

#include <string>
#include <vector>

#include "qrlab/map.hpp"
#include "qrlab/sampling.hpp"

namespace qrlab {

struct WirtingerJet {
    cplx z;
    cplx f;
    cplx fz;
    cplx fzbar;

    double jacobian() const { return std::norm(fz) - std::norm(fzbar); }
};

// Derivatives of the active piece at an interior point. Points within the
// guard-boundary band (1e-6) or at expression singularities are errors; the
// exceptional set is measure zero and callers exclude it.
WirtingerJet jet_autodiff(const PiecewiseMap& map, cplx z);

// Central-difference oracle. The whole 5-point stencil must select the same
// piece.
WirtingerJet jet_finite_difference(const PiecewiseMap& map, cplx z, double h = 1e-5);

constexpr double kGuardBand = 1e-6;

struct Matrix2 {
    double a11 = 0, a12 = 0, a21 = 0, a22 = 0;

    double det() const { return a11 * a22 - a12 * a21; }
    static Matrix2 identity() { return {1, 0, 0, 1}; }
};

Matrix2 jet_to_matrix(const WirtingerJet& jet);
void matrix_to_jet(const Matrix2& m, cplx& fz, cplx& fzbar);

// <X, Y> = Tr(X Y*) = entrywise product sum; |X|^2 = <X, X>.
double inner(const Matrix2& x, const Matrix2& y);

enum class HalfspaceClass { positive, negative, singular };

// Sign of det N, with a 1e-12 singular band. N = 0 is an error.
HalfspaceClass classify_halfspace(const Matrix2& n);

// U(K, N) = {X : |X|^2 <= K det X, <X, N> >= 0}, K in Frobenius form
// (K_frob = K_dist + 1/K_dist relative to the distortion quotient).
struct InclusionSpec {
    double K;
    Matrix2 N;

    InclusionSpec(double k, Matrix2 n);
};

struct InclusionResult {
    bool in = false;
    double det_margin = 0;   // K det X - |X|^2
    double inner_margin = 0; // <X, N>
};

InclusionResult in_inclusion(const Matrix2& x, const InclusionSpec& spec);

// Pointwise predicates over jets for sweep assertions:
//   "qr"                     |fzbar| < |fz| (quasiregularity at the sample)
//   "re_fz>=C"               Re fz >= C for a numeric literal C
//   "re_fz>=C*abs(im_fz)"    Re fz >= C |Im fz|
//   "re_fz==0"               |Re fz| <= 1e-9
//   "lambda"                 no pass/fail; reports the reduced-Beltrami
//                            multiplier fzbar / Re fz where defined
struct Predicate {
    enum class Kind { none, qr, re_ge_const, re_ge_scaled_abs_im, re_zero, reduced_beltrami };
    Kind kind = Kind::none;
    double c = 0.0;
};

Predicate parse_predicate(const std::string& text);

struct RefinementStep {
    int resolution;
    double k_hat;
};

struct DistortionReport {
    long long samples = 0;  // jets actually evaluated
    long long excluded = 0; // boundary band / singular / outside domain
    double k_hat = 0.0;     // grid sup of |fzbar|/|fz|
    double K_hat = 1.0;     // (1+k)/(1-k), meaningful when not degenerate
    bool degenerate = false;
    cplx k_argmax = 0.0;
    double min_jacobian = 0.0;
    double max_jacobian = 0.0;
    long long violations = 0;
    double violation_fraction = 0.0;
    std::vector<cplx> worst_points; // up to 8 violating samples, lexicographic
    std::vector<RefinementStep> refinement;
    double lambda_sup = 0.0;             // reduced-Beltrami predicate only
    long long lambda_undefined = 0;      // |Re fz| <= 1e-9 |fzbar|
    std::string predicate;
};

// Grid sweep with resolution doubling until k_hat moves < 1e-6 (or a cap).
// Deterministic for fixed region/resolution/seedless grid, independent of
// jobs.
DistortionReport distortion_sweep(const PiecewiseMap& map, const Rect& region, int resolution,
                                  const std::string& predicate = "", int jobs = 1,
                                  bool refine = true);

struct HomotopyRow {
    double t;
    double k_hat;
    double max_formula_residual; // |direct ratio^2 - closed-form ratio^2|
};

struct HomotopyReport {
    long long samples = 0;
    long long excluded = 0;
    std::vector<HomotopyRow> rows;
    bool monotone_nonincreasing = true;
};

// Straight-line homotopy f^t = (1-t) f + t z toward the identity. Requires
// <Df, I> = 2 Re fz >= 0 on every included grid sample; fails with a
// precondition error otherwise.
HomotopyReport homotopy_distortion(const PiecewiseMap& map, const Rect& region, int resolution,
                                   const std::vector<double>& ts, int jobs = 1);

} // namespace qrlab
