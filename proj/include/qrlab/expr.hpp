#pragma once

#include <complex>
#include <map>
#include <memory>
#include <set>
#include <string>

namespace qrlab {

using cplx = std::complex<double>;

/// Parameter environment: name -> real value.
using ParamEnv = std::map<std::string, double>;

/// First-order Wirtinger data of an expression at a point:
/// value, d/dz and d/dzbar.
struct ExprJet {
    cplx v{};
    cplx dz{};
    cplx dzb{};
};

enum class ExprKind {
    literal,   // complex constant
    variable,  // the point z
    param,     // named real parameter
    neg,
    conj,
    re,
    im,
    abs,
    sqrt,
    exp,
    add,
    sub,
    mul,
    div,
    pow,  // integer exponent only
};

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
    ExprKind kind;
    cplx lit{};
    std::string name;  // for param
    int exponent = 0;  // for pow
    ExprPtr a, b;

    static ExprPtr literal(cplx c);
    static ExprPtr variable();
    static ExprPtr param(std::string name);
    static ExprPtr unary(ExprKind k, ExprPtr operand);
    static ExprPtr binary(ExprKind k, ExprPtr lhs, ExprPtr rhs);
    static ExprPtr pow(ExprPtr base, int n);
};

/// Evaluate the expression at z. Throws Error(singularity) on division by
/// zero; abs(0) itself is fine.
cplx eval(const Expr& e, cplx z, const ParamEnv& env);

/// Evaluate value plus Wirtinger derivatives by forward mode.
/// Throws Error(singularity) on division by zero and on the derivative of
/// abs or sqrt at 0.
ExprJet eval_jet(const Expr& e, cplx z, const ParamEnv& env);

/// True when the tree contains none of conj/abs/re/im, so that the
/// zbar-derivative is identically (and bitwise) zero.
bool is_holomorphic(const Expr& e);

/// Structural check that the expression evaluates to a real number for
/// every z (used to validate guard comparisons).
bool is_real_valued(const Expr& e);

/// Collect parameter names referenced by the tree.
void collect_params(const Expr& e, std::set<std::string>& out);

/// Render the expression in DSL syntax; parse(print(e)) evaluates
/// identically (literals are printed with round-trip precision).
std::string to_string(const Expr& e);

} // namespace qrlab
