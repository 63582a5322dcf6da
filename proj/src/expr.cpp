#include "qrlab/expr.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "qrlab/error.hpp"

namespace qrlab {

ExprPtr Expr::literal(cplx c) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::literal;
    e->lit = c;
    return e;
}

ExprPtr Expr::variable() {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::variable;
    return e;
}

ExprPtr Expr::param(std::string name) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::param;
    e->name = std::move(name);
    return e;
}

ExprPtr Expr::unary(ExprKind k, ExprPtr operand) {
    auto e = std::make_shared<Expr>();
    e->kind = k;
    e->a = std::move(operand);
    return e;
}

ExprPtr Expr::binary(ExprKind k, ExprPtr lhs, ExprPtr rhs) {
    auto e = std::make_shared<Expr>();
    e->kind = k;
    e->a = std::move(lhs);
    e->b = std::move(rhs);
    return e;
}

ExprPtr Expr::pow(ExprPtr base, int n) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::pow;
    e->a = std::move(base);
    e->exponent = n;
    return e;
}

namespace {

double lookup(const std::string& name, const ParamEnv& env) {
    auto it = env.find(name);
    if (it == env.end())
        fail(ErrorCode::undeclared_parameter, "undeclared parameter '" + name + "'");
    return it->second;
}

cplx ipow(cplx base, int n) {
    if (n == 0) return cplx(1.0, 0.0);
    if (n < 0) {
        if (base == cplx(0.0, 0.0))
            fail(ErrorCode::singularity, "0 raised to a negative power");
        return cplx(1.0, 0.0) / ipow(base, -n);
    }
    cplx acc(1.0, 0.0);
    cplx p = base;
    for (int k = n; k > 0; k >>= 1) {
        if (k & 1) acc *= p;
        p *= p;
    }
    return acc;
}

} // namespace

cplx eval(const Expr& e, cplx z, const ParamEnv& env) {
    switch (e.kind) {
        case ExprKind::literal: return e.lit;
        case ExprKind::variable: return z;
        case ExprKind::param: return cplx(lookup(e.name, env), 0.0);
        case ExprKind::neg: return -eval(*e.a, z, env);
        case ExprKind::conj: return std::conj(eval(*e.a, z, env));
        case ExprKind::re: return cplx(eval(*e.a, z, env).real(), 0.0);
        case ExprKind::im: return cplx(eval(*e.a, z, env).imag(), 0.0);
        case ExprKind::abs: return cplx(std::abs(eval(*e.a, z, env)), 0.0);
        case ExprKind::sqrt: return std::sqrt(eval(*e.a, z, env));
        case ExprKind::exp: return std::exp(eval(*e.a, z, env));
        case ExprKind::add: return eval(*e.a, z, env) + eval(*e.b, z, env);
        case ExprKind::sub: return eval(*e.a, z, env) - eval(*e.b, z, env);
        case ExprKind::mul: return eval(*e.a, z, env) * eval(*e.b, z, env);
        case ExprKind::div: {
            cplx den = eval(*e.b, z, env);
            if (den == cplx(0.0, 0.0))
                fail(ErrorCode::singularity, "division by zero");
            return eval(*e.a, z, env) / den;
        }
        case ExprKind::pow: return ipow(eval(*e.a, z, env), e.exponent);
    }
    fail(ErrorCode::bad_config, "corrupt expression tree");
}

ExprJet eval_jet(const Expr& e, cplx z, const ParamEnv& env) {
    const cplx zero(0.0, 0.0);
    const cplx half(0.5, 0.0);
    const cplx half_i(0.0, -0.5);  // 1/(2i)
    switch (e.kind) {
        case ExprKind::literal: return {e.lit, zero, zero};
        case ExprKind::variable: return {z, cplx(1.0, 0.0), zero};
        case ExprKind::param: return {cplx(lookup(e.name, env), 0.0), zero, zero};
        case ExprKind::neg: {
            ExprJet a = eval_jet(*e.a, z, env);
            return {-a.v, -a.dz, -a.dzb};
        }
        case ExprKind::conj: {
            ExprJet a = eval_jet(*e.a, z, env);
            return {std::conj(a.v), std::conj(a.dzb), std::conj(a.dz)};
        }
        case ExprKind::re: {
            // re f = (f + conj f)/2
            ExprJet a = eval_jet(*e.a, z, env);
            return {cplx(a.v.real(), 0.0), half * (a.dz + std::conj(a.dzb)),
                    half * (a.dzb + std::conj(a.dz))};
        }
        case ExprKind::im: {
            // im f = (f - conj f)/(2i)
            ExprJet a = eval_jet(*e.a, z, env);
            return {cplx(a.v.imag(), 0.0), half_i * (a.dz - std::conj(a.dzb)),
                    half_i * (a.dzb - std::conj(a.dz))};
        }
        case ExprKind::abs: {
            ExprJet a = eval_jet(*e.a, z, env);
            double m = std::abs(a.v);
            if (m == 0.0)
                fail(ErrorCode::singularity, "derivative of abs at 0");
            cplx inv2m(0.5 / m, 0.0);
            return {cplx(m, 0.0),
                    inv2m * (std::conj(a.v) * a.dz + a.v * std::conj(a.dzb)),
                    inv2m * (std::conj(a.v) * a.dzb + a.v * std::conj(a.dz))};
        }
        case ExprKind::sqrt: {
            ExprJet a = eval_jet(*e.a, z, env);
            cplx w = std::sqrt(a.v);
            if (w == zero)
                fail(ErrorCode::singularity, "derivative of sqrt at 0");
            cplx g = cplx(0.5, 0.0) / w;
            return {w, g * a.dz, g * a.dzb};
        }
        case ExprKind::exp: {
            ExprJet a = eval_jet(*e.a, z, env);
            cplx w = std::exp(a.v);
            return {w, w * a.dz, w * a.dzb};
        }
        case ExprKind::add: {
            ExprJet a = eval_jet(*e.a, z, env), b = eval_jet(*e.b, z, env);
            return {a.v + b.v, a.dz + b.dz, a.dzb + b.dzb};
        }
        case ExprKind::sub: {
            ExprJet a = eval_jet(*e.a, z, env), b = eval_jet(*e.b, z, env);
            return {a.v - b.v, a.dz - b.dz, a.dzb - b.dzb};
        }
        case ExprKind::mul: {
            ExprJet a = eval_jet(*e.a, z, env), b = eval_jet(*e.b, z, env);
            return {a.v * b.v, a.dz * b.v + a.v * b.dz, a.dzb * b.v + a.v * b.dzb};
        }
        case ExprKind::div: {
            ExprJet a = eval_jet(*e.a, z, env), b = eval_jet(*e.b, z, env);
            if (b.v == zero)
                fail(ErrorCode::singularity, "division by zero");
            cplx q = a.v / b.v;
            return {q, (a.dz - q * b.dz) / b.v, (a.dzb - q * b.dzb) / b.v};
        }
        case ExprKind::pow: {
            ExprJet a = eval_jet(*e.a, z, env);
            int n = e.exponent;
            if (n == 0) return {cplx(1.0, 0.0), zero, zero};
            if (a.v == zero && n < 1)
                fail(ErrorCode::singularity, "0 raised to a negative power");
            cplx v = ipow(a.v, n);
            if (a.v == zero && n > 1) return {v, zero, zero};
            if (a.v == zero && n == 1) return {v, a.dz, a.dzb};
            cplx g = cplx(double(n), 0.0) * ipow(a.v, n - 1);
            return {v, g * a.dz, g * a.dzb};
        }
    }
    fail(ErrorCode::bad_config, "corrupt expression tree");
}

bool is_holomorphic(const Expr& e) {
    switch (e.kind) {
        case ExprKind::conj:
        case ExprKind::re:
        case ExprKind::im:
        case ExprKind::abs:
            return false;
        default: break;
    }
    if (e.a && !is_holomorphic(*e.a)) return false;
    if (e.b && !is_holomorphic(*e.b)) return false;
    return true;
}

bool is_real_valued(const Expr& e) {
    switch (e.kind) {
        case ExprKind::literal: return e.lit.imag() == 0.0;
        case ExprKind::variable: return false;
        case ExprKind::param: return true;
        case ExprKind::re:
        case ExprKind::im:
        case ExprKind::abs:
            return true;
        case ExprKind::neg:
        case ExprKind::conj:
        case ExprKind::sqrt:  // sqrt of a negative real escapes; callers sample-check
        case ExprKind::exp:
            return is_real_valued(*e.a);
        case ExprKind::add:
        case ExprKind::sub:
        case ExprKind::mul:
        case ExprKind::div:
            return is_real_valued(*e.a) && is_real_valued(*e.b);
        case ExprKind::pow: return is_real_valued(*e.a);
    }
    return false;
}

void collect_params(const Expr& e, std::set<std::string>& out) {
    if (e.kind == ExprKind::param) out.insert(e.name);
    if (e.a) collect_params(*e.a, out);
    if (e.b) collect_params(*e.b, out);
}

namespace {

std::string fmt_double(double x) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

std::string fmt_literal(cplx c) {
    if (c.imag() == 0.0) {
        if (c.real() < 0.0) return "(" + fmt_double(c.real()) + ")";
        return fmt_double(c.real());
    }
    std::string s = "(" + fmt_double(c.real());
    if (c.imag() >= 0.0) s += "+";
    s += fmt_double(c.imag()) + "i)";
    return s;
}

int precedence(ExprKind k) {
    switch (k) {
        case ExprKind::add:
        case ExprKind::sub: return 1;
        case ExprKind::mul:
        case ExprKind::div: return 2;
        case ExprKind::neg: return 3;
        case ExprKind::pow: return 4;
        default: return 5;
    }
}

void print(const Expr& e, std::ostream& os, int parent_prec) {
    int prec = precedence(e.kind);
    bool paren = prec < parent_prec;
    if (paren) os << "(";
    switch (e.kind) {
        case ExprKind::literal: os << fmt_literal(e.lit); break;
        case ExprKind::variable: os << "z"; break;
        case ExprKind::param: os << e.name; break;
        case ExprKind::neg:
            os << "-";
            print(*e.a, os, prec + 1);
            break;
        case ExprKind::conj:
        case ExprKind::re:
        case ExprKind::im:
        case ExprKind::abs:
        case ExprKind::sqrt:
        case ExprKind::exp: {
            const char* fn = e.kind == ExprKind::conj ? "conj"
                             : e.kind == ExprKind::re ? "re"
                             : e.kind == ExprKind::im ? "im"
                             : e.kind == ExprKind::abs ? "abs"
                             : e.kind == ExprKind::sqrt ? "sqrt"
                                                        : "exp";
            os << fn << "(";
            print(*e.a, os, 0);
            os << ")";
            break;
        }
        case ExprKind::add:
        case ExprKind::sub:
        case ExprKind::mul:
        case ExprKind::div: {
            const char* op = e.kind == ExprKind::add ? " + "
                             : e.kind == ExprKind::sub ? " - "
                             : e.kind == ExprKind::mul ? " * "
                                                       : " / ";
            print(*e.a, os, prec);
            os << op;
            // -, / are left associative: force parens on an equal-precedence rhs
            print(*e.b, os, prec + 1);
            break;
        }
        case ExprKind::pow:
            print(*e.a, os, prec + 1);
            os << " ^ " << e.exponent;
            break;
    }
    if (paren) os << ")";
}

} // namespace

std::string to_string(const Expr& e) {
    std::ostringstream os;
    print(e, os, 0);
    return os.str();
}

} // namespace qrlab
