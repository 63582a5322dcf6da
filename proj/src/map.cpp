#include "qrlab/map.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "qrlab/error.hpp"
#include "qrlab/sampling.hpp"

namespace qrlab {

namespace {

double real_value(const ExprPtr& e, cplx z, const ParamEnv& env) {
    return eval(*e, z, env).real();
}

bool cmp_holds(const Comparison& c, cplx z, const ParamEnv& env, double slack) {
    double l = real_value(c.lhs, z, env), r = real_value(c.rhs, z, env);
    switch (c.rel) {
        case Rel::le: return l <= r + slack;
        case Rel::lt: return l < r + slack;
        case Rel::ge: return l >= r - slack;
        case Rel::gt: return l > r - slack;
    }
    return false;
}

} // namespace

bool Guard::holds(cplx z, const ParamEnv& env, double slack) const {
    switch (kind) {
        case Kind::always: return true;
        case Kind::cmp: return cmp_holds(cmp, z, env, slack);
        case Kind::conj:
            return std::all_of(children.begin(), children.end(),
                               [&](const Guard& g) { return g.holds(z, env, slack); });
        case Kind::disj:
            return std::any_of(children.begin(), children.end(),
                               [&](const Guard& g) { return g.holds(z, env, slack); });
        case Kind::neg: return !children.front().holds(z, env, slack);
    }
    return false;
}

double Guard::min_margin(cplx z, const ParamEnv& env) const {
    double m = std::numeric_limits<double>::infinity();
    if (kind == Kind::cmp)
        m = std::abs(real_value(cmp.lhs, z, env) - real_value(cmp.rhs, z, env));
    for (const Guard& g : children) m = std::min(m, g.min_margin(z, env));
    return m;
}

bool Domain::contains(cplx z) const {
    switch (kind) {
        case Kind::plane: return true;
        case Kind::disk: return std::abs(z - center) < radius;
        case Kind::halfplane: return (z * std::conj(normal)).real() > 0.0;
        case Kind::polygon: {
            // even-odd crossing test
            bool in = false;
            size_t n = vertices.size();
            for (size_t i = 0, j = n - 1; i < n; j = i++) {
                cplx a = vertices[i], b = vertices[j];
                if ((a.imag() > z.imag()) != (b.imag() > z.imag())) {
                    double x = a.real() + (z.imag() - a.imag()) / (b.imag() - a.imag()) *
                                              (b.real() - a.real());
                    if (z.real() < x) in = !in;
                }
            }
            return in;
        }
    }
    return false;
}

double Domain::boundary_distance(cplx z) const {
    switch (kind) {
        case Kind::plane: return std::numeric_limits<double>::infinity();
        case Kind::disk: return radius - std::abs(z - center);
        case Kind::halfplane: return (z * std::conj(normal)).real() / std::abs(normal);
        case Kind::polygon: {
            double d = std::numeric_limits<double>::infinity();
            size_t n = vertices.size();
            for (size_t i = 0, j = n - 1; i < n; j = i++) {
                cplx a = vertices[j], b = vertices[i];
                cplx ab = b - a;
                double t = std::clamp(((z - a) * std::conj(ab)).real() / std::norm(ab), 0.0, 1.0);
                d = std::min(d, std::abs(z - (a + t * ab)));
            }
            return d;
        }
    }
    return 0.0;
}

void Domain::bounding_box(double fallback, double& x0, double& x1, double& y0, double& y1) const {
    switch (kind) {
        case Kind::plane:
            x0 = -fallback; x1 = fallback; y0 = -fallback; y1 = fallback;
            return;
        case Kind::disk:
            x0 = center.real() - radius; x1 = center.real() + radius;
            y0 = center.imag() - radius; y1 = center.imag() + radius;
            return;
        case Kind::halfplane: {
            x0 = -fallback; x1 = fallback; y0 = -fallback; y1 = fallback;
            // shrink the box on the closed side when the normal is axis aligned
            if (normal == cplx(1.0, 0.0)) x0 = 0.0;
            if (normal == cplx(-1.0, 0.0)) x1 = 0.0;
            if (normal == cplx(0.0, 1.0)) y0 = 0.0;
            if (normal == cplx(0.0, -1.0)) y1 = 0.0;
            return;
        }
        case Kind::polygon: {
            x0 = y0 = std::numeric_limits<double>::infinity();
            x1 = y1 = -std::numeric_limits<double>::infinity();
            for (cplx v : vertices) {
                x0 = std::min(x0, v.real()); x1 = std::max(x1, v.real());
                y0 = std::min(y0, v.imag()); y1 = std::max(y1, v.imag());
            }
            return;
        }
    }
}

PiecewiseMap::PiecewiseMap(std::string name, ParamEnv params, Domain domain, bool reflect_x,
                           std::vector<Piece> pieces)
    : name_(std::move(name)),
      params_(std::move(params)),
      domain_(std::move(domain)),
      reflect_x_(reflect_x),
      pieces_(std::move(pieces)) {
    if (pieces_.empty()) fail(ErrorCode::bad_config, "map has no pieces");
    std::set<std::string> used;
    for (const Piece& p : pieces_) {
        collect_params(*p.expr, used);
        // guard expressions too
        std::vector<const Guard*> stack{&p.guard};
        while (!stack.empty()) {
            const Guard* g = stack.back();
            stack.pop_back();
            if (g->kind == Guard::Kind::cmp) {
                collect_params(*g->cmp.lhs, used);
                collect_params(*g->cmp.rhs, used);
            }
            for (const Guard& c : g->children) stack.push_back(&c);
        }
    }
    for (const std::string& p : used)
        if (!params_.count(p))
            fail(ErrorCode::undeclared_parameter, "undeclared parameter '" + p + "'");
}

cplx PiecewiseMap::query_point(cplx z) const {
    if (reflect_x_ && z.imag() < 0.0) return std::conj(z);
    return z;
}

int PiecewiseMap::select_piece(cplx z) const {
    if (!domain_.contains(z))
        fail(ErrorCode::out_of_domain, "point outside map domain");
    cplx q = query_point(z);
    for (size_t i = 0; i < pieces_.size(); ++i)
        if (pieces_[i].guard.holds(q, params_)) return int(i);
    fail(ErrorCode::guard_gap, "no guard matches (coverage gap)");
}

cplx PiecewiseMap::eval(cplx z) const {
    cplx q = query_point(z);
    int i = select_piece(z);
    cplx v = qrlab::eval(*pieces_[i].expr, q, params_);
    if (reflect_x_ && z.imag() < 0.0) return std::conj(v);
    return v;
}

double PiecewiseMap::guard_margin(cplx z) const {
    cplx q = query_point(z);
    double m = std::numeric_limits<double>::infinity();
    for (const Piece& p : pieces_) m = std::min(m, p.guard.min_margin(q, params_));
    if (reflect_x_) m = std::min(m, std::abs(z.imag()));
    return m;
}

namespace {

std::string fmt_d(double x) {
    std::ostringstream os;
    os.precision(17);
    os << x;
    return os.str();
}

std::string fmt_c(cplx c) { return fmt_d(c.real()) + (c.imag() < 0 ? "" : "+") + fmt_d(c.imag()) + "i"; }

void print_guard(const Guard& g, std::ostream& os) {
    switch (g.kind) {
        case Guard::Kind::always: os << "true"; break;
        case Guard::Kind::cmp: {
            os << to_string(*g.cmp.lhs);
            switch (g.cmp.rel) {
                case Rel::le: os << " <= "; break;
                case Rel::lt: os << " < "; break;
                case Rel::ge: os << " >= "; break;
                case Rel::gt: os << " > "; break;
            }
            os << to_string(*g.cmp.rhs);
            break;
        }
        case Guard::Kind::conj:
        case Guard::Kind::disj: {
            const char* op = g.kind == Guard::Kind::conj ? " and " : " or ";
            for (size_t i = 0; i < g.children.size(); ++i) {
                if (i) os << op;
                os << "(";
                print_guard(g.children[i], os);
                os << ")";
            }
            break;
        }
        case Guard::Kind::neg:
            os << "not (";
            print_guard(g.children.front(), os);
            os << ")";
            break;
    }
}

} // namespace

std::string PiecewiseMap::print() const {
    std::ostringstream os;
    os << "name: " << name_ << "\n";
    for (const auto& [k, v] : params_) os << "param " << k << " = " << fmt_d(v) << "\n";
    switch (domain_.kind) {
        case Domain::Kind::plane: os << "domain: plane\n"; break;
        case Domain::Kind::disk:
            os << "domain: disk(" << fmt_c(domain_.center) << ", " << fmt_d(domain_.radius) << ")\n";
            break;
        case Domain::Kind::halfplane:
            os << "domain: halfplane(" << fmt_c(domain_.normal) << ")\n";
            break;
        case Domain::Kind::polygon: {
            os << "domain: polygon(";
            for (size_t i = 0; i < domain_.vertices.size(); ++i) {
                if (i) os << "; ";
                os << fmt_c(domain_.vertices[i]);
            }
            os << ")\n";
            break;
        }
    }
    if (reflect_x_) os << "reflect: x-axis\n";
    for (const Piece& p : pieces_) {
        os << "piece: ";
        print_guard(p.guard, os);
        os << " -> " << to_string(*p.expr) << "\n";
    }
    return os.str();
}

ConsistencyReport piece_consistency(const PiecewiseMap& map, int samples, double band,
                                    unsigned seed) {
    ConsistencyReport rep;
    if (map.pieces().size() < 2) return rep;
    double x0, x1, y0, y1;
    map.domain().bounding_box(2.0, x0, x1, y0, y1);
    Rect box{x0, x1, y0, y1};
    if (map.reflect_x()) box.y0 = std::max(0.0, box.y0);
    Halton seq(seed);
    const ParamEnv& env = map.params();

    // Walk random chords, bisect every sign change of each comparison to land
    // in the boundary band, then compare all pieces that fire within the band.
    int found = 0;
    int attempts = 0;
    const int max_attempts = samples * 200;
    std::vector<const Comparison*> cmps;
    for (const Piece& p : map.pieces()) {
        std::vector<const Guard*> stack{&p.guard};
        while (!stack.empty()) {
            const Guard* g = stack.back();
            stack.pop_back();
            if (g->kind == Guard::Kind::cmp) cmps.push_back(&g->cmp);
            for (const Guard& c : g->children) stack.push_back(&c);
        }
    }
    auto cmp_gap = [&](const Comparison* c, cplx z) {
        return qrlab::eval(*c->lhs, z, env).real() - qrlab::eval(*c->rhs, z, env).real();
    };
    while (found < samples && attempts < max_attempts) {
        ++attempts;
        cplx a = seq.next(box), b = seq.next(box);
        for (const Comparison* c : cmps) {
            double ga, gb;
            try {
                ga = cmp_gap(c, a);
                gb = cmp_gap(c, b);
            } catch (const Error&) {
                continue;
            }
            if ((ga < 0) == (gb < 0)) continue;
            cplx lo = a, hi = b;
            double glo = ga;
            for (int it = 0; it < 80; ++it) {
                cplx mid = 0.5 * (lo + hi);
                double gm;
                try {
                    gm = cmp_gap(c, mid);
                } catch (const Error&) {
                    break;
                }
                if ((gm < 0) == (glo < 0)) {
                    lo = mid;
                    glo = gm;
                } else {
                    hi = mid;
                }
                if (std::abs(hi - lo) < 1e-13) break;
            }
            cplx zb = 0.5 * (lo + hi);
            if (!map.domain().contains(zb)) continue;
            // evaluate every piece firing within the band
            std::vector<cplx> vals;
            for (const Piece& p : map.pieces()) {
                if (!p.guard.holds(zb, env, band)) continue;
                try {
                    vals.push_back(qrlab::eval(*p.expr, zb, env));
                } catch (const Error&) {
                }
            }
            if (vals.size() < 2) continue;
            ++found;
            ++rep.boundary_samples;
            for (size_t i = 0; i < vals.size(); ++i)
                for (size_t j = i + 1; j < vals.size(); ++j) {
                    double d = std::abs(vals[i] - vals[j]);
                    if (d > rep.max_disagreement) {
                        rep.max_disagreement = d;
                        rep.worst_point = zb;
                    }
                }
            if (found >= samples) break;
        }
    }
    return rep;
}

std::optional<cplx> coverage_gap(const PiecewiseMap& map, int samples, unsigned seed) {
    double x0, x1, y0, y1;
    map.domain().bounding_box(2.0, x0, x1, y0, y1);
    Rect box{x0, x1, y0, y1};
    if (map.reflect_x()) box.y0 = std::max(0.0, box.y0);
    Halton seq(seed);
    const ParamEnv& env = map.params();
    for (int i = 0; i < samples; ++i) {
        cplx z = seq.next(box);
        if (!map.domain().contains(z)) continue;
        bool matched = false;
        for (const Piece& p : map.pieces())
            if (p.guard.holds(z, env)) {
                matched = true;
                break;
            }
        if (!matched) return z;
    }
    return std::nullopt;
}

} // namespace qrlab
