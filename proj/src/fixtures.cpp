#include "qrlab/fixtures.hpp"

#include <cmath>
#include <sstream>

#include "qrlab/error.hpp"
#include "qrlab/parse.hpp"

namespace qrlab {

namespace {

double get_param(const std::map<std::string, double>& params, const std::string& key,
                 double fallback) {
    auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
}

void reject_unknown(const std::string& fixture, const std::map<std::string, double>& params,
                    std::initializer_list<const char*> known) {
    for (const auto& [key, value] : params) {
        (void)value;
        bool ok = false;
        for (const char* k : known)
            if (key == k) ok = true;
        if (!ok)
            fail(ErrorCode::parameter_range,
                 "fixture '" + fixture + "' has no parameter '" + key + "'");
    }
}

int integer_param(const std::string& fixture, double v, const char* key) {
    double r = std::round(v);
    if (std::abs(v - r) > 0.0 || r < 1.0 || r > 64.0)
        fail(ErrorCode::parameter_range,
             "fixture '" + fixture + "': " + key + " must be an integer in [1, 64]");
    return int(r);
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

} // namespace

double branch_delta(double eps) { return eps / (2.0 + std::sqrt(4.0 - eps * eps)); }

FixtureSpec parse_fixture_spec(const std::string& text) {
    FixtureSpec spec;
    std::string s = text;
    if (s.rfind("fixture:", 0) == 0) s = s.substr(8);
    size_t q = s.find('?');
    spec.name = s.substr(0, q);
    if (spec.name.empty())
        fail(ErrorCode::bad_config, "empty fixture name in '" + text + "'");
    if (q == std::string::npos) return spec;
    std::string rest = s.substr(q + 1);
    size_t pos = 0;
    while (pos < rest.size()) {
        size_t end = rest.find_first_of(",&", pos);
        std::string kv = rest.substr(pos, end == std::string::npos ? end : end - pos);
        size_t eq = kv.find('=');
        if (eq == std::string::npos || eq == 0)
            fail(ErrorCode::bad_config, "expected key=value in fixture spec '" + text + "'");
        std::string key = kv.substr(0, eq);
        try {
            size_t used = 0;
            double v = std::stod(kv.substr(eq + 1), &used);
            if (used != kv.size() - eq - 1) throw std::invalid_argument("trailing");
            spec.params[key] = v;
        } catch (const std::exception&) {
            fail(ErrorCode::bad_config,
                 "bad numeric value for '" + key + "' in fixture spec '" + text + "'");
        }
        pos = end == std::string::npos ? rest.size() : end + 1;
    }
    return spec;
}

PiecewiseMap make_fixture(const std::string& name,
                          const std::map<std::string, double>& params) {
    std::ostringstream src;
    if (name == "identity") {
        reject_unknown(name, params, {});
        src << "name: identity\n"
               "piece: true -> z\n";
    } else if (name == "scalerot") {
        reject_unknown(name, params, {"cre", "cim"});
        src << "name: scalerot\n"
            << "param cre = " << fmt(get_param(params, "cre", 1.0)) << "\n"
            << "param cim = " << fmt(get_param(params, "cim", 0.0)) << "\n"
            << "piece: true -> (cre + cim*i)*z\n";
    } else if (name == "power") {
        reject_unknown(name, params, {"n"});
        int n = integer_param(name, get_param(params, "n", 2.0), "n");
        src << "name: power\n"
            << "param n = " << n << "\n"
            << "piece: true -> z^" << n << "\n";
    } else if (name == "conjpower") {
        reject_unknown(name, params, {"n"});
        int n = integer_param(name, get_param(params, "n", 1.0), "n");
        src << "name: conjpower\n"
            << "param n = " << n << "\n"
            << "piece: true -> conj(z)^" << n << "\n";
    } else if (name == "roti") {
        reject_unknown(name, params, {});
        src << "name: roti\n"
               "piece: true -> i*z\n";
    } else if (name == "branch") {
        reject_unknown(name, params, {"eps"});
        double eps = get_param(params, "eps", 1.0);
        if (!(eps > 0.0 && eps <= 2.0))
            fail(ErrorCode::parameter_range, "fixture 'branch': need 0 < eps <= 2");
        src << "name: branch\n"
            << "param eps = " << fmt(eps) << "\n"
            << "param delta = " << fmt(branch_delta(eps)) << "\n"
            << "reflect: x-axis\n"
            << "piece: abs(z) <= 0 -> 0\n"
            << "piece: re(z) >= -delta*im(z) -> 2*z^2/(abs(z)*sqrt(1 + delta^2))\n"
            << "piece: true -> (i - eps)*z - i*conj(z)\n";
    } else if (name == "noninj") {
        reject_unknown(name, params, {"M"});
        double M = get_param(params, "M", 1.0);
        if (!(M >= 1.0))
            fail(ErrorCode::parameter_range, "fixture 'noninj': need M >= 1");
        std::string m = fmt(M);
        src << "name: noninj\n"
            << "param M = " << m << "\n"
            << "domain: halfplane(1)\n"
            << "piece: im(z) > 0 and re(z) <= 2*M*im(z)"
               " -> (4*M^2 + 4*M*i)*z + (4*M^2 + 1)*conj(z)\n"
            << "piece: im(z) < 0 and re(z) <= -2*M*im(z)"
               " -> (4*M^2 - 4*M*i)*z + (4*M^2 + 1)*conj(z)\n"
            << "piece: true -> (8*M^2 - 1)*z\n";
    } else if (name == "grad2d") {
        reject_unknown(name, params, {});
        src << "name: grad2d\n"
            << "piece: abs(z) <= 0 -> 0\n"
            << "piece: true -> 3*conj(z)^2/z - z^3/conj(z)^2\n";
    } else if (name == "grad3d") {
        fail(ErrorCode::bad_config,
             "fixture 'grad3d' is a 3-d scalar field, not a plane map; "
             "use the hessian3d operation");
    } else {
        fail(ErrorCode::bad_config, "unknown fixture '" + name + "'");
    }
    return parse_map(src.str());
}

std::vector<std::string> fixture_names() {
    return {"identity", "scalerot", "power", "conjpower",
            "roti",     "branch",   "noninj", "grad2d"};
}

} // namespace qrlab
