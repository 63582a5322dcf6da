#pragma once

#include <map>
#include <string>
#include <vector>

#include "qrlab/map.hpp"

namespace qrlab {

// Built-in maps, constructed from DSL source so they exercise the same
// parse/eval path as user maps.
//
//   identity              f(z) = z
//   scalerot  cre,cim     f(z) = c z with c = cre + i cim
//   power     n           f(z) = z^n, integer n >= 1
//   conjpower n           f(z) = conj(z)^n, integer n >= 1
//   roti                  f(z) = i z
//   branch    eps         piecewise branched map, 0 < eps <= 2
//   noninj    M           piecewise-linear non-injective map on re z > 0, M >= 1
//   grad2d                gradient field of re(z^4)/|z|^2 as a plane vector field
//
// "grad3d" names a 3-d scalar field and has no PiecewiseMap form; requesting
// it here is an error (the potential module owns it).

struct FixtureSpec {
    std::string name;
    std::map<std::string, double> params;
};

// Accepts "name", "name?k=v", "name?k=v,k2=v2" (also '&' as separator) and an
// optional leading "fixture:" prefix.
FixtureSpec parse_fixture_spec(const std::string& text);

PiecewiseMap make_fixture(const std::string& name,
                          const std::map<std::string, double>& params = {});

inline PiecewiseMap fixture_from_spec(const std::string& text) {
    FixtureSpec s = parse_fixture_spec(text);
    return make_fixture(s.name, s.params);
}

std::vector<std::string> fixture_names();

// delta = eps / (2 + sqrt(4 - eps^2)), the branch fixture's guard slope.
double branch_delta(double eps);

} // namespace qrlab
