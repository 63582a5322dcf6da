#pragma once

#include <string>

#include "qrlab/map.hpp"

namespace qrlab {

/// Parse DSL source text into a validated PiecewiseMap.
/// Errors carry line/column and the offending token in the message.
PiecewiseMap parse_map(const std::string& source);

/// Parse a single expression (parameters looked up in env at eval time).
ExprPtr parse_expr(const std::string& source);

} // namespace qrlab
