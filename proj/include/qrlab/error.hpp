#pragma once

#include <stdexcept>
#include <string>

namespace qrlab {

enum class ErrorCode {
    parse_error = 1,
    undeclared_parameter,
    non_real_guard,
    out_of_domain,
    guard_gap,
    singularity,
    boundary_band,
    parameter_range,
    precondition,
    unresolved,
    bad_config,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& msg) { throw Error(code, msg); }

} // namespace qrlab
