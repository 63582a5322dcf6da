#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace qrlab {

// One acceptance criterion of the end-to-end suite. Checks are "PASS: ..."
// or "FAIL: ..." lines; pass is the conjunction.
struct CriterionResult {
    std::string id;
    std::string tag; // module tag for --only filtering
    bool pass = false;
    std::vector<std::string> checks;
    nlohmann::json details;
};

// Run the acceptance suite, optionally restricted to one module tag.
// Deterministic for a fixed seed: reports carry no clocks or addresses.
std::vector<CriterionResult> run_verification(const std::string& only_tag = "",
                                              int jobs = 1, unsigned seed = 0);

nlohmann::json verification_report(const std::vector<CriterionResult>& results);

// Human-readable table with one line per criterion.
std::string verification_table(const std::vector<CriterionResult>& results);

} // namespace qrlab
