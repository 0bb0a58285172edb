#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace bmp {

enum class VerifyLevel { quick, full };

struct AcceptanceOptions {
    VerifyLevel level = VerifyLevel::quick;
    std::uint64_t seed = 20240601;
    unsigned threads = 1;
    /// Run only these criteria (1..9); empty means all.
    std::set<int> only;
};

struct CriterionResult {
    int id = 0;
    std::string title;
    bool passed = false;
    /// Observed vs expected lines, one per sub-check.
    std::vector<std::string> details;
    double seconds = 0.0;
};

/// Runs the acceptance battery and prints one PASS/FAIL line per criterion
/// (followed by indented detail lines) to `log` as each criterion finishes.
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options, std::ostream& log);

std::optional<VerifyLevel> parse_verify_level(const std::string& text);

}  // namespace bmp
