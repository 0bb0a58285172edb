#pragma once

#include "bmp/branching_law.hpp"
#include "bmp/motions.hpp"
#include "bmp/phi.hpp"
#include "bmp/test_set.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace bmp {

/// Flat key tree read from an experiment file: one `key.path = value` per
/// line, `#` starts a comment. A value is a JSON literal when it parses as one
/// (numbers, "strings", [lists], true/false), otherwise the trimmed text is a
/// bare string. Later assignments win. See docs/config.md.
class KeyTree {
public:
    static KeyTree parse(const std::string& text);
    /// Applies `key=value` overrides as if appended to the file.
    void apply_overrides(const std::vector<std::string>& assignments);

    bool has(const std::string& key) const;
    const nlohmann::json& at(const std::string& key) const;
    void set(const std::string& key, nlohmann::json value);
    /// Every key as a nested JSON object, for echoing into metadata.
    nlohmann::json to_json() const;
    std::vector<std::string> keys() const;

private:
    std::vector<std::pair<std::string, nlohmann::json>> entries_;
};

inline const std::vector<std::string> kExperimentKinds = {
    "many-to-one-check", "many-to-two-check", "martingale-curve", "phi",
    "l2-threshold-scan", "qsd-fit",           "eta-sigma",        "min-h-diagnostic",
};

inline constexpr std::uint64_t kDefaultSeed = 20240601;

struct NamedSet {
    std::string label;
    TestSet set;
};

struct ExperimentSpec {
    std::string kind;
    std::optional<MotionModel> motion;
    std::optional<BranchingLaw> law;
    State x0;
    double horizon = 0.0;
    std::vector<double> snapshot_times;
    std::size_t replicas = 1000;
    std::size_t paths = 100'000;
    std::uint64_t seed = kDefaultSeed;
    std::optional<unsigned> threads;
    std::string output = "out";
    std::size_t population_cap = 1'000'000;
    std::vector<NamedSet> sets;
    std::vector<double> scan_ratios;
    double epsilon = 1e-3;
    double ks_bound = 0.05;
    PhiOptions phi;
    /// Contact process: paths for the decay-rate estimate when motion.lambda is absent.
    std::size_t decay_paths = 20'000;
    /// Allow statistics that need h with the contact-process surrogate.
    bool surrogate = false;
    nlohmann::json echo;
};

/// Validates every key and throws one ConfigError listing all problems.
ExperimentSpec parse_spec(const KeyTree& tree);
ExperimentSpec load_spec(const std::string& path, const std::vector<std::string>& overrides = {});

/// Parses a set bound: a number, or "inf" / "-inf".
double parse_bound(const nlohmann::json& v);

}  // namespace bmp
