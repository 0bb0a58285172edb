#pragma once

#include "bmp/config.hpp"
#include "bmp/estimate.hpp"

#include <json.hpp>

#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace bmp {

struct ResultRow {
    double time = 0.0;
    std::string estimator;
    EstimateWithError estimate;
};

/// A pass/fail check attached to an experiment; `--assert` turns failures into exit code 3.
struct Diagnostic {
    std::string name;
    bool passed = true;
    std::string detail;
};

struct ExperimentResult {
    std::vector<ResultRow> rows;
    std::vector<Diagnostic> diagnostics;
    std::vector<std::string> warnings;
    /// Additional CSV files written next to results.csv (file name, contents).
    std::vector<std::pair<std::string, std::string>> extra_files;
    /// Facts for the metadata sidecar (truncation counts, resolved parameters).
    nlohmann::json summary = nlohmann::json::object();
};

/// Runs the experiment in memory. Numeric results depend on the spec and seed
/// only, never on `threads`.
ExperimentResult run_experiment(const ExperimentSpec& spec, unsigned threads);

/// `time,estimator,value,std_error,n_effective,excluded_truncated`, numbers in %.17g.
std::string results_csv(const ExperimentResult& result);

nlohmann::json metadata_json(const ExperimentSpec& spec, const ExperimentResult& result, double wall_seconds,
                             unsigned threads);

struct RunOptions {
    std::optional<unsigned> threads;
    bool assert_diagnostics = false;
    std::optional<std::string> out_dir;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntimeError = 1;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitDiagnosticFailure = 3;

/// Loads, runs and writes results.csv + metadata.json (+ extra files) into the
/// output directory. Messages go to `log`. Returns the process exit code.
int simulate_command(const std::string& spec_path, const std::vector<std::string>& overrides, const RunOptions& options,
                     std::ostream& log);

}  // namespace bmp
