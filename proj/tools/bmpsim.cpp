#include "bmp/acceptance.hpp"
#include "bmp/experiment.hpp"
#include "bmp/parallel.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"Branching Markov process simulator"};
    app.set_version_flag("--version", BMP_VERSION);
    app.require_subcommand(1);

    auto* simulate = app.add_subcommand("simulate", "Run one experiment file");
    std::string spec_path;
    std::vector<std::string> overrides;
    unsigned threads = 0;
    bool assert_diagnostics = false;
    std::string out_dir;
    simulate->add_option("spec", spec_path, "Experiment file (key = value lines)")->required();
    simulate->add_option("--set", overrides, "Override a key, e.g. --set replicas=500")->take_all();
    simulate->add_option("--threads", threads, "Worker threads (default: BMPSIM_THREADS or all cores)")
        ->check(CLI::PositiveNumber);
    simulate->add_flag("--assert", assert_diagnostics, "Exit 3 if any diagnostic fails");
    simulate->add_option("--out", out_dir, "Output directory (overrides `output` in the file)");

    auto* verify = app.add_subcommand("verify", "Run the acceptance battery");
    std::string level = "quick";
    std::uint64_t seed = 20240601;
    std::vector<int> only;
    verify->add_option("--level", level, "quick or full")->check(CLI::IsMember({"quick", "full"}));
    verify->add_option("--seed", seed, "Master seed");
    verify->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
    verify->add_option("--only", only, "Run only these criteria (1..9)")->check(CLI::Range(1, 9));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : bmp::kExitConfigError;
    }

    if (*simulate) {
        bmp::RunOptions options;
        if (threads > 0) options.threads = threads;
        options.assert_diagnostics = assert_diagnostics;
        if (!out_dir.empty()) options.out_dir = out_dir;
        return bmp::simulate_command(spec_path, overrides, options, std::cerr);
    }

    bmp::AcceptanceOptions options;
    options.level = *bmp::parse_verify_level(level);
    options.seed = seed;
    options.threads = bmp::resolve_thread_count(threads > 0 ? std::optional<unsigned>(threads) : std::nullopt);
    options.only.insert(only.begin(), only.end());
    try {
        const auto results = bmp::run_acceptance(options, std::cout);
        std::size_t passed = 0;
        for (const auto& r : results) passed += r.passed ? 1 : 0;
        std::cout << passed << "/" << results.size() << " criteria passed\n";
        return passed == results.size() ? 0 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return bmp::kExitRuntimeError;
    }
}
