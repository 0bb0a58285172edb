#include "bmp/acceptance.hpp"
#include "bmp/parallel.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"Acceptance battery"};
    std::string level = "full";
    std::uint64_t seed = 20240601;
    unsigned threads = 0;
    std::vector<int> only;
    app.add_option("--level", level)->check(CLI::IsMember({"quick", "full"}));
    app.add_option("--seed", seed);
    app.add_option("--threads", threads)->check(CLI::PositiveNumber);
    app.add_option("--only", only)->check(CLI::Range(1, 9));
    CLI11_PARSE(app, argc, argv);

    bmp::AcceptanceOptions options;
    options.level = *bmp::parse_verify_level(level);
    options.seed = seed;
    options.threads = bmp::resolve_thread_count(threads > 0 ? std::optional<unsigned>(threads) : std::nullopt);
    options.only.insert(only.begin(), only.end());

    std::cout << "acceptance level=" << level << " seed=" << seed << " threads=" << options.threads << "\n";
    const auto results = bmp::run_acceptance(options, std::cout);
    std::size_t passed = 0;
    for (const auto& r : results) passed += r.passed ? 1 : 0;
    std::cout << passed << "/" << results.size() << " criteria passed\n";
    return passed == results.size() ? 0 : 1;
}
