#include <filesystem>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>

#include <CLI11.hpp>

#include "strichartz/experiment.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kDomainError = 2;

template <typename Fn>
int guarded(Fn&& fn) {
    try {
        fn();
        return kOk;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kDomainError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kConfigError;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Generalized Lebesgue space decay experiments"};
    app.require_subcommand(1);

    bool verbose = false;
    app.add_flag("-v,--verbose", verbose, "Log progress to stderr");

    std::string config_path;
    std::string out_dir;
    auto* run = app.add_subcommand("run", "Run one experiment config");
    run->add_option("config", config_path, "Experiment config (JSON)")->required();
    run->add_option("--out", out_dir, "Output directory (overrides the config's \"output\")");

    std::string report_dir;
    auto* report = app.add_subcommand("report", "Summarize run artifacts");
    report->add_option("dir", report_dir, "A run directory or a directory of runs")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kOk : kConfigError;
    }

    if (*run) {
        return guarded([&] {
            strichartz::experiment::Options opt;
            opt.verbose = verbose;
            std::optional<std::filesystem::path> out;
            if (!out_dir.empty()) out = out_dir;
            const auto r = strichartz::experiment::run_file(config_path, out, opt);
            for (const auto& f : r.files) std::cout << "wrote " << f << "\n";
        });
    }
    return guarded([&] { std::cout << strichartz::experiment::report(report_dir); });
}
