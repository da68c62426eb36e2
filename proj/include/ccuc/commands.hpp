#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace ccuc {

inline constexpr std::string_view kToolVersion = "0.1.0";

enum ExitCode : int { exit_success = 0, exit_usage = 1, exit_infeasible = 2, exit_internal = 3 };

struct FitCommand {
    std::filesystem::path case_path;
    std::filesystem::path output;
    int components = 10;
    std::size_t samples = 100000;
    std::uint64_t seed = 1;
};

struct SolveCommand {
    std::filesystem::path case_path;
    std::optional<std::filesystem::path> gmm_path;  // defaults to the case's gmm_file
    std::filesystem::path output;
    std::optional<std::filesystem::path> quantile_csv;  // defaults to <output stem>.quantiles.csv
    std::optional<std::filesystem::path> export_mps;
    bool export_only = false;
    double gap = 0.01;
    std::optional<double> time_limit;
    bool curtailment = true;
    bool line_constraints = true;
    bool verbose = false;
};

struct ValidateCommand {
    std::filesystem::path case_path;
    std::optional<std::filesystem::path> gmm_path;
    std::filesystem::path schedule_path;
    std::filesystem::path output;
    std::size_t samples = 1'000'000;
    std::uint64_t seed = 1;
};

struct SweepCommand {
    std::filesystem::path case_path;
    std::filesystem::path output;
    std::vector<double> r_values{-0.4, -0.2, 0.0, 0.2, 0.4};
    int components = 10;
    std::size_t samples = 100000;
    std::uint64_t seed = 1;
    double gap = 1e-4;
};

/// Each command writes its artifacts plus <output>.manifest.json, reports on
/// `out`/`err`, and returns an ExitCode. Exceptions are mapped to exit codes.
int run_fit(const FitCommand& cmd, std::ostream& out, std::ostream& err);
int run_solve(const SolveCommand& cmd, std::ostream& out, std::ostream& err);
int run_validate(const ValidateCommand& cmd, std::ostream& out, std::ostream& err);
int run_sweep(const SweepCommand& cmd, std::ostream& out, std::ostream& err);

}  // namespace ccuc
