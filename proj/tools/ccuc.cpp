#include "ccuc/commands.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"Chance-constrained unit commitment with Gaussian-mixture wind forecast errors"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(ccuc::kToolVersion));

    ccuc::FitCommand fit;
    auto* fit_cmd = app.add_subcommand("fit", "Fit per-interval GMMs from the case's marginals and correlations");
    fit_cmd->add_option("case", fit.case_path, "Case JSON")->required()->check(CLI::ExistingFile);
    fit_cmd->add_option("output", fit.output, "GMM parameter file to write")->required();
    fit_cmd->add_option("-k,--components", fit.components, "Mixture components")->capture_default_str();
    fit_cmd->add_option("-n,--samples", fit.samples, "Nataf samples per profile")->capture_default_str();
    fit_cmd->add_option("--seed", fit.seed, "Random seed")->capture_default_str();

    ccuc::SolveCommand solve;
    auto* solve_cmd = app.add_subcommand("solve", "Build and solve the chance-constrained MIQP");
    solve_cmd->add_option("case", solve.case_path, "Case JSON")->required()->check(CLI::ExistingFile);
    solve_cmd->add_option("output", solve.output, "Schedule JSON to write")->required();
    solve_cmd->add_option("--gmm", solve.gmm_path, "GMM parameter file (defaults to the case's gmm_file)");
    solve_cmd->add_option("--gap", solve.gap, "Relative MIP gap")->capture_default_str()->check(CLI::NonNegativeNumber);
    solve_cmd->add_option("--time-limit", solve.time_limit, "Branch-and-bound time limit in seconds");
    solve_cmd->add_option("--quantiles", solve.quantile_csv, "Quantile CSV path (defaults next to the schedule)");
    solve_cmd->add_option("--export-mps", solve.export_mps, "Also write the model in MPS format");
    solve_cmd->add_flag("--no-curtailment", [&](std::int64_t) { solve.curtailment = false; },
                        "Fix wind curtailment at zero");
    solve_cmd->add_flag("--no-line-constraints", [&](std::int64_t) { solve.line_constraints = false; },
                        "Drop the line chance constraints");
    solve_cmd->add_flag("-v,--verbose", solve.verbose, "Log every new incumbent");

    ccuc::SolveCommand exp;
    exp.export_only = true;
    std::filesystem::path exp_out;
    auto* export_cmd = app.add_subcommand("export", "Write the MIQP in MPS format without solving");
    export_cmd->add_option("case", exp.case_path, "Case JSON")->required()->check(CLI::ExistingFile);
    export_cmd->add_option("output", exp_out, "MPS file to write")->required();
    export_cmd->add_option("--gmm", exp.gmm_path, "GMM parameter file (defaults to the case's gmm_file)");
    export_cmd->add_flag("--no-curtailment", [&](std::int64_t) { exp.curtailment = false; },
                         "Fix wind curtailment at zero");
    export_cmd->add_flag("--no-line-constraints", [&](std::int64_t) { exp.line_constraints = false; },
                         "Drop the line chance constraints");

    ccuc::ValidateCommand val;
    auto* val_cmd = app.add_subcommand("validate", "Monte Carlo violation estimates for a schedule");
    val_cmd->add_option("case", val.case_path, "Case JSON")->required()->check(CLI::ExistingFile);
    val_cmd->add_option("schedule", val.schedule_path, "Schedule JSON")->required()->check(CLI::ExistingFile);
    val_cmd->add_option("output", val.output, "Report CSV to write")->required();
    val_cmd->add_option("--gmm", val.gmm_path, "GMM parameter file (defaults to the case's gmm_file)");
    val_cmd->add_option("-n,--samples", val.samples, "Samples per interval")->capture_default_str();
    val_cmd->add_option("--seed", val.seed, "Random seed")->capture_default_str();

    ccuc::SweepCommand sweep;
    auto* sweep_cmd = app.add_subcommand("sweep", "Total cost over the case's correlation sweep pattern");
    sweep_cmd->add_option("case", sweep.case_path, "Case JSON")->required()->check(CLI::ExistingFile);
    sweep_cmd->add_option("output", sweep.output, "CSV of r, total cost, status")->required();
    sweep_cmd->add_option("--r-values", sweep.r_values, "Correlation coefficients")->delimiter(',')->capture_default_str();
    sweep_cmd->add_option("-k,--components", sweep.components, "Mixture components")->capture_default_str();
    sweep_cmd->add_option("-n,--samples", sweep.samples, "Nataf samples per profile")->capture_default_str();
    sweep_cmd->add_option("--seed", sweep.seed, "Random seed")->capture_default_str();
    sweep_cmd->add_option("--gap", sweep.gap, "Relative MIP gap")->capture_default_str()->check(CLI::NonNegativeNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ccuc::exit_success : ccuc::exit_usage;
    }

    if (*fit_cmd) return ccuc::run_fit(fit, std::cout, std::cerr);
    if (*solve_cmd) return ccuc::run_solve(solve, std::cout, std::cerr);
    if (*export_cmd) {
        exp.export_mps = exp_out;
        return ccuc::run_solve(exp, std::cout, std::cerr);
    }
    if (*val_cmd) return ccuc::run_validate(val, std::cout, std::cerr);
    if (*sweep_cmd) return ccuc::run_sweep(sweep, std::cout, std::cerr);
    return ccuc::exit_usage;
}
