#include "ccuc/commands.hpp"

#include "ccuc/errors.hpp"
#include "ccuc/file_io.hpp"
#include "ccuc/pipeline.hpp"
#include "ccuc/validate.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>
#include <json.hpp>

#include <chrono>
#include <ctime>
#include <functional>
#include <ostream>

namespace ccuc {
namespace {

using nlohmann::json;

std::string utc_now() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

class Manifest {
public:
    Manifest(std::string command, const std::filesystem::path& case_path) : started_(utc_now()) {
        doc_["command"] = std::move(command);
        doc_["case"] = case_path.string();
        doc_["tool_version"] = std::string(kToolVersion);
        doc_["config"] = json::object();
        doc_["seeds"] = json::object();
    }
    template <class T>
    void config(const std::string& key, const T& value) { doc_["config"][key] = value; }
    void seed(const std::string& key, std::uint64_t value) { doc_["seeds"][key] = value; }
    void output(const std::filesystem::path& p) { doc_["outputs"].push_back(p.string()); }

    void write(const std::filesystem::path& artifact) {
        doc_["started"] = started_;
        doc_["finished"] = utc_now();
        write_text_file(artifact.string() + ".manifest.json", doc_.dump(1) + "\n");
    }

private:
    json doc_;
    std::string started_;
};

// Maps exceptions to exit codes; the body returns its own code.
int guarded(std::ostream& err, const std::function<int()>& body) {
    try {
        return body();
    } catch (const InputError& e) {
        fmt::print(err, "error: {}\n", e.what());
        return exit_usage;
    } catch (const InternalError& e) {
        fmt::print(err, "internal error: {}\n", e.what());
        return exit_internal;
    } catch (const std::exception& e) {
        fmt::print(err, "internal error: {}\n", e.what());
        return exit_internal;
    }
}

std::vector<Gmm> load_gmms(const Case& c, const std::optional<std::filesystem::path>& override) {
    std::optional<std::filesystem::path> path = override ? override : c.uncertainty.gmm_file;
    if (!path) throw InputError("no GMM file: pass --gmm or set /uncertainty/gmm_file in the case");
    std::vector<Gmm> g = read_gmm_file(*path);
    if (static_cast<int>(g.size()) != c.horizon)
        throw InputError(fmt::format("{}: has {} interval GMMs, case horizon is {}", path->string(), g.size(),
                                     c.horizon));
    return g;
}

std::filesystem::path sibling(const std::filesystem::path& p, std::string_view suffix) {
    std::filesystem::path out = p;
    out.replace_extension();
    out += suffix;
    return out;
}

}  // namespace

int run_fit(const FitCommand& cmd, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        Manifest manifest("fit", cmd.case_path);
        const Case c = load_case(cmd.case_path);
        FitSettings s{cmd.components, cmd.samples, cmd.seed};
        const auto start = std::chrono::steady_clock::now();
        const std::vector<Gmm> gmms = fit_interval_gmms(c, s);
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        write_gmm_file(cmd.output, gmms);
        manifest.config("components", cmd.components);
        manifest.config("samples", cmd.samples);
        manifest.seed("fit", cmd.seed);
        manifest.output(cmd.output);
        manifest.write(cmd.output);
        fmt::print(out, "fitted {} profile(s) with {} components from {} samples each in {:.2f} s\n",
                   c.uncertainty.profiles.size(), cmd.components, cmd.samples, secs);
        fmt::print(out, "wrote {} interval GMMs to {}\n", gmms.size(), cmd.output.string());
        return static_cast<int>(exit_success);
    });
}

int run_solve(const SolveCommand& cmd, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        Manifest manifest(cmd.export_only ? "export" : "solve", cmd.case_path);
        const Case c = load_case(cmd.case_path);
        const std::vector<Gmm> gmms = load_gmms(c, cmd.gmm_path);
        manifest.config("gap", cmd.gap);
        manifest.config("curtailment", cmd.curtailment);
        manifest.config("line_constraints", cmd.line_constraints);
        if (cmd.time_limit) manifest.config("time_limit", *cmd.time_limit);
        if (cmd.gmm_path) manifest.config("gmm", cmd.gmm_path->string());

        const PtdfMatrix ptdf = compute_ptdf(c.network);
        const QuantileTable q = build_quantile_table(c, gmms, ptdf);
        FormulationOptions fo{cmd.curtailment, cmd.line_constraints};
        const UcModel model = build_miqp(c, ptdf, q, fo);
        fmt::print(out, "quantile phase: {:.3f} ms for {} quantiles ({:.2f} us per constraint)\n",
                   q.elapsed_seconds * 1e3, q.count(), q.elapsed_seconds * 1e6 / static_cast<double>(q.count()));
        fmt::print(out, "model: {} variables ({} binary), {} constraints\n", model.model.num_variables(),
                   model.model.num_binaries(), model.model.num_constraints());

        const std::filesystem::path artifact = cmd.export_only ? *cmd.export_mps : cmd.output;
        if (cmd.export_mps) {
            write_mps(model.model, *cmd.export_mps, c.name.empty() ? "CCUC" : c.name);
            manifest.output(*cmd.export_mps);
            fmt::print(out, "wrote MPS model to {}\n", cmd.export_mps->string());
        }
        if (cmd.export_only) {
            manifest.write(artifact);
            return static_cast<int>(exit_success);
        }

        SolveConfig sc;
        sc.relative_mip_gap = cmd.gap;
        sc.time_limit = cmd.time_limit;
        sc.verbose = cmd.verbose;
        const auto start = std::chrono::steady_clock::now();
        const SolveResult r = branch_and_bound(model.model, sc);
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        fmt::print(out, "MIQP: {} after {} nodes in {:.3f} s\n", to_string(r.status), r.nodes_explored, secs);
        fmt::print(out, "quantile share of solve time: {:.4f}%\n",
                   100.0 * q.elapsed_seconds / (q.elapsed_seconds + secs));
        if (!r.has_solution()) {
            if (r.certificate)
                fmt::print(err, "infeasible: phase-1 violation {:.6g}, worst row {} ({:.6g})\n",
                           r.certificate->total_violation, r.certificate->worst_row, r.certificate->worst_violation);
            else
                fmt::print(err, "no feasible schedule found ({})\n", to_string(r.status));
            return static_cast<int>(r.status == SolveStatus::infeasible ? exit_infeasible : exit_internal);
        }
        const UcSchedule s = extract_schedule(c, model, r.assignment);
        const SolverSummary summary{std::string(to_string(r.status)), r.objective, r.best_bound, r.gap(),
                                    r.nodes_explored};
        write_text_file(cmd.output, schedule_to_json(c.name, s, summary));
        const std::filesystem::path qcsv = cmd.quantile_csv ? *cmd.quantile_csv : sibling(cmd.output, ".quantiles.csv");
        write_text_file(qcsv, quantile_csv(c, q));
        manifest.output(cmd.output);
        manifest.output(qcsv);
        manifest.write(cmd.output);
        fmt::print(out, "objective {:.6f} (bound {:.6f}, gap {:.3e})\n", r.objective, r.best_bound, r.gap());
        fmt::print(out, "cost: commitment {:.4f}, fuel {:.4f}, reserve {:.4f}, curtailment {:.4f}, total {:.4f}\n",
                   s.cost.commitment, s.cost.fuel, s.cost.reserve, s.cost.curtailment, s.cost.total);
        return static_cast<int>(exit_success);
    });
}

int run_validate(const ValidateCommand& cmd, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        Manifest manifest("validate", cmd.case_path);
        const Case c = load_case(cmd.case_path);
        const std::vector<Gmm> gmms = load_gmms(c, cmd.gmm_path);
        const UcSchedule s = schedule_from_json(read_text_file(cmd.schedule_path));
        const PtdfMatrix ptdf = compute_ptdf(c.network);
        const ValidationReport r = validate_schedule(c, ptdf, s, gmms, cmd.samples, cmd.seed);
        write_report_csv(r, cmd.output);
        manifest.config("samples", cmd.samples);
        manifest.config("schedule", cmd.schedule_path.string());
        if (cmd.gmm_path) manifest.config("gmm", cmd.gmm_path->string());
        manifest.seed("validate", cmd.seed);
        manifest.output(cmd.output);
        manifest.write(cmd.output);
        const auto [excess, where] = r.worst_excess();
        fmt::print(out, "{} samples per interval; largest estimate minus alpha: {:.5f} ({})\n", cmd.samples, excess,
                   where);
        fmt::print(out, "all estimates within alpha + 3 CI: {}\n", r.all_within() ? "yes" : "no");
        return static_cast<int>(exit_success);
    });
}

int run_sweep(const SweepCommand& cmd, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        Manifest manifest("sweep", cmd.case_path);
        const Case base = load_case(cmd.case_path);
        std::string csv = "r,total_cost,status\n";
        for (double r : cmd.r_values) {
            Case c = base;
            try {
                apply_correlation_sweep(c, r);
            } catch (const InputError& e) {
                fmt::print(err, "warning: skipping r = {}: {}\n", r, e.what());
                csv += fmt::format("{},,skipped\n", r);
                continue;
            }
            const std::vector<Gmm> gmms = fit_interval_gmms(c, {cmd.components, cmd.samples, cmd.seed});
            SolveSettings ss;
            ss.solver.relative_mip_gap = cmd.gap;
            const PipelineResult p = solve_case(c, gmms, ss);
            if (!p.schedule) {
                csv += fmt::format("{},,{}\n", r, to_string(p.solve.status));
                fmt::print(out, "r = {:+.2f}: {}\n", r, to_string(p.solve.status));
                continue;
            }
            csv += fmt::format("{},{:.6f},{}\n", r, p.schedule->cost.total, to_string(p.solve.status));
            fmt::print(out, "r = {:+.2f}: total cost {:.4f} ({}, {} nodes)\n", r, p.schedule->cost.total,
                       to_string(p.solve.status), p.solve.nodes_explored);
        }
        write_text_file(cmd.output, csv);
        manifest.config("components", cmd.components);
        manifest.config("samples", cmd.samples);
        manifest.config("gap", cmd.gap);
        manifest.config("r_values", cmd.r_values);
        manifest.seed("fit", cmd.seed);
        manifest.output(cmd.output);
        manifest.write(cmd.output);
        return static_cast<int>(exit_success);
    });
}

}  // namespace ccuc
