#pragma once

#include "ccuc/model.hpp"

#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ccuc {

/// Pins variable `var` to `value` for one relaxation solve.
struct Fixing {
    int var = 0;
    double value = 0.0;
};

struct InfeasibilityCertificate {
    double total_violation = 0.0;  // optimum of the elastic phase-1 problem
    std::string worst_row;
    double worst_violation = 0.0;
};

enum class RelaxationStatus { optimal, infeasible };

struct RelaxationResult {
    RelaxationStatus status = RelaxationStatus::infeasible;
    std::vector<double> assignment;  // full length, fixings included
    double objective = 0.0;
    int iterations = 0;
    double kkt_residual = 0.0;  // max scaled primal/dual residual at exit
    std::optional<InfeasibilityCertificate> certificate;
};

struct QpOptions {
    double kkt_tolerance = 1e-7;
    int max_iterations = 200;
};

/// Solves the continuous relaxation (binaries relaxed to their bounds) with a
/// primal-dual interior-point method. Infeasibility is certified by an
/// elastic phase-1 problem. Throws InternalError on numerical breakdown.
RelaxationResult solve_relaxation(const MiqpModel& model, std::span<const Fixing> fixings = {},
                                  const QpOptions& opt = {});

enum class SolveStatus { optimal, gap_reached, infeasible, node_limit, time_limit };

std::string_view to_string(SolveStatus s);

struct NodeEvent {
    long node = 0;
    int depth = 0;
    double bound = 0.0;      // relaxation objective of the node
    double incumbent = 0.0;  // +inf if none yet
    bool integral = false;
    bool pruned = false;
};

struct SolveConfig {
    double relative_mip_gap = 0.01;
    double absolute_gap = 1e-6;
    long node_limit = 1'000'000;
    std::optional<double> time_limit;  // seconds
    double qp_kkt_tolerance = 1e-7;
    bool verbose = false;              // one log line per new incumbent on stdout
    std::function<void(const NodeEvent&)> node_observer;
};

struct SolveResult {
    SolveStatus status = SolveStatus::infeasible;
    std::vector<double> assignment;  // empty without an incumbent
    double objective = kInfinity;
    double best_bound = -kInfinity;
    long nodes_explored = 0;
    std::optional<InfeasibilityCertificate> certificate;  // root certificate when infeasible

    bool has_solution() const { return !assignment.empty(); }
    double gap() const;
};

/// Best-first branch and bound on the most fractional binary (ties to the
/// lowest index). Nodes whose bound is within the configured gap of the
/// incumbent are pruned; the status is gap_reached when such a prune left
/// the absolute gap open, optimal otherwise.
SolveResult branch_and_bound(const MiqpModel& model, const SolveConfig& cfg = {});

/// Free-format MPS with MARKER-delimited integer columns and a QUADOBJ
/// section (entries are twice the objective's quadratic coefficients).
std::string to_mps(const MiqpModel& model, std::string_view name = "CCUC");
void write_mps(const MiqpModel& model, const std::filesystem::path& path, std::string_view name = "CCUC");

/// Reads the subset of free MPS produced by to_mps. Throws InputError with
/// the line number on malformed input.
MiqpModel parse_mps(const std::string& text);

}  // namespace ccuc
