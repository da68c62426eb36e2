#include "ccuc/errors.hpp"
#include "ccuc/miqp.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <queue>

namespace ccuc {
namespace {

constexpr double kIntegralityTolerance = 1e-6;

struct Node {
    long id = 0;
    int depth = 0;
    double bound = 0.0;
    std::vector<Fixing> fixings;
    std::vector<double> x;
};

struct Later {
    bool operator()(const Node& a, const Node& b) const {
        if (a.bound != b.bound) return a.bound > b.bound;
        return a.id > b.id;
    }
};

// Most fractional binary, ties to the lowest index; -1 if all are integral.
int branching_variable(const std::vector<int>& binaries, const std::vector<double>& x) {
    int best = -1;
    double best_frac = kIntegralityTolerance;
    for (int b : binaries) {
        const double v = x[static_cast<std::size_t>(b)];
        const double frac = std::abs(v - std::round(v));
        if (frac > best_frac) {
            best_frac = frac;
            best = b;
        }
    }
    return best;
}

}  // namespace

std::string_view to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::optimal: return "optimal";
        case SolveStatus::gap_reached: return "gap_reached";
        case SolveStatus::infeasible: return "infeasible";
        case SolveStatus::node_limit: return "node_limit";
        case SolveStatus::time_limit: return "time_limit";
    }
    return "unknown";
}

double SolveResult::gap() const {
    if (!has_solution()) return kInfinity;
    return std::max(0.0, objective - best_bound) / std::max(1.0, std::abs(objective));
}

SolveResult branch_and_bound(const MiqpModel& model, const SolveConfig& cfg) {
    if (!(cfg.relative_mip_gap >= 0.0) || !(cfg.absolute_gap >= 0.0))
        throw InputError("solver: MIP gaps must be nonnegative");
    if (const auto problems = model.check(); !problems.empty()) throw InputError("model: " + problems.front());

    const auto start = std::chrono::steady_clock::now();
    const auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(); };
    const std::vector<int> binaries = model.binary_indices();
    QpOptions qp;
    qp.kkt_tolerance = cfg.qp_kkt_tolerance;

    SolveResult result;
    double gap_pruned_bound = kInfinity;  // smallest bound discarded by the relative gap
    std::priority_queue<Node, std::vector<Node>, Later> open;
    long next_id = 0;

    auto prune_tolerance = [&] {
        return std::max(cfg.absolute_gap, cfg.relative_mip_gap * std::max(1.0, std::abs(result.objective)));
    };
    auto notify = [&](const Node& n, bool integral, bool pruned) {
        if (cfg.node_observer) cfg.node_observer(NodeEvent{n.id, n.depth, n.bound, result.objective, integral, pruned});
    };

    // Re-solves an integral node with every binary pinned, so incumbents are
    // exact leaf optima rather than relaxation points.
    auto offer_incumbent = [&](const Node& n) {
        std::vector<Fixing> all;
        all.reserve(binaries.size());
        for (int b : binaries) all.push_back({b, std::round(n.x[static_cast<std::size_t>(b)])});
        RelaxationResult leaf = solve_relaxation(model, all, qp);
        std::vector<double> x;
        double value = 0.0;
        if (leaf.status == RelaxationStatus::optimal) {
            x = std::move(leaf.assignment);
            value = leaf.objective;
        } else {
            x = n.x;
            for (const Fixing& f : all) x[static_cast<std::size_t>(f.var)] = f.value;
            if (worst_violation(model, x, 1e-6).where != WorstViolation::Where::none) return;
            value = model.evaluate_objective(x);
        }
        if (value < result.objective) {
            result.objective = value;
            result.assignment = std::move(x);
            if (cfg.verbose) {
                const double bound = open.empty() ? n.bound : std::min(n.bound, open.top().bound);
                std::printf("node %ld  incumbent %.10g  bound %.10g  gap %.3e\n", result.nodes_explored,
                            result.objective, bound,
                            std::max(0.0, result.objective - bound) / std::max(1.0, std::abs(result.objective)));
                std::fflush(stdout);
            }
        }
    };

    // Solves a node's relaxation; returns false if it is infeasible.
    auto evaluate = [&](Node& n) {
        ++result.nodes_explored;
        RelaxationResult rel = solve_relaxation(model, n.fixings, qp);
        if (rel.status == RelaxationStatus::infeasible) {
            if (n.depth == 0) result.certificate = rel.certificate;
            notify(n, false, true);
            return false;
        }
        n.bound = std::max(n.bound, rel.objective);
        n.x = std::move(rel.assignment);
        return true;
    };

    auto process = [&](Node n) {
        if (!evaluate(n)) return;
        if (n.bound >= result.objective - prune_tolerance()) {
            if (n.bound < result.objective - cfg.absolute_gap) gap_pruned_bound = std::min(gap_pruned_bound, n.bound);
            notify(n, false, true);
            return;
        }
        const bool integral = branching_variable(binaries, n.x) < 0;
        notify(n, integral, false);
        if (integral)
            offer_incumbent(n);
        else
            open.push(std::move(n));
    };

    Node root;
    root.id = next_id++;
    root.bound = -kInfinity;
    process(std::move(root));

    SolveStatus stop = SolveStatus::optimal;
    while (!open.empty()) {
        if (open.top().bound >= result.objective - prune_tolerance()) {
            if (open.top().bound < result.objective - cfg.absolute_gap)
                gap_pruned_bound = std::min(gap_pruned_bound, open.top().bound);
            break;
        }
        if (result.nodes_explored >= cfg.node_limit) {
            stop = SolveStatus::node_limit;
            break;
        }
        if (cfg.time_limit && elapsed() >= *cfg.time_limit) {
            stop = SolveStatus::time_limit;
            break;
        }
        Node n = open.top();
        open.pop();
        const int var = branching_variable(binaries, n.x);
        for (double value : {0.0, 1.0}) {
            Node child;
            child.id = next_id++;
            child.depth = n.depth + 1;
            child.bound = n.bound;
            child.fixings = n.fixings;
            child.fixings.push_back({var, value});
            child.x = n.x;
            process(std::move(child));
        }
    }

    const double open_bound = open.empty() ? kInfinity : open.top().bound;
    result.best_bound = std::min({result.objective, gap_pruned_bound, open_bound});
    if (stop != SolveStatus::optimal) {
        result.status = stop;
    } else if (!result.has_solution()) {
        result.status = SolveStatus::infeasible;
        result.best_bound = kInfinity;
    } else {
        result.status = result.objective - result.best_bound <= cfg.absolute_gap ? SolveStatus::optimal
                                                                                 : SolveStatus::gap_reached;
    }
    return result;
}

}  // namespace ccuc
