#include "ccuc/grid.hpp"

#include "ccuc/errors.hpp"

#include <queue>

namespace ccuc {

void check_connected(const Network& net) {
    const std::size_t n = net.bus_ids.size();
    std::vector<std::vector<std::size_t>> adj(n);
    for (const auto& b : net.branches) {
        const auto f = net.bus_index(b.from_bus);
        const auto t = net.bus_index(b.to_bus);
        adj[f].push_back(t);
        adj[t].push_back(f);
    }
    std::vector<bool> seen(n, false);
    std::queue<std::size_t> frontier;
    const auto start = net.bus_index(net.slack_bus);
    seen[start] = true;
    frontier.push(start);
    while (!frontier.empty()) {
        const auto u = frontier.front();
        frontier.pop();
        for (const auto v : adj[u]) {
            if (!seen[v]) {
                seen[v] = true;
                frontier.push(v);
            }
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (!seen[i])
            throw InputError("network is not connected: bus " + std::to_string(net.bus_ids[i]) +
                             " cannot be reached from the slack bus");
    }
}

PtdfMatrix compute_ptdf(const Network& net) {
    const auto n_bus = static_cast<Eigen::Index>(net.bus_ids.size());
    const auto n_br = static_cast<Eigen::Index>(net.branches.size());
    const auto slack = static_cast<Eigen::Index>(net.bus_index(net.slack_bus));

    // Branch-bus incidence with the slack column removed.
    Eigen::MatrixXd incidence = Eigen::MatrixXd::Zero(n_br, n_bus - 1);
    Eigen::VectorXd susceptance(n_br);
    auto reduced = [slack](Eigen::Index bus) { return bus < slack ? bus : bus - 1; };
    for (Eigen::Index l = 0; l < n_br; ++l) {
        const auto& br = net.branches[static_cast<std::size_t>(l)];
        if (!(br.reactance > 0.0)) throw InputError("branch " + br.id + ": reactance must be positive");
        susceptance(l) = 1.0 / br.reactance;
        const auto f = static_cast<Eigen::Index>(net.bus_index(br.from_bus));
        const auto t = static_cast<Eigen::Index>(net.bus_index(br.to_bus));
        if (f != slack) incidence(l, reduced(f)) += 1.0;
        if (t != slack) incidence(l, reduced(t)) -= 1.0;
    }

    PtdfMatrix ptdf = PtdfMatrix::Zero(n_br, n_bus);
    if (n_bus == 1) return ptdf;

    const Eigen::MatrixXd weighted = susceptance.asDiagonal() * incidence;
    const Eigen::MatrixXd b_reduced = incidence.transpose() * weighted;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(b_reduced);
    if (lu.rank() < b_reduced.rows())
        throw InputError("reduced susceptance matrix is singular (network disconnected from the slack bus)");
    const Eigen::MatrixXd sens = weighted * lu.inverse();

    for (Eigen::Index bus = 0; bus < n_bus; ++bus) {
        if (bus == slack) continue;
        ptdf.col(bus) = sens.col(reduced(bus));
    }
    return ptdf;
}

}  // namespace ccuc
