#pragma once

#include "ccuc/gmm_fit.hpp"

#include <Eigen/Dense>

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace ccuc {

/// Flow is positive from `from_bus` to `to_bus`. The forward overload
/// probability bounds flows above +capacity, the reverse one flows below
/// -capacity.
struct Branch {
    std::string id;
    int from_bus = 0;
    int to_bus = 0;
    double reactance = 0.0;  // per unit on the case base
    double capacity = 0.0;   // MW
    double alpha_forward = 0.0;
    double alpha_reverse = 0.0;
};

struct Network {
    double base_mva = 100.0;
    std::vector<int> bus_ids;
    int slack_bus = 0;
    std::vector<Branch> branches;

    /// Position of `bus_id` in bus_ids; throws InputError if unknown.
    std::size_t bus_index(int bus_id) const;
};

struct InitialState {
    bool on = false;
    double power = 0.0;  // MW
    int periods = 1;     // intervals already spent in the current state
};

struct Generator {
    std::string id;
    int bus = 0;
    double p_max = 0.0;
    double p_min = 0.0;
    double a = 0.0;  // $/MW^2h
    double b = 0.0;  // $/MWh
    double c = 0.0;  // $/h
    double startup_cost = 0.0;
    double shutdown_cost = 0.0;
    double reserve_up_cost = 0.0;    // $/MWh
    double reserve_down_cost = 0.0;  // $/MWh
    double reserve_up_max = 0.0;     // MW
    double reserve_down_max = 0.0;   // MW
    double ramp_up = 0.0;            // MW per interval
    double ramp_down = 0.0;
    int min_up = 1;    // intervals
    int min_down = 1;
    InitialState initial;
};

struct WindFarm {
    std::string id;
    int bus = 0;
    double capacity = 0.0;
    std::vector<double> forecast;  // MW, one per interval
};

struct Load {
    std::string id;
    int bus = 0;
    std::vector<double> demand;  // MW, one per interval
};

struct RiskParams {
    double alpha_reserve_up = 0.02;
    double alpha_reserve_down = 0.02;
    double alpha_line = 0.02;  // default for branches without their own values
    double reserve_up_extra = 0.0;    // MW
    double reserve_down_extra = 0.0;  // MW
    double curtailment_penalty = 0.0; // $/MW^2h
};

/// Marginal histograms of the wind farms plus their correlation matrix.
struct UncertaintyProfile {
    std::vector<MarginalHistogram> marginals;
    Eigen::MatrixXd correlation;
};

/// Entries overwritten by the correlation sweep: `varied` pairs get r,
/// `zeroed` pairs get 0 (farm indices, zero based).
struct CorrelationSweep {
    std::vector<std::pair<int, int>> varied;
    std::vector<std::pair<int, int>> zeroed;
};

struct Uncertainty {
    std::vector<UncertaintyProfile> profiles;
    std::vector<int> interval_profile;  // length T, index into profiles
    std::optional<std::filesystem::path> gmm_file;
    std::optional<CorrelationSweep> sweep;

    bool has_marginals() const { return !profiles.empty(); }
};

struct Case {
    std::string name;
    int horizon = 0;
    Network network;
    std::vector<Generator> generators;
    std::vector<WindFarm> wind_farms;
    std::vector<Load> loads;
    RiskParams risk;
    Uncertainty uncertainty;
};

/// Reads and validates a case file. Relative GMM file references are
/// resolved against the case file's directory.
Case load_case(const std::filesystem::path& path);

/// Parses case JSON text; `base_dir` resolves relative file references.
Case parse_case(const std::string& text, const std::filesystem::path& base_dir = {});

/// Checks every invariant of the data model; throws InputError naming the
/// offending entity and the residual.
void validate_case(const Case& c);

/// Throws InputError if the network is not connected.
void check_connected(const Network& net);

/// Rows are branches, columns buses (in Network::bus_ids order); the slack
/// column is identically zero.
using PtdfMatrix = Eigen::MatrixXd;

PtdfMatrix compute_ptdf(const Network& net);

}  // namespace ccuc
