#pragma once

#include "ccuc/formulation.hpp"
#include "ccuc/gmm.hpp"
#include "ccuc/miqp.hpp"

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ccuc {

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

/// GMM parameter file: a JSON array with one entry per interval, each
/// {"dimension", "components": [{"weight", "mean", "covariance"}]}.
std::string gmms_to_json(std::span<const Gmm> gmms);
std::vector<Gmm> gmms_from_json(const std::string& text);
void write_gmm_file(const std::filesystem::path& path, std::span<const Gmm> gmms);
std::vector<Gmm> read_gmm_file(const std::filesystem::path& path);

struct SolverSummary {
    std::string status;
    double objective = 0.0;
    double best_bound = 0.0;
    double gap = 0.0;
    long nodes_explored = 0;
};

/// Schedule JSON: generators, wind, cost breakdown and an optional solver summary.
std::string schedule_to_json(const std::string& case_name, const UcSchedule& s,
                             const std::optional<SolverSummary>& solver = std::nullopt);
UcSchedule schedule_from_json(const std::string& text);

/// Header t,constraint,branch,level,quantile; one row per table entry.
std::string quantile_csv(const Case& c, const QuantileTable& q);

}  // namespace ccuc
