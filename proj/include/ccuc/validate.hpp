#pragma once

#include "ccuc/formulation.hpp"
#include "ccuc/gmm.hpp"
#include "ccuc/grid.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace ccuc {

struct ViolationEstimate {
    double probability = 0.0;
    double ci_halfwidth = 0.0;  // 1.96 sqrt(p (1 - p) / N)
    double alpha = 0.0;         // configured risk level of the constraint

    /// probability <= alpha + sigmas * ci_halfwidth
    bool within(double sigmas = 3.0) const { return probability <= alpha + sigmas * ci_halfwidth; }
};

struct ValidationReport {
    std::size_t sample_count = 0;
    std::uint64_t seed = 0;
    std::vector<std::string> branch_ids;
    std::vector<ViolationEstimate> reserve_up, reserve_down;        // [t]
    std::vector<std::vector<ViolationEstimate>> line_forward;       // [branch][t]
    std::vector<std::vector<ViolationEstimate>> line_reverse;       // [branch][t]

    int horizon() const { return static_cast<int>(reserve_up.size()); }
    bool all_within(double sigmas = 3.0) const;
    /// Largest probability - alpha over all constraints, with its label.
    std::pair<double, std::string> worst_excess() const;
};

ViolationEstimate make_estimate(std::size_t violations, std::size_t n, double alpha);

/// Draws `n_samples` error vectors per interval from gmms[t] (stream
/// derive_seed(seed, t)) and counts violations of each chance constraint.
ValidationReport validate_schedule(const Case& c, const PtdfMatrix& ptdf, const UcSchedule& s,
                                   std::span<const Gmm> gmms, std::size_t n_samples, std::uint64_t seed);

/// Header t,constraint,branch,estimate,ci_halfwidth,alpha; intervals are 1 based.
std::string report_csv(const ValidationReport& r);
void write_report_csv(const ValidationReport& r, const std::filesystem::path& path);
ValidationReport parse_report_csv(const std::string& text);

}  // namespace ccuc
