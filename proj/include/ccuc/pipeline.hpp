#pragma once

#include "ccuc/formulation.hpp"
#include "ccuc/gmm.hpp"
#include "ccuc/grid.hpp"
#include "ccuc/miqp.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace ccuc {

struct FitSettings {
    int components = 10;
    std::size_t samples = 100000;
    std::uint64_t seed = 1;
};

/// Nataf sampling plus EM per uncertainty profile (stream derive_seed(seed,
/// profile)), expanded to one GMM per interval.
std::vector<Gmm> fit_interval_gmms(const Case& c, const FitSettings& s);

/// Overwrites every profile's correlation with the case's sweep pattern at
/// coefficient r. Throws InputError if the case declares no sweep or the
/// resulting matrix is not a valid correlation matrix.
void apply_correlation_sweep(Case& c, double r);

struct SolveSettings {
    FormulationOptions formulation;
    SolveConfig solver;
    QuantileConfig quantile;
};

struct PipelineResult {
    QuantileTable quantiles;
    UcModel model;
    SolveResult solve;
    std::optional<UcSchedule> schedule;  // present when the solver found a solution
    double quantile_seconds = 0.0;
    double solve_seconds = 0.0;
};

/// Quantile table, model assembly and branch and bound in sequence.
PipelineResult solve_case(const Case& c, std::span<const Gmm> gmms, const SolveSettings& s = {});

}  // namespace ccuc
