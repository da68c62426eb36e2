#include "ccuc/pipeline.hpp"

#include "ccuc/errors.hpp"
#include "ccuc/gmm_fit.hpp"
#include "ccuc/random.hpp"

#include <fmt/format.h>

#include <chrono>

namespace ccuc {

std::vector<Gmm> fit_interval_gmms(const Case& c, const FitSettings& s) {
    if (!c.uncertainty.has_marginals())
        throw InputError("/uncertainty/profiles: the case carries no marginal histograms to fit");
    if (s.components < 1) throw InputError("fit: component count must be at least 1");
    if (s.samples < static_cast<std::size_t>(s.components))
        throw InputError("fit: need at least as many samples as components");

    std::vector<Gmm> by_profile;
    for (std::size_t p = 0; p < c.uncertainty.profiles.size(); ++p) {
        const UncertaintyProfile& prof = c.uncertainty.profiles[p];
        try {
            const SampleMatrix x = nataf_sample(prof.marginals, prof.correlation, s.samples, derive_seed(s.seed, p));
            EmConfig cfg;
            cfg.n_components = s.components;
            cfg.seed = derive_seed(s.seed, 1000 + p);
            by_profile.push_back(em_fit(x, cfg));
        } catch (const InputError& e) {
            throw InputError(fmt::format("profile {}: {}", p, e.what()));
        } catch (const InternalError& e) {
            throw InternalError(fmt::format("profile {}: {}", p, e.what()));
        }
    }
    std::vector<Gmm> out;
    for (int t = 0; t < c.horizon; ++t)
        out.push_back(by_profile[static_cast<std::size_t>(c.uncertainty.interval_profile[static_cast<std::size_t>(t)])]);
    return out;
}

void apply_correlation_sweep(Case& c, double r) {
    if (!c.uncertainty.sweep) throw InputError("/uncertainty/correlation_sweep: the case declares no sweep pattern");
    for (UncertaintyProfile& prof : c.uncertainty.profiles) {
        auto set = [&](std::pair<int, int> ij, double v) {
            prof.correlation(ij.first, ij.second) = v;
            prof.correlation(ij.second, ij.first) = v;
        };
        for (const auto& ij : c.uncertainty.sweep->varied) set(ij, r);
        for (const auto& ij : c.uncertainty.sweep->zeroed) set(ij, 0.0);
        check_correlation(prof.correlation);
    }
}

PipelineResult solve_case(const Case& c, std::span<const Gmm> gmms, const SolveSettings& s) {
    PipelineResult out;
    const PtdfMatrix ptdf = compute_ptdf(c.network);
    out.quantiles = build_quantile_table(c, gmms, ptdf, s.quantile);
    out.quantile_seconds = out.quantiles.elapsed_seconds;
    out.model = build_miqp(c, ptdf, out.quantiles, s.formulation);
    const auto start = std::chrono::steady_clock::now();
    out.solve = branch_and_bound(out.model.model, s.solver);
    out.solve_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (out.solve.has_solution()) out.schedule = extract_schedule(c, out.model, out.solve.assignment);
    return out;
}

}  // namespace ccuc
