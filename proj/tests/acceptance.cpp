// Acceptance run: one PASS/FAIL line per criterion. Exit status is nonzero
// if any criterion fails. Pass criterion numbers as arguments to run a subset.

#include "oracles.hpp"

#include "ccuc/file_io.hpp"
#include "ccuc/pipeline.hpp"
#include "ccuc/validate.hpp"

#include <fmt/format.h>

#include <chrono>
#include <cstdio>
#include <exception>
#include <functional>
#include <numeric>
#include <random>
#include <set>
#include <string>

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::filesystem::path data(const std::string& name) { return std::filesystem::path(CCUC_DATA_DIR) / name; }

struct Outcome {
    bool pass = false;
    std::string detail;
};

struct Fixture {
    ccuc::Case c;
    std::vector<ccuc::Gmm> gmms;
};

Fixture shipped(const std::string& name) {
    Fixture f{ccuc::load_case(data(name)), {}};
    f.gmms = ccuc::read_gmm_file(*f.c.uncertainty.gmm_file);
    return f;
}

struct RandomMixture {
    ccuc::UnivariateGmm gmm;
    oracle::Mixture1d raw;
};

RandomMixture random_mixture(std::mt19937_64& rng, int k) {
    std::uniform_real_distribution<double> w(0.05, 1.0), m(-100.0, 100.0), ls(std::log(0.1), std::log(50.0));
    oracle::Mixture1d raw;
    for (int i = 0; i < k; ++i) {
        raw.weights.push_back(w(rng));
        raw.means.push_back(m(rng));
        raw.sigmas.push_back(std::exp(ls(rng)));
    }
    const double total = std::accumulate(raw.weights.begin(), raw.weights.end(), 0.0);
    for (double& x : raw.weights) x /= total;
    std::vector<ccuc::UnivariateComponent> comps;
    for (int i = 0; i < k; ++i) comps.push_back({raw.weights[i], raw.means[i], raw.sigmas[i] * raw.sigmas[i]});
    return {ccuc::UnivariateGmm(comps), raw};
}

constexpr double kLevels[] = {0.005, 0.02, 0.05, 0.1, 0.5, 0.9, 0.95, 0.98, 0.995};

Outcome quantile_correctness() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(20240101);
    std::uniform_int_distribution<int> kd(1, 30);
    double worst_cdf = 0.0, worst_oracle = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const RandomMixture mx = random_mixture(rng, kd(rng));
        for (double q : kLevels) {
            const double y = ccuc::quantile(mx.gmm, q);
            worst_cdf = std::max(worst_cdf, std::abs(ccuc::cdf(mx.gmm, y) - q));
            worst_oracle = std::max(worst_oracle, std::abs(y - oracle::bisection_quantile(mx.raw, q)));
        }
    }
    const double secs = seconds_since(t0);
    return {worst_cdf <= 1e-9 && worst_oracle <= 1e-7 && secs < 5.0,
            fmt::format("max |cdf(y) - q| = {:.2e}, max |y - bisection| = {:.2e}, {:.2f} s", worst_cdf, worst_oracle,
                        secs)};
}

Outcome quantile_speed() {
    std::mt19937_64 rng(7);
    std::vector<RandomMixture> mixtures;
    for (int i = 0; i < 2000; ++i) mixtures.push_back(random_mixture(rng, 10));
    double sink = 0.0;
    const auto t0 = Clock::now();
    for (const auto& mx : mixtures)
        for (double q : kLevels) sink += ccuc::quantile(mx.gmm, q);
    const double per = seconds_since(t0) / (2000.0 * std::size(kLevels)) * 1e6;

    bool share_ok = true;
    std::string shares;
    for (const char* name : {"case3.json", "case3-tight.json", "case6.json", "case6-skewed.json"}) {
        const Fixture f = shipped(name);
        const ccuc::PipelineResult r = ccuc::solve_case(f.c, f.gmms);
        const double share = r.quantile_seconds / (r.quantile_seconds + r.solve_seconds);
        share_ok = share_ok && share <= 0.01;
        shares += fmt::format(" {} {:.3f}%", f.c.name, 100.0 * share);
    }
    return {per <= 100.0 && share_ok && std::isfinite(sink),
            fmt::format("{:.2f} us per 10-component quantile; quantile share of solve time:{}", per, shares)};
}

Outcome end_to_end_oracle() {
    const auto t0 = Clock::now();
    const Fixture f = shipped("case3.json");
    ccuc::SolveSettings s;
    s.solver.relative_mip_gap = 0.0;
    s.solver.absolute_gap = 1e-9;
    const ccuc::PipelineResult r = ccuc::solve_case(f.c, f.gmms, s);
    const oracle::Enumeration e = oracle::enumerate(r.model.model);
    const double diff = std::abs(r.solve.objective - e.objective);
    const double secs = seconds_since(t0);
    return {r.model.model.num_binaries() == 12 && r.solve.has_solution() && e.feasible && diff <= 1e-6 && secs < 60.0,
            fmt::format("B&B {:.9f} ({} nodes), enumeration {:.9f} ({} QPs), |diff| = {:.2e}, {:.1f} s",
                        r.solve.objective, r.solve.nodes_explored, e.objective, e.leaves_solved, diff, secs)};
}

// Shared by criteria 4 and 9: case6 fitted from its marginals.
struct Case6 {
    ccuc::Case c;
    std::vector<ccuc::Gmm> gmms;
    ccuc::PtdfMatrix ptdf;
};

const Case6& case6() {
    static const Case6 c6 = [] {
        Case6 x{ccuc::load_case(data("case6.json")), {}, {}};
        x.gmms = ccuc::fit_interval_gmms(x.c, {});
        x.ptdf = ccuc::compute_ptdf(x.c.network);
        return x;
    }();
    return c6;
}

Outcome chance_constraint_satisfaction() {
    const auto t0 = Clock::now();
    const Case6& c6 = case6();
    bool alphas = c6.c.risk.alpha_reserve_up == 0.02 && c6.c.risk.alpha_reserve_down == 0.02;
    for (const auto& b : c6.c.network.branches) alphas = alphas && b.alpha_forward == 0.02 && b.alpha_reverse == 0.02;
    const ccuc::PipelineResult r = ccuc::solve_case(c6.c, c6.gmms);
    if (!r.schedule) return {false, fmt::format("no schedule ({})", ccuc::to_string(r.solve.status))};
    const ccuc::ValidationReport v = ccuc::validate_schedule(c6.c, c6.ptdf, *r.schedule, c6.gmms, 1'000'000, 1);
    const auto [excess, where] = v.worst_excess();
    const double secs = seconds_since(t0);
    return {alphas && v.all_within() && secs < 120.0,
            fmt::format("largest estimate - alpha = {:.5f} at {}, all within alpha + 3 CI: {}, {:.1f} s", excess,
                        where, v.all_within() ? "yes" : "no", secs)};
}

Outcome gaussian_contrast() {
    const ccuc::Case c = ccuc::load_case(data("case6-skewed.json"));
    const ccuc::PtdfMatrix ptdf = ccuc::compute_ptdf(c.network);
    const std::vector<ccuc::Gmm> mixture = ccuc::fit_interval_gmms(c, {10, 100000, 1});
    const std::vector<ccuc::Gmm> gaussian = ccuc::fit_interval_gmms(c, {1, 100000, 1});

    // (a) KS distance of each farm's model marginal to the Nataf samples it was fitted on.
    const auto& prof = c.uncertainty.profiles[0];
    const ccuc::SampleMatrix samples = ccuc::nataf_sample(prof.marginals, prof.correlation, 100000,
                                                          ccuc::derive_seed(1, 0));
    bool ks_ok = true;
    std::string ks;
    for (Eigen::Index j = 0; j < samples.cols(); ++j) {
        std::vector<double> col(static_cast<std::size_t>(samples.rows()));
        for (Eigen::Index i = 0; i < samples.rows(); ++i) col[static_cast<std::size_t>(i)] = samples(i, j);
        Eigen::VectorXd e = Eigen::VectorXd::Zero(samples.cols());
        e(j) = 1.0;
        const ccuc::UnivariateGmm um = ccuc::affine_project(mixture[0], e);
        const ccuc::UnivariateGmm ug = ccuc::affine_project(gaussian[0], e);
        const double km = ccuc::ks_distance(col, [&](double x) { return ccuc::cdf(um, x); });
        const double kg = ccuc::ks_distance(col, [&](double x) { return ccuc::cdf(ug, x); });
        ks_ok = ks_ok && km < kg;
        ks += fmt::format(" farm {}: {:.4f} vs {:.4f};", j + 1, km, kg);
    }

    // (b) both schedules validated against the mixture.
    const ccuc::PipelineResult rm = ccuc::solve_case(c, mixture);
    const ccuc::PipelineResult rg = ccuc::solve_case(c, gaussian);
    if (!rm.schedule || !rg.schedule) return {false, "a schedule is missing"};
    const ccuc::ValidationReport vm = ccuc::validate_schedule(c, ptdf, *rm.schedule, mixture, 1'000'000, 1);
    const ccuc::ValidationReport vg = ccuc::validate_schedule(c, ptdf, *rg.schedule, mixture, 1'000'000, 1);
    const auto [em, wm] = vm.worst_excess();
    const auto [eg, wg] = vg.worst_excess();
    return {ks_ok && vm.all_within() && !vg.all_within(),
            fmt::format("KS GMM vs Gaussian:{} worst excess GMM {:.5f} ({}), Gaussian {:.5f} ({})", ks, em, wm, eg,
                        wg)};
}

Outcome correlation_monotonicity() {
    const ccuc::Case base = ccuc::load_case(data("case6.json"));
    std::vector<double> costs;
    std::string list;
    for (double r : {-0.4, -0.2, 0.0, 0.2, 0.4}) {
        ccuc::Case c = base;
        ccuc::apply_correlation_sweep(c, r);
        const std::vector<ccuc::Gmm> g = ccuc::fit_interval_gmms(c, {10, 100000, 1});
        ccuc::SolveSettings s;
        s.solver.relative_mip_gap = 1e-4;
        const ccuc::PipelineResult p = ccuc::solve_case(c, g, s);
        if (!p.schedule) return {false, fmt::format("r = {}: {}", r, ccuc::to_string(p.solve.status))};
        costs.push_back(p.schedule->cost.total);
        list += fmt::format(" {:+.1f}: {:.2f};", r, costs.back());
    }
    bool ok = true;
    for (std::size_t i = 1; i < costs.size(); ++i) ok = ok && costs[i] >= costs[i - 1] * (1.0 - 1e-3);
    return {ok, "total cost by r:" + list};
}

Outcome curtailment_feasibility() {
    const Fixture f = shipped("case3-tight.json");
    ccuc::SolveSettings off;
    off.formulation.curtailment = false;
    const ccuc::PipelineResult a = ccuc::solve_case(f.c, f.gmms, off);
    const ccuc::PipelineResult b = ccuc::solve_case(f.c, f.gmms);
    double curtailed = 0.0;
    int periods = 0;
    if (b.schedule)
        for (const auto& w : b.schedule->wind)
            for (double x : w.curtailed) {
                curtailed = std::max(curtailed, x);
                periods += x > 1e-6;
            }
    const bool ok = a.solve.status == ccuc::SolveStatus::infeasible && a.solve.certificate && b.schedule &&
                    curtailed > 1e-6;
    return {ok, fmt::format("without curtailment: {}{}; with: {}, curtailment in {} period(s), max {:.2f} MW",
                            ccuc::to_string(a.solve.status),
                            a.solve.certificate ? " (worst row " + a.solve.certificate->worst_row + ")" : "",
                            ccuc::to_string(b.solve.status), periods, curtailed)};
}

ccuc::Network random_network(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> nd(2, 12);
    std::uniform_real_distribution<double> x(0.02, 0.5);
    const int n = nd(rng);
    ccuc::Network net;
    for (int i = 0; i < n; ++i) net.bus_ids.push_back(10 * i + 3);
    std::shuffle(net.bus_ids.begin(), net.bus_ids.end(), rng);
    net.slack_bus = net.bus_ids[std::uniform_int_distribution<std::size_t>(0, net.bus_ids.size() - 1)(rng)];
    std::set<std::pair<int, int>> used;
    auto add = [&](int a, int b) {
        if (a == b || used.count({std::min(a, b), std::max(a, b)})) return;
        used.insert({std::min(a, b), std::max(a, b)});
        net.branches.push_back({fmt::format("L{}", net.branches.size() + 1), a, b, x(rng), 100.0, 0.02, 0.02});
    };
    // Random spanning tree, then a few extra branches.
    for (int i = 1; i < n; ++i)
        add(net.bus_ids[static_cast<std::size_t>(i)],
            net.bus_ids[std::uniform_int_distribution<std::size_t>(0, static_cast<std::size_t>(i) - 1)(rng)]);
    std::uniform_int_distribution<std::size_t> pick(0, net.bus_ids.size() - 1);
    for (int extra = 0; extra < n / 2; ++extra) add(net.bus_ids[pick(rng)], net.bus_ids[pick(rng)]);
    return net;
}

Outcome ptdf_oracle() {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> inj(-100.0, 100.0);
    double worst = 0.0;
    std::size_t max_buses = 0;
    for (int trial = 0; trial < 10; ++trial) {
        const ccuc::Network net = random_network(rng);
        max_buses = std::max(max_buses, net.bus_ids.size());
        const ccuc::PtdfMatrix ptdf = ccuc::compute_ptdf(net);
        for (int draw = 0; draw < 5; ++draw) {
            Eigen::VectorXd p(static_cast<Eigen::Index>(net.bus_ids.size()));
            for (Eigen::Index i = 0; i < p.size(); ++i) p(i) = inj(rng);
            worst = std::max(worst, (ptdf * p - oracle::dc_flows(net, p)).lpNorm<Eigen::Infinity>());
        }
    }
    return {worst <= 1e-9, fmt::format("10 networks up to {} buses, max flow difference {:.2e} MW", max_buses, worst)};
}

Outcome transmission_contrast() {
    const Case6& c6 = case6();
    ccuc::SolveSettings s;
    s.formulation.line_constraints = false;
    const ccuc::PipelineResult r = ccuc::solve_case(c6.c, c6.gmms, s);
    if (!r.schedule) return {false, fmt::format("no schedule ({})", ccuc::to_string(r.solve.status))};
    const ccuc::ValidationReport v = ccuc::validate_schedule(c6.c, c6.ptdf, *r.schedule, c6.gmms, 1'000'000, 1);
    double worst = 0.0;
    std::string where;
    for (std::size_t l = 0; l < v.branch_ids.size(); ++l)
        for (int t = 0; t < v.horizon(); ++t)
            for (const auto* side : {&v.line_forward, &v.line_reverse}) {
                const double p = (*side)[l][static_cast<std::size_t>(t)].probability;
                if (p > worst) {
                    worst = p;
                    where = fmt::format("{} t{} {}", v.branch_ids[l], t + 1, side == &v.line_forward ? "fwd" : "rev");
                }
            }
    const double alpha = c6.c.risk.alpha_line;
    return {worst > alpha, fmt::format("without line constraints: largest overload probability {:.4f} at {} "
                                       "(alpha {}); with them see criterion 4",
                                       worst, where, alpha)};
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
        {"quantile correctness", quantile_correctness},
        {"quantile speed", quantile_speed},
        {"end-to-end enumeration oracle", end_to_end_oracle},
        {"chance-constraint satisfaction", chance_constraint_satisfaction},
        {"Gaussian vs GMM contrast", gaussian_contrast},
        {"correlation monotonicity", correlation_monotonicity},
        {"curtailment feasibility", curtailment_feasibility},
        {"PTDF oracle", ptdf_oracle},
        {"transmission-impact contrast", transmission_contrast},
    };
    std::set<int> only;
    for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = static_cast<int>(i) + 1;
        if (!only.empty() && !only.count(id)) continue;
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += !o.pass;
        fmt::print("criterion {} [{}] {}: {}\n", id, o.pass ? "PASS" : "FAIL", criteria[i].first, o.detail);
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
