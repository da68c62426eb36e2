#include "test_util.hpp"

#include "ccuc/errors.hpp"
#include "ccuc/file_io.hpp"
#include "ccuc/formulation.hpp"
#include "ccuc/pipeline.hpp"
#include "ccuc/validate.hpp"

#include <doctest.h>

#include <string>

using namespace ccuc;

namespace {

Gmm gaussian_1d(double mean, double variance) {
    return Gmm(1, {{1.0, Eigen::VectorXd::Constant(1, mean), Eigen::MatrixXd::Constant(1, 1, variance)}});
}

std::vector<Gmm> repeat(int T, const Gmm& g) { return std::vector<Gmm>(static_cast<std::size_t>(T), g); }

// Every unit on at its minimum with the given reserves; wind at forecast.
UcSchedule flat_schedule(const Case& c, double up_on_first, double down_on_first) {
    UcSchedule s;
    const auto T = static_cast<std::size_t>(c.horizon);
    for (std::size_t g = 0; g < c.generators.size(); ++g) {
        GeneratorSchedule gs{c.generators[g].id, std::vector<int>(T, 1), std::vector<double>(T, c.generators[g].p_min),
                             std::vector<double>(T, g == 0 ? up_on_first : 0.0),
                             std::vector<double>(T, g == 0 ? down_on_first : 0.0)};
        s.generators.push_back(std::move(gs));
    }
    for (const WindFarm& w : c.wind_farms) s.wind.push_back({w.id, w.forecast, std::vector<double>(T, 0.0)});
    return s;
}

Case case3_without_extras() {
    auto j = testutil::case_json("case3.json");
    j["risk"]["reserve_up_extra"] = 0;
    j["risk"]["reserve_down_extra"] = 0;
    return testutil::parse(j);
}

}  // namespace

TEST_SUITE("validate") {

TEST_CASE("reserve at the Gaussian quantile is violated at the risk level") {
    const Case c = case3_without_extras();
    const PtdfMatrix ptdf = compute_ptdf(c.network);
    const std::size_t n = 1'000'000;
    const ValidationReport r =
        validate_schedule(c, ptdf, flat_schedule(c, 20.5374891, 1000.0), repeat(c.horizon, gaussian_1d(0, 100)), n, 3);
    CHECK(r.sample_count == n);
    for (int t = 0; t < c.horizon; ++t) {
        const ViolationEstimate& e = r.reserve_up[static_cast<std::size_t>(t)];
        CHECK(std::abs(e.probability - 0.02) <= 0.0005);
        CHECK(e.ci_halfwidth == doctest::Approx(1.96 * std::sqrt(e.probability * (1 - e.probability) / n)));
        CHECK(e.alpha == doctest::Approx(0.02));
        CHECK(r.reserve_down[static_cast<std::size_t>(t)].probability == 0.0);
    }
}

TEST_CASE("no reserve against a symmetric mixture fails half the time") {
    const Case c = case3_without_extras();
    const Gmm sym(1, {{0.5, Eigen::VectorXd::Constant(1, -5.0), Eigen::MatrixXd::Constant(1, 1, 4.0)},
                      {0.5, Eigen::VectorXd::Constant(1, 5.0), Eigen::MatrixXd::Constant(1, 1, 4.0)}});
    const ValidationReport r =
        validate_schedule(c, compute_ptdf(c.network), flat_schedule(c, 0.0, 0.0), repeat(c.horizon, sym), 100000, 8);
    for (int t = 0; t < c.horizon; ++t) {
        const ViolationEstimate& e = r.reserve_up[static_cast<std::size_t>(t)];
        CHECK(std::abs(e.probability - 0.5) <= 3.0 * e.ci_halfwidth);
        CHECK(std::abs(r.reserve_down[static_cast<std::size_t>(t)].probability - 0.5) <= 3.0 * e.ci_halfwidth);
    }
}

TEST_CASE("line violations follow the Gaussian tail") {
    const Case c = load_case(testutil::data_dir() / "case3.json");
    const PtdfMatrix ptdf = compute_ptdf(c.network);
    const UcSchedule s = flat_schedule(c, 100.0, 100.0);
    const double sd = 30.0;
    const std::size_t n = 400000;
    const ValidationReport r = validate_schedule(c, ptdf, s, repeat(c.horizon, gaussian_1d(0, sd * sd)), n, 12);
    const Eigen::MatrixXd flows = nominal_flows(c, ptdf, s);
    for (std::size_t l = 0; l < c.network.branches.size(); ++l) {
        const double k = std::abs(line_projection(c, ptdf, l)(0));
        const double cap = c.network.branches[l].capacity;
        for (int t = 0; t < c.horizon; ++t) {
            const double f = flows(static_cast<Eigen::Index>(l), t);
            const double p_fwd = 1.0 - standard_normal_cdf((cap - f) / (k * sd));
            const double p_rev = standard_normal_cdf((-cap - f) / (k * sd));
            const double tol = 4.0 * std::sqrt(0.25 / static_cast<double>(n));
            CHECK(std::abs(r.line_forward[l][static_cast<std::size_t>(t)].probability - p_fwd) <= tol);
            CHECK(std::abs(r.line_reverse[l][static_cast<std::size_t>(t)].probability - p_rev) <= tol);
        }
    }
}

TEST_CASE("deterministic wind never violates a feasible schedule") {
    const Case c = load_case(testutil::data_dir() / "case3.json");
    const std::vector<Gmm> flat = repeat(c.horizon, gaussian_1d(0, 0));
    const PipelineResult p = solve_case(c, flat);
    REQUIRE(p.schedule);
    const ValidationReport r = validate_schedule(c, compute_ptdf(c.network), *p.schedule, flat, 10000, 1);
    for (int t = 0; t < c.horizon; ++t) {
        CHECK(r.reserve_up[static_cast<std::size_t>(t)].probability == 0.0);
        CHECK(r.reserve_down[static_cast<std::size_t>(t)].probability == 0.0);
        for (std::size_t l = 0; l < r.branch_ids.size(); ++l) {
            CHECK(r.line_forward[l][static_cast<std::size_t>(t)].probability == 0.0);
            CHECK(r.line_reverse[l][static_cast<std::size_t>(t)].probability == 0.0);
        }
    }
    CHECK(r.all_within());
}

TEST_CASE("optimized three-bus schedule respects its risk levels") {
    const Case c = load_case(testutil::data_dir() / "case3.json");
    const std::vector<Gmm> gmms = read_gmm_file(*c.uncertainty.gmm_file);
    const PipelineResult p = solve_case(c, gmms);
    REQUIRE(p.schedule);
    const ValidationReport r = validate_schedule(c, compute_ptdf(c.network), *p.schedule, gmms, 200000, 4);
    CHECK(r.all_within());
    const auto [excess, label] = r.worst_excess();
    CHECK(excess <= 3.0 * 1.96 * std::sqrt(0.02 * 0.98 / 200000.0));
    CHECK_FALSE(label.empty());
}

TEST_CASE("validation is reproducible per seed") {
    const Case c = case3_without_extras();
    const PtdfMatrix ptdf = compute_ptdf(c.network);
    const UcSchedule s = flat_schedule(c, 10.0, 10.0);
    const auto g = repeat(c.horizon, gaussian_1d(1.0, 50.0));
    CHECK(report_csv(validate_schedule(c, ptdf, s, g, 5000, 77)) == report_csv(validate_schedule(c, ptdf, s, g, 5000, 77)));
    CHECK(report_csv(validate_schedule(c, ptdf, s, g, 5000, 77)) != report_csv(validate_schedule(c, ptdf, s, g, 5000, 78)));
}

TEST_CASE("report CSV layout and round trip") {
    const Case c = load_case(testutil::data_dir() / "case3.json");
    const PtdfMatrix ptdf = compute_ptdf(c.network);
    const ValidationReport r =
        validate_schedule(c, ptdf, flat_schedule(c, 15.0, 15.0), repeat(c.horizon, gaussian_1d(0, 100)), 20000, 2);
    const std::string csv = report_csv(r);
    std::istringstream in(csv);
    std::string header;
    std::getline(in, header);
    CHECK(header == "t,constraint,branch,estimate,ci_halfwidth,alpha");
    std::size_t rows = 0;
    for (std::string line; std::getline(in, line);) ++rows;
    const std::size_t L = c.network.branches.size();
    CHECK(rows == static_cast<std::size_t>(c.horizon) * (2 + 2 * L));

    const ValidationReport back = parse_report_csv(csv);
    CHECK(back.horizon() == r.horizon());
    CHECK(back.branch_ids == r.branch_ids);
    for (int t = 0; t < r.horizon(); ++t) {
        const auto ti = static_cast<std::size_t>(t);
        CHECK(back.reserve_up[ti].probability == r.reserve_up[ti].probability);
        CHECK(back.reserve_down[ti].ci_halfwidth == r.reserve_down[ti].ci_halfwidth);
        for (std::size_t l = 0; l < L; ++l) {
            CHECK(back.line_forward[l][ti].probability == r.line_forward[l][ti].probability);
            CHECK(back.line_reverse[l][ti].alpha == r.line_reverse[l][ti].alpha);
        }
    }
    CHECK(report_csv(back) == csv);

    const auto path = std::filesystem::temp_directory_path() / "ccuc_test_report.csv";
    write_report_csv(r, path);
    CHECK(testutil::read_text(path) == csv);
    std::filesystem::remove(path);

    CHECK_THROWS_AS(parse_report_csv("t,estimate\n"), InputError);
    CHECK_THROWS_AS(parse_report_csv(header + "\n1,reserve_up,,0.1\n"), InputError);
    CHECK_THROWS_AS(parse_report_csv(header + "\n1,bogus,,0.1,0,0.02\n"), InputError);
}

TEST_CASE("estimate arithmetic") {
    const ViolationEstimate e = make_estimate(200, 10000, 0.02);
    CHECK(e.probability == doctest::Approx(0.02));
    CHECK(e.ci_halfwidth == doctest::Approx(1.96 * std::sqrt(0.02 * 0.98 / 10000)));
    CHECK(e.within());
    CHECK_FALSE(make_estimate(400, 10000, 0.02).within());
    CHECK(make_estimate(0, 10, 0.02).ci_halfwidth == 0.0);
}

TEST_CASE("mismatched inputs are rejected") {
    const Case c = load_case(testutil::data_dir() / "case3.json");
    const PtdfMatrix ptdf = compute_ptdf(c.network);
    const UcSchedule s = flat_schedule(c, 0, 0);
    CHECK_THROWS_AS(validate_schedule(c, ptdf, s, repeat(3, gaussian_1d(0, 1)), 10, 1), InputError);
    const Gmm two(2, {{1.0, Eigen::Vector2d::Zero(), Eigen::Matrix2d::Identity()}});
    CHECK_THROWS_AS(validate_schedule(c, ptdf, s, repeat(4, two), 10, 1), InputError);
    CHECK_THROWS_AS(validate_schedule(c, ptdf, s, repeat(4, gaussian_1d(0, 1)), 0, 1), InputError);
    UcSchedule short_s = s;
    short_s.generators.pop_back();
    CHECK_THROWS_AS(validate_schedule(c, ptdf, short_s, repeat(4, gaussian_1d(0, 1)), 10, 1), InputError);
}

}  // TEST_SUITE
