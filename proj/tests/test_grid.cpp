#include "oracles.hpp"
#include "test_util.hpp"

#include "ccuc/errors.hpp"
#include "ccuc/grid.hpp"

#include <doctest.h>

#include <random>
#include <string>

using namespace ccuc;

namespace {

Network make_network(std::vector<int> buses, int slack, std::vector<std::tuple<int, int, double>> lines) {
    Network net;
    net.bus_ids = std::move(buses);
    net.slack_bus = slack;
    int k = 0;
    for (const auto& [f, t, x] : lines) net.branches.push_back({"L" + std::to_string(++k), f, t, x, 100.0, 0.02, 0.02});
    return net;
}

Network random_network(std::mt19937_64& rng, int n) {
    std::vector<int> ids;
    for (int i = 0; i < n; ++i) ids.push_back(7 * i + 2);
    std::shuffle(ids.begin(), ids.end(), rng);
    std::uniform_real_distribution<double> xd(0.02, 0.5);
    std::vector<std::tuple<int, int, double>> lines;
    for (int i = 1; i < n; ++i) {
        std::uniform_int_distribution<int> pick(0, i - 1);
        lines.emplace_back(ids[static_cast<std::size_t>(pick(rng))], ids[static_cast<std::size_t>(i)], xd(rng));
    }
    std::uniform_int_distribution<int> any(0, n - 1);
    for (int e = 0; e < n / 2; ++e) {
        const int a = any(rng), b = any(rng);
        if (a != b) lines.emplace_back(ids[static_cast<std::size_t>(a)], ids[static_cast<std::size_t>(b)], xd(rng));
    }
    return make_network(ids, ids[static_cast<std::size_t>(any(rng))], lines);
}

std::string error_of(const nlohmann::json& j) {
    try {
        (void)testutil::parse(j);
    } catch (const InputError& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST_SUITE("grid") {

TEST_CASE("shipped three-bus case parses") {
    const Case c = load_case(testutil::data_dir() / "case3.json");
    CHECK(c.horizon == 4);
    CHECK(c.network.bus_ids.size() == 3);
    CHECK(c.generators.size() == 3);
    CHECK(c.wind_farms.size() == 1);
    CHECK(c.network.slack_bus == 1);
    REQUIRE(c.uncertainty.gmm_file);
    CHECK(c.uncertainty.gmm_file->is_absolute());
    CHECK(c.network.branches[0].alpha_forward == doctest::Approx(0.02));
}

TEST_CASE("shipped six-bus case parses") {
    const Case c = load_case(testutil::data_dir() / "case6.json");
    CHECK(c.horizon == 6);
    CHECK(c.wind_farms.size() == 3);
    CHECK(c.uncertainty.profiles.size() == 2);
    REQUIRE(c.uncertainty.sweep);
    CHECK(c.uncertainty.sweep->varied.size() == 2);
}

TEST_CASE("p_min above p_max names the generator") {
    auto j = testutil::case_json("case3.json");
    j["generators"][1]["p_min"] = 200;
    const std::string err = error_of(j);
    CHECK(err.find("G2") != std::string::npos);
    CHECK(err.find("p_min exceeds p_max by 50") != std::string::npos);
}

TEST_CASE("disconnected bus is rejected") {
    auto j = testutil::case_json("case3.json");
    j["network"]["buses"].push_back(9);
    CHECK(error_of(j).find("not connected") != std::string::npos);
}

TEST_CASE("schema errors carry a location") {
    auto j = testutil::case_json("case3.json");
    j["generators"][0].erase("a");
    CHECK(error_of(j).find("/generators/0") != std::string::npos);

    j = testutil::case_json("case3.json");
    j["loads"][0]["bus"] = 42;
    CHECK(error_of(j).find("dangling reference to bus 42") != std::string::npos);

    j = testutil::case_json("case3.json");
    j["wind_farms"][0]["forecast"][2] = 500;
    CHECK(error_of(j).find("/wind_farms/0") != std::string::npos);

    j = testutil::case_json("case3.json");
    j["network"]["branches"][0]["reactance"] = 0;
    CHECK(error_of(j).find("reactance") != std::string::npos);

    j = testutil::case_json("case3.json");
    j["risk"]["alpha_line"] = 0.7;
    CHECK_FALSE(error_of(j).empty());

    CHECK_THROWS_AS(parse_case("{not json"), InputError);
    CHECK_THROWS_AS(load_case(testutil::data_dir() / "missing.json"), InputError);
}

TEST_CASE("two-bus PTDF") {
    const PtdfMatrix p = compute_ptdf(make_network({1, 2}, 2, {{1, 2, 0.1}}));
    REQUIRE(p.rows() == 1);
    CHECK(p(0, 0) == doctest::Approx(1.0));
    CHECK(p(0, 1) == 0.0);
}

TEST_CASE("triangle PTDF") {
    const PtdfMatrix p = compute_ptdf(make_network({1, 2, 3}, 3, {{1, 2, 0.1}, {1, 3, 0.1}, {2, 3, 0.1}}));
    CHECK(p(0, 0) == doctest::Approx(1.0 / 3.0));
    CHECK(p(1, 0) == doctest::Approx(2.0 / 3.0));
    CHECK(p(2, 0) == doctest::Approx(1.0 / 3.0));
    CHECK(p.col(2).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("singular network is rejected") {
    CHECK_THROWS_AS(compute_ptdf(make_network({1, 2, 3}, 1, {{1, 2, 0.1}})), InputError);
    CHECK_THROWS_AS(check_connected(make_network({1, 2, 3}, 1, {{1, 2, 0.1}})), InputError);
}

TEST_CASE("PTDF flows match a direct DC solve") {
    std::mt19937_64 rng(99);
    std::normal_distribution<double> inj(0.0, 50.0);
    for (int trial = 0; trial < 30; ++trial) {
        const Network net = random_network(rng, 2 + trial % 11);
        const PtdfMatrix p = compute_ptdf(net);
        const auto nb = static_cast<Eigen::Index>(net.bus_ids.size());
        const Eigen::Index slack = static_cast<Eigen::Index>(net.bus_index(net.slack_bus));
        CHECK(p.col(slack).cwiseAbs().maxCoeff() == 0.0);
        CHECK(p.cwiseAbs().maxCoeff() <= 1.0 + 1e-12);

        Eigen::VectorXd x(nb);
        for (Eigen::Index i = 0; i < nb; ++i) x(i) = inj(rng);
        x(slack) -= x.sum();
        const Eigen::VectorXd flows = p * x;
        CHECK((flows - oracle::dc_flows(net, x)).cwiseAbs().maxCoeff() <= 1e-9);

        // Kirchhoff current law at every non-slack bus.
        Eigen::VectorXd net_out = Eigen::VectorXd::Zero(nb);
        for (std::size_t l = 0; l < net.branches.size(); ++l) {
            net_out(static_cast<Eigen::Index>(net.bus_index(net.branches[l].from_bus))) += flows(static_cast<Eigen::Index>(l));
            net_out(static_cast<Eigen::Index>(net.bus_index(net.branches[l].to_bus))) -= flows(static_cast<Eigen::Index>(l));
        }
        for (Eigen::Index i = 0; i < nb; ++i)
            if (i != slack) CHECK(std::abs(net_out(i) - x(i)) <= 1e-9);

        // Superposition.
        Eigen::VectorXd y(nb);
        for (Eigen::Index i = 0; i < nb; ++i) y(i) = inj(rng);
        CHECK((p * (x + y) - (p * x + p * y)).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, (p * (x + y)).cwiseAbs().maxCoeff()));
    }
}

TEST_CASE("bus index lookup") {
    const Network net = make_network({5, 9, 2}, 9, {{5, 9, 0.1}, {9, 2, 0.2}});
    CHECK(net.bus_index(2) == 2);
    CHECK(net.bus_index(9) == 1);
    CHECK_THROWS_AS(net.bus_index(4), InputError);
}

}  // TEST_SUITE
