#include "oracles.hpp"

#include "ccuc/errors.hpp"
#include "ccuc/gmm.hpp"
#include "ccuc/gmm_fit.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

using namespace ccuc;

namespace {

UnivariateGmm uni(std::vector<UnivariateComponent> c) { return UnivariateGmm(std::move(c)); }

Gmm two_component_2d() {
    return Gmm(2, {{0.3, Eigen::Vector2d(0, 0), Eigen::Vector2d(4, 1).asDiagonal()},
                   {0.7, Eigen::Vector2d(1, -1), Eigen::Matrix2d::Identity()}});
}

// Random mixture; returns the library object and the raw parameters.
std::pair<UnivariateGmm, oracle::Mixture1d> random_uni(std::mt19937_64& rng, int k) {
    std::uniform_real_distribution<double> w(0.05, 1.0), m(-50.0, 50.0), ls(std::log(0.2), std::log(30.0));
    oracle::Mixture1d raw;
    double total = 0.0;
    for (int i = 0; i < k; ++i) {
        raw.weights.push_back(w(rng));
        total += raw.weights.back();
        raw.means.push_back(m(rng));
        raw.sigmas.push_back(std::exp(ls(rng)));
    }
    std::vector<UnivariateComponent> c;
    for (int i = 0; i < k; ++i) {
        raw.weights[static_cast<std::size_t>(i)] /= total;
        c.push_back({raw.weights[static_cast<std::size_t>(i)], raw.means[static_cast<std::size_t>(i)],
                     raw.sigmas[static_cast<std::size_t>(i)] * raw.sigmas[static_cast<std::size_t>(i)]});
    }
    return {UnivariateGmm(c), raw};
}

}  // namespace

TEST_SUITE("gmm-core") {

TEST_CASE("affine projection of a single component") {
    Gmm g(2, {{1.0, Eigen::Vector2d(1, 2), Eigen::Matrix2d::Identity()}});
    const UnivariateGmm u = affine_project(g, Eigen::Vector2d(1, 1));
    REQUIRE(u.size() == 1);
    CHECK(u.means()[0] == doctest::Approx(3.0));
    CHECK(u.sigmas()[0] * u.sigmas()[0] == doctest::Approx(2.0));
}

TEST_CASE("affine projection keeps weights and order") {
    const UnivariateGmm u = affine_project(two_component_2d(), Eigen::Vector2d(2, 1));
    const auto c = u.components();
    REQUIRE(c.size() == 2);
    CHECK(c[0].weight == doctest::Approx(0.3));
    CHECK(c[0].mean == doctest::Approx(0.0));
    CHECK(c[0].variance == doctest::Approx(17.0));
    CHECK(c[1].weight == doctest::Approx(0.7));
    CHECK(c[1].mean == doctest::Approx(1.0));
    CHECK(c[1].variance == doctest::Approx(5.0));
}

TEST_CASE("unit vector projection extracts a marginal") {
    const UnivariateGmm u = affine_project(two_component_2d(), Eigen::Vector2d(0, 1));
    CHECK(u.means()[0] == doctest::Approx(0.0));
    CHECK(u.means()[1] == doctest::Approx(-1.0));
    CHECK(u.sigmas()[0] == doctest::Approx(1.0));
    CHECK(u.sigmas()[1] == doctest::Approx(1.0));
}

TEST_CASE("projection direction of the wrong length is rejected") {
    CHECK_THROWS_AS(affine_project(two_component_2d(), Eigen::Vector3d(1, 1, 1)), InputError);
}

TEST_CASE("cdf values") {
    CHECK(cdf(uni({{1.0, 0.0, 1.0}}), 0.0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(cdf(uni({{0.5, -2.0, 1.0}, {0.5, 2.0, 1.0}}), 0.0) == doctest::Approx(0.5).epsilon(1e-15));
    const double x = -20.5374891;
    CHECK(std::abs(cdf(uni({{1.0, 0.0, 100.0}}), x) - 0.02) < 1e-8);
}

TEST_CASE("cdf is nondecreasing and stays in [0, 1]") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        const auto [u, raw] = random_uni(rng, 1 + trial % 8);
        double prev = 0.0;
        for (double x = -400.0; x <= 400.0; x += 0.5) {
            const double f = cdf(u, x);
            CHECK(f >= prev);
            CHECK(f <= 1.0);
            prev = f;
        }
    }
}

TEST_CASE("pdf values") {
    CHECK(pdf(uni({{1.0, 0.0, 1.0}}), 0.0) == doctest::Approx(0.3989422804).epsilon(1e-10));
    CHECK(pdf(uni({{0.5, 0.0, 1.0}, {0.5, 0.0, 4.0}}), 0.0) == doctest::Approx(0.29920671).epsilon(1e-8));
    const UnivariateGmm u = uni({{0.4, 3.0, 2.0}, {0.6, -1.0, 9.0}});
    CHECK(pdf(u, u.mean() + 40.0 * u.max_sigma()) < 1e-300);
}

TEST_CASE("pdf integrates to one") {
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 20; ++trial) {
        const auto [u, raw] = random_uni(rng, 1 + trial % 6);
        const double lo = u.min_mean() - 12.0 * u.max_sigma(), hi = u.max_mean() + 12.0 * u.max_sigma();
        const int n = 200000;
        const double h = (hi - lo) / n;
        double area = 0.0;
        for (int i = 0; i < n; ++i) area += pdf(u, lo + (i + 0.5) * h) * h;
        CHECK(area == doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("quantile examples") {
    CHECK(std::abs(quantile(uni({{1.0, 0.0, 1.0}}), 0.5)) < 1e-9);
    CHECK(quantile(uni({{1.0, 0.0, 100.0}}), 0.02) == doctest::Approx(-20.5374891).epsilon(1e-7));
    const UnivariateGmm sym = uni({{0.5, -2.0, 1.0}, {0.5, 2.0, 1.0}});
    CHECK(std::abs(quantile(sym, 0.5)) < 1e-9);
    const double q = cdf(sym, 2.0);
    CHECK(q == doctest::Approx(0.7499842).epsilon(1e-6));
    CHECK(std::abs(quantile(sym, q) - 2.0) < 1e-6);
}

TEST_CASE("quantile outside (0, 1) is an input error") {
    const UnivariateGmm u = uni({{1.0, 0.0, 1.0}});
    CHECK_THROWS_AS(quantile(u, 0.0), InputError);
    CHECK_THROWS_AS(quantile(u, 1.0), InputError);
    CHECK_THROWS_AS(quantile(u, -0.1), InputError);
}

TEST_CASE("quantile round trip, monotonicity and bisection agreement") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> qd(0.001, 0.999);
    for (int trial = 0; trial < 300; ++trial) {
        const auto [u, raw] = random_uni(rng, 1 + trial % 30);
        std::vector<double> qs(12);
        for (double& q : qs) q = qd(rng);
        std::sort(qs.begin(), qs.end());
        double prev = -std::numeric_limits<double>::infinity();
        for (double q : qs) {
            const double y = quantile(u, q);
            CHECK(std::abs(cdf(u, y) - q) <= 1e-9);
            CHECK(std::abs(y - oracle::bisection_quantile(raw, q)) <= 1e-7);
            CHECK(y >= prev);
            prev = y;
        }
    }
}

TEST_CASE("quantile under shift and scale") {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 100; ++trial) {
        const auto [u, raw] = random_uni(rng, 1 + trial % 10);
        const double a = 0.5 + trial * 0.03, b = -7.0 + trial * 0.2;
        std::vector<UnivariateComponent> moved;
        for (const auto& c : u.components()) moved.push_back({c.weight, a * c.mean + b, a * a * c.variance});
        const UnivariateGmm v(moved);
        for (double q : {0.01, 0.3, 0.77, 0.98}) CHECK(std::abs(quantile(v, q) - (a * quantile(u, q) + b)) <= 1e-7);
    }
}

TEST_CASE("starting point follows the probability level") {
    // Components far apart: the solver must still land on the right root.
    const UnivariateGmm u = uni({{0.2, -100.0, 1.0}, {0.6, 0.0, 1.0}, {0.2, 100.0, 1.0}});
    for (double q : {0.02, 0.1, 0.5, 0.9, 0.98}) {
        const QuantileSolution s = solve_quantile(u, q);
        CHECK(std::abs(cdf(u, s.value) - q) <= 1e-9);
        CHECK(s.iterations <= 100);
    }
}

TEST_CASE("zero variance components are regularized") {
    const UnivariateGmm u = uni({{0.5, 1.0, 0.0}, {0.5, 2.0, 0.0}});
    CHECK(u.sigmas()[0] > 0.0);
    CHECK(u.sigmas()[0] == doctest::Approx(1e-6));
    CHECK(std::abs(quantile(u, 0.25) - 1.0) < 1e-5);
    CHECK(std::abs(quantile(u, 0.75) - 2.0) < 1e-5);
}

TEST_CASE("projection onto a direction orthogonal to the support") {
    Gmm g(2, {{1.0, Eigen::Vector2d(0, 5), Eigen::Vector2d(0, 1).asDiagonal()}});
    const UnivariateGmm u = affine_project(g, Eigen::Vector2d(1, 0));
    CHECK(std::abs(quantile(u, 0.02)) < 1e-5);
}

TEST_CASE("univariate weights must sum to one") {
    CHECK_THROWS_AS(uni({{0.6, 0.0, 1.0}, {0.6, 0.0, 1.0}}), InputError);
    CHECK_THROWS_AS(uni({}), InputError);
    CHECK_THROWS_AS(uni({{1.0, 0.0, -1.0}}), InputError);
}

TEST_CASE("validate_gmm reports each violation") {
    CHECK(validate_gmm(two_component_2d()).empty());

    Gmm heavy(1, {{0.6, Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Identity(1, 1)},
                  {0.6, Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Identity(1, 1)}});
    auto v = validate_gmm(heavy);
    REQUIRE(v.size() == 1);
    CHECK(v[0].kind == GmmViolation::Kind::weight_sum);
    CHECK(v[0].residual == doctest::Approx(0.2));

    Eigen::Matrix2d indefinite;
    indefinite << 1.0, 0.0, 0.0, -0.5;
    Gmm bad(2, {{1.0, Eigen::Vector2d::Zero(), indefinite}});
    v = validate_gmm(bad);
    REQUIRE(v.size() == 1);
    CHECK(v[0].kind == GmmViolation::Kind::psd);
    CHECK(v[0].residual == doctest::Approx(-0.5));

    Eigen::Matrix2d skew;
    skew << 1.0, 0.2, 0.1, 1.0;
    CHECK(validate_gmm(Gmm(2, {{1.0, Eigen::Vector2d::Zero(), skew}}))[0].kind == GmmViolation::Kind::symmetry);
    CHECK(validate_gmm(Gmm(2, {{1.0, Eigen::Vector3d::Zero(), Eigen::Matrix2d::Identity()}}))[0].kind ==
          GmmViolation::Kind::dimension);
    CHECK(validate_gmm(Gmm(2, {}))[0].kind == GmmViolation::Kind::empty);
    CHECK_THROWS_AS(require_valid(bad, "test"), InputError);
}

TEST_CASE("projected cdf matches Monte Carlo frequencies") {
    Eigen::Matrix3d c1, c2;
    c1 << 4, 1, 0, 1, 3, 0.5, 0, 0.5, 2;
    c2 << 9, -2, 1, -2, 5, 0, 1, 0, 1;
    const Gmm g(3, {{0.35, Eigen::Vector3d(-5, 2, 0), c1}, {0.65, Eigen::Vector3d(4, -1, 3), c2}});
    const std::size_t n = 1'000'000;
    const SampleMatrix xs = sample_gmm(g, n, 2024);
    for (const Eigen::Vector3d& s : {Eigen::Vector3d(1, 1, 1), Eigen::Vector3d(0.3, -0.7, 0.2)}) {
        const UnivariateGmm u = affine_project(g, s);
        const Eigen::VectorXd proj = xs * s;
        for (double x : {-8.0, -2.0, 0.0, 1.5, 6.0}) {
            const double freq = static_cast<double>((proj.array() <= x).count()) / static_cast<double>(n);
            CHECK(std::abs(freq - cdf(u, x)) <= 4.0 / std::sqrt(static_cast<double>(n)));
        }
    }
}

}  // TEST_SUITE
