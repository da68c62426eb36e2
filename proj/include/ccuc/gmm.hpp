#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ccuc {

struct GaussianComponent {
    double weight = 1.0;
    Eigen::VectorXd mean;        // MW
    Eigen::MatrixXd covariance;  // MW^2
};

/// Multivariate Gaussian mixture. Holds whatever it is given; use
/// validate_gmm() / require_valid() before relying on the invariants.
class Gmm {
public:
    Gmm() = default;
    Gmm(int dimension, std::vector<GaussianComponent> components)
        : dimension_(dimension), components_(std::move(components)) {}

    int dimension() const { return dimension_; }
    std::size_t size() const { return components_.size(); }
    const std::vector<GaussianComponent>& components() const { return components_; }
    const GaussianComponent& operator[](std::size_t i) const { return components_[i]; }

    Eigen::VectorXd mean() const;
    Eigen::MatrixXd covariance() const;

private:
    int dimension_ = 0;
    std::vector<GaussianComponent> components_;
};

struct UnivariateComponent {
    double weight = 1.0;
    double mean = 0.0;
    double variance = 1.0;
};

/// One-dimensional Gaussian mixture, immutable once built.
///
/// Construction checks the weights (nonnegative, summing to one within
/// 1e-9) and regularizes degenerate variances to
/// max(v, 1e-12 * max_j v_j, 1e-12) so that the density stays finite.
class UnivariateGmm {
public:
    explicit UnivariateGmm(std::vector<UnivariateComponent> components);

    std::size_t size() const { return weights_.size(); }
    std::span<const double> weights() const { return weights_; }
    std::span<const double> means() const { return means_; }
    std::span<const double> sigmas() const { return sigmas_; }
    std::vector<UnivariateComponent> components() const;

    double mean() const { return mixture_mean_; }
    double min_mean() const { return min_mean_; }
    double max_mean() const { return max_mean_; }
    double max_sigma() const { return max_sigma_; }

private:
    std::vector<double> weights_;
    std::vector<double> means_;
    std::vector<double> sigmas_;
    double mixture_mean_ = 0.0;
    double min_mean_ = 0.0;
    double max_mean_ = 0.0;
    double max_sigma_ = 0.0;
};

struct QuantileConfig {
    double tolerance = 1e-9;  // on |cdf(y) - q|
    int max_iterations = 100;
};

struct QuantileSolution {
    double value = 0.0;
    int iterations = 0;
    int newton_steps = 0;
    int bisection_steps = 0;
};

/// Standard normal CDF through the complementary error function.
double standard_normal_cdf(double z);

/// Distribution of s^T xi for xi ~ g: weights kept, means s^T mu_i,
/// variances s^T Sigma_i s. Component order is preserved.
UnivariateGmm affine_project(const Gmm& g, const Eigen::VectorXd& s);

double cdf(const UnivariateGmm& u, double x);
double pdf(const UnivariateGmm& u, double x);

/// Solves cdf(u, y) = q by Newton's method inside a maintained bracket.
///
/// The start point is the largest component mean for q >= 0.9, the
/// smallest for q <= 0.1 and the mixture mean otherwise. Steps that leave
/// the bracket, or that would divide by a vanishing density, are replaced
/// by bisection, so the iteration converges for any valid mixture.
QuantileSolution solve_quantile(const UnivariateGmm& u, double q, const QuantileConfig& cfg = {});

inline double quantile(const UnivariateGmm& u, double q, const QuantileConfig& cfg = {}) {
    return solve_quantile(u, q, cfg).value;
}

struct GmmViolation {
    enum class Kind { empty, dimension, weight, weight_sum, symmetry, psd };
    Kind kind;
    std::ptrdiff_t component = -1;  // -1 for mixture-level violations
    double residual = 0.0;
    std::string message;
};

std::string_view to_string(GmmViolation::Kind kind);

std::vector<GmmViolation> validate_gmm(const Gmm& g);

/// Throws InputError listing every violation, prefixed with `context`.
void require_valid(const Gmm& g, std::string_view context);

}  // namespace ccuc
