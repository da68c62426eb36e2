#pragma once

#include "ccuc/gmm.hpp"
#include "ccuc/random.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace ccuc {

/// Rows are samples, columns are wind farms (MW forecast error).
using SampleMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Probability histogram of one farm's forecast error, uniform density
/// inside each bin.
class MarginalHistogram {
public:
    MarginalHistogram(std::vector<double> bin_edges, std::vector<double> bin_probabilities);

    const std::vector<double>& bin_edges() const { return edges_; }
    const std::vector<double>& bin_probabilities() const { return probs_; }
    std::size_t bins() const { return probs_.size(); }

    double cdf(double x) const;
    double mean() const;
    double variance() const;

private:
    std::vector<double> edges_;
    std::vector<double> probs_;
    std::vector<double> cumulative_;  // cumulative_[k] = P(X <= edges_[k])
    friend double histogram_inverse_cdf(const MarginalHistogram& h, double q);
};

/// Generalized inverse inf{x : F(x) >= q}; q = 1 maps to the last edge.
double histogram_inverse_cdf(const MarginalHistogram& h, double q);

/// Checks symmetry, unit diagonal and positive semidefiniteness (1e-9).
/// Throws InputError naming the smallest eigenvalue when not PSD.
void check_correlation(const Eigen::MatrixXd& corr);

/// Gauss-Hermite rule for weight exp(-x^2) (Golub-Welsch).
struct GaussHermiteRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};
GaussHermiteRule gauss_hermite(int n);

/// Correlation of the mapped variables when the underlying standard
/// normals have correlation `rho_z`, by 2-d Gauss-Hermite quadrature.
double nataf_correlation(const MarginalHistogram& a, const MarginalHistogram& b, double rho_z,
                         const GaussHermiteRule& rule);

struct NatafAdjustment {
    Eigen::MatrixXd gaussian_correlation;  // PSD, unit diagonal
    bool projected = false;                // true when PSD projection was applied
    std::vector<std::string> warnings;
};

/// Solves the Nataf integral equation entrywise (32-point rule, bisection
/// on the Gaussian-space correlation), projecting to the PSD cone if needed.
NatafAdjustment nataf_adjust(std::span<const MarginalHistogram> marginals, const Eigen::MatrixXd& corr);

SampleMatrix nataf_sample(std::span<const MarginalHistogram> marginals, const Eigen::MatrixXd& corr,
                          std::size_t n_samples, std::uint64_t seed);

struct EmConfig {
    int n_components = 10;
    int max_iterations = 500;
    double tolerance = 1e-7;          // relative change of the log-likelihood
    std::uint64_t seed = 0;
    double covariance_floor = 1e-6;   // eigenvalue floor, relative to the smallest column variance
};

struct EmResult {
    Gmm gmm;
    std::vector<double> log_likelihood;  // one entry per E-step
    int iterations = 0;
    bool converged = false;
};

EmResult em_fit_detailed(const SampleMatrix& samples, const EmConfig& cfg);

inline Gmm em_fit(const SampleMatrix& samples, const EmConfig& cfg) { return em_fit_detailed(samples, cfg).gmm; }

/// Average log-likelihood per sample of `samples` under `g`.
double mean_log_likelihood(const Gmm& g, const SampleMatrix& samples);

/// Draws categorically by weight, then through a factor of the component
/// covariance (Cholesky, or clipped eigen-decomposition when singular).
class GmmSampler {
public:
    explicit GmmSampler(const Gmm& g);

    /// Writes one draw into `out` and returns the component index used.
    std::size_t draw(RandomStream& rng, std::span<double> out) const;

    int dimension() const { return dimension_; }

private:
    int dimension_;
    std::vector<double> cumulative_;
    std::vector<Eigen::VectorXd> means_;
    std::vector<Eigen::MatrixXd> factors_;
};

SampleMatrix sample_gmm(const Gmm& g, std::size_t n_samples, std::uint64_t seed,
                        std::vector<std::size_t>* labels = nullptr);

/// Kolmogorov-Smirnov distance between the empirical CDF of `samples` and `cdf`.
double ks_distance(std::vector<double> samples, const std::function<double(double)>& cdf);

/// Factor F with F F^T = m for PSD m.
Eigen::MatrixXd psd_factor(const Eigen::MatrixXd& m);

}  // namespace ccuc
