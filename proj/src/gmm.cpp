#include "ccuc/gmm.hpp"

#include "ccuc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace ccuc {

namespace {

constexpr double kVarianceFloorRelative = 1e-12;
constexpr double kVarianceFloorAbsolute = 1e-12;
constexpr double kWeightSumTolerance = 1e-9;
constexpr double kSymmetryTolerance = 1e-9;
constexpr double kPsdTolerance = 1e-9;
constexpr double kMinDensity = 1e-300;

// F(y) and F'(y) in one sweep over the components.
void cdf_and_pdf(const UnivariateGmm& u, double y, double& F, double& f) {
    const auto w = u.weights();
    const auto m = u.means();
    const auto s = u.sigmas();
    double acc_cdf = 0.0;
    double acc_pdf = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        const double z = (y - m[i]) / s[i];
        acc_cdf += w[i] * 0.5 * std::erfc(-z * std::numbers::sqrt2 * 0.5);
        acc_pdf += w[i] * std::exp(-0.5 * z * z) / s[i];
    }
    F = std::clamp(acc_cdf, 0.0, 1.0);
    f = acc_pdf * (std::numbers::inv_sqrtpi * std::numbers::sqrt2 * 0.5);
}

}  // namespace

Eigen::VectorXd Gmm::mean() const {
    Eigen::VectorXd mu = Eigen::VectorXd::Zero(dimension_);
    for (const auto& c : components_) mu += c.weight * c.mean;
    return mu;
}

Eigen::MatrixXd Gmm::covariance() const {
    const Eigen::VectorXd mu = mean();
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(dimension_, dimension_);
    for (const auto& c : components_) {
        const Eigen::VectorXd d = c.mean - mu;
        cov += c.weight * (c.covariance + d * d.transpose());
    }
    return cov;
}

UnivariateGmm::UnivariateGmm(std::vector<UnivariateComponent> components) {
    if (components.empty()) throw InputError("univariate GMM: no components");
    double weight_sum = 0.0;
    double max_var = 0.0;
    for (std::size_t i = 0; i < components.size(); ++i) {
        const auto& c = components[i];
        if (!std::isfinite(c.weight) || !std::isfinite(c.mean) || !std::isfinite(c.variance))
            throw InputError("univariate GMM: component " + std::to_string(i) + " has non-finite parameters");
        if (c.weight < 0.0)
            throw InputError("univariate GMM: component " + std::to_string(i) + " has negative weight");
        if (c.variance < 0.0)
            throw InputError("univariate GMM: component " + std::to_string(i) + " has negative variance");
        weight_sum += c.weight;
        max_var = std::max(max_var, c.variance);
    }
    if (std::abs(weight_sum - 1.0) > kWeightSumTolerance) {
        std::ostringstream os;
        os << "univariate GMM: weights sum to " << weight_sum << " (residual " << weight_sum - 1.0 << ")";
        throw InputError(os.str());
    }

    const double floor = std::max(kVarianceFloorRelative * max_var, kVarianceFloorAbsolute);
    weights_.reserve(components.size());
    means_.reserve(components.size());
    sigmas_.reserve(components.size());
    min_mean_ = std::numeric_limits<double>::infinity();
    max_mean_ = -std::numeric_limits<double>::infinity();
    for (const auto& c : components) {
        weights_.push_back(c.weight);
        means_.push_back(c.mean);
        sigmas_.push_back(std::sqrt(std::max(c.variance, floor)));
        mixture_mean_ += c.weight * c.mean;
        min_mean_ = std::min(min_mean_, c.mean);
        max_mean_ = std::max(max_mean_, c.mean);
        max_sigma_ = std::max(max_sigma_, sigmas_.back());
    }
}

std::vector<UnivariateComponent> UnivariateGmm::components() const {
    std::vector<UnivariateComponent> out(size());
    for (std::size_t i = 0; i < size(); ++i) out[i] = {weights_[i], means_[i], sigmas_[i] * sigmas_[i]};
    return out;
}

double standard_normal_cdf(double z) { return 0.5 * std::erfc(-z * std::numbers::sqrt2 * 0.5); }

UnivariateGmm affine_project(const Gmm& g, const Eigen::VectorXd& s) {
    if (s.size() != g.dimension()) {
        std::ostringstream os;
        os << "affine_project: direction has length " << s.size() << " but the GMM has dimension "
           << g.dimension();
        throw InputError(os.str());
    }
    std::vector<UnivariateComponent> out;
    out.reserve(g.size());
    for (const auto& c : g.components()) {
        // Roundoff can leave s^T Sigma s a hair below zero for singular Sigma.
        const double var = std::max(0.0, s.dot(c.covariance * s));
        out.push_back({c.weight, s.dot(c.mean), var});
    }
    return UnivariateGmm(std::move(out));
}

double cdf(const UnivariateGmm& u, double x) {
    const auto w = u.weights();
    const auto m = u.means();
    const auto s = u.sigmas();
    double acc = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) acc += w[i] * standard_normal_cdf((x - m[i]) / s[i]);
    return std::clamp(acc, 0.0, 1.0);
}

double pdf(const UnivariateGmm& u, double x) {
    const auto w = u.weights();
    const auto m = u.means();
    const auto s = u.sigmas();
    double acc = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        const double z = (x - m[i]) / s[i];
        acc += w[i] * std::exp(-0.5 * z * z) / s[i];
    }
    return acc * (std::numbers::inv_sqrtpi * std::numbers::sqrt2 * 0.5);
}

QuantileSolution solve_quantile(const UnivariateGmm& u, double q, const QuantileConfig& cfg) {
    if (!(q > 0.0 && q < 1.0)) {
        std::ostringstream os;
        os << "quantile: probability " << q << " outside (0, 1)";
        throw InputError(os.str());
    }
    if (!(cfg.tolerance > 0.0) || cfg.max_iterations < 1)
        throw InputError("quantile: tolerance must be positive and max_iterations >= 1");

    auto residual = [&](double y) { return cdf(u, y) - q; };

    double lo = u.min_mean() - 10.0 * u.max_sigma();
    double hi = u.max_mean() + 10.0 * u.max_sigma();
    double width = hi - lo;
    for (int k = 0; residual(lo) > 0.0; ++k) {
        if (k > 60) throw InternalError("quantile: could not bracket the root from below");
        lo -= width;
        width *= 2.0;
    }
    width = hi - lo;
    for (int k = 0; residual(hi) < 0.0; ++k) {
        if (k > 60) throw InternalError("quantile: could not bracket the root from above");
        hi += width;
        width *= 2.0;
    }

    double y = u.mean();
    if (q >= 0.9) {
        y = u.max_mean();
    } else if (q <= 0.1) {
        y = u.min_mean();
    }
    y = std::clamp(y, lo, hi);

    QuantileSolution sol;
    bool last_newton = false;
    double last_abs = std::numeric_limits<double>::infinity();
    for (int k = 1; k <= cfg.max_iterations; ++k) {
        sol.iterations = k;
        double F = 0.0;
        double dF = 0.0;
        cdf_and_pdf(u, y, F, dF);
        const double f = F - q;
        if (std::abs(f) <= cfg.tolerance) {
            // One more Newton step, kept only if it lowers the residual.
            sol.value = y;
            if (f != 0.0 && dF > kMinDensity) {
                const double polished = y - f / dF;
                if (std::isfinite(polished) && std::abs(residual(polished)) < std::abs(f)) sol.value = polished;
            }
            return sol;
        }
        if (f < 0.0) {
            lo = y;
        } else {
            hi = y;
        }
        // Bracket already at machine resolution: nothing left to refine.
        if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(lo), std::abs(hi))) {
            sol.value = 0.5 * (lo + hi);
            return sol;
        }
        // A Newton step that failed to halve the residual is followed by bisection.
        const bool stalled = last_newton && std::abs(f) > 0.5 * last_abs;
        last_abs = std::abs(f);
        double next = std::numeric_limits<double>::quiet_NaN();
        if (dF > kMinDensity && !stalled) next = y - f / dF;
        last_newton = next > lo && next < hi;
        if (last_newton) {
            ++sol.newton_steps;
        } else {
            next = 0.5 * (lo + hi);
            ++sol.bisection_steps;
        }
        y = next;
    }
    std::ostringstream os;
    os.precision(17);
    os << "quantile: no convergence after " << cfg.max_iterations << " iterations for q=" << q << ", bracket [" << lo
       << ", " << hi << "]";
    throw InternalError(os.str());
}

std::string_view to_string(GmmViolation::Kind kind) {
    switch (kind) {
        case GmmViolation::Kind::empty: return "empty";
        case GmmViolation::Kind::dimension: return "dimension";
        case GmmViolation::Kind::weight: return "weight";
        case GmmViolation::Kind::weight_sum: return "weight_sum";
        case GmmViolation::Kind::symmetry: return "symmetry";
        case GmmViolation::Kind::psd: return "psd";
    }
    return "unknown";
}

std::vector<GmmViolation> validate_gmm(const Gmm& g) {
    using Kind = GmmViolation::Kind;
    std::vector<GmmViolation> out;
    auto add = [&out](Kind kind, std::ptrdiff_t comp, double residual, std::string msg) {
        out.push_back({kind, comp, residual, std::move(msg)});
    };

    if (g.dimension() <= 0) add(Kind::dimension, -1, g.dimension(), "dimension must be positive");
    if (g.size() == 0) {
        add(Kind::empty, -1, 0.0, "mixture has no components");
        return out;
    }

    double weight_sum = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const auto& c = g[i];
        const auto idx = static_cast<std::ptrdiff_t>(i);
        weight_sum += c.weight;
        if (!(c.weight > 0.0)) add(Kind::weight, idx, c.weight, "weight must be positive");

        const auto d = g.dimension();
        if (c.mean.size() != d || c.covariance.rows() != d || c.covariance.cols() != d) {
            std::ostringstream os;
            os << "mean has length " << c.mean.size() << ", covariance is " << c.covariance.rows() << "x"
               << c.covariance.cols() << ", expected dimension " << d;
            add(Kind::dimension, idx, 0.0, os.str());
            continue;
        }
        if (d == 0) continue;

        const double scale = std::max(c.covariance.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
        const double asym = (c.covariance - c.covariance.transpose()).cwiseAbs().maxCoeff();
        if (asym > kSymmetryTolerance * scale) {
            add(Kind::symmetry, idx, asym, "covariance is not symmetric");
            continue;
        }
        const Eigen::MatrixXd sym = 0.5 * (c.covariance + c.covariance.transpose());
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, Eigen::EigenvaluesOnly);
        const double lmin = es.eigenvalues().minCoeff();
        const double lmax = es.eigenvalues().maxCoeff();
        if (lmin < -kPsdTolerance * std::max(lmax, 0.0)) {
            std::ostringstream os;
            os << "covariance has negative eigenvalue " << lmin;
            add(Kind::psd, idx, lmin, os.str());
        }
    }
    if (std::abs(weight_sum - 1.0) > kWeightSumTolerance) {
        std::ostringstream os;
        os << "weights sum to " << weight_sum;
        add(Kind::weight_sum, -1, weight_sum - 1.0, os.str());
    }
    return out;
}

void require_valid(const Gmm& g, std::string_view context) {
    const auto violations = validate_gmm(g);
    if (violations.empty()) return;
    std::ostringstream os;
    os << context << ": invalid GMM";
    for (const auto& v : violations) {
        os << "; " << to_string(v.kind);
        if (v.component >= 0) os << " (component " << v.component << ")";
        os << ": " << v.message;
    }
    throw InputError(os.str());
}

}  // namespace ccuc
