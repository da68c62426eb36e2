#include "ccuc/gmm_fit.hpp"

#include "ccuc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>
#include <type_traits>

namespace ccuc {

// ---------------------------------------------------------------------------
// Histograms

MarginalHistogram::MarginalHistogram(std::vector<double> bin_edges, std::vector<double> bin_probabilities)
    : edges_(std::move(bin_edges)), probs_(std::move(bin_probabilities)) {
    if (probs_.empty()) throw InputError("histogram: no bins");
    if (edges_.size() != probs_.size() + 1) {
        std::ostringstream os;
        os << "histogram: " << edges_.size() << " edges for " << probs_.size() << " bins (need bins + 1)";
        throw InputError(os.str());
    }
    for (std::size_t k = 0; k + 1 < edges_.size(); ++k) {
        if (!std::isfinite(edges_[k]) || !std::isfinite(edges_[k + 1]) || !(edges_[k + 1] > edges_[k]))
            throw InputError("histogram: bin edges must be finite and strictly increasing (edge " +
                             std::to_string(k + 1) + ")");
    }
    double sum = 0.0;
    for (std::size_t k = 0; k < probs_.size(); ++k) {
        if (!(probs_[k] >= 0.0) || !std::isfinite(probs_[k]))
            throw InputError("histogram: bin " + std::to_string(k) + " has an invalid probability");
        sum += probs_[k];
    }
    if (std::abs(sum - 1.0) > 1e-9) {
        std::ostringstream os;
        os << "histogram: probabilities sum to " << sum << " (residual " << sum - 1.0 << ")";
        throw InputError(os.str());
    }
    cumulative_.resize(edges_.size());
    cumulative_[0] = 0.0;
    for (std::size_t k = 0; k < probs_.size(); ++k) cumulative_[k + 1] = cumulative_[k] + probs_[k];
}

double MarginalHistogram::cdf(double x) const {
    if (x <= edges_.front()) return 0.0;
    if (x >= edges_.back()) return 1.0;
    const auto it = std::upper_bound(edges_.begin(), edges_.end(), x);
    const auto k = static_cast<std::size_t>(it - edges_.begin()) - 1;
    const double frac = (x - edges_[k]) / (edges_[k + 1] - edges_[k]);
    return std::min(1.0, cumulative_[k] + probs_[k] * frac);
}

double MarginalHistogram::mean() const {
    double m = 0.0;
    for (std::size_t k = 0; k < probs_.size(); ++k) m += probs_[k] * 0.5 * (edges_[k] + edges_[k + 1]);
    return m;
}

double MarginalHistogram::variance() const {
    // Uniform within each bin: E[X^2 | bin] = (a^2 + ab + b^2) / 3.
    double second = 0.0;
    for (std::size_t k = 0; k < probs_.size(); ++k) {
        const double a = edges_[k];
        const double b = edges_[k + 1];
        second += probs_[k] * (a * a + a * b + b * b) / 3.0;
    }
    const double m = mean();
    return std::max(0.0, second - m * m);
}

double histogram_inverse_cdf(const MarginalHistogram& h, double q) {
    if (!(q >= 0.0 && q <= 1.0)) {
        std::ostringstream os;
        os << "histogram_inverse_cdf: probability " << q << " outside [0, 1]";
        throw InputError(os.str());
    }
    const auto& e = h.edges_;
    const auto& c = h.cumulative_;
    if (q == 0.0) return e.front();
    if (q == 1.0) return e.back();
    const auto it = std::lower_bound(c.begin() + 1, c.end(), q);
    if (it == c.end()) return e.back();
    const auto k = static_cast<std::size_t>(it - c.begin()) - 1;
    const double p = h.probs_[k];
    if (p <= 0.0) return e[k];
    const double frac = std::clamp((q - c[k]) / p, 0.0, 1.0);
    return e[k] + frac * (e[k + 1] - e[k]);
}

// ---------------------------------------------------------------------------
// Correlation handling

void check_correlation(const Eigen::MatrixXd& corr) {
    if (corr.rows() != corr.cols() || corr.rows() == 0)
        throw InputError("correlation matrix must be square and nonempty");
    const auto n = corr.rows();
    for (Eigen::Index i = 0; i < n; ++i) {
        if (std::abs(corr(i, i) - 1.0) > 1e-9)
            throw InputError("correlation matrix: diagonal entry " + std::to_string(i) + " is not 1");
        for (Eigen::Index j = 0; j < n; ++j) {
            if (!std::isfinite(corr(i, j)) || std::abs(corr(i, j) - corr(j, i)) > 1e-9)
                throw InputError("correlation matrix is not symmetric");
            if (std::abs(corr(i, j)) > 1.0 + 1e-12) throw InputError("correlation entry outside [-1, 1]");
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(corr, Eigen::EigenvaluesOnly);
    const double lmin = es.eigenvalues().minCoeff();
    if (lmin < -1e-9) {
        std::ostringstream os;
        os << "correlation matrix is not positive semidefinite (smallest eigenvalue " << lmin << ")";
        throw InputError(os.str());
    }
}

GaussHermiteRule gauss_hermite(int n) {
    if (n < 1) throw InputError("gauss_hermite: need at least one node");
    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k < n; ++k) {
        jacobi(k, k - 1) = std::sqrt(0.5 * k);
        jacobi(k - 1, k) = jacobi(k, k - 1);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jacobi);
    GaussHermiteRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const double sqrt_pi = std::sqrt(std::numbers::pi);
    for (int k = 0; k < n; ++k) {
        rule.nodes[k] = es.eigenvalues()(k);
        const double v0 = es.eigenvectors()(0, k);
        rule.weights[k] = sqrt_pi * v0 * v0;
    }
    return rule;
}

namespace {

constexpr int kNatafNodes = 32;

double map_normal(const MarginalHistogram& h, double z) {
    return histogram_inverse_cdf(h, std::clamp(standard_normal_cdf(z), 0.0, 1.0));
}

}  // namespace

double nataf_correlation(const MarginalHistogram& a, const MarginalHistogram& b, double rho_z,
                         const GaussHermiteRule& rule) {
    const std::size_t n = rule.nodes.size();
    const double inv_pi = 1.0 / std::numbers::pi;
    const double inv_sqrt_pi = std::numbers::inv_sqrtpi;
    const double rho = std::clamp(rho_z, -1.0, 1.0);
    const double rho_c = std::sqrt(std::max(0.0, 1.0 - rho * rho));

    std::vector<double> xa(n);
    std::vector<double> xb(n);
    double ma = 0.0, mb = 0.0, sa = 0.0, sb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double z = std::numbers::sqrt2 * rule.nodes[i];
        xa[i] = map_normal(a, z);
        xb[i] = map_normal(b, z);
        ma += rule.weights[i] * xa[i];
        mb += rule.weights[i] * xb[i];
        sa += rule.weights[i] * xa[i] * xa[i];
        sb += rule.weights[i] * xb[i] * xb[i];
    }
    ma *= inv_sqrt_pi;
    mb *= inv_sqrt_pi;
    const double va = sa * inv_sqrt_pi - ma * ma;
    const double vb = sb * inv_sqrt_pi - mb * mb;
    if (!(va > 0.0) || !(vb > 0.0)) throw InputError("nataf: marginal with zero variance");

    double cross = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double inner = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double z2 = std::numbers::sqrt2 * (rho * rule.nodes[i] + rho_c * rule.nodes[j]);
            inner += rule.weights[j] * map_normal(b, z2);
        }
        cross += rule.weights[i] * xa[i] * inner;
    }
    cross *= inv_pi;
    return (cross - ma * mb) / std::sqrt(va * vb);
}

NatafAdjustment nataf_adjust(std::span<const MarginalHistogram> marginals, const Eigen::MatrixXd& corr) {
    check_correlation(corr);
    const auto n = static_cast<Eigen::Index>(marginals.size());
    if (corr.rows() != n) {
        std::ostringstream os;
        os << "nataf: " << marginals.size() << " marginals but correlation matrix is " << corr.rows() << "x"
           << corr.cols();
        throw InputError(os.str());
    }

    NatafAdjustment out;
    out.gaussian_correlation = Eigen::MatrixXd::Identity(n, n);
    const GaussHermiteRule rule = gauss_hermite(kNatafNodes);

    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double target = corr(i, j);
            double rho_z = 0.0;
            if (target != 0.0) {
                const auto& a = marginals[static_cast<std::size_t>(i)];
                const auto& b = marginals[static_cast<std::size_t>(j)];
                auto f = [&](double r) { return nataf_correlation(a, b, r, rule) - target; };
                double lo = -1.0;
                double hi = 1.0;
                const double f_lo = f(lo);
                const double f_hi = f(hi);
                if (f_lo >= 0.0) {
                    rho_z = lo;
                    out.warnings.push_back("nataf: correlation " + std::to_string(target) + " between farms " +
                                           std::to_string(i) + " and " + std::to_string(j) +
                                           " is below the attainable range; clamped");
                } else if (f_hi <= 0.0) {
                    rho_z = hi;
                    out.warnings.push_back("nataf: correlation " + std::to_string(target) + " between farms " +
                                           std::to_string(i) + " and " + std::to_string(j) +
                                           " is above the attainable range; clamped");
                } else {
                    for (int it = 0; it < 60 && hi - lo > 1e-13; ++it) {
                        const double mid = 0.5 * (lo + hi);
                        if (f(mid) < 0.0) {
                            lo = mid;
                        } else {
                            hi = mid;
                        }
                    }
                    rho_z = 0.5 * (lo + hi);
                }
            }
            out.gaussian_correlation(i, j) = rho_z;
            out.gaussian_correlation(j, i) = rho_z;
        }
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(out.gaussian_correlation);
    const double lmin = es.eigenvalues().minCoeff();
    if (lmin < 0.0) {
        const Eigen::VectorXd clipped = es.eigenvalues().cwiseMax(1e-10);
        Eigen::MatrixXd c = es.eigenvectors() * clipped.asDiagonal() * es.eigenvectors().transpose();
        const Eigen::VectorXd d = c.diagonal().cwiseSqrt().cwiseInverse();
        c = d.asDiagonal() * c * d.asDiagonal();
        c = 0.5 * (c + c.transpose());
        c.diagonal().setOnes();
        out.gaussian_correlation = c;
        out.projected = true;
        std::ostringstream os;
        os << "nataf: adjusted Gaussian correlation not PSD (smallest eigenvalue " << lmin
           << "); projected onto the PSD cone";
        out.warnings.push_back(os.str());
    }
    return out;
}

Eigen::MatrixXd psd_factor(const Eigen::MatrixXd& m) {
    Eigen::LLT<Eigen::MatrixXd> llt(m);
    if (llt.info() == Eigen::Success) {
        Eigen::MatrixXd l = llt.matrixL();
        if (l.allFinite()) return l;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()));
    const Eigen::VectorXd root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * root.asDiagonal();
}

SampleMatrix nataf_sample(std::span<const MarginalHistogram> marginals, const Eigen::MatrixXd& corr,
                          std::size_t n_samples, std::uint64_t seed) {
    if (n_samples < 1) throw InputError("nataf_sample: n_samples must be >= 1");
    const NatafAdjustment adj = nataf_adjust(marginals, corr);
    for (const auto& w : adj.warnings) std::clog << "warning: " << w << '\n';

    const auto d = static_cast<Eigen::Index>(marginals.size());
    const Eigen::MatrixXd factor = psd_factor(adj.gaussian_correlation);
    SampleMatrix out(static_cast<Eigen::Index>(n_samples), d);
    RandomStream rng(seed);
    Eigen::VectorXd z(d);
    for (Eigen::Index r = 0; r < out.rows(); ++r) {
        for (Eigen::Index k = 0; k < d; ++k) z(k) = rng.normal();
        const Eigen::VectorXd x = factor * z;
        for (Eigen::Index k = 0; k < d; ++k) out(r, k) = map_normal(marginals[static_cast<std::size_t>(k)], x(k));
    }
    return out;
}

// ---------------------------------------------------------------------------
// EM

namespace {

struct MixtureState {
    Eigen::VectorXd weights;
    std::vector<Eigen::VectorXd> means;
    std::vector<Eigen::MatrixXd> covs;
};

// Row i, column k: log(w_k N(x_i; mu_k, Sigma_k)).
// Inner loops specialized on the dimension; D == 0 means runtime `d`.
// Matrices are column-major d x d, samples are contiguous columns of length d.
template <int D>
void e_kernel(const double* xp, Eigen::Index n, Eigen::Index d, const double* linv, const double* shift,
              double base, double* out) {
    const Eigen::Index dd = D > 0 ? D : d;
    for (Eigen::Index i = 0; i < n; ++i, xp += dd) {
        double sq = 0.0;
        for (Eigen::Index a = 0; a < dd; ++a) {
            double ya = -shift[a];
            for (Eigen::Index b = 0; b <= a; ++b) ya += linv[a + b * dd] * xp[b];
            sq += ya * ya;
        }
        out[i] = base - 0.5 * sq;
    }
}

// Accumulates the lower triangle of sum_i r_i x_i x_i'.
template <int D>
void m_kernel(const double* xp, Eigen::Index n, Eigen::Index d, const double* r, double* second) {
    const Eigen::Index dd = D > 0 ? D : d;
    for (Eigen::Index i = 0; i < n; ++i, xp += dd)
        for (Eigen::Index a = 0; a < dd; ++a) {
            const double ra = r[i] * xp[a];
            for (Eigen::Index b = 0; b <= a; ++b) second[a + b * dd] += ra * xp[b];
        }
}

template <class F>
void dispatch_dimension(Eigen::Index d, F&& f) {
    switch (d) {
        case 1: f(std::integral_constant<int, 1>{}); break;
        case 2: f(std::integral_constant<int, 2>{}); break;
        case 3: f(std::integral_constant<int, 3>{}); break;
        case 4: f(std::integral_constant<int, 4>{}); break;
        default: f(std::integral_constant<int, 0>{}); break;
    }
}

// Columns of `xt` are samples; returns log(w_k N(x_i; mu_k, Sigma_k)) as n x K.
Eigen::MatrixXd weighted_log_density(const Eigen::MatrixXd& xt, const MixtureState& s) {
    const Eigen::Index n = xt.cols();
    const Eigen::Index d = xt.rows();
    const auto k_count = static_cast<Eigen::Index>(s.means.size());
    const double log_2pi = std::log(2.0 * std::numbers::pi);
    Eigen::MatrixXd logp(n, k_count);
    for (Eigen::Index k = 0; k < k_count; ++k) {
        const auto& cov = s.covs[static_cast<std::size_t>(k)];
        Eigen::LLT<Eigen::MatrixXd> llt(cov);
        if (llt.info() != Eigen::Success) throw InternalError("EM: component covariance lost positive definiteness");
        const Eigen::MatrixXd l = llt.matrixL();
        const double logdet = 2.0 * l.diagonal().array().log().sum();
        const Eigen::MatrixXd linv = l.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd::Identity(d, d));
        const Eigen::VectorXd shift = linv * s.means[static_cast<std::size_t>(k)];
        const double w = s.weights(k) > 0.0 ? std::log(s.weights(k)) : -std::numeric_limits<double>::infinity();
        const double base = w - 0.5 * (static_cast<double>(d) * log_2pi + logdet);
        const Eigen::MatrixXd lt = linv;
        dispatch_dimension(d, [&](auto dim) {
            e_kernel<decltype(dim)::value>(xt.data(), n, d, lt.data(), shift.data(), base, logp.col(k).data());
        });
    }
    return logp;
}

// Turns logp into responsibilities in place and returns the per-row log-sum-exp.
Eigen::VectorXd normalize_rows(Eigen::MatrixXd& logp) {
    // Column sweeps keep every pass contiguous.
    Eigen::ArrayXd mx = logp.col(0).array();
    for (Eigen::Index k = 1; k < logp.cols(); ++k) mx = mx.max(logp.col(k).array());
    Eigen::ArrayXd sum = Eigen::ArrayXd::Zero(logp.rows());
    for (Eigen::Index k = 0; k < logp.cols(); ++k) {
        logp.col(k).array() = (logp.col(k).array() - mx).exp();
        sum += logp.col(k).array();
    }
    const Eigen::ArrayXd inv = sum.inverse();
    for (Eigen::Index k = 0; k < logp.cols(); ++k) logp.col(k).array() *= inv;
    return (mx + sum.log()).matrix();
}

Eigen::MatrixXd floor_eigenvalues(const Eigen::MatrixXd& cov, double floor) {
    Eigen::MatrixXd sym = 0.5 * (cov + cov.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
    if (es.eigenvalues().minCoeff() >= floor) return sym;
    const Eigen::VectorXd lam = es.eigenvalues().cwiseMax(floor);
    return es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
}

MixtureState state_of(const Gmm& g) {
    MixtureState s;
    s.weights.resize(static_cast<Eigen::Index>(g.size()));
    for (std::size_t k = 0; k < g.size(); ++k) {
        s.weights(static_cast<Eigen::Index>(k)) = g[k].weight;
        s.means.push_back(g[k].mean);
        s.covs.push_back(g[k].covariance);
    }
    return s;
}

}  // namespace

EmResult em_fit_detailed(const SampleMatrix& samples, const EmConfig& cfg) {
    const Eigen::Index n = samples.rows();
    const Eigen::Index d = samples.cols();
    const int k_count = cfg.n_components;
    if (k_count < 1 || cfg.max_iterations < 1 || !(cfg.tolerance > 0.0) || !(cfg.covariance_floor > 0.0))
        throw InputError("em_fit: n_components, max_iterations, tolerance and covariance_floor must be positive");
    if (n < 2 || d < 1) throw InputError("em_fit: need at least two samples of dimension >= 1");
    if (n < k_count) {
        std::ostringstream os;
        os << "em_fit: " << n << " samples for " << k_count << " components";
        throw InputError(os.str());
    }
    if (!samples.allFinite()) throw InputError("em_fit: samples contain non-finite values");

    const Eigen::MatrixXd x = samples;  // column-major copy for the vectorized passes
    const Eigen::MatrixXd xt = x.transpose();
    const Eigen::VectorXd sample_mean = x.colwise().mean().transpose();
    const Eigen::MatrixXd centered = x.rowwise() - sample_mean.transpose();
    const Eigen::MatrixXd centered_t = centered.transpose();
    const Eigen::MatrixXd sample_cov = centered.transpose() * centered / static_cast<double>(n);
    double min_var = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < d; ++j) {
        const double var = sample_cov(j, j);
        if (!(var > 1e-12 * (1.0 + sample_mean(j) * sample_mean(j)))) {
            throw InputError("em_fit: column " + std::to_string(j) + " has zero variance (degenerate data)");
        }
        min_var = std::min(min_var, var);
    }
    const double floor = cfg.covariance_floor * min_var;

    // k-means++ seeding.
    RandomStream rng(cfg.seed);
    std::vector<Eigen::Index> centers;
    centers.push_back(static_cast<Eigen::Index>(rng.uniform_index(static_cast<std::uint64_t>(n))));
    Eigen::VectorXd dist2 = (x.rowwise() - x.row(centers[0])).rowwise().squaredNorm();
    while (static_cast<int>(centers.size()) < k_count) {
        const double total = dist2.sum();
        Eigen::Index pick = 0;
        if (total > 0.0) {
            const double u = rng.uniform() * total;
            double acc = 0.0;
            pick = n - 1;
            for (Eigen::Index i = 0; i < n; ++i) {
                acc += dist2(i);
                if (acc > u) {
                    pick = i;
                    break;
                }
            }
        } else {
            pick = static_cast<Eigen::Index>(rng.uniform_index(static_cast<std::uint64_t>(n)));
        }
        centers.push_back(pick);
        dist2 = dist2.cwiseMin((x.rowwise() - x.row(pick)).rowwise().squaredNorm());
    }

    MixtureState s;
    s.weights = Eigen::VectorXd::Constant(k_count, 1.0 / k_count);
    const Eigen::MatrixXd init_cov = floor_eigenvalues(sample_cov, floor);
    for (const auto c : centers) {
        s.means.push_back(x.row(c).transpose());
        s.covs.push_back(init_cov);
    }

    EmResult result;
    for (int it = 1; it <= cfg.max_iterations; ++it) {
        result.iterations = it;
        Eigen::MatrixXd resp = weighted_log_density(xt, s);
        const double ll = normalize_rows(resp).sum();
        if (!std::isfinite(ll)) {
            throw InternalError("em_fit: non-finite log-likelihood at iteration " + std::to_string(it));
        }
        result.log_likelihood.push_back(ll);
        if (it > 1) {
            const double prev = result.log_likelihood[result.log_likelihood.size() - 2];
            if (std::abs(ll - prev) <= cfg.tolerance * std::abs(ll)) {
                result.converged = true;
                break;
            }
        }

        const Eigen::VectorXd nk = resp.colwise().sum().transpose();
        // First and second moments about the sample mean, for every component at once.
        const Eigen::MatrixXd first = centered_t * resp;  // d x K
        for (int k = 0; k < k_count; ++k) {
            // A component that lost all its mass keeps its parameters.
            if (!(nk(k) > 1e-10 * static_cast<double>(n))) {
                s.weights(k) = 1e-12;
                continue;
            }
            s.weights(k) = nk(k) / static_cast<double>(n);
            const Eigen::VectorXd dm = first.col(k) / nk(k);
            Eigen::MatrixXd second = Eigen::MatrixXd::Zero(d, d);
            dispatch_dimension(d, [&](auto dim) {
                m_kernel<decltype(dim)::value>(centered_t.data(), n, d, resp.col(k).data(), second.data());
            });
            second = second.selfadjointView<Eigen::Lower>();
            const Eigen::MatrixXd cov = second / nk(k) - dm * dm.transpose();
            s.means[static_cast<std::size_t>(k)] = sample_mean + dm;
            s.covs[static_cast<std::size_t>(k)] = floor_eigenvalues(cov, floor);
        }
        s.weights /= s.weights.sum();
    }

    std::vector<GaussianComponent> comps;
    for (int k = 0; k < k_count; ++k) {
        comps.push_back({s.weights(k), s.means[static_cast<std::size_t>(k)], s.covs[static_cast<std::size_t>(k)]});
    }
    result.gmm = Gmm(static_cast<int>(d), std::move(comps));
    return result;
}

double mean_log_likelihood(const Gmm& g, const SampleMatrix& samples) {
    require_valid(g, "mean_log_likelihood");
    if (samples.cols() != g.dimension()) throw InputError("mean_log_likelihood: dimension mismatch");
    const Eigen::MatrixXd xt = samples.transpose();
    Eigen::MatrixXd logp = weighted_log_density(xt, state_of(g));
    return normalize_rows(logp).mean();
}

// ---------------------------------------------------------------------------
// Sampling

GmmSampler::GmmSampler(const Gmm& g) : dimension_(g.dimension()) {
    require_valid(g, "sample_gmm");
    double acc = 0.0;
    for (const auto& c : g.components()) {
        acc += c.weight;
        cumulative_.push_back(acc);
        means_.push_back(c.mean);
        factors_.push_back(psd_factor(c.covariance));
    }
    cumulative_.back() = std::numeric_limits<double>::infinity();
}

std::size_t GmmSampler::draw(RandomStream& rng, std::span<double> out) const {
    const double u = rng.uniform();
    const auto k = static_cast<std::size_t>(std::upper_bound(cumulative_.begin(), cumulative_.end(), u) -
                                            cumulative_.begin());
    Eigen::VectorXd z(dimension_);
    for (int i = 0; i < dimension_; ++i) z(i) = rng.normal();
    Eigen::Map<Eigen::VectorXd> dst(out.data(), dimension_);
    dst = means_[k] + factors_[k] * z;
    return k;
}

SampleMatrix sample_gmm(const Gmm& g, std::size_t n_samples, std::uint64_t seed, std::vector<std::size_t>* labels) {
    if (n_samples < 1) throw InputError("sample_gmm: n_samples must be >= 1");
    const GmmSampler sampler(g);
    RandomStream rng(seed);
    SampleMatrix out(static_cast<Eigen::Index>(n_samples), g.dimension());
    if (labels) labels->resize(n_samples);
    for (std::size_t r = 0; r < n_samples; ++r) {
        const auto k = sampler.draw(rng, std::span<double>(out.row(static_cast<Eigen::Index>(r)).data(),
                                                           static_cast<std::size_t>(g.dimension())));
        if (labels) (*labels)[r] = k;
    }
    return out;
}

double ks_distance(std::vector<double> samples, const std::function<double(double)>& cdf) {
    if (samples.empty()) throw InputError("ks_distance: no samples");
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double f = cdf(samples[i]);
        d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
    }
    return d;
}

}  // namespace ccuc
