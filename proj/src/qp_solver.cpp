#include "ccuc/errors.hpp"
#include "ccuc/miqp.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>

namespace ccuc {
namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Vec = Eigen::VectorXd;
using Triplet = Eigen::Triplet<double>;

// min 1/2 x' diag(q) x + c' x  subject to  E x = f,  G x <= h.
struct Qp {
    Vec q, c;
    SpMat E, G;
    Vec f, h;

    Eigen::Index n() const { return c.size(); }
};

enum class IpmStatus { converged, stalled, diverged, iteration_limit };

struct IpmResult {
    IpmStatus status = IpmStatus::iteration_limit;
    Vec x, y, z, s;
    int iterations = 0;
    double primal_residual = 0.0;
    double dual_residual = 0.0;
};

struct IpmSettings {
    double tolerance = 1e-7;       // scaled primal and dual residuals
    double gap_tolerance = 1e-12;  // complementarity relative to the objective
    int max_iterations = 200;
    bool detect_stall = true;
};

double inf_norm(const Vec& v) { return v.size() ? v.lpNorm<Eigen::Infinity>() : 0.0; }

// Largest step in (0, 1] keeping v + a dv >= 0.
double max_step(const Vec& v, const Vec& dv) {
    double a = 1.0;
    for (Eigen::Index i = 0; i < v.size(); ++i)
        if (dv(i) < 0.0) a = std::min(a, -v(i) / dv(i));
    return a;
}

// Reduced KKT system [[Q + G'WG, E'], [E, 0]], factorized with primal and
// dual regularization; solves are refined against the unregularized matrix.
class KktSolver {
public:
    explicit KktSolver(const Qp& p) : p_(p), Gt_(p.G.transpose()), Et_(p.E.transpose()) {}

    // False when no regularization up to 1e-3 yields a factorization.
    [[nodiscard]] bool factor(const Vec& w) {
        w_ = w;
        const SpMat H = Gt_ * w.asDiagonal() * p_.G;
        const Eigen::Index n = p_.n(), me = p_.E.rows();
        for (double reg = 1e-9;; reg *= 100.0) {
            std::vector<Triplet> trip;
            trip.reserve(static_cast<std::size_t>(H.nonZeros() + 2 * p_.E.nonZeros() + n + me));
            for (Eigen::Index k = 0; k < H.outerSize(); ++k)
                for (SpMat::InnerIterator it(H, k); it; ++it) trip.emplace_back(it.row(), it.col(), it.value());
            for (Eigen::Index i = 0; i < n; ++i) trip.emplace_back(i, i, p_.q(i) + reg);
            for (Eigen::Index k = 0; k < p_.E.outerSize(); ++k)
                for (SpMat::InnerIterator it(p_.E, k); it; ++it) {
                    trip.emplace_back(n + it.row(), it.col(), it.value());
                    trip.emplace_back(it.col(), n + it.row(), it.value());
                }
            for (Eigen::Index r = 0; r < me; ++r) trip.emplace_back(n + r, n + r, -reg);
            SpMat K(n + me, n + me);
            K.setFromTriplets(trip.begin(), trip.end());
            ldlt_.compute(K);
            if (ldlt_.info() == Eigen::Success) return true;
            if (reg > 1e-3) return false;
        }
    }

    void solve(const Vec& rx, const Vec& ry, Vec& dx, Vec& dy) const {
        const Eigen::Index n = p_.n(), me = p_.E.rows();
        Vec rhs(n + me);
        rhs << rx, ry;
        Vec sol = ldlt_.solve(rhs);
        for (int pass = 0; pass < 3; ++pass) {
            const Vec res = rhs - apply(sol);
            if (inf_norm(res) <= 1e-14 * (1.0 + inf_norm(rhs))) break;
            sol += ldlt_.solve(res);
        }
        dx = sol.head(n);
        dy = sol.tail(me);
    }

private:
    Vec apply(const Vec& v) const {
        const Eigen::Index n = p_.n();
        const Vec vx = v.head(n), vy = v.tail(p_.E.rows());
        Vec out(v.size());
        out.head(n) = p_.q.cwiseProduct(vx) + Gt_ * w_.cwiseProduct(p_.G * vx) + Et_ * vy;
        out.tail(p_.E.rows()) = p_.E * vx;
        return out;
    }

    const Qp& p_;
    SpMat Gt_, Et_;
    Vec w_;
    Eigen::SimplicialLDLT<SpMat, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt_;
};

// Mehrotra predictor-corrector on the scaled problem.
IpmResult interior_point(const Qp& p, const IpmSettings& cfg) {
    const Eigen::Index mi = p.G.rows();
    const double nf = inf_norm(p.f), nh = inf_norm(p.h), nc = inf_norm(p.c);
    KktSolver kkt(p);
    IpmResult r;

    // Starting point from the W = I system, shifted into the interior.
    if (!kkt.factor(Vec::Ones(mi))) {
        r.status = IpmStatus::diverged;
        return r;
    }
    kkt.solve(-p.c + p.G.transpose() * p.h, p.f, r.x, r.y);
    r.s = p.h - p.G * r.x;
    r.z = -r.s;
    if (mi > 0) {
        const double ap = -r.s.minCoeff();
        if (ap >= 0.0) r.s.array() += 1.0 + ap;
        const double ad = -r.z.minCoeff();
        if (ad >= 0.0) r.z.array() += 1.0 + ad;
    }

    bool have_best = false;
    IpmResult best;
    double best_gap = kInfinity;
    int non_improving = 0, short_steps = 0;
    std::vector<double> primal_history;

    for (int it = 0;; ++it) {
        r.iterations = it;
        const Vec rd = p.q.cwiseProduct(r.x) + p.c + p.E.transpose() * r.y + p.G.transpose() * r.z;
        const Vec re = p.E * r.x - p.f;
        const Vec ri = p.G * r.x + r.s - p.h;
        const double sz = mi ? r.s.dot(r.z) : 0.0;
        const double mu = mi ? sz / static_cast<double>(mi) : 0.0;
        const double pobj = 0.5 * r.x.dot(p.q.cwiseProduct(r.x)) + p.c.dot(r.x);
        r.primal_residual = std::max(inf_norm(re) / (1.0 + nf), inf_norm(ri) / (1.0 + nh));
        r.dual_residual = inf_norm(rd) / (1.0 + nc);
        const double gap = sz / (1.0 + std::abs(pobj));

        const bool within = r.primal_residual <= cfg.tolerance && r.dual_residual <= cfg.tolerance &&
                            gap <= std::max(cfg.tolerance * 1e-2, cfg.gap_tolerance);
        if (within) {
            // Past the contract, keep going toward the gap target while it pays off.
            const double merit = std::max({r.primal_residual, r.dual_residual, gap});
            if (!have_best || merit < 0.5 * best_gap) {
                non_improving = 0;
            } else {
                ++non_improving;
            }
            if (!have_best || merit < best_gap) {
                best = r;
                best_gap = merit;
                have_best = true;
            }
            if ((gap <= cfg.gap_tolerance && r.primal_residual <= 1e-3 * cfg.tolerance &&
                 r.dual_residual <= 1e-3 * cfg.tolerance) ||
                non_improving >= 2) {
                best.status = IpmStatus::converged;
                return best;
            }
        } else if (have_best && ++non_improving >= 2) {
            best.status = IpmStatus::converged;
            return best;
        }
        if (it >= cfg.max_iterations) {
            if (have_best) {
                best.status = IpmStatus::converged;
                return best;
            }
            r.status = IpmStatus::iteration_limit;
            return r;
        }
        if (std::max({inf_norm(r.x), inf_norm(r.y), inf_norm(r.z)}) > 1e12) {
            r.status = IpmStatus::diverged;
            return r;
        }
        primal_history.push_back(r.primal_residual);
        if (cfg.detect_stall && it >= 30 && r.primal_residual > cfg.tolerance &&
            r.primal_residual > 0.5 * primal_history[primal_history.size() - 11]) {
            r.status = IpmStatus::stalled;
            return r;
        }

        const Vec w = mi ? Vec(r.z.cwiseQuotient(r.s)) : Vec();
        if (!w.allFinite() || !kkt.factor(w)) {
            r.status = IpmStatus::diverged;
            return r;
        }
        Vec dx, dy, dz, ds;
        auto direction = [&](const Vec& rc) {
            const Vec t1 = (r.z.cwiseProduct(ri) - rc).cwiseQuotient(r.s);
            kkt.solve(-rd - p.G.transpose() * t1, -re, dx, dy);
            const Vec gdx = p.G * dx;
            dz = t1 + w.cwiseProduct(gdx);
            ds = -ri - gdx;
        };

        double alpha = 1.0;
        if (mi > 0) {
            direction(r.s.cwiseProduct(r.z));
            const double a_aff = std::min(max_step(r.s, ds), max_step(r.z, dz));
            const double mu_aff = (r.s + a_aff * ds).dot(r.z + a_aff * dz) / static_cast<double>(mi);
            const double sigma = std::pow(std::clamp(mu_aff / mu, 0.0, 1.0), 3);
            const Vec rc = r.s.cwiseProduct(r.z) + ds.cwiseProduct(dz) - Vec::Constant(mi, sigma * mu);
            direction(rc);
            alpha = std::min(1.0, 0.995 * std::min(max_step(r.s, ds), max_step(r.z, dz)));
        } else {
            direction(Vec());
        }
        r.x += alpha * dx;
        r.y += alpha * dy;
        if (mi > 0) {
            r.z += alpha * dz;
            r.s += alpha * ds;
        }
        if (alpha < 1e-10) {
            if (++short_steps >= 5) {
                r.status = IpmStatus::stalled;
                return r;
            }
        } else {
            short_steps = 0;
        }
    }
}

// The relaxation after eliminating fixed variables and scaling rows.
struct Reduced {
    std::vector<int> free_vars;    // reduced column -> model variable
    std::vector<double> fixed;     // model variable -> fixed value (NaN if free)
    Qp qp;
    std::vector<std::size_t> eq_rows;       // reduced equality row -> model row
    std::vector<std::size_t> general_rows;  // leading inequality rows -> model row
    Vec eq_scale, general_scale;
    double objective_scale = 1.0;
    std::optional<InfeasibilityCertificate> infeasible;
};

Reduced reduce(const MiqpModel& model, std::span<const Fixing> fixings) {
    const auto& vars = model.variables();
    const auto& obj = model.objective();
    const std::size_t nv = vars.size();
    Reduced red;
    red.fixed.assign(nv, std::numeric_limits<double>::quiet_NaN());
    std::vector<double> lo(nv), hi(nv);
    for (std::size_t i = 0; i < nv; ++i) {
        lo[i] = vars[i].lower;
        hi[i] = vars[i].upper;
    }
    for (const Fixing& fx : fixings) {
        const auto i = static_cast<std::size_t>(fx.var);
        if (fx.var < 0 || i >= nv) throw InputError(fmt::format("fixing refers to unknown variable {}", fx.var));
        const double viol = std::max(lo[i] - fx.value, fx.value - hi[i]);
        if (viol > 0.0) {
            red.infeasible = InfeasibilityCertificate{viol, vars[i].name, viol};
            return red;
        }
        lo[i] = hi[i] = fx.value;
    }
    std::vector<int> column(nv, -1);
    for (std::size_t i = 0; i < nv; ++i) {
        if (lo[i] > hi[i]) {
            red.infeasible = InfeasibilityCertificate{lo[i] - hi[i], vars[i].name, lo[i] - hi[i]};
            return red;
        }
        if (lo[i] == hi[i]) {
            red.fixed[i] = lo[i];
        } else {
            column[i] = static_cast<int>(red.free_vars.size());
            red.free_vars.push_back(static_cast<int>(i));
        }
    }
    const auto n = static_cast<Eigen::Index>(red.free_vars.size());

    red.qp.q.resize(n);
    red.qp.c.resize(n);
    double scale = 1.0;
    for (Eigen::Index k = 0; k < n; ++k) {
        const auto i = static_cast<std::size_t>(red.free_vars[static_cast<std::size_t>(k)]);
        scale = std::max({scale, std::abs(obj.linear[i]), 2.0 * obj.quadratic[i]});
    }
    red.objective_scale = scale;
    for (Eigen::Index k = 0; k < n; ++k) {
        const auto i = static_cast<std::size_t>(red.free_vars[static_cast<std::size_t>(k)]);
        red.qp.q(k) = 2.0 * obj.quadratic[i] / scale;
        red.qp.c(k) = obj.linear[i] / scale;
    }

    std::vector<Triplet> eq, in;
    std::vector<double> f, h, eq_scale, general_scale;
    const auto& rows = model.constraints();
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const LinearConstraint& row = rows[r];
        double rhs = row.rhs, big = 0.0;
        for (const Term& t : row.terms) {
            const auto i = static_cast<std::size_t>(t.var);
            if (column[i] < 0)
                rhs -= t.coef * red.fixed[i];
            else
                big = std::max(big, std::abs(t.coef));
        }
        if (big == 0.0) {
            const double viol = row.sense == Sense::equal ? std::abs(rhs)
                                : row.sense == Sense::less_equal ? -rhs
                                                                 : rhs;
            if (viol > 1e-9 * (1.0 + std::abs(row.rhs))) {
                red.infeasible = InfeasibilityCertificate{viol, row.name, viol};
                return red;
            }
            continue;
        }
        const double sign = row.sense == Sense::greater_equal ? -1.0 : 1.0;
        const double factor = sign / big;
        auto& trip = row.sense == Sense::equal ? eq : in;
        const auto out_row = static_cast<Eigen::Index>(row.sense == Sense::equal ? f.size() : h.size());
        for (const Term& t : row.terms) {
            const int col = column[static_cast<std::size_t>(t.var)];
            if (col >= 0) trip.emplace_back(out_row, col, t.coef * factor);
        }
        if (row.sense == Sense::equal) {
            f.push_back(rhs * factor);
            eq_scale.push_back(big);
            red.eq_rows.push_back(r);
        } else {
            h.push_back(rhs * factor);
            general_scale.push_back(big);
            red.general_rows.push_back(r);
        }
    }
    for (Eigen::Index k = 0; k < n; ++k) {
        const auto i = static_cast<std::size_t>(red.free_vars[static_cast<std::size_t>(k)]);
        if (std::isfinite(hi[i])) {
            in.emplace_back(static_cast<Eigen::Index>(h.size()), k, 1.0);
            h.push_back(hi[i]);
        }
        if (std::isfinite(lo[i])) {
            in.emplace_back(static_cast<Eigen::Index>(h.size()), k, -1.0);
            h.push_back(-lo[i]);
        }
    }
    red.qp.E.resize(static_cast<Eigen::Index>(f.size()), n);
    red.qp.E.setFromTriplets(eq.begin(), eq.end());
    red.qp.G.resize(static_cast<Eigen::Index>(h.size()), n);
    red.qp.G.setFromTriplets(in.begin(), in.end());
    red.qp.f = Eigen::Map<const Vec>(f.data(), static_cast<Eigen::Index>(f.size()));
    red.qp.h = Eigen::Map<const Vec>(h.data(), static_cast<Eigen::Index>(h.size()));
    red.eq_scale = Eigen::Map<const Vec>(eq_scale.data(), static_cast<Eigen::Index>(eq_scale.size()));
    red.general_scale = Eigen::Map<const Vec>(general_scale.data(), static_cast<Eigen::Index>(general_scale.size()));
    return red;
}

// Elastic problem: min sum(p + m + t) s.t. E x + p - m = f, G_gen x - t <= h_gen,
// bound rows unchanged, p, m, t >= 0. A positive optimum proves infeasibility.
InfeasibilityCertificate phase_one(const MiqpModel& model, const Reduced& red, double tolerance, bool& infeasible) {
    const Qp& p = red.qp;
    const Eigen::Index n = p.n(), me = p.E.rows(), mg = static_cast<Eigen::Index>(red.general_rows.size());
    const Eigen::Index mb = p.G.rows() - mg;
    const Eigen::Index n1 = n + 2 * me + mg;

    Qp e;
    e.q = Vec::Zero(n1);
    e.c = Vec::Zero(n1);
    e.c.tail(2 * me + mg).setOnes();
    std::vector<Triplet> eq, in;
    for (Eigen::Index k = 0; k < p.E.outerSize(); ++k)
        for (SpMat::InnerIterator it(p.E, k); it; ++it) eq.emplace_back(it.row(), it.col(), it.value());
    for (Eigen::Index r = 0; r < me; ++r) {
        eq.emplace_back(r, n + r, 1.0);
        eq.emplace_back(r, n + me + r, -1.0);
    }
    for (Eigen::Index k = 0; k < p.G.outerSize(); ++k)
        for (SpMat::InnerIterator it(p.G, k); it; ++it) in.emplace_back(it.row(), it.col(), it.value());
    for (Eigen::Index r = 0; r < mg; ++r) in.emplace_back(r, n + 2 * me + r, -1.0);
    const Eigen::Index m1 = mg + mb + 2 * me + mg;
    for (Eigen::Index k = 0; k < 2 * me + mg; ++k) in.emplace_back(mg + mb + k, n + k, -1.0);
    e.E.resize(me, n1);
    e.E.setFromTriplets(eq.begin(), eq.end());
    e.G.resize(m1, n1);
    e.G.setFromTriplets(in.begin(), in.end());
    e.f = p.f;
    e.h = Vec::Zero(m1);
    e.h.head(mg + mb) = p.h;

    IpmSettings cfg;
    cfg.tolerance = std::min(tolerance, 1e-8);
    cfg.detect_stall = false;
    cfg.max_iterations = 300;
    const IpmResult res = interior_point(e, cfg);
    // The feasibility decision needs the elastic optimum only to ~1e-7.
    if (res.status != IpmStatus::converged && std::max(res.primal_residual, res.dual_residual) > 1e-6)
        throw InternalError(fmt::format("QP: phase-1 problem did not converge after {} iterations", res.iterations));

    InfeasibilityCertificate cert;
    double worst = -1.0;
    double scaled_total = 0.0;
    const auto& rows = model.constraints();
    auto visit = [&](double elastic, double row_scale, std::size_t row) {
        scaled_total += elastic;
        const double v = std::max(0.0, elastic) * row_scale;
        cert.total_violation += v;
        if (v > worst) {
            worst = v;
            cert.worst_row = rows[row].name;
            cert.worst_violation = v;
        }
    };
    for (Eigen::Index r = 0; r < me; ++r)
        visit(res.x(n + r) + res.x(n + me + r), red.eq_scale(r), red.eq_rows[static_cast<std::size_t>(r)]);
    for (Eigen::Index r = 0; r < mg; ++r)
        visit(res.x(n + 2 * me + r), red.general_scale(r), red.general_rows[static_cast<std::size_t>(r)]);
    const double scale = 1.0 + std::max(inf_norm(p.f), inf_norm(p.h));
    infeasible = scaled_total > 1e-7 * scale;
    return cert;
}

}  // namespace

RelaxationResult solve_relaxation(const MiqpModel& model, std::span<const Fixing> fixings, const QpOptions& opt) {
    if (!model.is_convex()) throw InputError("QP: objective has a negative quadratic coefficient (nonconvex)");
    RelaxationResult out;
    const Reduced red = reduce(model, fixings);
    if (red.infeasible) {
        out.status = RelaxationStatus::infeasible;
        out.certificate = red.infeasible;
        return out;
    }

    const std::size_t nv = model.num_variables();
    out.assignment.assign(nv, 0.0);
    for (std::size_t i = 0; i < nv; ++i)
        if (!std::isnan(red.fixed[i])) out.assignment[i] = red.fixed[i];

    if (!red.free_vars.empty()) {
        IpmSettings cfg;
        cfg.tolerance = opt.kkt_tolerance;
        cfg.max_iterations = opt.max_iterations;
        IpmResult res = interior_point(red.qp, cfg);
        if (res.status != IpmStatus::converged) {
            bool infeasible = false;
            InfeasibilityCertificate cert = phase_one(model, red, opt.kkt_tolerance, infeasible);
            if (infeasible) {
                out.status = RelaxationStatus::infeasible;
                out.certificate = std::move(cert);
                out.assignment.clear();
                out.iterations = res.iterations;
                return out;
            }
            cfg.detect_stall = false;
            cfg.max_iterations = std::max(500, opt.max_iterations);
            res = interior_point(red.qp, cfg);
            if (res.status != IpmStatus::converged)
                throw InternalError(fmt::format(
                    "QP: interior point failed on a feasible relaxation (primal {:.3g}, dual {:.3g}, {} iterations)",
                    res.primal_residual, res.dual_residual, res.iterations));
        }
        out.iterations = res.iterations;
        out.kkt_residual = std::max(res.primal_residual, res.dual_residual);
        const auto& vars = model.variables();
        for (std::size_t k = 0; k < red.free_vars.size(); ++k) {
            const auto i = static_cast<std::size_t>(red.free_vars[k]);
            out.assignment[i] = std::clamp(res.x(static_cast<Eigen::Index>(k)), vars[i].lower, vars[i].upper);
        }
    }
    out.status = RelaxationStatus::optimal;
    out.objective = model.evaluate_objective(out.assignment);
    return out;
}

}  // namespace ccuc
