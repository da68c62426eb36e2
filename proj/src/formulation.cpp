#include "ccuc/formulation.hpp"

#include "ccuc/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>

namespace ccuc {
namespace {

// Identifiers become row/column name tokens, so keep them MPS safe.
std::string token(const std::string& id) {
    std::string out = id;
    for (char& ch : out)
        if (!(std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '.' || ch == '-')) ch = '_';
    return out;
}

std::string name(std::string_view kind, const std::string& id, int t) {
    return fmt::format("{}_{}_t{}", kind, token(id), t + 1);
}

std::string name(std::string_view kind, int t) { return fmt::format("{}_t{}", kind, t + 1); }

void require_table_shape(const Case& c, const QuantileTable& q) {
    const auto T = static_cast<std::size_t>(c.horizon);
    const auto L = static_cast<Eigen::Index>(c.network.branches.size());
    if (q.horizon != c.horizon || q.reserve_up.size() != T || q.reserve_down.size() != T ||
        q.line_forward.rows() != L || q.line_reverse.rows() != L ||
        q.line_forward.cols() != c.horizon || q.line_reverse.cols() != c.horizon)
        throw InputError(fmt::format("quantile table shape does not match the case ({} intervals, {} branches)",
                                     c.horizon, L));
}

}  // namespace

Eigen::VectorXd line_projection(const Case& c, const PtdfMatrix& ptdf, std::size_t l) {
    Eigen::VectorXd s(static_cast<Eigen::Index>(c.wind_farms.size()));
    for (std::size_t j = 0; j < c.wind_farms.size(); ++j)
        s(static_cast<Eigen::Index>(j)) = ptdf(static_cast<Eigen::Index>(l),
                                               static_cast<Eigen::Index>(c.network.bus_index(c.wind_farms[j].bus)));
    return s;
}

QuantileTable build_quantile_table(const Case& c, std::span<const Gmm> gmms, const PtdfMatrix& ptdf,
                                   const QuantileConfig& cfg) {
    const auto start = std::chrono::steady_clock::now();
    const int T = c.horizon;
    const auto L = c.network.branches.size();
    const auto nw = static_cast<int>(c.wind_farms.size());
    if (gmms.size() != static_cast<std::size_t>(T))
        throw InputError(fmt::format("expected {} interval GMMs, got {}", T, gmms.size()));

    QuantileTable q;
    q.horizon = T;
    q.reserve_up.resize(static_cast<std::size_t>(T));
    q.reserve_down.resize(static_cast<std::size_t>(T));
    q.line_forward.resize(static_cast<Eigen::Index>(L), T);
    q.line_reverse.resize(static_cast<Eigen::Index>(L), T);

    std::vector<Eigen::VectorXd> projections;
    for (std::size_t l = 0; l < L; ++l) projections.push_back(line_projection(c, ptdf, l));
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(nw);

    for (int t = 0; t < T; ++t) {
        const Gmm& g = gmms[static_cast<std::size_t>(t)];
        if (g.dimension() != nw)
            throw InputError(fmt::format("interval {} GMM has dimension {}, case has {} wind farms", t + 1,
                                         g.dimension(), nw));
        require_valid(g, fmt::format("interval {} GMM", t + 1));
        const auto ti = static_cast<std::size_t>(t);
        const std::string* branch = nullptr;
        try {
            const UnivariateGmm total = affine_project(g, ones);
            q.reserve_up[ti] = quantile(total, c.risk.alpha_reserve_up, cfg);
            q.reserve_down[ti] = quantile(total, 1.0 - c.risk.alpha_reserve_down, cfg);
            for (std::size_t l = 0; l < L; ++l) {
                const Branch& b = c.network.branches[l];
                branch = &b.id;
                const UnivariateGmm flow = affine_project(g, projections[l]);
                const auto li = static_cast<Eigen::Index>(l);
                q.line_forward(li, t) = quantile(flow, 1.0 - b.alpha_forward, cfg);
                q.line_reverse(li, t) = quantile(flow, b.alpha_reverse, cfg);
            }
        } catch (const InternalError& e) {
            throw InternalError(fmt::format("interval {}{}: {}", t + 1, branch ? ", branch " + *branch : "", e.what()));
        } catch (const InputError& e) {
            throw InputError(fmt::format("interval {}{}: {}", t + 1, branch ? ", branch " + *branch : "", e.what()));
        }
    }
    q.elapsed_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return q;
}

UcModel build_miqp(const Case& c, const PtdfMatrix& ptdf, const QuantileTable& q, const FormulationOptions& opt) {
    require_table_shape(c, q);
    const int T = c.horizon;
    const std::size_t G = c.generators.size();
    const std::size_t W = c.wind_farms.size();
    const std::size_t L = c.network.branches.size();

    UcModel out;
    MiqpModel& m = out.model;
    UcLayout& lay = out.layout;
    lay.horizon = T;
    lay.n_generators = G;
    lay.n_wind = W;
    const auto NG = G * static_cast<std::size_t>(T);
    for (auto* v : {&lay.on, &lay.power, &lay.reserve_up, &lay.reserve_down, &lay.startup, &lay.shutdown})
        v->assign(NG, -1);
    lay.curtailment.assign(W * static_cast<std::size_t>(T), -1);

    // Initial-state forcing: periods still owed to the minimum up/down time.
    std::vector<int> forced_periods(G), forced_value(G);
    for (std::size_t g = 0; g < G; ++g) {
        const Generator& gen = c.generators[g];
        const int owed = gen.initial.on ? gen.min_up - gen.initial.periods : gen.min_down - gen.initial.periods;
        forced_periods[g] = std::clamp(owed, 0, T);
        forced_value[g] = gen.initial.on ? 1 : 0;
    }

    for (int t = 0; t < T; ++t) {
        for (std::size_t g = 0; g < G; ++g) {
            const Generator& gen = c.generators[g];
            const auto k = lay.gi(g, t);
            double vlo = 0.0, vhi = 1.0;
            if (t < forced_periods[g]) vlo = vhi = forced_value[g];
            lay.on[k] = m.add_variable(name("v", gen.id, t), VarKind::binary, vlo, vhi, gen.c);
            lay.power[k] = m.add_variable(name("P", gen.id, t), VarKind::continuous, 0.0, gen.p_max, gen.b, gen.a);
            lay.reserve_up[k] = m.add_variable(name("UR", gen.id, t), VarKind::continuous, 0.0, gen.reserve_up_max,
                                               gen.reserve_up_cost);
            lay.reserve_down[k] = m.add_variable(name("DR", gen.id, t), VarKind::continuous, 0.0,
                                                 gen.reserve_down_max, gen.reserve_down_cost);
            lay.startup[k] = m.add_variable(name("SU", gen.id, t), VarKind::continuous, 0.0, kInfinity, 1.0);
            lay.shutdown[k] = m.add_variable(name("SD", gen.id, t), VarKind::continuous, 0.0, kInfinity, 1.0);
        }
        for (std::size_t j = 0; j < W; ++j) {
            const WindFarm& w = c.wind_farms[j];
            const double hi = opt.curtailment ? w.forecast[static_cast<std::size_t>(t)] : 0.0;
            lay.curtailment[lay.wi(j, t)] = m.add_variable(name("Wcur", w.id, t), VarKind::continuous, 0.0, hi, 0.0,
                                                           c.risk.curtailment_penalty);
        }
    }

    for (int t = 0; t < T; ++t) {
        const auto ti = static_cast<std::size_t>(t);

        // Power balance with the scheduled wind W_f - W_cur substituted.
        std::vector<Term> bal;
        double rhs = 0.0;
        for (std::size_t g = 0; g < G; ++g) bal.push_back({lay.power[lay.gi(g, t)], 1.0});
        for (std::size_t j = 0; j < W; ++j) {
            bal.push_back({lay.curtailment[lay.wi(j, t)], -1.0});
            rhs -= c.wind_farms[j].forecast[ti];
        }
        for (const Load& ld : c.loads) rhs += ld.demand[ti];
        m.add_constraint(name("balance", t), std::move(bal), Sense::equal, rhs);

        for (std::size_t g = 0; g < G; ++g) {
            const Generator& gen = c.generators[g];
            const auto k = lay.gi(g, t);
            const int v = lay.on[k], p = lay.power[k], ur = lay.reserve_up[k], dr = lay.reserve_down[k];
            m.add_constraint(name("cap_up", gen.id, t), {{p, 1.0}, {ur, 1.0}, {v, -gen.p_max}}, Sense::less_equal,
                             0.0);
            m.add_constraint(name("cap_dn", gen.id, t), {{p, 1.0}, {dr, -1.0}, {v, -gen.p_min}},
                             Sense::greater_equal, 0.0);

            // Ramp limits relax by M = p_max unless the unit is on in both intervals.
            const double M = gen.p_max;
            if (t == 0) {
                const double v0 = gen.initial.on ? 1.0 : 0.0;
                const double p0 = gen.initial.power;
                m.add_constraint(name("ramp_up", gen.id, t), {{p, 1.0}, {v, M}}, Sense::less_equal,
                                 gen.ramp_up + (2.0 - v0) * M + p0);
                m.add_constraint(name("ramp_dn", gen.id, t), {{p, -1.0}, {v, M}}, Sense::less_equal,
                                 gen.ramp_down + (2.0 - v0) * M - p0);
                m.add_constraint(name("startup", gen.id, t), {{lay.startup[k], 1.0}, {v, -gen.startup_cost}},
                                 Sense::greater_equal, -gen.startup_cost * v0);
                m.add_constraint(name("shutdown", gen.id, t), {{lay.shutdown[k], 1.0}, {v, gen.shutdown_cost}},
                                 Sense::greater_equal, gen.shutdown_cost * v0);
            } else {
                const auto kp = lay.gi(g, t - 1);
                const int vp = lay.on[kp], pp = lay.power[kp];
                m.add_constraint(name("ramp_up", gen.id, t), {{p, 1.0}, {pp, -1.0}, {v, M}, {vp, M}},
                                 Sense::less_equal, gen.ramp_up + 2.0 * M);
                m.add_constraint(name("ramp_dn", gen.id, t), {{pp, 1.0}, {p, -1.0}, {v, M}, {vp, M}},
                                 Sense::less_equal, gen.ramp_down + 2.0 * M);
                m.add_constraint(name("startup", gen.id, t),
                                 {{lay.startup[k], 1.0}, {v, -gen.startup_cost}, {vp, gen.startup_cost}},
                                 Sense::greater_equal, 0.0);
                m.add_constraint(name("shutdown", gen.id, t),
                                 {{lay.shutdown[k], 1.0}, {v, gen.shutdown_cost}, {vp, -gen.shutdown_cost}},
                                 Sense::greater_equal, 0.0);
            }
        }

        // Reserve chance constraints.
        std::vector<Term> up, dn;
        for (std::size_t g = 0; g < G; ++g) {
            up.push_back({lay.reserve_up[lay.gi(g, t)], 1.0});
            dn.push_back({lay.reserve_down[lay.gi(g, t)], 1.0});
        }
        m.add_constraint(name("reserve_up", t), std::move(up), Sense::greater_equal,
                         c.risk.reserve_up_extra - q.reserve_up[ti]);
        m.add_constraint(name("reserve_dn", t), std::move(dn), Sense::greater_equal,
                         c.risk.reserve_down_extra + q.reserve_down[ti]);

        // Line chance constraints on the error-free flow
        // F = sum PTDF P + sum PTDF (W_f - W_cur) - sum PTDF D.
        if (!opt.line_constraints) continue;
        for (std::size_t l = 0; l < L; ++l) {
            const Branch& br = c.network.branches[l];
            const auto li = static_cast<Eigen::Index>(l);
            auto shift = [&](int bus) { return ptdf(li, static_cast<Eigen::Index>(c.network.bus_index(bus))); };
            std::vector<Term> terms;
            double constant = 0.0;
            for (std::size_t g = 0; g < G; ++g) terms.push_back({lay.power[lay.gi(g, t)], shift(c.generators[g].bus)});
            for (std::size_t j = 0; j < W; ++j) {
                const double s = shift(c.wind_farms[j].bus);
                terms.push_back({lay.curtailment[lay.wi(j, t)], -s});
                constant += s * c.wind_farms[j].forecast[ti];
            }
            for (const Load& ld : c.loads) constant -= shift(ld.bus) * ld.demand[ti];
            m.add_constraint(name("line_fwd", br.id, t), terms, Sense::less_equal,
                             br.capacity - q.line_forward(li, t) - constant);
            m.add_constraint(name("line_rev", br.id, t), std::move(terms), Sense::greater_equal,
                             -br.capacity - q.line_reverse(li, t) - constant);
        }
    }

    // Minimum up/down times. For a unit with min_up = 1 (min_down = 1) the
    // rows are identically satisfied and are not emitted.
    for (std::size_t g = 0; g < G; ++g) {
        const Generator& gen = c.generators[g];
        const double v0 = gen.initial.on ? 1.0 : 0.0;
        auto on = [&](int t) { return lay.on[lay.gi(g, t)]; };
        for (int t = 0; t < T; ++t) {
            if (gen.min_up > 1) {
                const int len = std::min(gen.min_up, T - t);
                std::vector<Term> terms;
                for (int k = t; k < t + len; ++k) terms.push_back({on(k), 1.0});
                terms.push_back({on(t), -static_cast<double>(len)});
                double rhs = 0.0;
                if (t > 0)
                    terms.push_back({on(t - 1), static_cast<double>(len)});
                else
                    rhs = -len * v0;
                m.add_constraint(name("min_up", gen.id, t), std::move(terms), Sense::greater_equal, rhs);
            }
            if (gen.min_down > 1) {
                const int len = std::min(gen.min_down, T - t);
                std::vector<Term> terms;
                for (int k = t; k < t + len; ++k) terms.push_back({on(k), -1.0});
                terms.push_back({on(t), static_cast<double>(len)});
                double rhs = -static_cast<double>(len);
                if (t > 0)
                    terms.push_back({on(t - 1), -static_cast<double>(len)});
                else
                    rhs += len * v0;
                m.add_constraint(name("min_dn", gen.id, t), std::move(terms), Sense::greater_equal, rhs);
            }
        }
    }
    return out;
}

UcSchedule extract_schedule(const Case& c, const UcModel& um, std::span<const double> x, double tolerance) {
    const MiqpModel& m = um.model;
    const UcLayout& lay = um.layout;
    if (x.size() != m.num_variables())
        throw InputError(fmt::format("assignment has {} entries, model has {} variables", x.size(), m.num_variables()));
    for (int b : m.binary_indices()) {
        const double v = x[static_cast<std::size_t>(b)];
        if (std::abs(v - std::round(v)) > tolerance)
            throw InputError(fmt::format("assignment is not integral: {} = {}", m.variable(b).name, v));
    }
    const WorstViolation worst = worst_violation(m, x, tolerance);
    if (worst.where != WorstViolation::Where::none)
        throw InputError(fmt::format("assignment infeasible: {} {} violated by {:.6g}",
                                     worst.where == WorstViolation::Where::bound ? "bound of" : "row", worst.name,
                                     worst.residual));

    const int T = lay.horizon;
    const auto at = [&](int idx) { return x[static_cast<std::size_t>(idx)]; };
    UcSchedule s;
    CostBreakdown& cost = s.cost;
    for (std::size_t g = 0; g < lay.n_generators; ++g) {
        const Generator& gen = c.generators[g];
        GeneratorSchedule gs{gen.id, {}, {}, {}, {}};
        for (int t = 0; t < T; ++t) {
            const auto k = lay.gi(g, t);
            gs.on.push_back(static_cast<int>(std::lround(at(lay.on[k]))));
            gs.power.push_back(at(lay.power[k]));
            gs.reserve_up.push_back(at(lay.reserve_up[k]));
            gs.reserve_down.push_back(at(lay.reserve_down[k]));
            cost.commitment += at(lay.startup[k]) + at(lay.shutdown[k]);
            cost.fuel += gen.a * gs.power.back() * gs.power.back() + gen.b * gs.power.back() + gen.c * gs.on.back();
            cost.reserve += gen.reserve_up_cost * gs.reserve_up.back() + gen.reserve_down_cost * gs.reserve_down.back();
        }
        s.generators.push_back(std::move(gs));
    }
    for (std::size_t j = 0; j < lay.n_wind; ++j) {
        const WindFarm& w = c.wind_farms[j];
        WindSchedule ws{w.id, {}, {}};
        for (int t = 0; t < T; ++t) {
            const double cur = at(lay.curtailment[lay.wi(j, t)]);
            ws.curtailed.push_back(cur);
            ws.scheduled.push_back(w.forecast[static_cast<std::size_t>(t)] - cur);
            cost.curtailment += c.risk.curtailment_penalty * cur * cur;
        }
        s.wind.push_back(std::move(ws));
    }
    cost.total = cost.commitment + cost.fuel + cost.reserve + cost.curtailment;

    const double objective = m.evaluate_objective(x);
    if (std::abs(cost.total - objective) > 1e-4 * std::max(1.0, std::abs(objective)))
        throw InternalError(fmt::format("schedule cost {} disagrees with the model objective {}", cost.total,
                                        objective));
    return s;
}

CostBreakdown schedule_cost(const Case& c, const UcSchedule& s) {
    CostBreakdown cost;
    for (std::size_t g = 0; g < c.generators.size(); ++g) {
        const Generator& gen = c.generators[g];
        const GeneratorSchedule& gs = s.generators[g];
        int prev = gen.initial.on ? 1 : 0;
        for (std::size_t t = 0; t < gs.on.size(); ++t) {
            if (gs.on[t] > prev) cost.commitment += gen.startup_cost;
            if (gs.on[t] < prev) cost.commitment += gen.shutdown_cost;
            prev = gs.on[t];
            cost.fuel += gen.a * gs.power[t] * gs.power[t] + gen.b * gs.power[t] + gen.c * gs.on[t];
            cost.reserve += gen.reserve_up_cost * gs.reserve_up[t] + gen.reserve_down_cost * gs.reserve_down[t];
        }
    }
    for (const WindSchedule& ws : s.wind)
        for (double cur : ws.curtailed) cost.curtailment += c.risk.curtailment_penalty * cur * cur;
    cost.total = cost.commitment + cost.fuel + cost.reserve + cost.curtailment;
    return cost;
}

Eigen::MatrixXd nominal_flows(const Case& c, const PtdfMatrix& ptdf, const UcSchedule& s) {
    const int T = c.horizon;
    Eigen::MatrixXd injection = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(c.network.bus_ids.size()), T);
    for (std::size_t g = 0; g < c.generators.size(); ++g) {
        const auto b = static_cast<Eigen::Index>(c.network.bus_index(c.generators[g].bus));
        for (int t = 0; t < T; ++t) injection(b, t) += s.generators[g].power[static_cast<std::size_t>(t)];
    }
    for (std::size_t j = 0; j < c.wind_farms.size(); ++j) {
        const auto b = static_cast<Eigen::Index>(c.network.bus_index(c.wind_farms[j].bus));
        for (int t = 0; t < T; ++t) injection(b, t) += s.wind[j].scheduled[static_cast<std::size_t>(t)];
    }
    for (const Load& ld : c.loads) {
        const auto b = static_cast<Eigen::Index>(c.network.bus_index(ld.bus));
        for (int t = 0; t < T; ++t) injection(b, t) -= ld.demand[static_cast<std::size_t>(t)];
    }
    return ptdf * injection;
}

}  // namespace ccuc
