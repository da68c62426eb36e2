#pragma once

#include "ccuc/gmm.hpp"
#include "ccuc/grid.hpp"
#include "ccuc/model.hpp"

#include <Eigen/Dense>

#include <span>
#include <string>
#include <vector>

namespace ccuc {

/// Forecast-error quantiles that turn the chance constraints into linear
/// rows. Reserve quantiles are of the total error 1^T e; line quantiles are
/// of the error-induced flow s_l^T e with s_l the farm-bus PTDF row.
struct QuantileTable {
    int horizon = 0;
    std::vector<double> reserve_up;    // q(alpha_up), per interval
    std::vector<double> reserve_down;  // q(1 - alpha_down), per interval
    Eigen::MatrixXd line_forward;      // q(1 - alpha_forward), branches x T
    Eigen::MatrixXd line_reverse;      // q(alpha_reverse), branches x T
    double elapsed_seconds = 0.0;

    std::size_t count() const {
        return reserve_up.size() + reserve_down.size() +
               static_cast<std::size_t>(line_forward.size() + line_reverse.size());
    }
};

/// Wind-farm projection vector of branch `l`.
Eigen::VectorXd line_projection(const Case& c, const PtdfMatrix& ptdf, std::size_t l);

/// One GMM per interval, dimension equal to the number of wind farms.
QuantileTable build_quantile_table(const Case& c, std::span<const Gmm> gmms, const PtdfMatrix& ptdf,
                                   const QuantileConfig& cfg = {});

struct FormulationOptions {
    bool curtailment = true;       // false fixes every curtailment variable at 0
    bool line_constraints = true;  // false omits the line chance constraints
};

/// Index maps from (unit, interval) to model variables; all -1 when absent.
struct UcLayout {
    int horizon = 0;
    std::size_t n_generators = 0;
    std::size_t n_wind = 0;
    std::vector<int> on, power, reserve_up, reserve_down, startup, shutdown;  // [t * n_generators + g]
    std::vector<int> curtailment;                                              // [t * n_wind + j]

    std::size_t gi(std::size_t g, int t) const { return static_cast<std::size_t>(t) * n_generators + g; }
    std::size_t wi(std::size_t j, int t) const { return static_cast<std::size_t>(t) * n_wind + j; }
};

struct UcModel {
    MiqpModel model;
    UcLayout layout;
};

/// Builds the deterministic-equivalent MIQP. Throws InputError on malformed
/// inputs (table shape, missing quantiles).
UcModel build_miqp(const Case& c, const PtdfMatrix& ptdf, const QuantileTable& q, const FormulationOptions& opt = {});

struct CostBreakdown {
    double commitment = 0.0;  // start-up plus shut-down
    double fuel = 0.0;
    double reserve = 0.0;
    double curtailment = 0.0;
    double total = 0.0;
};

struct GeneratorSchedule {
    std::string id;
    std::vector<int> on;
    std::vector<double> power, reserve_up, reserve_down;
};

struct WindSchedule {
    std::string id;
    std::vector<double> scheduled, curtailed;
};

struct UcSchedule {
    std::vector<GeneratorSchedule> generators;
    std::vector<WindSchedule> wind;
    CostBreakdown cost;
};

/// Decodes a model assignment. Rejects assignments violating a row or bound
/// by more than `tolerance` MW, naming the worst one, and cross-checks the
/// recomputed cost against the model objective.
UcSchedule extract_schedule(const Case& c, const UcModel& m, std::span<const double> x, double tolerance = 1e-6);

/// Recomputes the cost of a schedule from the case data alone.
CostBreakdown schedule_cost(const Case& c, const UcSchedule& s);

/// Error-free flow on every branch (rows) in every interval (columns).
Eigen::MatrixXd nominal_flows(const Case& c, const PtdfMatrix& ptdf, const UcSchedule& s);

}  // namespace ccuc
