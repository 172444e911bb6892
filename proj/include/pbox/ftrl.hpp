#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "pbox/core_model.hpp"
#include "pbox/ledger.hpp"
#include "pbox/relaxation.hpp"
#include "pbox/rng.hpp"
#include "pbox/schedule.hpp"

namespace pbox {

/// sqrt(ln n / T).
double default_eta(int n, int T);

/// sum x ln x / eta with 0 ln 0 = 0.
double entropy_regularizer(const Eigen::MatrixXd& x, double eta);
inline double entropy_regularizer(const FractionalSchedule& x, double eta) {
    return entropy_regularizer(x.matrix(), eta);
}

/// Alternating row/column scaling of a positive matrix until every marginal
/// is within tol of 1. Throws std::runtime_error (with the last residual)
/// after max_iter sweeps.
FractionalSchedule sinkhorn_project(const Eigen::MatrixXd& m, double tol = 1e-12,
                                    int max_iter = 100000);

struct FtrlSettings {
    int max_iter = 2000;
    int min_iter = 5;
    double tol = 1e-8;           // relative objective change that ends the loop
    int patience = 40;           // stop after this many iterations without a relative tol gain
    double step = 0.5;           // inner step lambda_j = step / sqrt(j)
    double floor = 1e-12;        // entry floor before projection
    double sinkhorn_tol = 1e-12;
    CuttingPlaneSettings cutting_planes;
};

/// Distinct scenarios with multiplicities; the FTRL objective weights each
/// relaxation term by its count.
struct History {
    int n = 0;
    std::vector<Scenario> scenarios;
    std::vector<double> weights;

    void add(const Scenario& s, double weight = 1.0);
    bool empty() const { return scenarios.empty(); }
    double total_weight() const;
};

struct FtrlResult {
    FractionalSchedule x;
    double objective = 0.0;
    int iterations = 0;
};

/// sum_s w_s g_s(x) + U(x); +inf if some term is Infinite.
double ftrl_objective(const History& h, const ConstraintFamily& family, const FractionalSchedule& x,
                      double eta, const CuttingPlaneSettings& cp = {});

/// Approximate argmin of the FTRL objective over the Birkhoff polytope by
/// damped entropic mirror descent, warm-started from `warm` when given. The
/// uniform matrix is always a candidate, so the result never scores worse.
FtrlResult ftrl_minimize(const History& history, const ConstraintFamily& family, double eta,
                         const FtrlSettings& settings = {},
                         const FractionalSchedule* warm = nullptr);

FtrlResult ftrl_minimize(int n, std::span<const Scenario> history, const ConstraintFamily& family,
                         double eta, const FtrlSettings& settings = {});

/// Turns a fractional schedule into a realized integral cost for one round.
using Rounder = std::function<Cost(const FractionalSchedule&, const Scenario&, CounterRng&)>;

struct FullInfoSettings {
    std::optional<double> eta;  // default_eta(n, T) when unset
    FtrlSettings ftrl;
    Rounder rounder;            // integral_cost column stays NaN when empty
    /// Order whose stopping cost fills benchmark_cost.
    std::optional<std::vector<int>> benchmark_order;
    /// Order whose relaxation value fills fractional_benchmark; falls back
    /// to benchmark_order.
    std::optional<std::vector<int>> fractional_benchmark_order;
    std::uint64_t seed = 0;
    /// Called after each round with the iterate that was played.
    std::function<void(int, const FractionalSchedule&)> observer;
};

/// The full-information loop: play the FTRL iterate on the history so far,
/// round it, then reveal the whole scenario.
RegretLedger run_full_information(const ScenarioSequence& seq, const ConstraintFamily& family,
                                  const FullInfoSettings& settings = {});

}  // namespace pbox
