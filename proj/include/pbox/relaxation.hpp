#pragma once

#include <Eigen/Dense>
#include <vector>

#include "pbox/core_model.hpp"
#include "pbox/schedule.hpp"

namespace pbox {

/// Optimum of a scenario-aware relaxation at fixed x.
struct RelaxationSolution {
    Cost value = Cost::infinite();
    /// z(i, t): mass with which box i is selected at slot t (0-based).
    Eigen::MatrixXd z;
    /// y[t]: fraction of the requirement met by slot t (k / matroid only).
    std::vector<double> y;
    /// Sum of c_i z_it; the selection part of the value.
    double value_cost = 0.0;
    /// value - value_cost; the opening-time part.
    double opening_cost = 0.0;
    /// Critical key of the greedy fill (select-1 only).
    double theta = 0.0;
    /// Subgradient with respect to x; empty when value is Infinite.
    Eigen::MatrixXd subgradient;
    int cuts_added = 0;
};

struct CuttingPlaneSettings {
    double tol = 1e-7;
    int max_cuts = 500;
    bool exact = false;  // rational simplex instead of certified double
};

RelaxationSolution eval_spa(const FractionalSchedule& x, const Scenario& s);
Eigen::MatrixXd subgrad_spa(const FractionalSchedule& x, const Scenario& s);

RelaxationSolution eval_spa_k(const FractionalSchedule& x, const Scenario& s, int k,
                              const CuttingPlaneSettings& settings = {});
Eigen::MatrixXd subgrad_spa_k(const FractionalSchedule& x, const Scenario& s, int k,
                              const CuttingPlaneSettings& settings = {});

RelaxationSolution eval_spa_matroid(const FractionalSchedule& x, const Scenario& s,
                                    const MatroidOracle& m,
                                    const CuttingPlaneSettings& settings = {});
Eigen::MatrixXd subgrad_spa_matroid(const FractionalSchedule& x, const Scenario& s,
                                    const MatroidOracle& m,
                                    const CuttingPlaneSettings& settings = {});

/// Dispatch on the family. SelectK(1) is routed to the closed-form select-1 path.
RelaxationSolution evaluate(const FractionalSchedule& x, const Scenario& s,
                            const ConstraintFamily& family,
                            const CuttingPlaneSettings& settings = {});

}  // namespace pbox
