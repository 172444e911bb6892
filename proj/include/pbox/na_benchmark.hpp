#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pbox/core_model.hpp"
#include "pbox/ledger.hpp"
#include "pbox/lp.hpp"
#include "pbox/rng.hpp"

namespace pbox {

/// Sparse linear inequality  sum coeffs . v <= rhs.
struct LinearCut {
    std::vector<std::pair<int, double>> coeffs;
    double rhs = 0.0;
    double violation = 0.0;  // a.v - rhs at the point it was separated from
    std::string kind;
};

/// Non-adaptive LP over opening variables x (one per box) and assignment
/// variables z^s for the finite boxes of each stored scenario. Scenarios are
/// kept deduplicated and sorted, so the layout depends only on the set.
///
/// The per-scenario requirement sum z^s = k is stored as sum z^s >= k; with
/// nonnegative costs the two have the same optimum and the inequality keeps
/// the feasible region full-dimensional for the ellipsoid.
class NaProgram {
public:
    NaProgram(int n, ConstraintFamily family);

    /// Returns false (and changes nothing) when s is already present.
    bool add_scenario(const Scenario& s);

    int n() const { return n_; }
    int dimension() const { return dim_; }
    const ConstraintFamily& family() const { return family_; }
    const std::vector<Scenario>& scenarios() const { return scenarios_; }
    bool contains(const Scenario& s) const;
    /// Some stored scenario has no feasible selection among its finite boxes.
    bool trivially_infeasible() const { return trivially_infeasible_; }

    /// Index of z^s_i for stored scenario j, or -1 when c_i^s is Infinite.
    int z_index(std::size_t j, BoxId i) const { return z_index_[j][static_cast<std::size_t>(i)]; }

    /// sum x + (1/|S|) sum_s sum_i c_i^s z_i^s.
    double objective(const Eigen::VectorXd& v) const;

    /// Most violated constraint (normalized by the cut's Euclidean norm) among
    /// those violated by more than tol, including objective <= budget.
    std::optional<LinearCut> separate(const Eigen::VectorXd& v, double budget, double tol) const;
    /// Largest absolute violation of the program constraints (objective excluded).
    double max_violation(const Eigen::VectorXd& v) const;

    /// Explicit LP with the same variable layout; matroid rank families are
    /// written out over all subsets (n <= 12).
    LinearProgram to_linear_program() const;
    std::string to_lp_text() const { return to_linear_program().to_lp_text(); }

private:
    void rebuild_layout();

    int n_;
    ConstraintFamily family_;
    std::vector<Scenario> scenarios_;
    std::vector<std::vector<int>> z_index_;
    int dim_;
    bool trivially_infeasible_ = false;
};

struct EllipsoidSettings {
    double eps = 1e-7;        // volume stop: ellipsoid smaller than an eps-ball
    double feas_tol = 1e-7;   // accepted constraint violation
    std::optional<double> radius;  // default max(2n, sqrt(dim) + 1)
    long max_iter = 0;        // default ceil(20 dim^2 ln(1/eps))
    int restarts = 3;         // on breakdown, retry with a 4x radius
};

struct EllipsoidState {
    Eigen::VectorXd center;
    Eigen::MatrixXd shape;
    long iterations = 0;
    double budget = 0.0;

    /// Symmetric and Cholesky-factorizable.
    bool is_positive_definite() const;
};

struct EllipsoidResult {
    bool feasible = false;
    Eigen::VectorXd point;  // set when feasible
    EllipsoidState state;
    double radius = 0.0;
};

/// Central-cut ellipsoid on {program constraints, objective <= budget}.
/// Throws std::runtime_error when the shape matrix breaks down on every restart.
EllipsoidResult ellipsoid_feasible(const NaProgram& program, double budget,
                                   const EllipsoidSettings& settings = {});

struct BudgetSearch {
    EllipsoidResult result;
    double budget = 0.0;
    int attempts = 0;
};

/// Budget doubling from b0 until the ellipsoid reports a feasible point.
BudgetSearch solve_with_doubling(const NaProgram& program, const EllipsoidSettings& settings = {},
                                 double b0 = 1.0, int max_doublings = 60);

/// Rounding constants. Defaults are beta = alpha = 3.
struct NaConstants {
    double beta = 3.0;
    double alpha = 3.0;
    static NaConstants conservative() { return {1.0 / 100.0, 1.0 / 4950.0}; }
};

/// Cheapest fractional assignment z <= x meeting the family requirement on
/// the finite boxes of s; nullopt when x cannot support one. Select-k and
/// uniform/partition matroids only.
std::optional<std::vector<double>> fractional_assignment(std::span<const double> x, const Scenario& s,
                                                         const ConstraintFamily& family,
                                                         double tol = 1e-9);

/// Draws box i with probability x_i / sum x, opens it (once), and selects and
/// stops with probability z_i / x_i. Gives up after max_draws (default 50 n)
/// with an empty selection.
InspectionTranscript round_na_1(std::span<const double> x, std::span<const double> z,
                                const Scenario& s, CounterRng& rng, int max_draws = 0);

/// Opens boxes with x_i >= 1/beta and selects the cheapest with z_i >= 1/beta;
/// then draws from X_low = {x_i < 1/beta} proportionally to x and selects
/// boxes whose cost is at most alpha * OPT'_c / k', where OPT'_c and k' are
/// the value cost and z-mass of X_low.
InspectionTranscript round_na_k(std::span<const double> x, std::span<const double> z,
                                const Scenario& s, int k, const NaConstants& c, CounterRng& rng,
                                int max_draws = 0);

/// Matroid version: thresholds use the residual value cost and z-mass of the
/// unselected part of X_low, and selections must stay independent.
InspectionTranscript round_na_matroid(std::span<const double> x, std::span<const double> z,
                                      const Scenario& s, const MatroidOracle& m,
                                      const NaConstants& c, CounterRng& rng, int max_draws = 0);

/// Dispatch on the family.
InspectionTranscript round_na(std::span<const double> x, std::span<const double> z,
                              const Scenario& s, const ConstraintFamily& family,
                              const NaConstants& c, CounterRng& rng);

struct NaRunSettings {
    std::optional<double> explore_probability;  // 1/sqrt(T) when unset
    NaConstants constants;
    EllipsoidSettings ellipsoid;
    /// Fixed set whose per-round cost fills the benchmark column.
    std::optional<std::vector<BoxId>> benchmark_set;
    std::uint64_t seed = 0;
};

struct NaRunInfo {
    int solves = 0;            // ellipsoid budget searches
    int rounding_failures = 0; // exploit rounds whose rounding gave up
    std::vector<double> budgets;
    std::optional<Eigen::VectorXd> final_point;
};

/// Explore with probability p: open all boxes, add the scenario, and re-solve
/// with budget doubling when the set grew. Otherwise round the current point;
/// a round where x cannot support the realized scenario is a mistake and
/// costs n plus the best selection.
RegretLedger run_na(const ScenarioSequence& seq, const ConstraintFamily& family,
                    const NaRunSettings& settings = {}, NaRunInfo* info = nullptr);

}  // namespace pbox
