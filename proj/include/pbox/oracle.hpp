#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "pbox/core_model.hpp"
#include "pbox/lp.hpp"
#include "pbox/schedule.hpp"

namespace pbox::oracle {

/// Distinct scenarios with their multiplicities, in first-seen order.
struct WeightedScenarios {
    std::vector<Scenario> scenarios;
    std::vector<double> weights;
    double total_weight() const;
};
WeightedScenarios dedupe(std::span<const Scenario> seq);

/// Relaxation LPs with every cut written out explicitly. Their optimum plus
/// `constant` equals the relaxation value.
struct ExplicitLp {
    LinearProgram lp;
    double constant = 0.0;
    bool trivially_infeasible = false;
};
ExplicitLp spa_lp(const FractionalSchedule& x, const Scenario& s);
ExplicitLp spa_k_lp(const FractionalSchedule& x, const Scenario& s, int k);
ExplicitLp spa_matroid_lp(const FractionalSchedule& x, const Scenario& s, const MatroidOracle& m);

/// Exact optimum (rational simplex) of one of the LPs above; Infinite when infeasible.
Cost exact_relaxation_value(const ExplicitLp& e);
/// Same with the double-precision solver.
Cost float_relaxation_value(const ExplicitLp& e);

/// Optimal stopping cost on a fixed opening order: min over prefixes of
/// (prefix length + cheapest feasible selection inside the prefix).
Cost fixed_order_cost(std::span<const int> order, const Scenario& s, const ConstraintFamily& family);

struct PermutationBenchmark {
    std::vector<int> order;
    Cost average = Cost::infinite();
};
/// Lexicographically smallest order minimizing the average stopping cost. n <= 8.
PermutationBenchmark best_fixed_permutation(std::span<const Scenario> seq,
                                            const ConstraintFamily& family);

/// Order minimizing the average relaxation value at its permutation matrix.
/// This is the surrogate benchmark for fractional regret. n <= 8.
PermutationBenchmark best_permutation_relaxation(std::span<const Scenario> seq,
                                                 const ConstraintFamily& family);

struct SetBenchmark {
    std::vector<int> set;
    Cost average = Cost::infinite();
};
/// Cheapest fixed set to open every round. n <= 16.
SetBenchmark best_nonadaptive_set(std::span<const Scenario> seq, const ConstraintFamily& family);

/// LP relaxation of the set benchmark, averaged over the sequence with
/// multiplicity. Matroid families enumerate all subsets (n <= 12).
ExplicitLp lp_na(std::span<const Scenario> seq, const ConstraintFamily& family);

/// min over doubly stochastic x of the average select-1 relaxation value.
Cost birkhoff_optimum_select1(std::span<const Scenario> seq);

/// Memoizes benchmark results by instance hash.
class BenchmarkCache {
public:
    PermutationBenchmark permutation(std::span<const Scenario> seq, const ConstraintFamily& family);
    SetBenchmark nonadaptive(std::span<const Scenario> seq, const ConstraintFamily& family);
    std::size_t size() const;

private:
    static std::uint64_t key(std::span<const Scenario> seq, const ConstraintFamily& family, int tag);
    mutable std::mutex mu_;
    std::map<std::uint64_t, PermutationBenchmark> perm_;
    std::map<std::uint64_t, SetBenchmark> set_;
};

}  // namespace pbox::oracle
