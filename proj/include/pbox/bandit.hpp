#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "pbox/core_model.hpp"
#include "pbox/ftrl.hpp"
#include "pbox/ledger.hpp"
#include "pbox/rng.hpp"

namespace pbox {

/// Interval length max(1, round((n / (2 L ln n + n))^(2/3) T^(1/3))).
int tune_interval_length(int n, int T, double L);
/// Variant with (n / (2 L + sqrt(ln n)))^(2/3) in front of T^(1/3).
int tune_interval_length_alt(int n, int T, double L);

struct BanditSchedule {
    int T = 0;
    int interval_length = 1;
    double L = 0.0;
    /// One 1-based round per interval, drawn uniformly inside it.
    std::vector<int> explore_rounds;

    int interval_count() const { return static_cast<int>(explore_rounds.size()); }
    bool is_explore(int round) const;
};

/// Splits 1..T into consecutive blocks of `interval_length` (the last may be
/// shorter) and draws the explore round of each block uniformly.
BanditSchedule make_bandit_schedule(int T, int interval_length, double L, CounterRng& rng);

struct BanditSettings {
    std::optional<int> interval_length;  // tuned when unset
    bool alt_interval_formula = false;    // use the (n / (2L + sqrt(ln n)))^(2/3) constant
    std::optional<double> L;              // defaults to n
    std::optional<double> eta;            // sqrt(ln n / #intervals) when unset
    FtrlSettings ftrl;
    Rounder rounder;  // integral cost of exploit rounds; NaN column when empty
    std::optional<std::vector<int>> benchmark_order;
    std::optional<std::vector<int>> fractional_benchmark_order;  // falls back to benchmark_order
    std::uint64_t seed = 0;
    /// Called with each exploit round's iterate.
    std::function<void(int, const FractionalSchedule&)> observer;
};

/// Explore rounds open every box (cost n + best selection, recorded in both
/// cost columns) and add the scenario to the FTRL history. Other rounds play
/// the FTRL iterate on the explored scenarios only.
RegretLedger run_bandit(const ScenarioSequence& seq, const ConstraintFamily& family,
                        const BanditSettings& settings = {});

/// Same run, also returning the schedule that was drawn.
RegretLedger run_bandit(const ScenarioSequence& seq, const ConstraintFamily& family,
                        const BanditSettings& settings, BanditSchedule& schedule_out);

}  // namespace pbox
