#pragma once

#include <vector>

#include "pbox/core_model.hpp"
#include "pbox/relaxation.hpp"
#include "pbox/rng.hpp"
#include "pbox/schedule.hpp"

namespace pbox {

inline constexpr double kAlphaSelect1 = 5.8284271247461900976;  // 3 + 2 sqrt 2
inline constexpr double kAlphaSelectK = 8.0;
inline constexpr double kAlphaMatroid = 64.0;

/// Sampled opening order. `sequence` lists boxes by first opening; `visits`
/// keeps every trial that fired (a box may be visited again in later steps
/// at no cost), which the k and matroid stopping rules consume.
struct OpeningOrder {
    struct Visit {
        BoxId box;
        int step;   // slot (select-1, matroid) or phase (select-k), 1-based
        double q;   // probability with which this visit fired
    };
    std::vector<BoxId> sequence;
    std::vector<int> first_step;  // per sequence entry; 0 for the appended tail
    std::vector<Visit> visits;
    int steps_sampled = 0;

    bool contains(BoxId b) const;
    /// True when `sequence` is a duplicate-free permutation of 0..n-1.
    bool is_total(int n) const;
};

/// Two independent trials per slot t = 1..n for each unopened box, with
/// probability min(1, amp * prefix_i(t) / t) and amp = alpha / (alpha - 1).
/// Boxes never triggered are appended by decreasing row mass (ties by id).
OpeningOrder sample_order_1(const FractionalSchedule& x, CounterRng& rng,
                            double alpha = kAlphaSelect1);

/// Opens boxes in order and selects the first with cost <= threshold.
InspectionTranscript stop_select1_scenario_aware(const OpeningOrder& order, const Scenario& s,
                                                 double threshold);

/// Phase l visits each box with probability min(alpha * prefix_i(2^l), 1).
/// Phases are sampled until every box has been opened (or max_phases).
OpeningOrder sample_order_k(const FractionalSchedule& x, CounterRng& rng,
                            double alpha = kAlphaSelectK, int max_phases = 200);

/// Scenario-aware stopping for k boxes. Once 2^l >= t* each visit selects its
/// box with probability min(alpha * Z_i(2^l) / q, 1). Phases past the sampled
/// ones (all boxes visited with q = 1) are generated on demand.
InspectionTranscript stop_select_k(const OpeningOrder& order, const FractionalSchedule& x,
                                   const Scenario& s, const RelaxationSolution& sol, int k,
                                   CounterRng& rng, double alpha = kAlphaSelectK,
                                   int max_phases = 200);

/// Log factor used by the matroid rounding: max(1, ln k).
double matroid_log_factor(int k);

/// Slot t visits each box with probability min(alpha * L * prefix_i(t) / t, 1),
/// L = matroid_log_factor(k); prefix_i(t) = 1 for t >= n.
OpeningOrder sample_order_matroid(const FractionalSchedule& x, CounterRng& rng, int k,
                                  double alpha = kAlphaMatroid, int max_slots = 0);

/// Scenario-aware stopping for a matroid basis: for t > t* each visit selects
/// its box with probability min(alpha * L * Z_i(t) / (t q), 1) when the
/// selection stays independent. Extra slots are sampled from rng on demand.
InspectionTranscript stop_matroid(const OpeningOrder& order, const FractionalSchedule& x,
                                  const Scenario& s, const RelaxationSolution& sol,
                                  const MatroidOracle& m, CounterRng& rng,
                                  double alpha = kAlphaMatroid, int max_slots = 0);

/// Index t* = max{t : y_t <= 1/2} (1-based; 0 when none).
int critical_slot(const std::vector<double>& y);

enum class StoppingRule { ScenarioAware, SkiRentalDeterministic, SkiRentalRandomized };

/// Select-1 online stopping on a fixed order. The deterministic rule stops as
/// soon as the cheapest value seen is at most the number of boxes opened; the
/// randomized rule draws u with density e^u / (e - 1) on [0, 1] and stops once
/// u * (cheapest value) <= opened.
InspectionTranscript ski_rental_stop(const OpeningOrder& order, const Scenario& s,
                                     StoppingRule rule, CounterRng& rng);

struct RoundingOutcome {
    InspectionTranscript transcript;
    Cost cost = Cost::infinite();
    bool failed = false;  // k or a basis was not reached
};

/// Sample an order for x and stop it on s. ScenarioAware works for every
/// family; the ski-rental rules apply to select-1 only.
RoundingOutcome round_schedule(const FractionalSchedule& x, const Scenario& s,
                               const ConstraintFamily& family, CounterRng& rng,
                               StoppingRule rule = StoppingRule::ScenarioAware,
                               const CuttingPlaneSettings& cp = {});

}  // namespace pbox
