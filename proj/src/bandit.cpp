#include "pbox/bandit.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "pbox/oracle.hpp"

namespace pbox {

namespace {

int round_length(double v, int T) {
    const auto r = static_cast<long long>(std::llround(v));
    return static_cast<int>(std::clamp<long long>(r, 1, std::max(T, 1)));
}

void check_args(int n, int T, double L) {
    if (n < 2) throw std::invalid_argument("interval tuning needs n >= 2");
    if (T < 1) throw std::invalid_argument("interval tuning needs T >= 1");
    if (!(L > 0.0)) throw std::invalid_argument("interval tuning needs L > 0");
}

// Stream id for the schedule draw; rounding streams use the round index.
constexpr std::uint64_t kScheduleStream = 0xB4D17ULL << 32;

}  // namespace

int tune_interval_length(int n, int T, double L) {
    check_args(n, T, L);
    const double ln = std::log(static_cast<double>(n));
    return round_length(std::pow(n / (2.0 * L * ln + n), 2.0 / 3.0) * std::cbrt(static_cast<double>(T)), T);
}

int tune_interval_length_alt(int n, int T, double L) {
    check_args(n, T, L);
    const double ln = std::log(static_cast<double>(n));
    return round_length(std::pow(n / (2.0 * L + std::sqrt(ln)), 2.0 / 3.0) * std::cbrt(static_cast<double>(T)), T);
}

bool BanditSchedule::is_explore(int round) const {
    return std::binary_search(explore_rounds.begin(), explore_rounds.end(), round);
}

BanditSchedule make_bandit_schedule(int T, int interval_length, double L, CounterRng& rng) {
    if (T < 1 || interval_length < 1 || interval_length > T)
        throw std::invalid_argument("bandit schedule needs 1 <= interval_length <= T");
    BanditSchedule s;
    s.T = T;
    s.interval_length = interval_length;
    s.L = L;
    for (int start = 1; start <= T; start += interval_length) {
        const int end = std::min(T, start + interval_length - 1);
        s.explore_rounds.push_back(static_cast<int>(rng.uniform_int(start, end)));
    }
    return s;
}

RegretLedger run_bandit(const ScenarioSequence& seq, const ConstraintFamily& family,
                        const BanditSettings& settings) {
    BanditSchedule unused;
    return run_bandit(seq, family, settings, unused);
}

RegretLedger run_bandit(const ScenarioSequence& seq, const ConstraintFamily& family,
                        const BanditSettings& settings, BanditSchedule& schedule_out) {
    seq.validate();
    const int n = seq.n, T = seq.horizon();
    if (T < 1) throw std::invalid_argument("bandit run needs T >= 1");
    const double L = settings.L ? *settings.L : static_cast<double>(n);
    int len = 1;
    if (settings.interval_length) len = std::clamp(*settings.interval_length, 1, T);
    else if (n >= 2) len = settings.alt_interval_formula ? tune_interval_length_alt(n, T, L)
                                                      : tune_interval_length(n, T, L);

    CounterRng sched_rng(settings.seed, kScheduleStream);
    schedule_out = make_bandit_schedule(T, len, L, sched_rng);
    const auto& sched = schedule_out;
    const double eta = settings.eta ? *settings.eta
                                    : (n >= 2 ? default_eta(n, sched.interval_count()) : 1.0);

    std::optional<FractionalSchedule> bench_x;
    if (settings.fractional_benchmark_order)
        bench_x = FractionalSchedule::from_order(*settings.fractional_benchmark_order);
    else if (settings.benchmark_order)
        bench_x = FractionalSchedule::from_order(*settings.benchmark_order);

    History h;
    h.n = n;
    std::optional<FtrlResult> current;
    bool stale = true;
    std::vector<BoxId> all(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) all[i] = i;

    RegretLedger ledger;
    std::size_t next_explore = 0;
    for (int t = 1; t <= T; ++t) {
        const auto& s = seq.scenarios[static_cast<std::size_t>(t - 1)];
        LedgerRow row;
        row.round = t;
        const bool explore = next_explore < sched.explore_rounds.size() && sched.explore_rounds[next_explore] == t;
        if (explore) {
            ++next_explore;
            row.explore = true;
            const Cost c = Cost(static_cast<double>(n)) + best_selection(family, s, all).cost;
            row.fractional_loss = c.as_double();
            row.integral_cost = c.as_double();
            h.add(s);
            stale = true;
        } else {
            if (stale) {
                // FTRL is recomputed only when the explored set grows.
                current = ftrl_minimize(h, family, eta, settings.ftrl, current ? &current->x : nullptr);
                stale = false;
            }
            const auto& x = current->x;
            row.fractional_loss = evaluate(x, s, family, settings.ftrl.cutting_planes).value.as_double();
            if (settings.rounder) {
                CounterRng rng(settings.seed, static_cast<std::uint64_t>(t - 1));
                row.integral_cost = settings.rounder(x, s, rng).as_double();
            }
            if (settings.observer) settings.observer(t, x);
        }
        if (settings.benchmark_order)
            row.benchmark_cost = oracle::fixed_order_cost(*settings.benchmark_order, s, family).as_double();
        if (bench_x)
            row.fractional_benchmark = evaluate(*bench_x, s, family, settings.ftrl.cutting_planes).value.as_double();
        ledger.rows.push_back(row);
    }
    return ledger;
}

}  // namespace pbox
