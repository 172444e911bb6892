#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "pbox/oracle.hpp"
#include "pbox/relaxation.hpp"
#include "pbox/rounding.hpp"
#include "test_support.hpp"

using namespace pbox;
using pbox::testing::costs;
using pbox::testing::kInf;
using pbox::testing::random_schedule;

TEST_CASE("sample_order_1 on the identity opens box 0 first") {
    CounterRng rng(1);
    for (int i = 0; i < 50; ++i) {
        const auto o = sample_order_1(FractionalSchedule::identity(4), rng);
        CHECK(o.sequence.front() == 0);
        CHECK(o.is_total(4));
    }
}

TEST_CASE("sample_order_1 slot-1 frequency on the uniform 2x2 matrix") {
    const double amp = kAlphaSelect1 / (kAlphaSelect1 - 1);
    const double q = std::min(1.0, amp * 0.5);
    const double want = 1 - (1 - q) * (1 - q);
    CounterRng rng(2);
    const int N = 100000;
    int hits = 0;
    for (int i = 0; i < N; ++i) {
        const auto o = sample_order_1(FractionalSchedule::uniform(2), rng);
        hits += o.contains(0) && o.first_step[0] == 1 && o.sequence[0] == 0;
        // Box 0 opened in slot 1 shows up either first or second in the sequence.
        if (o.sequence[1] == 0 && o.first_step[1] == 1) ++hits;
    }
    CHECK(std::abs(static_cast<double>(hits) / N - want) < 0.005);
}

TEST_CASE("boxes with no prefix mass go to the tail") {
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(3, 3);
    x(0, 0) = 1;
    x(1, 1) = 1;
    x(2, 2) = 1;
    CounterRng rng(3);
    const auto o = sample_order_1(FractionalSchedule(x), rng);
    CHECK(o.is_total(3));
    CHECK(o.sequence.front() == 0);
}

TEST_CASE("select-1 scenario-aware stop") {
    CounterRng rng(4);
    const auto x = FractionalSchedule::identity(2);
    const auto s = costs({5, 0});
    const auto sol = eval_spa(x, s);
    CHECK(sol.value_cost == 0.0);
    const auto o = sample_order_1(x, rng);
    const auto t = stop_select1_scenario_aware(o, s, kAlphaSelect1 * sol.value_cost);
    CHECK(transcript_cost(t, ConstraintFamily::select1()) == Cost(2.0));
    CHECK(t.selected == std::vector<int>{1});
}

TEST_CASE("sample_order_k probabilities") {
    CounterRng rng(5);
    const auto id = sample_order_k(FractionalSchedule::identity(4), rng);
    for (std::size_t j = 0; j < id.sequence.size(); ++j)
        if (id.sequence[j] == 0) CHECK(id.first_step[j] == 1);
    // Box 0 has prefix mass 0.05 over the first two slots: phase-1 probability 0.4.
    Eigen::MatrixXd x(4, 4);
    x << 0.025, 0.025, 0.475, 0.475,
         0.475, 0.475, 0.025, 0.025,
         0.25, 0.25, 0.25, 0.25,
         0.25, 0.25, 0.25, 0.25;
    int hits = 0;
    const int N = 10000;
    for (int i = 0; i < N; ++i) {
        const auto o = sample_order_k(FractionalSchedule(x), rng);
        for (std::size_t j = 0; j < o.sequence.size(); ++j)
            if (o.sequence[j] == 0 && o.first_step[j] == 1) ++hits;
    }
    CHECK(std::abs(static_cast<double>(hits) / N - 0.4) < 0.015);
    // With uniform x every box is open by phase ceil(log2 n) + 1.
    for (int n : {3, 5, 8}) {
        const auto o = sample_order_k(FractionalSchedule::uniform(n), rng);
        const int last = static_cast<int>(std::ceil(std::log2(n))) + 1;
        CHECK(o.is_total(n));
        for (int s : o.first_step) CHECK(s <= last);
    }
}

TEST_CASE("critical slot") {
    CHECK(critical_slot({0.6, 1.0}) == 0);
    CHECK(critical_slot({0.2, 0.5, 0.9}) == 2);
    CHECK(critical_slot({0.0, 0.4, 0.45, 1.0}) == 3);
    CHECK(critical_slot({}) == 0);
}

TEST_CASE("matroid forced path") {
    const auto m = MatroidOracle::partition(2, {{0}, {1}}, {1, 1});
    const auto fam = ConstraintFamily::matroid_basis(m);
    CounterRng rng(6);
    for (int i = 0; i < 20; ++i) {
        const auto out = round_schedule(FractionalSchedule::identity(2), costs({0, 0}), fam, rng);
        CHECK_FALSE(out.failed);
        CHECK(out.cost == Cost(2.0));
        std::vector<int> sel = out.transcript.selected;
        std::sort(sel.begin(), sel.end());
        CHECK(sel == std::vector<int>{0, 1});
    }
    const auto empty = round_schedule(FractionalSchedule::identity(2), costs({1, 1}),
                                      ConstraintFamily::matroid_basis(MatroidOracle::uniform(2, 0)), rng);
    CHECK(empty.cost == Cost(0.0));
    CHECK(matroid_log_factor(1) == 1.0);
    CHECK(matroid_log_factor(20) == doctest::Approx(std::log(20.0)));
}

TEST_CASE("ski rental examples") {
    OpeningOrder o;
    o.sequence = {0, 1};
    o.first_step = {1, 2};
    CounterRng rng(7);
    auto t = ski_rental_stop(o, costs({0, 3}), StoppingRule::SkiRentalDeterministic, rng);
    CHECK(transcript_cost(t, ConstraintFamily::select1()) == Cost(1.0));

    OpeningOrder o4;
    o4.sequence = {0, 1, 2, 3};
    o4.first_step = {1, 2, 3, 4};
    t = ski_rental_stop(o4, costs({4, 4, 4, 4}), StoppingRule::SkiRentalDeterministic, rng);
    CHECK(transcript_cost(t, ConstraintFamily::select1()) == Cost(8.0));
    const auto best = oracle::fixed_order_cost(o4.sequence, costs({4, 4, 4, 4}), ConstraintFamily::select1());
    CHECK(best == Cost(5.0));
}

TEST_CASE("deterministic ski rental is within 2 opt + 1 on the same order") {
    CounterRng rng(8);
    for (int trial = 0; trial < 500; ++trial) {
        const int n = 2 + static_cast<int>(rng.uniform_int(0, 5));
        const auto s = pbox::testing::random_scenario(n, rng);
        const auto o = sample_order_1(random_schedule(n, rng), rng);
        const auto t = ski_rental_stop(o, s, StoppingRule::SkiRentalDeterministic, rng);
        const auto c = transcript_cost(t, ConstraintFamily::select1());
        const auto opt = oracle::fixed_order_cost(o.sequence, s, ConstraintFamily::select1());
        CHECK(c.value() <= 2 * opt.value() + 1 + 1e-12);
    }
}

TEST_CASE("randomized ski rental against optimal stopping on the same order") {
    CounterRng rng(9);
    double num = 0.0, den = 0.0;
    for (int trial = 0; trial < 5000; ++trial) {
        const int n = 3 + static_cast<int>(rng.uniform_int(0, 3));
        const auto s = pbox::testing::random_scenario(n, rng, 0.1);
        const auto o = sample_order_1(random_schedule(n, rng), rng);
        num += transcript_cost(ski_rental_stop(o, s, StoppingRule::SkiRentalRandomized, rng), ConstraintFamily::select1()).value();
        den += oracle::fixed_order_cost(o.sequence, s, ConstraintFamily::select1()).value();
    }
    MESSAGE("randomized ski-rental ratio " << num / den);
    CHECK(num / den <= std::exp(1.0) / (std::exp(1.0) - 1) + 0.1);
}

TEST_CASE("round_schedule invariants") {
    CounterRng rng(10);
    const std::vector<ConstraintFamily> fams{ConstraintFamily::select1(), ConstraintFamily::select_k(2),
                                             ConstraintFamily::matroid_basis(MatroidOracle::partition(5, {{0, 1}, {2, 3, 4}}, {1, 1}))};
    for (const auto& fam : fams)
        for (int trial = 0; trial < 200; ++trial) {
            const auto x = random_schedule(5, rng);
            const auto s = pbox::testing::random_scenario(5, rng, 0.1);
            const auto sol = evaluate(x, s, fam);
            if (sol.value.is_infinite()) continue;
            const auto out = round_schedule(x, s, fam, rng);
            CHECK_NOTHROW(out.transcript.validate(fam));
            CHECK(out.transcript.opened.size() <= 5);
            if (!out.failed) CHECK(out.cost == transcript_cost(out.transcript, fam));
            if (fam.kind() == ConstraintFamily::Kind::Select1 && sol.value_cost > 0) {
                for (int b : out.transcript.selected) CHECK(s[b].value() <= kAlphaSelect1 * sol.value_cost + 1e-12);
            }
        }
    CHECK_THROWS_AS(round_schedule(FractionalSchedule::uniform(3), costs({0, 1, 2}), ConstraintFamily::select_k(2), rng,
                                   StoppingRule::SkiRentalRandomized),
                    std::invalid_argument);
}

TEST_CASE("mssc rounding stays within 4x on a small instance") {
    CounterRng rng(11);
    const auto x = random_schedule(5, rng);
    const auto s = costs({kInf, 0, kInf, kInf, 0});
    const double v = eval_spa(x, s).value.value();
    double total = 0.0;
    const int N = 2000;
    for (int i = 0; i < N; ++i) total += round_schedule(x, s, ConstraintFamily::select1(), rng).cost.value();
    CHECK(total / N <= 4 * v * 1.1);
}

TEST_CASE("rounding is reproducible from the rng stream") {
    const auto x = FractionalSchedule::uniform(5);
    const auto s = costs({1, 2, 0.5, kInf, 3});
    CounterRng a(99, 7), b(99, 7);
    for (const auto& fam : {ConstraintFamily::select1(), ConstraintFamily::select_k(2)}) {
        const auto ra = round_schedule(x, s, fam, a);
        const auto rb = round_schedule(x, s, fam, b);
        CHECK(ra.transcript.opened == rb.transcript.opened);
        CHECK(ra.transcript.selected == rb.transcript.selected);
    }
}
