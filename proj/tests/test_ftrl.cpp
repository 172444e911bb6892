#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "pbox/ftrl.hpp"
#include "pbox/oracle.hpp"
#include "pbox/relaxation.hpp"
#include "test_support.hpp"

using namespace pbox;
using pbox::testing::costs;
using pbox::testing::kInf;
using pbox::testing::random_schedule;

TEST_CASE("default_eta") {
    CHECK(default_eta(2, 100) == doctest::Approx(0.08325546).epsilon(1e-7));
    CHECK(default_eta(2, 400) == doctest::Approx(default_eta(2, 100) / 2));
    CHECK_THROWS_AS(default_eta(1, 10), std::invalid_argument);
}

TEST_CASE("entropy regularizer") {
    CHECK(entropy_regularizer(FractionalSchedule::uniform(2), 1.0) == doctest::Approx(-2 * std::log(2.0)));
    CHECK(entropy_regularizer(FractionalSchedule::identity(3), 0.3) == 0.0);
    const int n = 4;
    const double eta = 0.5;
    CHECK(entropy_regularizer(FractionalSchedule::identity(n), eta) -
              entropy_regularizer(FractionalSchedule::uniform(n), eta) ==
          doctest::Approx(n * std::log(n) / eta));
}

TEST_CASE("regularizer strong convexity witness") {
    CounterRng rng(41);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 2 + static_cast<int>(rng.uniform_int(0, 4));
        const auto x = random_schedule(n, rng);
        const auto y = random_schedule(n, rng);
        const Eigen::MatrixXd mid = 0.5 * (x.matrix() + y.matrix());
        const double l1 = (x.matrix() - y.matrix()).cwiseAbs().sum();
        CHECK(entropy_regularizer(mid, 1.0) <=
              0.5 * (entropy_regularizer(x, 1.0) + entropy_regularizer(y, 1.0)) - l1 * l1 / (8.0 * n) + 1e-9);
    }
}

TEST_CASE("sinkhorn projection") {
    const auto u = sinkhorn_project(Eigen::MatrixXd::Ones(3, 3));
    CHECK((u.matrix().array() - 1.0 / 3).abs().maxCoeff() < 1e-15);
    Eigen::MatrixXd m = Eigen::MatrixXd::Constant(3, 3, 1e-12);
    m.diagonal().setConstant(2.0);
    const auto p = sinkhorn_project(m);
    CHECK((p.matrix() - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-6);
    CounterRng rng(42);
    const Eigen::MatrixXd d = 0.5 * (random_schedule(4, rng).matrix() + FractionalSchedule::uniform(4).matrix());
    CHECK((sinkhorn_project(d).matrix() - d).cwiseAbs().maxCoeff() < 1e-9);
    Eigen::MatrixXd bad = Eigen::MatrixXd::Ones(2, 2);
    bad(0, 0) = 1e-300;
    bad(1, 1) = 1e-300;
    bad(0, 1) = 1.0;
    bad(1, 0) = 1e-300;
    CHECK_THROWS_AS(sinkhorn_project(bad, 1e-15, 3), std::runtime_error);
}

TEST_CASE("ftrl minimize examples") {
    History empty;
    empty.n = 3;
    const auto r0 = ftrl_minimize(empty, ConstraintFamily::select1(), 0.1);
    CHECK((r0.x.matrix().array() - 1.0 / 3).abs().maxCoeff() < 1e-12);

    // One scenario (0, inf): the objective is 2 - a + (2/eta)(a ln a + (1-a) ln(1-a))
    // in a = x_00, minimized at a = 1 / (1 + exp(-eta / 2)).
    std::vector<Scenario> h{costs({0, kInf})};
    for (double eta : {0.01, 1.0, 10.0}) {
        const double want = 1.0 / (1.0 + std::exp(-eta / 2));
        const auto r = ftrl_minimize(2, h, ConstraintFamily::select1(), eta);
        CHECK(r.x(0, 0) == doctest::Approx(want).epsilon(1e-3));
    }
    CHECK(ftrl_minimize(2, h, ConstraintFamily::select1(), 10.0).x(0, 0) > 0.9);
}

TEST_CASE("ftrl objective is no worse than uniform or any vertex") {
    CounterRng rng(43);
    for (int trial = 0; trial < 8; ++trial) {
        History h;
        h.n = 3;
        for (int t = 0; t < 5; ++t) h.add(pbox::testing::random_scenario(3, rng, 0.2));
        const double eta = 0.3;
        const auto fam = trial % 2 ? ConstraintFamily::select_k(2) : ConstraintFamily::select1();
        bool feasible = true;
        for (const auto& s : h.scenarios) feasible &= evaluate(FractionalSchedule::uniform(3), s, fam).value.is_finite();
        if (!feasible) continue;
        const auto r = ftrl_minimize(h, fam, eta);
        CHECK(r.x.max_marginal_error() < 1e-9);
        CHECK(r.objective <= ftrl_objective(h, fam, FractionalSchedule::uniform(3), eta) + 1e-12);
        std::vector<int> order{0, 1, 2};
        do {
            CHECK(r.objective <= ftrl_objective(h, fam, FractionalSchedule::from_order(order), eta) + 1e-6);
        } while (std::next_permutation(order.begin(), order.end()));
    }
}

TEST_CASE("history merges duplicates") {
    History h;
    h.n = 2;
    h.add(costs({0, 1}));
    h.add(costs({0, 1}));
    h.add(costs({1, 0}), 2.0);
    CHECK(h.scenarios.size() == 2);
    CHECK(h.total_weight() == 4.0);
}

TEST_CASE("full information loop") {
    ScenarioSequence one;
    one.n = 3;
    one.scenarios = {costs({1, 0, 2})};
    const auto l1 = run_full_information(one, ConstraintFamily::select1());
    REQUIRE(l1.horizon() == 1);
    CHECK(l1.rows[0].fractional_loss == doctest::Approx(eval_spa(FractionalSchedule::uniform(3), one.scenarios[0]).value.value()));
    CHECK(std::isnan(l1.rows[0].integral_cost));

    // Iterates stay in the Birkhoff polytope.
    const auto seq = generate_instance("uniform-costs", 4, 60, {}, 5);
    FullInfoSettings st;
    double worst = 0.0;
    st.observer = [&](int, const FractionalSchedule& x) { worst = std::max(worst, x.max_marginal_error()); };
    (void)run_full_information(seq, ConstraintFamily::select1(), st);
    CHECK(worst < 1e-9);
}

TEST_CASE("constant adversary regret is inside the envelope") {
    const int n = 3, T = 500;
    ScenarioSequence seq;
    seq.n = n;
    seq.scenarios.assign(T, costs({2.5, 0.5, 1.5}));
    const auto fam = ConstraintFamily::select1();
    const auto best = oracle::best_permutation_relaxation(seq.scenarios, fam);
    FullInfoSettings st;
    st.fractional_benchmark_order = best.order;
    st.benchmark_order = best.order;
    const auto ledger = run_full_information(seq, fam, st);
    CHECK(ledger.average_fractional_regret() <= 2 * n * std::sqrt(std::log(n) / T));
}

TEST_CASE("alternating mssc adversary, n = 2") {
    const int n = 2, T = 400;
    const auto seq = generate_instance("adversarial-alternating", n, T, {}, 0);
    const auto fam = ConstraintFamily::select1();
    const auto best = oracle::best_permutation_relaxation(seq.scenarios, fam);
    FullInfoSettings st;
    st.fractional_benchmark_order = best.order;
    const auto ledger = run_full_information(seq, fam, st);
    CHECK(ledger.average_fractional_regret() <= 2 * n * std::sqrt(std::log(n) / T));
}
