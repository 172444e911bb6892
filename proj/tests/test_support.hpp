#pragma once

#include <Eigen/Dense>
#include <vector>

#include "pbox/core_model.hpp"
#include "pbox/rng.hpp"
#include "pbox/schedule.hpp"

namespace pbox::testing {

// Random doubly stochastic matrix as a convex combination of permutations.
// Weights are multiples of 1/1024, so every row and column sums to exactly 1
// in floating point and exact-arithmetic checks see a feasible schedule.
inline FractionalSchedule random_schedule(int n, CounterRng& rng, int terms = 4) {
    std::vector<int> units(static_cast<std::size_t>(terms), 1);
    for (int r = terms; r < 1024; ++r) ++units[static_cast<std::size_t>(rng.uniform_int(0, terms - 1))];
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(n, n);
    for (int j = 0; j < terms; ++j) {
        std::vector<int> perm(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) perm[i] = i;
        rng.shuffle(std::span<int>(perm));
        for (int t = 0; t < n; ++t) x(perm[t], t) += units[j] / 1024.0;
    }
    return FractionalSchedule(x);
}

inline Scenario random_scenario(int n, CounterRng& rng, double inf_prob = 0.2) {
    std::vector<Cost> c;
    for (int i = 0; i < n; ++i)
        c.push_back(rng.bernoulli(inf_prob) ? Cost::infinite() : Cost(rng.uniform() * n));
    if (std::all_of(c.begin(), c.end(), [](Cost v) { return v.is_infinite(); }))
        c[static_cast<std::size_t>(rng.uniform_int(0, n - 1))] = Cost(rng.uniform() * n);
    return Scenario(std::move(c));
}

inline Scenario random_mssc(int n, CounterRng& rng, double density = 0.4) {
    std::vector<Cost> c;
    bool any = false;
    for (int i = 0; i < n; ++i) {
        const bool z = rng.bernoulli(density);
        any |= z;
        c.push_back(z ? Cost(0.0) : Cost::infinite());
    }
    if (!any) c[static_cast<std::size_t>(rng.uniform_int(0, n - 1))] = Cost(0.0);
    return Scenario(std::move(c));
}

inline Scenario costs(std::initializer_list<double> v) {
    std::vector<Cost> c;
    for (double d : v) c.push_back(d == HUGE_VAL ? Cost::infinite() : Cost(d));
    return Scenario(std::move(c));
}

constexpr double kInf = HUGE_VAL;

}  // namespace pbox::testing
