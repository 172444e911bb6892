#include "pbox/oracle.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

#include "pbox/relaxation.hpp"
#include "pbox/rng.hpp"

namespace pbox::oracle {

using Sense = LinearProgram::Sense;

double WeightedScenarios::total_weight() const {
    return std::accumulate(weights.begin(), weights.end(), 0.0);
}

WeightedScenarios dedupe(std::span<const Scenario> seq) {
    WeightedScenarios out;
    std::unordered_map<Scenario, std::size_t, ScenarioHash> index;
    for (const auto& s : seq) {
        auto [it, fresh] = index.emplace(s, out.scenarios.size());
        if (fresh) {
            out.scenarios.push_back(s);
            out.weights.push_back(1.0);
        } else {
            out.weights[it->second] += 1.0;
        }
    }
    return out;
}

ExplicitLp spa_lp(const FractionalSchedule& x, const Scenario& s) {
    const int n = x.n();
    ExplicitLp e;
    std::vector<std::pair<int, double>> total;
    for (int i = 0; i < n; ++i) {
        if (s[i].is_infinite()) continue;
        for (int t = 0; t < n; ++t) {
            const int v = e.lp.add_var("z" + std::to_string(i) + "_" + std::to_string(t),
                                       t + 1 + s[i].value());
            e.lp.add_row({{v, 1.0}}, Sense::LessEq, x(i, t));
            total.emplace_back(v, 1.0);
        }
    }
    if (total.empty()) {
        e.trivially_infeasible = true;
        return e;
    }
    e.lp.add_row(std::move(total), Sense::Equal, 1.0);
    return e;
}

namespace {

// y variables come first here; z variables follow, one per (finite box, slot).
struct CoverLayout {
    int n;
    std::vector<int> y;
    std::vector<std::vector<int>> z;  // z[i][t] or -1
};

CoverLayout cover_layout(ExplicitLp& e, const FractionalSchedule& x, const Scenario& s) {
    const int n = x.n();
    CoverLayout L{n, {}, std::vector<std::vector<int>>(static_cast<std::size_t>(n),
                                                       std::vector<int>(static_cast<std::size_t>(n), -1))};
    for (int t = 0; t < n; ++t) L.y.push_back(e.lp.add_var("y" + std::to_string(t), t == n - 1 ? 0.0 : -1.0));
    for (int i = 0; i < n; ++i) {
        if (s[i].is_infinite()) continue;
        for (int t = 0; t < n; ++t) {
            L.z[i][t] = e.lp.add_var("z" + std::to_string(i) + "_" + std::to_string(t), s[i].value());
            e.lp.add_row({{L.z[i][t], 1.0}}, Sense::LessEq, x(i, t));
        }
    }
    for (int t = 0; t + 1 < n; ++t) e.lp.add_row({{L.y[t], 1.0}}, Sense::LessEq, 1.0);
    e.lp.add_row({{L.y[n - 1], 1.0}}, Sense::Equal, 1.0);
    e.constant = n;
    return L;
}

void coverage_row(ExplicitLp& e, const CoverLayout& L, unsigned mask, int t, double need) {
    std::vector<std::pair<int, double>> row;
    for (int i = 0; i < L.n; ++i) {
        if (mask >> i & 1U) continue;
        for (int tp = 0; tp <= t; ++tp)
            if (L.z[i][tp] >= 0) row.emplace_back(L.z[i][tp], 1.0);
    }
    row.emplace_back(L.y[t], -need);
    e.lp.add_row(std::move(row), Sense::GreaterEq, 0.0);
}

// A cut indexed by a non-closed set is dominated by the one for its closure,
// so only flats are written out.
bool is_flat(const MatroidOracle& m, unsigned mask) {
    const int r = m.rank_mask(mask);
    for (int e = 0; e < m.ground_size(); ++e)
        if (!(mask >> e & 1U) && m.rank_mask(mask | 1U << e) == r) return false;
    return true;
}

}  // namespace

ExplicitLp spa_k_lp(const FractionalSchedule& x, const Scenario& s, int k) {
    const int n = x.n();
    if (n > 16) throw std::invalid_argument("spa_k_lp enumerates subsets; n <= 16");
    ExplicitLp e;
    if (static_cast<int>(s.finite_boxes().size()) < k) {
        e.trivially_infeasible = true;
        return e;
    }
    const auto L = cover_layout(e, x, s);
    for (unsigned mask = 0; mask < (1U << n); ++mask) {
        const int a = std::popcount(mask);
        if (a >= k) continue;
        for (int t = 0; t < n; ++t) coverage_row(e, L, mask, t, k - a);
    }
    return e;
}

ExplicitLp spa_matroid_lp(const FractionalSchedule& x, const Scenario& s, const MatroidOracle& m) {
    const int n = x.n();
    if (n > 12) throw std::invalid_argument("spa_matroid_lp enumerates subsets; n <= 12");
    ExplicitLp e;
    const int R = m.full_rank();
    if (R == 0) return e;  // empty program, value 0
    if (m.rank(s.finite_boxes()) < R) {
        e.trivially_infeasible = true;
        return e;
    }
    const auto L = cover_layout(e, x, s);
    std::vector<unsigned> flats;
    for (unsigned mask = 0; mask < (1U << n); ++mask)
        if (is_flat(m, mask)) flats.push_back(mask);
    for (unsigned mask : flats) {
        if (mask == 0) continue;
        const int r = m.rank_mask(mask);
        std::vector<std::pair<int, double>> row;
        for (int i = 0; i < n; ++i)
            if (mask >> i & 1U)
                for (int t = 0; t < n; ++t)
                    if (L.z[i][t] >= 0) row.emplace_back(L.z[i][t], 1.0);
        if (!row.empty()) e.lp.add_row(std::move(row), Sense::LessEq, r);
    }
    for (unsigned mask : flats) {
        const int need = R - m.rank_mask(mask);
        if (need <= 0) continue;
        for (int t = 0; t < n; ++t) coverage_row(e, L, mask, t, need);
    }
    return e;
}

namespace {

Cost lp_value(const ExplicitLp& e, bool exact) {
    if (e.trivially_infeasible) return Cost::infinite();
    if (e.lp.num_vars() == 0) return Cost(e.constant);
    const auto r = exact ? solve_lp_exact(e.lp) : solve_lp(e.lp);
    if (r.status == LpStatus::Infeasible) return Cost::infinite();
    if (r.status != LpStatus::Optimal)
        throw std::runtime_error("oracle LP ended with status " + to_string(r.status));
    return Cost(r.objective + e.constant);
}

}  // namespace

Cost exact_relaxation_value(const ExplicitLp& e) { return lp_value(e, true); }
Cost float_relaxation_value(const ExplicitLp& e) { return lp_value(e, false); }

Cost fixed_order_cost(std::span<const int> order, const Scenario& s, const ConstraintFamily& family) {
    Cost best = Cost::infinite();
    std::vector<int> prefix;
    if (family.required() == 0) return Cost(0.0);
    for (int b : order) {
        prefix.push_back(b);
        const auto sel = best_selection(family, s, prefix);
        const Cost c = Cost(static_cast<double>(prefix.size())) + sel.cost;
        if (c < best) best = c;
    }
    return best;
}

PermutationBenchmark best_fixed_permutation(std::span<const Scenario> seq,
                                            const ConstraintFamily& family) {
    if (seq.empty()) throw std::invalid_argument("best_fixed_permutation: empty sequence");
    const int n = seq.front().size();
    if (n > 8)
        throw std::invalid_argument(
            "best_fixed_permutation enumerates n! orders and is limited to n <= 8; "
            "use sampled orders for larger instances (diagnostics only)");
    const auto ws = dedupe(seq);
    const double W = ws.total_weight();
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    PermutationBenchmark best{order, Cost::infinite()};
    do {
        Cost total(0.0);
        for (std::size_t j = 0; j < ws.scenarios.size() && total.is_finite(); ++j) {
            const Cost c = fixed_order_cost(order, ws.scenarios[j], family);
            total += c.is_finite() ? Cost(ws.weights[j] * c.value()) : c;
        }
        const Cost avg = total.is_finite() ? Cost(total.value() / W) : total;
        if (avg < best.average) best = {order, avg};
    } while (std::next_permutation(order.begin(), order.end()));
    return best;
}

PermutationBenchmark best_permutation_relaxation(std::span<const Scenario> seq,
                                                 const ConstraintFamily& family) {
    if (seq.empty()) throw std::invalid_argument("best_permutation_relaxation: empty sequence");
    const int n = seq.front().size();
    if (n > 8) throw std::invalid_argument("best_permutation_relaxation enumerates n! orders; n <= 8");
    const auto ws = dedupe(seq);
    const double W = ws.total_weight();
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    PermutationBenchmark best{order, Cost::infinite()};
    do {
        const auto x = FractionalSchedule::from_order(order);
        Cost total(0.0);
        for (std::size_t j = 0; j < ws.scenarios.size() && total.is_finite(); ++j) {
            const Cost c = evaluate(x, ws.scenarios[j], family).value;
            total += c.is_finite() ? Cost(ws.weights[j] * c.value()) : c;
        }
        const Cost avg = total.is_finite() ? Cost(total.value() / W) : total;
        if (avg < best.average) best = {order, avg};
    } while (std::next_permutation(order.begin(), order.end()));
    return best;
}

SetBenchmark best_nonadaptive_set(std::span<const Scenario> seq, const ConstraintFamily& family) {
    if (seq.empty()) throw std::invalid_argument("best_nonadaptive_set: empty sequence");
    const int n = seq.front().size();
    if (n > 16) throw std::invalid_argument("best_nonadaptive_set enumerates 2^n sets; n <= 16");
    const auto ws = dedupe(seq);
    const double W = ws.total_weight();
    SetBenchmark best;
    for (std::uint32_t mask = 0; mask < (1U << n); ++mask) {
        std::vector<int> set;
        for (int i = 0; i < n; ++i)
            if (mask >> i & 1U) set.push_back(i);
        Cost total(0.0);
        for (std::size_t j = 0; j < ws.scenarios.size() && total.is_finite(); ++j) {
            const Cost c = best_selection(family, ws.scenarios[j], set).cost;
            total += c.is_finite() ? Cost(ws.weights[j] * c.value()) : c;
        }
        const Cost avg =
            total.is_finite() ? Cost(static_cast<double>(set.size()) + total.value() / W) : total;
        if (avg < best.average || (avg == best.average && avg.is_finite() && set < best.set))
            best = {set, avg};
    }
    return best;
}

ExplicitLp lp_na(std::span<const Scenario> seq, const ConstraintFamily& family) {
    if (seq.empty()) throw std::invalid_argument("lp_na: empty sequence");
    const int n = seq.front().size();
    const auto ws = dedupe(seq);
    const double W = ws.total_weight();
    ExplicitLp e;
    std::vector<int> x;
    for (int i = 0; i < n; ++i) {
        x.push_back(e.lp.add_var("x" + std::to_string(i), 1.0));
        e.lp.add_row({{x[i], 1.0}}, Sense::LessEq, 1.0);
    }
    const bool matroid = family.kind() == ConstraintFamily::Kind::Matroid;
    if (matroid && n > 12) throw std::invalid_argument("lp_na enumerates matroid subsets; n <= 12");
    const int R = family.required();
    for (std::size_t j = 0; j < ws.scenarios.size(); ++j) {
        const auto& s = ws.scenarios[j];
        std::vector<int> z(static_cast<std::size_t>(n), -1);
        std::vector<std::pair<int, double>> sum;
        for (int i = 0; i < n; ++i) {
            if (s[i].is_infinite()) continue;
            z[i] = e.lp.add_var("z" + std::to_string(j) + "_" + std::to_string(i),
                                ws.weights[j] / W * s[i].value());
            e.lp.add_row({{z[i], 1.0}, {x[i], -1.0}}, Sense::LessEq, 0.0);
            sum.emplace_back(z[i], 1.0);
        }
        if (R == 0) continue;
        if (static_cast<int>(sum.size()) < R) {
            e.trivially_infeasible = true;
            return e;
        }
        if (!matroid) {
            e.lp.add_row(std::move(sum), Sense::Equal, R);
            continue;
        }
        const auto& m = family.matroid();
        for (unsigned mask = 1; mask < (1U << n); ++mask) {
            if (!is_flat(m, mask)) continue;
            std::vector<std::pair<int, double>> in, out;
            for (int i = 0; i < n; ++i) {
                if (z[i] < 0) continue;
                (mask >> i & 1U ? in : out).emplace_back(z[i], 1.0);
            }
            const int r = m.rank_mask(mask);
            if (!in.empty()) e.lp.add_row(std::move(in), Sense::LessEq, r);
            if (R - r > 0) e.lp.add_row(std::move(out), Sense::GreaterEq, R - r);
        }
        e.lp.add_row(std::move(sum), Sense::GreaterEq, R);
    }
    return e;
}

Cost birkhoff_optimum_select1(std::span<const Scenario> seq) {
    if (seq.empty()) throw std::invalid_argument("birkhoff_optimum_select1: empty sequence");
    const int n = seq.front().size();
    const auto ws = dedupe(seq);
    const double W = ws.total_weight();
    LinearProgram lp;
    std::vector<int> x(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i)
        for (int t = 0; t < n; ++t) x[i * n + t] = lp.add_var("x" + std::to_string(i) + "_" + std::to_string(t), 0.0);
    for (int i = 0; i < n; ++i) {
        std::vector<std::pair<int, double>> row, col;
        for (int t = 0; t < n; ++t) {
            row.emplace_back(x[i * n + t], 1.0);
            col.emplace_back(x[t * n + i], 1.0);
        }
        lp.add_row(std::move(row), Sense::Equal, 1.0);
        lp.add_row(std::move(col), Sense::Equal, 1.0);
    }
    for (std::size_t j = 0; j < ws.scenarios.size(); ++j) {
        const auto& s = ws.scenarios[j];
        std::vector<std::pair<int, double>> total;
        for (int i = 0; i < n; ++i) {
            if (s[i].is_infinite()) continue;
            for (int t = 0; t < n; ++t) {
                const int v = lp.add_var("", ws.weights[j] / W * (t + 1 + s[i].value()));
                lp.add_row({{v, 1.0}, {x[i * n + t], -1.0}}, Sense::LessEq, 0.0);
                total.emplace_back(v, 1.0);
            }
        }
        if (total.empty()) return Cost::infinite();
        lp.add_row(std::move(total), Sense::Equal, 1.0);
    }
    const auto r = solve_lp(lp);
    if (r.status != LpStatus::Optimal)
        throw std::runtime_error("birkhoff_optimum_select1: LP status " + to_string(r.status));
    return Cost(r.objective);
}

std::uint64_t BenchmarkCache::key(std::span<const Scenario> seq, const ConstraintFamily& family,
                                  int tag) {
    std::uint64_t h = CounterRng::mix(static_cast<std::uint64_t>(tag) + 0x51ED);
    for (char c : family.name()) h = CounterRng::mix(h ^ static_cast<unsigned char>(c));
    ScenarioHash sh;
    for (const auto& s : seq) h = CounterRng::mix(h ^ sh(s));
    return h;
}

PermutationBenchmark BenchmarkCache::permutation(std::span<const Scenario> seq,
                                                 const ConstraintFamily& family) {
    const auto k = key(seq, family, 1);
    {
        std::lock_guard lock(mu_);
        if (auto it = perm_.find(k); it != perm_.end()) return it->second;
    }
    auto result = best_fixed_permutation(seq, family);
    std::lock_guard lock(mu_);
    return perm_.emplace(k, std::move(result)).first->second;
}

SetBenchmark BenchmarkCache::nonadaptive(std::span<const Scenario> seq,
                                         const ConstraintFamily& family) {
    const auto k = key(seq, family, 2);
    {
        std::lock_guard lock(mu_);
        if (auto it = set_.find(k); it != set_.end()) return it->second;
    }
    auto result = best_nonadaptive_set(seq, family);
    std::lock_guard lock(mu_);
    return set_.emplace(k, std::move(result)).first->second;
}

std::size_t BenchmarkCache::size() const {
    std::lock_guard lock(mu_);
    return perm_.size() + set_.size();
}

}  // namespace pbox::oracle
