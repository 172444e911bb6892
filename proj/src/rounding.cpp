#include "pbox/rounding.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace pbox {

bool OpeningOrder::contains(BoxId b) const {
    return std::find(sequence.begin(), sequence.end(), b) != sequence.end();
}

bool OpeningOrder::is_total(int n) const {
    if (static_cast<int>(sequence.size()) != n) return false;
    std::vector<bool> seen(static_cast<std::size_t>(n), false);
    for (BoxId b : sequence) {
        if (b < 0 || b >= n || seen[b]) return false;
        seen[b] = true;
    }
    return true;
}

namespace {

// prefix(i, t) = sum_{t' < t} x(i, t'), t = 0..n.
Eigen::MatrixXd prefix_mass(const Eigen::MatrixXd& m) {
    const auto n = m.rows();
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, m.cols() + 1);
    for (Eigen::Index t = 0; t < m.cols(); ++t) p.col(t + 1) = p.col(t) + m.col(t);
    return p;
}

std::vector<BoxId> shuffled_boxes(int n, CounterRng& rng) {
    std::vector<BoxId> boxes(static_cast<std::size_t>(n));
    std::iota(boxes.begin(), boxes.end(), 0);
    rng.shuffle(std::span<BoxId>(boxes));
    return boxes;
}

void record_visit(OpeningOrder& order, std::vector<bool>& opened, BoxId b, int step, double q) {
    order.visits.push_back({b, step, q});
    if (!opened[b]) {
        opened[b] = true;
        order.sequence.push_back(b);
        order.first_step.push_back(step);
    }
}

// Phase l of the select-k sampler covers slots 1..min(2^l, n).
int phase_horizon(int phase, int n) {
    return phase >= 30 ? n : std::min(n, 1 << phase);
}

void sample_phase_k(OpeningOrder& order, std::vector<bool>& opened, const Eigen::MatrixXd& prefix,
                    int phase, double alpha, CounterRng& rng) {
    const int n = static_cast<int>(prefix.rows());
    const int h = phase_horizon(phase, n);
    for (BoxId i : shuffled_boxes(n, rng)) {
        const double q = std::min(alpha * prefix(i, h), 1.0);
        if (q > 0.0 && rng.bernoulli(q)) record_visit(order, opened, i, phase, q);
    }
    order.steps_sampled = phase;
}

void sample_slot_matroid(OpeningOrder& order, std::vector<bool>& opened, const Eigen::MatrixXd& prefix,
                         int slot, double scale, CounterRng& rng) {
    const int n = static_cast<int>(prefix.rows());
    const int h = std::min(slot, n);
    for (BoxId i : shuffled_boxes(n, rng)) {
        const double q = std::min(scale * prefix(i, h) / slot, 1.0);
        if (q > 0.0 && rng.bernoulli(q)) record_visit(order, opened, i, slot, q);
    }
    order.steps_sampled = slot;
}

InspectionTranscript open_box(InspectionTranscript t, const Scenario& s, BoxId b) {
    t.opened.emplace_back(b, s[b]);
    return t;
}

}  // namespace

OpeningOrder sample_order_1(const FractionalSchedule& x, CounterRng& rng, double alpha) {
    if (!(alpha > 1.0)) throw std::invalid_argument("sample_order_1 needs alpha > 1");
    const int n = x.n();
    const double amp = alpha / (alpha - 1.0);
    const auto prefix = prefix_mass(x.matrix());
    OpeningOrder order;
    std::vector<bool> opened(static_cast<std::size_t>(n), false);
    for (int t = 1; t <= n; ++t) {
        for (int trial = 0; trial < 2; ++trial) {
            for (BoxId i : shuffled_boxes(n, rng)) {
                if (opened[i]) continue;
                const double q = std::min(1.0, amp * prefix(i, t) / t);
                if (q > 0.0 && rng.bernoulli(q)) record_visit(order, opened, i, t, q);
            }
        }
    }
    order.steps_sampled = n;
    std::vector<BoxId> rest;
    for (BoxId i = 0; i < n; ++i)
        if (!opened[i]) rest.push_back(i);
    std::stable_sort(rest.begin(), rest.end(), [&](BoxId a, BoxId b) {
        return x.matrix().row(a).sum() > x.matrix().row(b).sum();
    });
    for (BoxId b : rest) {
        order.sequence.push_back(b);
        order.first_step.push_back(0);
    }
    return order;
}

InspectionTranscript stop_select1_scenario_aware(const OpeningOrder& order, const Scenario& s,
                                                 double threshold) {
    InspectionTranscript t;
    for (BoxId b : order.sequence) {
        t = open_box(std::move(t), s, b);
        if (s[b].is_finite() && s[b].value() <= threshold) {
            t.selected.push_back(b);
            break;
        }
    }
    return t;
}

OpeningOrder sample_order_k(const FractionalSchedule& x, CounterRng& rng, double alpha,
                            int max_phases) {
    const int n = x.n();
    const auto prefix = prefix_mass(x.matrix());
    OpeningOrder order;
    std::vector<bool> opened(static_cast<std::size_t>(n), false);
    for (int phase = 1; phase <= max_phases && static_cast<int>(order.sequence.size()) < n; ++phase)
        sample_phase_k(order, opened, prefix, phase, alpha, rng);
    return order;
}

int critical_slot(const std::vector<double>& y) {
    int t_star = 0;
    for (std::size_t t = 0; t < y.size(); ++t)
        if (y[t] <= 0.5 + 1e-12) t_star = static_cast<int>(t) + 1;
    return t_star;
}

InspectionTranscript stop_select_k(const OpeningOrder& order, const FractionalSchedule& x,
                                   const Scenario& s, const RelaxationSolution& sol, int k,
                                   CounterRng& rng, double alpha, int max_phases) {
    const int n = x.n();
    InspectionTranscript t;
    if (sol.value.is_infinite()) return t;
    const auto zpre = prefix_mass(sol.z);
    const int t_star = critical_slot(sol.y);
    std::vector<bool> opened(static_cast<std::size_t>(n), false), selected(opened);

    auto consume = [&](const OpeningOrder::Visit& v) {
        if (!opened[v.box]) {
            opened[v.box] = true;
            t.opened.emplace_back(v.box, s[v.box]);
        }
        if (phase_horizon(v.step, n) < t_star) return false;
        if (selected[v.box] || s[v.box].is_infinite()) return false;
        const double p = std::min(alpha * zpre(v.box, phase_horizon(v.step, n)) / v.q, 1.0);
        if (p > 0.0 && rng.bernoulli(p)) {
            selected[v.box] = true;
            t.selected.push_back(v.box);
        }
        return static_cast<int>(t.selected.size()) == k;
    };

    for (const auto& v : order.visits)
        if (consume(v)) return t;
    // Continue with fresh phases drawn from the same distribution.
    OpeningOrder more;
    std::vector<bool> seen(opened);
    const auto prefix = prefix_mass(x.matrix());
    for (int phase = order.steps_sampled + 1; phase <= max_phases; ++phase) {
        more.visits.clear();
        sample_phase_k(more, seen, prefix, phase, alpha, rng);
        for (const auto& v : more.visits)
            if (consume(v)) return t;
    }
    return t;
}

double matroid_log_factor(int k) { return std::max(1.0, std::log(static_cast<double>(std::max(k, 1)))); }

OpeningOrder sample_order_matroid(const FractionalSchedule& x, CounterRng& rng, int k, double alpha,
                                  int max_slots) {
    const int n = x.n();
    if (max_slots <= 0) max_slots = 100 * n;
    const double scale = alpha * matroid_log_factor(k);
    const auto prefix = prefix_mass(x.matrix());
    OpeningOrder order;
    std::vector<bool> opened(static_cast<std::size_t>(n), false);
    for (int slot = 1; slot <= max_slots; ++slot) {
        if (slot > n && static_cast<int>(order.sequence.size()) == n) break;
        sample_slot_matroid(order, opened, prefix, slot, scale, rng);
    }
    return order;
}

InspectionTranscript stop_matroid(const OpeningOrder& order, const FractionalSchedule& x,
                                  const Scenario& s, const RelaxationSolution& sol,
                                  const MatroidOracle& m, CounterRng& rng, double alpha,
                                  int max_slots) {
    const int n = x.n();
    if (max_slots <= 0) max_slots = 100 * n;
    InspectionTranscript t;
    const int R = m.full_rank();
    if (R == 0) return t;
    if (sol.value.is_infinite()) return t;
    const double scale = alpha * matroid_log_factor(R);
    const auto zpre = prefix_mass(sol.z);
    const int t_star = critical_slot(sol.y);
    std::vector<bool> opened(static_cast<std::size_t>(n), false), selected(opened);

    auto consume = [&](const OpeningOrder::Visit& v) {
        if (!opened[v.box]) {
            opened[v.box] = true;
            t.opened.emplace_back(v.box, s[v.box]);
        }
        if (v.step <= t_star || selected[v.box] || s[v.box].is_infinite()) return false;
        const int h = std::min(v.step, n);
        const double p = std::min(scale * zpre(v.box, h) / (v.step * v.q), 1.0);
        if (p <= 0.0 || !rng.bernoulli(p)) return false;
        t.selected.push_back(v.box);
        if (!m.independent(t.selected)) {
            t.selected.pop_back();
            return false;
        }
        selected[v.box] = true;
        return static_cast<int>(t.selected.size()) == R;
    };

    for (const auto& v : order.visits)
        if (consume(v)) return t;
    OpeningOrder more;
    std::vector<bool> seen(opened);
    const auto prefix = prefix_mass(x.matrix());
    for (int slot = order.steps_sampled + 1; slot <= max_slots; ++slot) {
        more.visits.clear();
        sample_slot_matroid(more, seen, prefix, slot, scale, rng);
        for (const auto& v : more.visits)
            if (consume(v)) return t;
    }
    return t;
}

InspectionTranscript ski_rental_stop(const OpeningOrder& order, const Scenario& s, StoppingRule rule,
                                     CounterRng& rng) {
    if (rule == StoppingRule::ScenarioAware)
        throw std::invalid_argument("ski_rental_stop needs a ski-rental rule");
    double u = 1.0;
    if (rule == StoppingRule::SkiRentalRandomized) u = std::log1p(rng.uniform() * (std::exp(1.0) - 1.0));
    InspectionTranscript t;
    BoxId best = -1;
    for (BoxId b : order.sequence) {
        t.opened.emplace_back(b, s[b]);
        if (s[b].is_finite() && (best < 0 || s[b].value() < s[best].value())) best = b;
        if (best >= 0 && u * s[best].value() <= static_cast<double>(t.opened.size())) break;
    }
    if (best >= 0) t.selected.push_back(best);
    return t;
}

RoundingOutcome round_schedule(const FractionalSchedule& x, const Scenario& s,
                               const ConstraintFamily& family, CounterRng& rng, StoppingRule rule,
                               const CuttingPlaneSettings& cp) {
    RoundingOutcome out;
    const bool single = family.kind() == ConstraintFamily::Kind::Select1 ||
                        (family.kind() == ConstraintFamily::Kind::SelectK && family.required() == 1);
    if (rule != StoppingRule::ScenarioAware && !single)
        throw std::invalid_argument("ski-rental stopping is defined for select-1 only");

    if (single) {
        const auto order = sample_order_1(x, rng);
        if (rule == StoppingRule::ScenarioAware) {
            const auto sol = eval_spa(x, s);
            if (sol.value.is_finite())
                out.transcript = stop_select1_scenario_aware(order, s, kAlphaSelect1 * sol.value_cost);
        } else {
            out.transcript = ski_rental_stop(order, s, rule, rng);
        }
    } else if (family.kind() == ConstraintFamily::Kind::SelectK) {
        const auto order = sample_order_k(x, rng);
        const auto sol = eval_spa_k(x, s, family.required(), cp);
        out.transcript = stop_select_k(order, x, s, sol, family.required(), rng);
    } else {
        const auto& m = family.matroid();
        const auto order = sample_order_matroid(x, rng, m.full_rank());
        const auto sol = eval_spa_matroid(x, s, m, cp);
        out.transcript = stop_matroid(order, x, s, sol, m, rng);
    }
    out.cost = transcript_cost(out.transcript, family);
    out.failed = out.cost.is_infinite();
    return out;
}

}  // namespace pbox
