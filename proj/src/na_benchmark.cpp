#include "pbox/na_benchmark.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace pbox {

namespace {

using Sense = LinearProgram::Sense;

struct Breakdown : std::runtime_error {
    using std::runtime_error::runtime_error;
};

double cut_norm(const LinearCut& c) {
    double s = 0.0;
    for (const auto& [j, a] : c.coeffs) s += a * a;
    return std::sqrt(s);
}

double dot(const LinearCut& c, const Eigen::VectorXd& v) {
    double s = 0.0;
    for (const auto& [j, a] : c.coeffs) s += a * v[j];
    return s;
}

bool has_feasible_selection(const Scenario& s, const ConstraintFamily& family) {
    const auto finite = s.finite_boxes();
    return best_selection(family, s, finite).cost.is_finite();
}

}  // namespace

NaProgram::NaProgram(int n, ConstraintFamily family) : n_(n), family_(std::move(family)), dim_(n) {
    if (n < 1) throw std::invalid_argument("NaProgram needs n >= 1");
    if (family_.kind() == ConstraintFamily::Kind::Matroid && !family_.matroid().supports_separation())
        throw std::invalid_argument("NaProgram supports uniform and partition matroids only");
}

bool NaProgram::contains(const Scenario& s) const {
    return std::binary_search(scenarios_.begin(), scenarios_.end(), s);
}

bool NaProgram::add_scenario(const Scenario& s) {
    if (s.size() != n_) throw std::invalid_argument("scenario size does not match the program");
    auto it = std::lower_bound(scenarios_.begin(), scenarios_.end(), s);
    if (it != scenarios_.end() && *it == s) return false;
    scenarios_.insert(it, s);
    if (!has_feasible_selection(s, family_)) trivially_infeasible_ = true;
    rebuild_layout();
    return true;
}

void NaProgram::rebuild_layout() {
    z_index_.assign(scenarios_.size(), std::vector<int>(static_cast<std::size_t>(n_), -1));
    int next = n_;
    for (std::size_t j = 0; j < scenarios_.size(); ++j)
        for (int i = 0; i < n_; ++i)
            if (scenarios_[j][i].is_finite()) z_index_[j][i] = next++;
    dim_ = next;
}

double NaProgram::objective(const Eigen::VectorXd& v) const {
    double open = 0.0, value = 0.0;
    for (int i = 0; i < n_; ++i) open += v[i];
    for (std::size_t j = 0; j < scenarios_.size(); ++j)
        for (int i = 0; i < n_; ++i)
            if (const int k = z_index(j, i); k >= 0) value += scenarios_[j][i].value() * v[k];
    return scenarios_.empty() ? open : open + value / static_cast<double>(scenarios_.size());
}

std::optional<LinearCut> NaProgram::separate(const Eigen::VectorXd& v, double budget, double tol) const {
    std::optional<LinearCut> best;
    double best_score = 0.0;
    auto offer = [&](LinearCut cut) {
        cut.violation = dot(cut, v) - cut.rhs;
        if (cut.violation <= tol) return;
        const double score = cut.violation / cut_norm(cut);
        if (!best || score > best_score) {
            best_score = score;
            best = std::move(cut);
        }
    };
    // Bounds only need to be offered when violated; skipping the scan of
    // satisfied ones keeps this linear in the dimension.
    for (int j = 0; j < dim_; ++j) {
        if (v[j] < -tol) offer({{{j, -1.0}}, 0.0, 0.0, "lower"});
        if (v[j] > 1.0 + tol) offer({{{j, 1.0}}, 1.0, 0.0, "upper"});
    }
    const int R = family_.required();
    const bool matroid = family_.kind() == ConstraintFamily::Kind::Matroid;
    std::vector<double> w(static_cast<std::size_t>(n_));
    for (std::size_t j = 0; j < scenarios_.size(); ++j) {
        LinearCut sum{{}, -static_cast<double>(R), 0.0, "requirement"};
        for (int i = 0; i < n_; ++i) {
            const int k = z_index(j, i);
            w[i] = k >= 0 ? v[k] : 0.0;
            if (k < 0) continue;
            if (v[k] - v[i] > tol) offer({{{k, 1.0}, {i, -1.0}}, 0.0, 0.0, "z<=x"});
            sum.coeffs.emplace_back(k, -1.0);
        }
        offer(std::move(sum));
        if (!matroid) continue;
        const auto& m = family_.matroid();
        if (auto cut = separate_rank_upper(m, w, tol)) {
            LinearCut c{{}, static_cast<double>(m.rank(cut->set)), 0.0, "rank"};
            for (int i : cut->set)
                if (const int k = z_index(j, i); k >= 0) c.coeffs.emplace_back(k, 1.0);
            if (!c.coeffs.empty()) offer(std::move(c));
        }
        if (auto cut = separate_coverage(m, w, 1.0, tol)) {
            std::vector<bool> in(static_cast<std::size_t>(n_), false);
            for (int i : cut->set) in[i] = true;
            LinearCut c{{}, -static_cast<double>(R - m.rank(cut->set)), 0.0, "coverage"};
            for (int i = 0; i < n_; ++i)
                if (const int k = z_index(j, i); k >= 0 && !in[i]) c.coeffs.emplace_back(k, -1.0);
            offer(std::move(c));
        }
    }
    LinearCut obj{{}, budget, 0.0, "objective"};
    const double share = scenarios_.empty() ? 0.0 : 1.0 / static_cast<double>(scenarios_.size());
    for (int i = 0; i < n_; ++i) obj.coeffs.emplace_back(i, 1.0);
    for (std::size_t j = 0; j < scenarios_.size(); ++j)
        for (int i = 0; i < n_; ++i)
            if (const int k = z_index(j, i); k >= 0 && scenarios_[j][i].value() != 0.0)
                obj.coeffs.emplace_back(k, share * scenarios_[j][i].value());
    offer(std::move(obj));
    return best;
}

double NaProgram::max_violation(const Eigen::VectorXd& v) const {
    double worst = 0.0;
    for (int j = 0; j < dim_; ++j) worst = std::max({worst, -v[j], v[j] - 1.0});
    const int R = family_.required();
    for (std::size_t j = 0; j < scenarios_.size(); ++j) {
        double total = 0.0;
        std::vector<double> w(static_cast<std::size_t>(n_), 0.0);
        for (int i = 0; i < n_; ++i) {
            const int k = z_index(j, i);
            if (k < 0) continue;
            worst = std::max(worst, v[k] - v[i]);
            total += v[k];
            w[i] = v[k];
        }
        worst = std::max(worst, R - total);
        if (family_.kind() != ConstraintFamily::Kind::Matroid) continue;
        const auto& m = family_.matroid();
        if (auto c = separate_rank_upper(m, w, 0.0)) worst = std::max(worst, c->violation);
        if (auto c = separate_coverage(m, w, 1.0, 0.0)) worst = std::max(worst, c->violation);
    }
    return worst;
}

LinearProgram NaProgram::to_linear_program() const {
    const bool matroid = family_.kind() == ConstraintFamily::Kind::Matroid;
    if (matroid && n_ > 12) throw std::invalid_argument("LP dump enumerates matroid subsets; n <= 12");
    LinearProgram lp;
    const double share = scenarios_.empty() ? 0.0 : 1.0 / static_cast<double>(scenarios_.size());
    for (int i = 0; i < n_; ++i) lp.add_var("x" + std::to_string(i), 1.0);
    for (std::size_t j = 0; j < scenarios_.size(); ++j)
        for (int i = 0; i < n_; ++i)
            if (z_index(j, i) >= 0)
                lp.add_var("z" + std::to_string(j) + "_" + std::to_string(i), share * scenarios_[j][i].value());
    for (int j = 0; j < dim_; ++j) lp.add_row({{j, 1.0}}, Sense::LessEq, 1.0, "ub_" + lp.var_names[j]);
    const int R = family_.required();
    for (std::size_t j = 0; j < scenarios_.size(); ++j) {
        std::vector<std::pair<int, double>> sum;
        for (int i = 0; i < n_; ++i) {
            const int k = z_index(j, i);
            if (k < 0) continue;
            lp.add_row({{k, 1.0}, {i, -1.0}}, Sense::LessEq, 0.0, "link_" + lp.var_names[k]);
            sum.emplace_back(k, 1.0);
        }
        lp.add_row(sum, Sense::GreaterEq, R, "req" + std::to_string(j));
        if (!matroid) continue;
        const auto& m = family_.matroid();
        for (std::uint64_t mask = 1; mask < (1ULL << n_); ++mask) {
            std::vector<std::pair<int, double>> in, out;
            for (int i = 0; i < n_; ++i) {
                const int k = z_index(j, i);
                if (k >= 0) (mask >> i & 1U ? in : out).emplace_back(k, 1.0);
            }
            const int r = m.rank_mask(mask);
            const auto tag = std::to_string(j) + "_" + std::to_string(mask);
            if (!in.empty() && r < static_cast<int>(in.size())) lp.add_row(std::move(in), Sense::LessEq, r, "rank" + tag);
            if (R - r > 0) lp.add_row(std::move(out), Sense::GreaterEq, R - r, "cover" + tag);
        }
    }
    return lp;
}

bool EllipsoidState::is_positive_definite() const {
    if (shape.rows() != shape.cols()) return false;
    if (!shape.isApprox(shape.transpose(), 1e-9)) return false;
    Eigen::LLT<Eigen::MatrixXd> llt(shape);
    return llt.info() == Eigen::Success;
}

namespace {

EllipsoidResult run_ellipsoid(const NaProgram& prog, double budget, const EllipsoidSettings& st, double R) {
    const int d = prog.dimension();
    EllipsoidResult out;
    out.radius = R;
    auto& E = out.state;
    E.budget = budget;
    E.center = Eigen::VectorXd::Zero(d);
    // Shape kept as J J^T; updating the factor keeps it positive definite
    // through the very thin ellipsoids that flat feasible sets produce.
    Eigen::MatrixXd J = Eigen::MatrixXd::Identity(d, d) * R;
    const long cap = st.max_iter > 0
                         ? st.max_iter
                         : static_cast<long>(std::ceil(20.0 * d * d * std::log(1.0 / st.eps)));
    const double dd = d;
    const double step = d == 1 ? std::log(0.5)
                               : std::log(dd / (dd + 1.0)) + 0.5 * (dd - 1.0) * std::log(dd * dd / (dd * dd - 1.0));
    const double shrink = d == 1 ? 0.5 : 1.0 - std::sqrt((dd - 1.0) / (dd + 1.0));
    const double expand = d == 1 ? 1.0 : std::sqrt(dd * dd / (dd * dd - 1.0));
    double log_volume = dd * std::log(R);
    const double target = dd * std::log(st.eps);
    Eigen::VectorXd g(d), Jg(d);
    auto finish = [&] {
        E.shape = J * J.transpose();
        return out;
    };
    for (E.iterations = 0; E.iterations <= cap; ++E.iterations) {
        auto cut = prog.separate(E.center, budget, st.feas_tol);
        if (!cut) {
            out.feasible = true;
            out.point = E.center;
            return finish();
        }
        if (log_volume < target || E.iterations == cap) break;
        g.setZero();
        for (const auto& [j, a] : cut->coeffs) g.noalias() += a * J.row(j).transpose();
        const double width = g.norm();  // sqrt(a^T P a)
        if (!std::isfinite(width)) throw Breakdown("ellipsoid shape matrix lost definiteness");
        // The ellipsoid contains every feasible point; if all of it violates
        // the cut the program is infeasible at this budget.
        if (width < cut->violation || width == 0.0) break;
        g /= width;
        Jg.noalias() = J * g;
        if (d == 1) {
            E.center -= 0.5 * Jg;
            J *= 0.5;
        } else {
            E.center -= Jg / (dd + 1.0);
            J.noalias() -= shrink * Jg * g.transpose();
            J *= expand;
        }
        log_volume += step;
    }
    return finish();
}

}  // namespace

EllipsoidResult ellipsoid_feasible(const NaProgram& program, double budget, const EllipsoidSettings& settings) {
    if (!(budget >= 0.0)) throw std::invalid_argument("ellipsoid budget must be nonnegative");
    const int d = program.dimension();
    double R = settings.radius ? *settings.radius
                               : std::max(2.0 * program.n(), std::sqrt(static_cast<double>(d)) + 1.0);
    for (int attempt = 0;; ++attempt, R *= 4.0) {
        try {
            return run_ellipsoid(program, budget, settings, R);
        } catch (const Breakdown& e) {
            if (attempt >= settings.restarts) throw std::runtime_error(e.what());
        }
    }
}

BudgetSearch solve_with_doubling(const NaProgram& program, const EllipsoidSettings& settings, double b0,
                                 int max_doublings) {
    if (program.trivially_infeasible())
        throw std::invalid_argument("NA program has a scenario with no feasible selection");
    BudgetSearch out;
    out.budget = b0;
    for (out.attempts = 1; out.attempts <= max_doublings + 1; ++out.attempts, out.budget *= 2.0) {
        out.result = ellipsoid_feasible(program, out.budget, settings);
        if (out.result.feasible) return out;
    }
    throw std::runtime_error("budget doubling did not reach a feasible point");
}

std::optional<std::vector<double>> fractional_assignment(std::span<const double> x, const Scenario& s,
                                                         const ConstraintFamily& family, double tol) {
    const int n = s.size();
    if (static_cast<int>(x.size()) != n) throw std::invalid_argument("fractional_assignment: size mismatch");
    std::vector<int> cap_part(static_cast<std::size_t>(n), 0);
    std::vector<double> cap_left{static_cast<double>(family.required())};
    if (family.kind() == ConstraintFamily::Kind::Matroid) {
        const auto& m = family.matroid();
        if (m.kind() == MatroidOracle::Kind::Graphic)
            throw std::invalid_argument("fractional_assignment: graphic matroids are not supported");
        if (m.kind() == MatroidOracle::Kind::Partition) {
            cap_left.clear();
            for (std::size_t p = 0; p < m.parts().size(); ++p) {
                cap_left.push_back(m.capacities()[p]);
                for (int b : m.parts()[p]) cap_part[b] = static_cast<int>(p);
            }
        }
    }
    auto boxes = s.finite_boxes();
    std::stable_sort(boxes.begin(), boxes.end(), [&](BoxId a, BoxId b) { return s[a].value() < s[b].value(); });
    std::vector<double> z(static_cast<std::size_t>(n), 0.0);
    double need = family.required();
    for (BoxId i : boxes) {
        if (need <= 0.0) break;
        auto& cap = cap_left[static_cast<std::size_t>(cap_part[i])];
        const double take = std::min({std::clamp(x[i], 0.0, 1.0), cap, need});
        if (take <= 0.0) continue;
        z[i] = take;
        cap -= take;
        need -= take;
    }
    if (need > tol) return std::nullopt;
    return z;
}

namespace {

int draw_index(std::span<const double> w, double total, CounterRng& rng) {
    double u = rng.uniform() * total;
    int last = -1;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (w[i] <= 0.0) continue;
        last = static_cast<int>(i);
        if (u < w[i]) return last;
        u -= w[i];
    }
    return last;
}

void open_once(InspectionTranscript& t, std::vector<bool>& opened, const Scenario& s, BoxId i) {
    if (opened[i]) return;
    opened[i] = true;
    t.opened.emplace_back(i, s[i]);
}

// Shared by the k and matroid roundings. `accept(i)` decides step-2 selections
// given the current selection; `threshold()` is recomputed after each one.
template <typename Admissible, typename Threshold>
InspectionTranscript round_two_step(std::span<const double> x, std::span<const double> z, const Scenario& s,
                                    int need, const NaConstants& c, CounterRng& rng, int max_draws,
                                    Admissible admissible, Threshold threshold) {
    const int n = s.size();
    if (max_draws <= 0) max_draws = 50 * n;
    InspectionTranscript t;
    std::vector<bool> opened(static_cast<std::size_t>(n), false), selected(opened);
    const double cut = 1.0 / c.beta;
    std::vector<BoxId> heavy;
    for (int i = 0; i < n; ++i) {
        if (x[i] >= cut) open_once(t, opened, s, i);
        if (x[i] >= cut && z[i] >= cut && s[i].is_finite()) heavy.push_back(i);
    }
    std::stable_sort(heavy.begin(), heavy.end(), [&](BoxId a, BoxId b) { return s[a].value() < s[b].value(); });
    for (BoxId i : heavy) {
        if (static_cast<int>(t.selected.size()) == need) break;
        if (!admissible(t.selected, i)) continue;
        t.selected.push_back(i);
        selected[i] = true;
    }
    std::vector<double> low(static_cast<std::size_t>(n), 0.0);
    double X = 0.0;
    for (int i = 0; i < n; ++i)
        if (x[i] < cut && x[i] > 0.0) X += (low[i] = x[i]);
    double tau = threshold(selected);
    for (int draw = 0; draw < max_draws && static_cast<int>(t.selected.size()) < need; ++draw) {
        if (X <= 0.0) break;
        const int i = draw_index(low, X, rng);
        if (i < 0) break;
        open_once(t, opened, s, i);
        if (selected[i] || s[i].is_infinite() || s[i].value() > tau + 1e-12) continue;
        if (!admissible(t.selected, i)) continue;
        t.selected.push_back(i);
        selected[i] = true;
        tau = threshold(selected);
    }
    if (static_cast<int>(t.selected.size()) < need) t.selected.clear();
    return t;
}

// alpha * (value cost of z on unselected X_low) / (z-mass there); +inf when the mass is 0.
double low_threshold(std::span<const double> x, std::span<const double> z, const Scenario& s,
                     const std::vector<bool>& selected, const NaConstants& c) {
    double value = 0.0, mass = 0.0;
    for (int i = 0; i < s.size(); ++i) {
        if (x[i] >= 1.0 / c.beta || selected[i] || s[i].is_infinite()) continue;
        value += s[i].value() * z[i];
        mass += z[i];
    }
    if (mass <= 1e-12) return std::numeric_limits<double>::infinity();
    return c.alpha * value / mass;
}

}  // namespace

InspectionTranscript round_na_1(std::span<const double> x, std::span<const double> z, const Scenario& s,
                                CounterRng& rng, int max_draws) {
    const int n = s.size();
    if (max_draws <= 0) max_draws = 50 * n;
    std::vector<double> w(x.begin(), x.end());
    for (auto& v : w) v = std::max(v, 0.0);
    const double X = std::accumulate(w.begin(), w.end(), 0.0);
    InspectionTranscript t;
    std::vector<bool> opened(static_cast<std::size_t>(n), false);
    if (X <= 0.0) return t;
    for (int draw = 0; draw < max_draws; ++draw) {
        const int i = draw_index(w, X, rng);
        open_once(t, opened, s, i);
        if (s[i].is_infinite()) continue;
        if (rng.bernoulli(std::min(1.0, std::max(z[i], 0.0) / w[i]))) {
            t.selected.push_back(i);
            break;
        }
    }
    return t;
}

InspectionTranscript round_na_k(std::span<const double> x, std::span<const double> z, const Scenario& s, int k,
                                const NaConstants& c, CounterRng& rng, int max_draws) {
    auto any = [](const std::vector<BoxId>&, BoxId) { return true; };
    // The threshold is fixed once step 1 is done.
    std::optional<double> tau;
    auto threshold = [&](const std::vector<bool>& selected) {
        if (!tau) tau = low_threshold(x, z, s, selected, c);
        return *tau;
    };
    return round_two_step(x, z, s, k, c, rng, max_draws, any, threshold);
}

InspectionTranscript round_na_matroid(std::span<const double> x, std::span<const double> z, const Scenario& s,
                                      const MatroidOracle& m, const NaConstants& c, CounterRng& rng,
                                      int max_draws) {
    auto independent = [&](std::vector<BoxId> sel, BoxId i) {
        sel.push_back(i);
        return m.independent(sel);
    };
    auto threshold = [&](const std::vector<bool>& selected) { return low_threshold(x, z, s, selected, c); };
    return round_two_step(x, z, s, m.full_rank(), c, rng, max_draws, independent, threshold);
}

InspectionTranscript round_na(std::span<const double> x, std::span<const double> z, const Scenario& s,
                              const ConstraintFamily& family, const NaConstants& c, CounterRng& rng) {
    switch (family.kind()) {
        case ConstraintFamily::Kind::Select1:
            return round_na_1(x, z, s, rng);
        case ConstraintFamily::Kind::SelectK:
            if (family.required() == 1) return round_na_1(x, z, s, rng);
            return round_na_k(x, z, s, family.required(), c, rng);
        case ConstraintFamily::Kind::Matroid:
            return round_na_matroid(x, z, s, family.matroid(), c, rng);
    }
    throw std::logic_error("unknown family");
}

RegretLedger run_na(const ScenarioSequence& seq, const ConstraintFamily& family, const NaRunSettings& settings,
                    NaRunInfo* info) {
    seq.validate();
    const int n = seq.n, T = seq.horizon();
    for (int t = 0; t < T; ++t)
        if (!has_feasible_selection(seq.scenarios[static_cast<std::size_t>(t)], family))
            throw std::invalid_argument("scenario " + std::to_string(t + 1) + " admits no feasible selection");
    const double p = settings.explore_probability ? *settings.explore_probability
                                                  : 1.0 / std::sqrt(static_cast<double>(T));
    if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("explore probability must be in (0, 1]");

    NaRunInfo local;
    NaRunInfo& stats = info ? *info : local;
    stats = NaRunInfo{};
    NaProgram program(n, family);
    std::optional<Eigen::VectorXd> point;
    std::vector<BoxId> all(static_cast<std::size_t>(n));
    std::iota(all.begin(), all.end(), 0);

    RegretLedger ledger;
    for (int t = 1; t <= T; ++t) {
        const auto& s = seq.scenarios[static_cast<std::size_t>(t - 1)];
        CounterRng rng(settings.seed, static_cast<std::uint64_t>(t - 1));
        LedgerRow row;
        row.round = t;
        const Cost open_all = Cost(static_cast<double>(n)) + best_selection(family, s, all).cost;
        if (rng.uniform() < p) {
            row.explore = true;
            row.integral_cost = open_all.as_double();
            if (program.add_scenario(s)) {
                auto search = solve_with_doubling(program, settings.ellipsoid);
                ++stats.solves;
                stats.budgets.push_back(search.budget);
                point = std::move(search.result.point);
            }
        } else {
            std::vector<double> x(static_cast<std::size_t>(n), 0.0);
            if (point)
                for (int i = 0; i < n; ++i) x[i] = std::clamp((*point)[i], 0.0, 1.0);
            std::optional<std::vector<double>> z;
            if (point && program.contains(s)) {
                const auto j = static_cast<std::size_t>(
                    std::lower_bound(program.scenarios().begin(), program.scenarios().end(), s) -
                    program.scenarios().begin());
                z.emplace(static_cast<std::size_t>(n), 0.0);
                for (int i = 0; i < n; ++i)
                    if (const int k = program.z_index(j, i); k >= 0) (*z)[i] = std::clamp((*point)[k], 0.0, x[i]);
            } else {
                z = fractional_assignment(x, s, family);
            }
            if (!z) {
                row.mistake = true;
                row.integral_cost = open_all.as_double();
            } else {
                const auto tr = round_na(x, *z, s, family, settings.constants, rng);
                const Cost c = transcript_cost(tr, family);
                if (c.is_infinite()) {
                    ++stats.rounding_failures;
                    row.integral_cost = open_all.as_double();
                } else {
                    row.integral_cost = c.as_double();
                }
            }
        }
        if (settings.benchmark_set) {
            const auto sel = best_selection(family, s, *settings.benchmark_set);
            row.benchmark_cost = (Cost(static_cast<double>(settings.benchmark_set->size())) + sel.cost).as_double();
        }
        ledger.rows.push_back(row);
    }
    stats.final_point = point;
    return ledger;
}

}  // namespace pbox
