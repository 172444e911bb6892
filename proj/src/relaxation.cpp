#include "pbox/relaxation.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "pbox/lp.hpp"

namespace pbox {

RelaxationSolution eval_spa(const FractionalSchedule& x, const Scenario& s) {
    const int n = x.n();
    if (s.size() != n) throw std::invalid_argument("eval_spa: scenario size does not match schedule");
    RelaxationSolution out;
    out.z = Eigen::MatrixXd::Zero(n, n);

    struct Pair {
        double key;
        int t, i;
    };
    std::vector<Pair> pairs;
    pairs.reserve(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i) {
        if (s[i].is_infinite()) continue;
        const double c = s[i].value();
        for (int t = 0; t < n; ++t) pairs.push_back({t + 1 + c, t, i});
    }
    if (pairs.empty()) return out;
    std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
        return std::tie(a.key, a.t, a.i) < std::tie(b.key, b.t, b.i);
    });

    double remaining = 1.0, value = 0.0, value_cost = 0.0;
    double theta = pairs.front().key;
    for (const auto& p : pairs) {
        if (remaining <= 0.0) break;
        const double take = std::min(x(p.i, p.t), remaining);
        if (take <= 0.0) continue;
        out.z(p.i, p.t) = take;
        remaining -= take;
        value += p.key * take;
        value_cost += s[p.i].value() * take;
        theta = p.key;
    }
    out.value = Cost(value);
    out.value_cost = value_cost;
    out.opening_cost = value - value_cost;
    out.theta = theta;
    out.y.assign(static_cast<std::size_t>(n), 0.0);
    double acc = 0.0;
    for (int t = 0; t < n; ++t) {
        acc += out.z.col(t).sum();
        out.y[t] = std::min(1.0, acc);
    }

    out.subgradient = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        if (s[i].is_infinite()) continue;
        for (int t = 0; t < n; ++t)
            out.subgradient(i, t) = -std::max(0.0, theta - (t + 1 + s[i].value()));
    }
    return out;
}

Eigen::MatrixXd subgrad_spa(const FractionalSchedule& x, const Scenario& s) {
    auto sol = eval_spa(x, s);
    if (sol.value.is_infinite()) throw std::domain_error("subgrad_spa: relaxation value is Infinite");
    return sol.subgradient;
}

namespace {

using Sense = LinearProgram::Sense;

// Shared cutting-plane model for the k and matroid relaxations.
//
// Variables: z_it for finite boxes, y_t for every slot. Objective
// n - sum_{t<n} y_t + sum c_i z_it (the constant n is added afterwards), which
// is the expected number of opened boxes when y_t is the covered fraction.
class CoverageModel {
public:
    CoverageModel(const FractionalSchedule& x, const Scenario& s, int requirement)
        : x_(x), s_(s), n_(x.n()), req_(requirement) {
        zvar_.assign(static_cast<std::size_t>(n_) * n_, -1);
        for (int i = 0; i < n_; ++i) {
            if (s[i].is_infinite()) continue;
            for (int t = 0; t < n_; ++t)
                zvar_[idx(i, t)] = lp_.add_var("z_" + std::to_string(i) + "_" + std::to_string(t),
                                               s[i].value());
        }
        for (int t = 0; t < n_; ++t)
            yvar_.push_back(lp_.add_var("y_" + std::to_string(t), t + 1 < n_ ? -1.0 : 0.0));
        for (int i = 0; i < n_; ++i)
            for (int t = 0; t < n_; ++t)
                if (z(i, t) >= 0) {
                    cap_row_.emplace_back(i, t, lp_.add_row({{z(i, t), 1.0}}, Sense::LessEq, x(i, t)));
                }
        for (int t = 0; t + 1 < n_; ++t) lp_.add_row({{yvar_[t], 1.0}}, Sense::LessEq, 1.0);
        lp_.add_row({{yvar_[n_ - 1], 1.0}}, Sense::Equal, 1.0);
        for (int t = 0; t < n_; ++t) add_coverage_cut(t, {}, req_);
    }

    int z(int i, int t) const { return zvar_[idx(i, t)]; }

    void add_coverage_cut(int t, const std::vector<int>& excluded, int rhs_mult) {
        std::vector<bool> out(static_cast<std::size_t>(n_), false);
        for (int b : excluded) out[b] = true;
        std::vector<std::pair<int, double>> coeffs;
        for (int i = 0; i < n_; ++i) {
            if (out[i]) continue;
            for (int tp = 0; tp <= t; ++tp)
                if (z(i, tp) >= 0) coeffs.emplace_back(z(i, tp), 1.0);
        }
        coeffs.emplace_back(yvar_[t], -static_cast<double>(rhs_mult));
        lp_.add_row(std::move(coeffs), Sense::GreaterEq, 0.0);
    }

    void add_rank_cut(const std::vector<int>& set, int rank) {
        std::vector<std::pair<int, double>> coeffs;
        for (int i : set)
            for (int t = 0; t < n_; ++t)
                if (z(i, t) >= 0) coeffs.emplace_back(z(i, t), 1.0);
        if (coeffs.empty()) return;
        lp_.add_row(std::move(coeffs), Sense::LessEq, rank);
    }

    LpResult solve(bool exact) const { return exact ? solve_lp_exact(lp_) : solve_lp(lp_); }

    Eigen::MatrixXd z_matrix(const LpResult& r) const {
        Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n_, n_);
        for (int i = 0; i < n_; ++i)
            for (int t = 0; t < n_; ++t)
                if (z(i, t) >= 0) out(i, t) = std::max(0.0, r.primal[z(i, t)]);
        return out;
    }

    std::vector<double> y_vector(const LpResult& r) const {
        std::vector<double> y;
        for (int v : yvar_) y.push_back(r.primal[v]);
        return y;
    }

    RelaxationSolution finish(const LpResult& r, int cuts) const {
        RelaxationSolution out;
        out.z = z_matrix(r);
        out.y = y_vector(r);
        out.value = Cost(r.objective + n_);
        double vc = 0.0;
        for (int i = 0; i < n_; ++i)
            if (s_[i].is_finite()) vc += s_[i].value() * out.z.row(i).sum();
        out.value_cost = vc;
        out.opening_cost = out.value.value() - vc;
        out.subgradient = Eigen::MatrixXd::Zero(n_, n_);
        for (const auto& [i, t, row] : cap_row_) out.subgradient(i, t) = r.duals[row];
        out.cuts_added = cuts;
        return out;
    }

    int n() const { return n_; }

private:
    std::size_t idx(int i, int t) const { return static_cast<std::size_t>(i) * n_ + t; }

    const FractionalSchedule& x_;
    const Scenario& s_;
    int n_, req_;
    LinearProgram lp_;
    std::vector<int> zvar_, yvar_;
    std::vector<std::tuple<int, int, int>> cap_row_;
};

[[noreturn]] void cut_limit_error(const char* what, int cuts, double violation) {
    std::ostringstream os;
    os << what << ": cutting-plane loop exceeded " << cuts << " cuts (last violation " << violation
       << ")";
    throw std::runtime_error(os.str());
}

void require_optimal(const LpResult& r, const char* what) {
    if (r.status != LpStatus::Optimal)
        throw std::runtime_error(std::string(what) + ": LP solve ended with status " +
                                 to_string(r.status));
}

}  // namespace

RelaxationSolution eval_spa_k(const FractionalSchedule& x, const Scenario& s, int k,
                              const CuttingPlaneSettings& settings) {
    const int n = x.n();
    if (s.size() != n) throw std::invalid_argument("eval_spa_k: scenario size does not match schedule");
    if (k < 1 || k > n) throw std::invalid_argument("eval_spa_k: need 1 <= k <= n");
    if (static_cast<int>(s.finite_boxes().size()) < k) {
        RelaxationSolution out;
        out.z = Eigen::MatrixXd::Zero(n, n);
        return out;
    }

    CoverageModel model(x, s, k);
    int cuts = 0;
    while (true) {
        const auto r = model.solve(settings.exact);
        require_optimal(r, "eval_spa_k");
        const auto zm = model.z_matrix(r);
        const auto y = model.y_vector(r);

        int added = 0;
        double worst = 0.0;
        std::vector<double> prefix(static_cast<std::size_t>(n), 0.0);
        for (int t = 0; t < n; ++t) {
            for (int i = 0; i < n; ++i) prefix[i] += zm(i, t);
            std::vector<int> order(static_cast<std::size_t>(n));
            std::iota(order.begin(), order.end(), 0);
            std::stable_sort(order.begin(), order.end(),
                             [&](int a, int b) { return prefix[a] > prefix[b]; });
            const double total = std::accumulate(prefix.begin(), prefix.end(), 0.0);
            double top = 0.0, best = settings.tol;
            int best_a = -1;
            for (int a = 0; a < k; ++a) {
                if (a > 0) top += prefix[order[a - 1]];
                const double viol = (k - a) * y[t] - (total - top);
                if (viol > best) {
                    best = viol;
                    best_a = a;
                }
            }
            if (best_a >= 0) {
                model.add_coverage_cut(t, std::vector<int>(order.begin(), order.begin() + best_a),
                                       k - best_a);
                ++added;
                worst = std::max(worst, best);
            }
        }
        if (added == 0) return model.finish(r, cuts);
        cuts += added;
        if (cuts > settings.max_cuts) cut_limit_error("eval_spa_k", settings.max_cuts, worst);
    }
}

Eigen::MatrixXd subgrad_spa_k(const FractionalSchedule& x, const Scenario& s, int k,
                              const CuttingPlaneSettings& settings) {
    auto sol = eval_spa_k(x, s, k, settings);
    if (sol.value.is_infinite()) throw std::domain_error("subgrad_spa_k: relaxation value is Infinite");
    return sol.subgradient;
}

RelaxationSolution eval_spa_matroid(const FractionalSchedule& x, const Scenario& s,
                                    const MatroidOracle& m, const CuttingPlaneSettings& settings) {
    const int n = x.n();
    if (s.size() != n || m.ground_size() != n)
        throw std::invalid_argument("eval_spa_matroid: size mismatch between schedule, scenario and matroid");
    if (!m.supports_separation())
        throw std::invalid_argument("eval_spa_matroid: matroid kind has no LP separation");
    const int R = m.full_rank();
    if (R == 0) {
        RelaxationSolution out;
        out.value = Cost(0.0);
        out.z = Eigen::MatrixXd::Zero(n, n);
        out.y.assign(static_cast<std::size_t>(n), 1.0);
        out.subgradient = Eigen::MatrixXd::Zero(n, n);
        return out;
    }
    if (m.rank(s.finite_boxes()) < R) {
        RelaxationSolution out;
        out.z = Eigen::MatrixXd::Zero(n, n);
        return out;
    }

    CoverageModel model(x, s, R);
    {
        std::vector<int> all(static_cast<std::size_t>(n));
        std::iota(all.begin(), all.end(), 0);
        model.add_rank_cut(all, R);
    }
    int cuts = 0;
    while (true) {
        const auto r = model.solve(settings.exact);
        require_optimal(r, "eval_spa_matroid");
        const auto zm = model.z_matrix(r);
        const auto y = model.y_vector(r);

        int added = 0;
        double worst = 0.0;
        std::vector<double> totals(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) totals[i] = zm.row(i).sum();
        if (auto cut = separate_rank_upper(m, totals, settings.tol)) {
            model.add_rank_cut(cut->set, m.rank(cut->set));
            ++added;
            worst = std::max(worst, cut->violation);
        }
        std::vector<double> prefix(static_cast<std::size_t>(n), 0.0);
        for (int t = 0; t < n; ++t) {
            for (int i = 0; i < n; ++i) prefix[i] += zm(i, t);
            if (auto cut = separate_coverage(m, prefix, y[t], settings.tol)) {
                model.add_coverage_cut(t, cut->set, R - m.rank(cut->set));
                ++added;
                worst = std::max(worst, cut->violation);
            }
        }
        if (added == 0) return model.finish(r, cuts);
        cuts += added;
        if (cuts > settings.max_cuts) cut_limit_error("eval_spa_matroid", settings.max_cuts, worst);
    }
}

Eigen::MatrixXd subgrad_spa_matroid(const FractionalSchedule& x, const Scenario& s,
                                    const MatroidOracle& m, const CuttingPlaneSettings& settings) {
    auto sol = eval_spa_matroid(x, s, m, settings);
    if (sol.value.is_infinite())
        throw std::domain_error("subgrad_spa_matroid: relaxation value is Infinite");
    return sol.subgradient;
}

RelaxationSolution evaluate(const FractionalSchedule& x, const Scenario& s,
                            const ConstraintFamily& family, const CuttingPlaneSettings& settings) {
    switch (family.kind()) {
        case ConstraintFamily::Kind::Select1:
            return eval_spa(x, s);
        case ConstraintFamily::Kind::SelectK:
            return family.required() == 1 ? eval_spa(x, s) : eval_spa_k(x, s, family.required(), settings);
        case ConstraintFamily::Kind::Matroid:
            return eval_spa_matroid(x, s, family.matroid(), settings);
    }
    throw std::logic_error("unknown constraint family");
}

}  // namespace pbox
