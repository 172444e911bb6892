#include "pbox/ftrl.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "pbox/oracle.hpp"

namespace pbox {

double default_eta(int n, int T) {
    if (n < 2) throw std::invalid_argument("default_eta needs n >= 2 (ln 1 = 0 gives eta = 0)");
    if (T < 1) throw std::invalid_argument("default_eta needs T >= 1");
    return std::sqrt(std::log(static_cast<double>(n)) / T);
}

double entropy_regularizer(const Eigen::MatrixXd& x, double eta) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double v = x.data()[i];
        if (v > 0.0) acc += v * std::log(v);
    }
    return acc / eta;
}

namespace {

double marginal_residual(const Eigen::MatrixXd& x) {
    return std::max((x.rowwise().sum().array() - 1.0).abs().maxCoeff(),
                    (x.colwise().sum().array() - 1.0).abs().maxCoeff());
}

// Newton's method on the scaling potentials (u, v) of x_ij * exp(u_i + v_j),
// with v_{n-1} pinned to remove the shift invariance. Sinkhorn alone slows to
// a crawl when the limit is close to a decomposable matrix, which is exactly
// where late FTRL iterates live.
bool newton_scaling(Eigen::MatrixXd& x, double tol, int max_steps) {
    const Eigen::Index n = x.rows();
    if (n == 1) {
        x(0, 0) = 1.0;
        return true;
    }
    const Eigen::Index d = 2 * n - 1;
    auto potential = [](const Eigen::MatrixXd& m) { return m.sum(); };
    for (int step = 0; step < max_steps; ++step) {
        const Eigen::VectorXd rows = x.rowwise().sum();
        const Eigen::VectorXd cols = x.colwise().sum().transpose();
        if (std::max((rows.array() - 1.0).abs().maxCoeff(), (cols.array() - 1.0).abs().maxCoeff()) <= tol)
            return true;
        Eigen::MatrixXd H = Eigen::MatrixXd::Zero(d, d);
        Eigen::VectorXd g(d);
        for (Eigen::Index i = 0; i < n; ++i) {
            H(i, i) = rows(i);
            g(i) = rows(i) - 1.0;
            for (Eigen::Index j = 0; j + 1 < n; ++j) {
                H(i, n + j) = x(i, j);
                H(n + j, i) = x(i, j);
            }
        }
        for (Eigen::Index j = 0; j + 1 < n; ++j) {
            H(n + j, n + j) = cols(j);
            g(n + j) = cols(j) - 1.0;
        }
        const Eigen::VectorXd delta = H.ldlt().solve(-g);
        if (!delta.allFinite()) return false;
        const double phi0 = potential(x) - 0.0;
        const double slope = g.dot(delta);
        if (!(slope < 0.0)) return false;
        double t = 1.0;
        bool accepted = false;
        for (int ls = 0; ls < 40; ++ls, t *= 0.5) {
            Eigen::MatrixXd trial = x;
            for (Eigen::Index i = 0; i < n; ++i)
                for (Eigen::Index j = 0; j < n; ++j) {
                    const double e = delta(i) + (j + 1 < n ? delta(n + j) : 0.0);
                    trial(i, j) *= std::exp(t * e);
                }
            // phi(u, v) = sum x - sum u - sum v, measured relative to the current point.
            const double shift = t * (delta.head(n).sum() + delta.tail(n - 1).sum());
            const double phi1 = potential(trial) - shift;
            if (phi1 <= phi0 + 1e-4 * t * slope || ls == 39) {
                x = std::move(trial);
                accepted = true;
                break;
            }
        }
        if (!accepted) return false;
    }
    return marginal_residual(x) <= tol;
}

}  // namespace

FractionalSchedule sinkhorn_project(const Eigen::MatrixXd& m, double tol, int max_iter) {
    if (m.rows() == 0 || m.rows() != m.cols())
        throw std::invalid_argument("sinkhorn_project needs a nonempty square matrix");
    if (!m.allFinite() || m.minCoeff() <= 0.0)
        throw std::invalid_argument("sinkhorn_project needs strictly positive finite entries");
    Eigen::MatrixXd x = m / m.maxCoeff();
    double residual = std::numeric_limits<double>::infinity();
    for (int it = 0; it < max_iter; ++it) {
        x.array().colwise() /= x.rowwise().sum().array();
        x.array().rowwise() /= x.colwise().sum().array();
        residual = (x.rowwise().sum().array() - 1.0).abs().maxCoeff();
        if (residual <= tol) return FractionalSchedule(std::move(x));
        // Hand the tail to Newton once plain scaling has done the coarse work.
        if (it >= 30 || residual < 1e-4) {
            Eigen::MatrixXd y = x;
            if (newton_scaling(y, tol, 100)) return FractionalSchedule(std::move(y));
        }
    }
    std::ostringstream os;
    os << "sinkhorn_project did not converge in " << max_iter << " sweeps (residual " << residual << ")";
    throw std::runtime_error(os.str());
}

void History::add(const Scenario& s, double weight) {
    if (n == 0) n = s.size();
    if (s.size() != n) throw std::invalid_argument("history scenario has the wrong number of boxes");
    for (std::size_t j = 0; j < scenarios.size(); ++j)
        if (scenarios[j] == s) {
            weights[j] += weight;
            return;
        }
    scenarios.push_back(s);
    weights.push_back(weight);
}

double History::total_weight() const { return std::accumulate(weights.begin(), weights.end(), 0.0); }

namespace {

// Objective and (optionally) a subgradient of the loss part.
double objective_and_grad(const History& h, const ConstraintFamily& family,
                          const FractionalSchedule& x, double eta, const CuttingPlaneSettings& cp,
                          Eigen::MatrixXd* grad) {
    double f = entropy_regularizer(x, eta);
    if (grad) grad->setZero(x.n(), x.n());
    for (std::size_t j = 0; j < h.scenarios.size(); ++j) {
        const auto r = evaluate(x, h.scenarios[j], family, cp);
        if (r.value.is_infinite()) return std::numeric_limits<double>::infinity();
        f += h.weights[j] * r.value.value();
        if (grad) *grad += h.weights[j] * r.subgradient;
    }
    return f;
}

}  // namespace

double ftrl_objective(const History& h, const ConstraintFamily& family, const FractionalSchedule& x,
                      double eta, const CuttingPlaneSettings& cp) {
    return objective_and_grad(h, family, x, eta, cp, nullptr);
}

FtrlResult ftrl_minimize(const History& history, const ConstraintFamily& family, double eta,
                         const FtrlSettings& settings, const FractionalSchedule* warm) {
    if (!(eta > 0.0)) throw std::invalid_argument("ftrl_minimize needs eta > 0");
    const int n = history.n > 0 ? history.n : (warm ? warm->n() : 0);
    if (n < 1) throw std::invalid_argument("ftrl_minimize: box count unknown (empty history, no warm start)");
    auto uniform = FractionalSchedule::uniform(n);
    const auto& cp = settings.cutting_planes;
    if (history.empty()) return {uniform, entropy_regularizer(uniform, eta), 0};

    Eigen::MatrixXd grad;
    FtrlResult best{uniform, objective_and_grad(history, family, uniform, eta, cp, &grad), 0};
    if (!std::isfinite(best.objective)) return best;  // some scenario cannot be covered at all

    FractionalSchedule x = uniform;
    double f = best.objective;
    if (warm && warm->n() == n) {
        Eigen::MatrixXd wgrad;
        const double fw = objective_and_grad(history, family, *warm, eta, cp, &wgrad);
        if (fw < f) {
            x = *warm;
            f = fw;
            grad = std::move(wgrad);
            best = {x, f, 0};
        }
    }

    Eigen::MatrixXd logx = x.matrix().array().max(settings.floor).log().matrix();
    int it = 1, last_gain = 0;
    for (; it <= settings.max_iter; ++it) {
        const double lambda = settings.step / std::sqrt(static_cast<double>(it));
        logx = (1.0 - lambda) * logx - (lambda * eta) * grad;
        Eigen::MatrixXd m = (logx.array() - logx.maxCoeff()).exp().max(settings.floor).matrix();
        x = sinkhorn_project(m, settings.sinkhorn_tol);
        logx = x.matrix().array().max(settings.floor).log().matrix();
        const double fn = objective_and_grad(history, family, x, eta, cp, &grad);
        const double scale = settings.tol * std::max(1.0, std::abs(best.objective));
        if (fn < best.objective - scale) last_gain = it;
        if (fn < best.objective) best = {x, fn, it};
        const bool settled = std::abs(fn - f) <= settings.tol * std::max(1.0, std::abs(f));
        const bool stalled = settings.patience > 0 && it - last_gain >= settings.patience;
        f = fn;
        if (it >= settings.min_iter && (settled || stalled)) break;
    }
    best.iterations = std::min(it, settings.max_iter);
    return best;
}

FtrlResult ftrl_minimize(int n, std::span<const Scenario> history, const ConstraintFamily& family,
                         double eta, const FtrlSettings& settings) {
    History h;
    h.n = n;
    for (const auto& s : history) h.add(s);
    return ftrl_minimize(h, family, eta, settings);
}

RegretLedger run_full_information(const ScenarioSequence& seq, const ConstraintFamily& family,
                                  const FullInfoSettings& settings) {
    seq.validate();
    const int n = seq.n, T = seq.horizon();
    const double eta = settings.eta ? *settings.eta : default_eta(n, T);
    std::optional<FractionalSchedule> bench_x;
    if (settings.fractional_benchmark_order)
        bench_x = FractionalSchedule::from_order(*settings.fractional_benchmark_order);
    else if (settings.benchmark_order)
        bench_x = FractionalSchedule::from_order(*settings.benchmark_order);

    History h;
    h.n = n;
    std::optional<FractionalSchedule> prev;
    RegretLedger ledger;
    for (int t = 0; t < T; ++t) {
        const auto& s = seq.scenarios[static_cast<std::size_t>(t)];
        const auto res = ftrl_minimize(h, family, eta, settings.ftrl, prev ? &*prev : nullptr);
        LedgerRow row;
        row.round = t + 1;
        row.fractional_loss = evaluate(res.x, s, family, settings.ftrl.cutting_planes).value.as_double();
        if (settings.rounder) {
            CounterRng rng(settings.seed, static_cast<std::uint64_t>(t));
            row.integral_cost = settings.rounder(res.x, s, rng).as_double();
        }
        if (settings.benchmark_order)
            row.benchmark_cost = oracle::fixed_order_cost(*settings.benchmark_order, s, family).as_double();
        if (bench_x)
            row.fractional_benchmark =
                evaluate(*bench_x, s, family, settings.ftrl.cutting_planes).value.as_double();
        if (settings.observer) settings.observer(t + 1, res.x);
        ledger.rows.push_back(row);
        h.add(s);
        prev = res.x;
    }
    return ledger;
}

}  // namespace pbox
