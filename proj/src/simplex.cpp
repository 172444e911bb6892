#include <gmpxx.h>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "pbox/lp.hpp"

namespace pbox {

int LinearProgram::add_var(std::string name, double cost) {
    objective.push_back(cost);
    var_names.push_back(std::move(name));
    return num_vars() - 1;
}

int LinearProgram::add_row(std::vector<std::pair<int, double>> coeffs, Sense sense, double rhs,
                           std::string name) {
    for (const auto& [j, v] : coeffs)
        if (j < 0 || j >= num_vars()) throw std::out_of_range("LP row references unknown variable");
    rows.push_back({std::move(coeffs), sense, rhs, std::move(name)});
    return static_cast<int>(rows.size()) - 1;
}

namespace {

std::string exact_decimal(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

std::string var_label(const LinearProgram& lp, int j) {
    const auto& name = lp.var_names[static_cast<std::size_t>(j)];
    return name.empty() ? "v" + std::to_string(j) : name;
}

void append_terms(std::ostringstream& os, const std::vector<std::pair<int, double>>& terms,
                  const LinearProgram& lp) {
    bool first = true;
    for (const auto& [j, v] : terms) {
        if (v == 0.0) continue;
        os << (v < 0 ? (first ? "-" : " - ") : (first ? "" : " + "));
        os << exact_decimal(std::abs(v)) << ' ' << var_label(lp, j);
        first = false;
    }
    if (first) os << "0 " << var_label(lp, 0);
}

}  // namespace

std::string LinearProgram::to_lp_text() const {
    std::ostringstream os;
    os << "Minimize\n obj: ";
    std::vector<std::pair<int, double>> obj;
    for (int j = 0; j < num_vars(); ++j) obj.emplace_back(j, objective[static_cast<std::size_t>(j)]);
    append_terms(os, obj, *this);
    os << "\nSubject To\n";
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto& row = rows[r];
        os << ' ' << (row.name.empty() ? "c" + std::to_string(r) : row.name) << ": ";
        append_terms(os, row.coeffs, *this);
        switch (row.sense) {
            case Sense::LessEq: os << " <= "; break;
            case Sense::GreaterEq: os << " >= "; break;
            case Sense::Equal: os << " = "; break;
        }
        os << exact_decimal(row.rhs) << '\n';
    }
    os << "Bounds\n";
    for (int j = 0; j < num_vars(); ++j) os << ' ' << var_label(*this, j) << " >= 0\n";
    os << "End\n";
    return os.str();
}

std::string to_string(LpStatus s) {
    switch (s) {
        case LpStatus::Optimal: return "optimal";
        case LpStatus::Infeasible: return "infeasible";
        case LpStatus::Unbounded: return "unbounded";
        case LpStatus::IterationLimit: return "iteration-limit";
    }
    return "?";
}

namespace {

template <typename T>
struct Arith;

template <>
struct Arith<double> {
    static constexpr double kEps = 1e-9;
    static bool zero(double v) { return std::abs(v) <= kEps; }
    static bool pos(double v) { return v > kEps; }
    static bool neg(double v) { return v < -kEps; }
    static double from(double v) { return v; }
    static double to_double(double v) { return v; }
};

template <>
struct Arith<mpq_class> {
    static bool zero(const mpq_class& v) { return sgn(v) == 0; }
    static bool pos(const mpq_class& v) { return sgn(v) > 0; }
    static bool neg(const mpq_class& v) { return sgn(v) < 0; }
    static mpq_class from(double v) { return mpq_class(v); }
    static double to_double(const mpq_class& v) { return v.get_d(); }
};

template <typename T>
class Simplex {
    using A = Arith<T>;

public:
    Simplex(const LinearProgram& lp, int max_iterations) : lp_(lp), max_iter_(max_iterations) {
        m_ = static_cast<int>(lp.rows.size());
        nvar_ = lp.num_vars();
        // Column layout: originals, one slack/surplus per inequality, artificials.
        int col = nvar_;
        slack_col_.assign(static_cast<std::size_t>(m_), -1);
        for (int r = 0; r < m_; ++r)
            if (lp.rows[r].sense != LinearProgram::Sense::Equal) slack_col_[r] = col++;
        first_art_ = col;
        sign_.assign(static_cast<std::size_t>(m_), 1);
        ident_col_.assign(static_cast<std::size_t>(m_), -1);
        for (int r = 0; r < m_; ++r) {
            const auto& row = lp.rows[r];
            // Flipping a >= row with zero rhs gives it a slack basis column.
            if (row.rhs < 0 || (row.rhs == 0 && row.sense == LinearProgram::Sense::GreaterEq))
                sign_[r] = -1;
            auto sense = row.sense;
            if (sign_[r] < 0 && sense != LinearProgram::Sense::Equal)
                sense = sense == LinearProgram::Sense::LessEq ? LinearProgram::Sense::GreaterEq
                                                              : LinearProgram::Sense::LessEq;
            const bool slack_basis = sense == LinearProgram::Sense::LessEq;
            ident_col_[r] = slack_basis ? slack_col_[r] : col++;
        }
        ncols_ = col;
        a_.assign(static_cast<std::size_t>(m_) * (ncols_ + 1), T(0));
        basis_.assign(static_cast<std::size_t>(m_), -1);
        for (int r = 0; r < m_; ++r) {
            const auto& row = lp.rows[r];
            const T s(sign_[r]);
            for (const auto& [j, v] : row.coeffs) at(r, j) += s * A::from(v);
            if (slack_col_[r] >= 0) {
                const double raw = row.sense == LinearProgram::Sense::LessEq ? 1.0 : -1.0;
                at(r, slack_col_[r]) = s * T(raw);
            }
            at(r, ident_col_[r]) = T(1);
            at(r, ncols_) = s * A::from(row.rhs);
            basis_[r] = ident_col_[r];
        }
    }

    LpResult run() {
        LpResult res;
        // Phase 1: minimize the sum of artificials.
        std::vector<T> c1(static_cast<std::size_t>(ncols_), T(0));
        for (int j = first_art_; j < ncols_; ++j) c1[j] = T(1);
        price(c1);
        auto st = iterate(ncols_);
        if (st != LpStatus::Optimal) {
            res.status = st == LpStatus::Unbounded ? LpStatus::Infeasible : st;
            res.iterations = iterations_;
            return res;
        }
        if (A::pos(-d_[ncols_])) {
            res.status = LpStatus::Infeasible;
            res.iterations = iterations_;
            return res;
        }
        drive_out_artificials();

        std::vector<T> c2(static_cast<std::size_t>(ncols_), T(0));
        for (int j = 0; j < nvar_; ++j) c2[j] = A::from(lp_.objective[j]);
        price(c2);
        st = iterate(first_art_);
        res.iterations = iterations_;
        res.status = st;
        if (st != LpStatus::Optimal) return res;

        std::vector<T> x(static_cast<std::size_t>(ncols_), T(0));
        for (int r = 0; r < m_; ++r) x[basis_[r]] = at(r, ncols_);
        T obj(0);
        for (int j = 0; j < nvar_; ++j) obj += c2[j] * x[j];
        res.objective = A::to_double(obj);
        if constexpr (std::is_same_v<T, mpq_class>) res.exact_objective = obj.get_str();
        res.primal.resize(static_cast<std::size_t>(nvar_));
        for (int j = 0; j < nvar_; ++j) res.primal[j] = A::to_double(x[j]);
        res.duals.resize(static_cast<std::size_t>(m_));
        for (int r = 0; r < m_; ++r) res.duals[r] = sign_[r] * A::to_double(T(-d_[ident_col_[r]]));
        certify(res);
        return res;
    }

private:
    T& at(int r, int c) { return a_[static_cast<std::size_t>(r) * (ncols_ + 1) + c]; }

    void price(const std::vector<T>& c) {
        d_.assign(static_cast<std::size_t>(ncols_) + 1, T(0));
        for (int j = 0; j < ncols_; ++j) d_[j] = c[j];
        for (int r = 0; r < m_; ++r) {
            const T& cb = c[basis_[r]];
            if (A::zero(cb)) continue;
            for (int j = 0; j <= ncols_; ++j)
                if (!A::zero(at(r, j))) d_[j] -= cb * at(r, j);
        }
    }

    void pivot(int pr, int pc) {
        const T inv = T(1) / at(pr, pc);
        for (int j = 0; j <= ncols_; ++j)
            if (!A::zero(at(pr, j))) at(pr, j) *= inv;
        at(pr, pc) = T(1);
        nz_.clear();
        for (int j = 0; j <= ncols_; ++j) {
            if (A::zero(at(pr, j)))
                at(pr, j) = T(0);
            else
                nz_.push_back(j);
        }
        auto eliminate = [&](T* row) {
            if (A::zero(row[pc])) {
                row[pc] = T(0);
                return;
            }
            const T f = row[pc];
            if constexpr (std::is_same_v<T, mpq_class>) {
                for (int j : nz_) {
                    mpq_mul(tmp_.get_mpq_t(), f.get_mpq_t(), at(pr, j).get_mpq_t());
                    mpq_sub(row[j].get_mpq_t(), row[j].get_mpq_t(), tmp_.get_mpq_t());
                }
            } else {
                for (int j : nz_) {
                    row[j] -= f * at(pr, j);
                    if (std::abs(row[j]) < 1e-13) row[j] = 0.0;
                }
            }
            row[pc] = T(0);
        };
        for (int r = 0; r < m_; ++r)
            if (r != pr) eliminate(&at(r, 0));
        eliminate(d_.data());
        basis_[pr] = pc;
    }

    // Leaving row for entering column pc, or -1 when the column is unbounded.
    int ratio_test(int pc) {
        int pr = -1;
        if constexpr (std::is_same_v<T, double>) {
            // Harris two-pass test: find the relaxed minimum ratio, then take the
            // largest pivot element among rows within it.
            constexpr double kFeas = 1e-9;
            double bound = std::numeric_limits<double>::infinity();
            for (int r = 0; r < m_; ++r) {
                const double a = at(r, pc);
                if (a <= A::kEps) continue;
                bound = std::min(bound, (std::max(at(r, ncols_), 0.0) + kFeas) / a);
            }
            double best_a = 0.0;
            for (int r = 0; r < m_; ++r) {
                const double a = at(r, pc);
                if (a <= A::kEps) continue;
                if (std::max(at(r, ncols_), 0.0) / a > bound) continue;
                if (pr < 0 || a > best_a || (a == best_a && basis_[r] < basis_[pr])) {
                    pr = r;
                    best_a = a;
                }
            }
        } else {
            T best(0);
            for (int r = 0; r < m_; ++r) {
                if (!A::pos(at(r, pc))) continue;
                T ratio = at(r, ncols_) / at(r, pc);
                if (pr < 0 || ratio < best || (ratio == best && basis_[r] < basis_[pr])) {
                    pr = r;
                    best = ratio;
                }
            }
        }
        return pr;
    }

    LpStatus iterate(int allowed_cols) {
        int degenerate_run = 0;
        while (true) {
            if (iterations_ >= max_iter_) return LpStatus::IterationLimit;
            const bool bland = degenerate_run > 50;
            int pc = -1;
            for (int j = 0; j < allowed_cols; ++j) {
                if (!A::neg(d_[j])) continue;
                if (bland) {
                    pc = j;
                    break;
                }
                if (pc < 0 || d_[j] < d_[pc]) pc = j;
            }
            if (pc < 0) return LpStatus::Optimal;
            const int pr = ratio_test(pc);
            if (pr < 0) return LpStatus::Unbounded;
            degenerate_run = A::zero(at(pr, ncols_)) ? degenerate_run + 1 : 0;
            pivot(pr, pc);
            ++iterations_;
        }
    }

    void drive_out_artificials() {
        for (int r = 0; r < m_; ++r) {
            if (basis_[r] < first_art_) continue;
            int pc = -1;
            for (int j = 0; j < first_art_; ++j) {
                if (A::zero(at(r, j))) continue;
                if constexpr (std::is_same_v<T, double>) {
                    if (pc < 0 || std::abs(at(r, j)) > std::abs(at(r, pc))) pc = j;
                } else {
                    pc = j;
                    break;
                }
            }
            // A row with no usable column is redundant; its artificial stays at zero.
            if (pc >= 0) pivot(r, pc);
        }
    }

    void certify(LpResult& res) const {
        double pres = 0.0, dres = 0.0;
        double by = 0.0;
        for (double v : res.primal) pres = std::max(pres, -v);
        std::vector<double> reduced(lp_.objective);
        for (int r = 0; r < m_; ++r) {
            const auto& row = lp_.rows[r];
            double lhs = 0.0;
            for (const auto& [j, v] : row.coeffs) {
                lhs += v * res.primal[j];
                reduced[j] -= res.duals[r] * v;
            }
            const double y = res.duals[r];
            switch (row.sense) {
                case LinearProgram::Sense::LessEq:
                    pres = std::max(pres, lhs - row.rhs);
                    dres = std::max(dres, y);
                    break;
                case LinearProgram::Sense::GreaterEq:
                    pres = std::max(pres, row.rhs - lhs);
                    dres = std::max(dres, -y);
                    break;
                case LinearProgram::Sense::Equal:
                    pres = std::max(pres, std::abs(lhs - row.rhs));
                    break;
            }
            by += y * row.rhs;
        }
        for (double rc : reduced) dres = std::max(dres, -rc);
        res.primal_residual = pres;
        res.dual_residual = dres;
        res.duality_gap = std::abs(res.objective - by);
    }

    const LinearProgram& lp_;
    int max_iter_;
    int m_ = 0, nvar_ = 0, ncols_ = 0, first_art_ = 0;
    int iterations_ = 0;
    std::vector<int> slack_col_, ident_col_, sign_, basis_;
    std::vector<T> a_, d_;
    std::vector<int> nz_;
    T tmp_;
};

void check_input(const LinearProgram& lp) {
    if (lp.var_names.size() != lp.objective.size())
        throw std::invalid_argument("LP variable names and objective differ in length");
    for (double c : lp.objective)
        if (!std::isfinite(c)) throw std::invalid_argument("LP objective has a non-finite coefficient");
    for (const auto& row : lp.rows) {
        if (!std::isfinite(row.rhs)) throw std::invalid_argument("LP row has a non-finite rhs");
        for (const auto& [j, v] : row.coeffs)
            if (!std::isfinite(v)) throw std::invalid_argument("LP row has a non-finite coefficient");
    }
}

}  // namespace

LpResult solve_lp(const LinearProgram& lp, int max_iterations) {
    check_input(lp);
    return Simplex<double>(lp, max_iterations).run();
}

LpResult solve_lp_exact(const LinearProgram& lp, int max_iterations) {
    check_input(lp);
    return Simplex<mpq_class>(lp, max_iterations).run();
}

}  // namespace pbox
