#pragma once

#include <string>
#include <utility>
#include <vector>

namespace pbox {

/// minimize c'x  subject to  rows,  x >= 0.
struct LinearProgram {
    enum class Sense { LessEq, GreaterEq, Equal };

    struct Row {
        std::vector<std::pair<int, double>> coeffs;
        Sense sense = Sense::LessEq;
        double rhs = 0.0;
        std::string name;
    };

    std::vector<double> objective;
    std::vector<std::string> var_names;
    std::vector<Row> rows;

    int num_vars() const { return static_cast<int>(objective.size()); }
    int add_var(std::string name, double cost);
    int add_row(std::vector<std::pair<int, double>> coeffs, Sense sense, double rhs,
                std::string name = {});

    /// CPLEX-style LP text with exact decimal rendering of coefficients.
    std::string to_lp_text() const;
};

enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit };

std::string to_string(LpStatus s);

struct LpResult {
    LpStatus status = LpStatus::Infeasible;
    double objective = 0.0;
    std::vector<double> primal;
    /// One multiplier per row; >= rows get y >= 0, <= rows y <= 0. The
    /// optimum value changes by y_r per unit increase of rhs_r.
    std::vector<double> duals;
    /// Certification data (computed in double arithmetic).
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    double duality_gap = 0.0;
    int iterations = 0;
    /// Exact optimum as "p/q" (rational solver only).
    std::string exact_objective;
};

/// Two-phase dense simplex in double precision; Dantzig pricing with a Bland
/// fallback when progress stalls. Residuals are filled in for certification.
LpResult solve_lp(const LinearProgram& lp, int max_iterations = 200000);

/// Same algorithm over GMP rationals with Bland's rule. Input doubles are
/// converted exactly, so the result is the exact optimum of the given data.
LpResult solve_lp_exact(const LinearProgram& lp, int max_iterations = 200000);

}  // namespace pbox
