#pragma once

#include <Eigen/Dense>
#include <span>

namespace pbox {

/// Doubly stochastic n x n matrix; entry (i, t) is the mass of box i at slot t
/// (both 0-based here, slot t has 1-based time t + 1).
class FractionalSchedule {
public:
    static constexpr double kTol = 1e-9;

    FractionalSchedule() = default;
    /// Throws std::invalid_argument unless x is square, entries lie in
    /// [-tol, 1 + tol] and every row and column sums to 1 within tol.
    explicit FractionalSchedule(Eigen::MatrixXd x, double tol = kTol);

    static FractionalSchedule uniform(int n);
    static FractionalSchedule identity(int n);
    /// order[t] is the box opened at slot t.
    static FractionalSchedule from_order(std::span<const int> order);

    int n() const { return static_cast<int>(x_.rows()); }
    double operator()(int i, int t) const { return x_(i, t); }
    const Eigen::MatrixXd& matrix() const { return x_; }

    /// Largest deviation of a row or column sum from 1.
    double max_marginal_error() const;

private:
    Eigen::MatrixXd x_;
};

double max_marginal_error(const Eigen::MatrixXd& x);

}  // namespace pbox
