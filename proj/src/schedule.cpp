#include "pbox/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace pbox {

double max_marginal_error(const Eigen::MatrixXd& x) {
    const double rows = (x.rowwise().sum().array() - 1.0).abs().maxCoeff();
    const double cols = (x.colwise().sum().array() - 1.0).abs().maxCoeff();
    return std::max(rows, cols);
}

FractionalSchedule::FractionalSchedule(Eigen::MatrixXd x, double tol) : x_(std::move(x)) {
    if (x_.rows() == 0 || x_.rows() != x_.cols())
        throw std::invalid_argument("schedule must be a nonempty square matrix");
    if (!x_.allFinite()) throw std::invalid_argument("schedule has non-finite entries");
    if (x_.minCoeff() < -tol || x_.maxCoeff() > 1.0 + tol)
        throw std::invalid_argument("schedule entries must lie in [0, 1]");
    const double err = pbox::max_marginal_error(x_);
    if (err > tol)
        throw std::invalid_argument("schedule is not doubly stochastic (marginal error " +
                                    std::to_string(err) + ")");
}

FractionalSchedule FractionalSchedule::uniform(int n) {
    if (n < 1) throw std::invalid_argument("schedule needs n >= 1");
    return FractionalSchedule(Eigen::MatrixXd::Constant(n, n, 1.0 / n));
}

FractionalSchedule FractionalSchedule::identity(int n) {
    if (n < 1) throw std::invalid_argument("schedule needs n >= 1");
    return FractionalSchedule(Eigen::MatrixXd::Identity(n, n));
}

FractionalSchedule FractionalSchedule::from_order(std::span<const int> order) {
    const auto n = static_cast<Eigen::Index>(order.size());
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index t = 0; t < n; ++t) {
        const int b = order[static_cast<std::size_t>(t)];
        if (b < 0 || b >= n) throw std::invalid_argument("order entry out of range");
        x(b, t) = 1.0;
    }
    return FractionalSchedule(std::move(x));
}

double FractionalSchedule::max_marginal_error() const { return pbox::max_marginal_error(x_); }

}  // namespace pbox
