#pragma once

#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

namespace pbox {

/// One round of an online run. Costs use +inf for an Infinite outcome and
/// NaN when a column was not computed.
struct LedgerRow {
    int round = 0;
    double fractional_loss = std::numeric_limits<double>::quiet_NaN();
    double integral_cost = std::numeric_limits<double>::quiet_NaN();
    double benchmark_cost = std::numeric_limits<double>::quiet_NaN();
    double fractional_benchmark = std::numeric_limits<double>::quiet_NaN();
    bool explore = false;
    bool mistake = false;
};

class RegretLedger {
public:
    std::vector<LedgerRow> rows;

    int horizon() const { return static_cast<int>(rows.size()); }
    int explore_count() const;
    int mistake_count() const;

    double average_fractional_loss() const;
    double average_integral_cost() const;
    double average_benchmark_cost() const;
    double average_fractional_benchmark() const;

    /// Mean of (integral_cost - alpha * benchmark_cost) over rounds.
    double average_regret(double alpha = 1.0) const;
    /// Mean of (fractional_loss - fractional_benchmark).
    double average_fractional_regret() const;
    /// Running mean of the per-round regret, one entry per round.
    std::vector<double> cumulative_average_regret(double alpha = 1.0) const;

    static const std::vector<std::string>& csv_columns();
    void write_csv(std::ostream& os) const;
    /// Parses what write_csv produced; throws std::invalid_argument on a
    /// missing column or malformed value.
    static RegretLedger read_csv(std::istream& is);
};

/// Shortest round-trip decimal rendering used for all persisted numbers.
std::string format_number(double v);

}  // namespace pbox
