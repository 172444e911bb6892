#include "pbox/ledger.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace pbox {

namespace {

template <typename F>
double mean_of(const std::vector<LedgerRow>& rows, F f) {
    if (rows.empty()) return std::numeric_limits<double>::quiet_NaN();
    double acc = 0.0;
    for (const auto& r : rows) acc += f(r);
    return acc / static_cast<double>(rows.size());
}

double parse_number(const std::string& s) {
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan" || s.empty()) return std::numeric_limits<double>::quiet_NaN();
    double v = 0.0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
        throw std::invalid_argument("malformed number '" + s + "' in ledger");
    return v;
}

}  // namespace

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, p);
}

int RegretLedger::explore_count() const {
    int c = 0;
    for (const auto& r : rows) c += r.explore;
    return c;
}

int RegretLedger::mistake_count() const {
    int c = 0;
    for (const auto& r : rows) c += r.mistake;
    return c;
}

double RegretLedger::average_fractional_loss() const {
    return mean_of(rows, [](const LedgerRow& r) { return r.fractional_loss; });
}
double RegretLedger::average_integral_cost() const {
    return mean_of(rows, [](const LedgerRow& r) { return r.integral_cost; });
}
double RegretLedger::average_benchmark_cost() const {
    return mean_of(rows, [](const LedgerRow& r) { return r.benchmark_cost; });
}
double RegretLedger::average_fractional_benchmark() const {
    return mean_of(rows, [](const LedgerRow& r) { return r.fractional_benchmark; });
}

double RegretLedger::average_regret(double alpha) const {
    return mean_of(rows, [alpha](const LedgerRow& r) { return r.integral_cost - alpha * r.benchmark_cost; });
}

double RegretLedger::average_fractional_regret() const {
    return mean_of(rows, [](const LedgerRow& r) { return r.fractional_loss - r.fractional_benchmark; });
}

std::vector<double> RegretLedger::cumulative_average_regret(double alpha) const {
    std::vector<double> out;
    double acc = 0.0;
    for (std::size_t t = 0; t < rows.size(); ++t) {
        acc += rows[t].integral_cost - alpha * rows[t].benchmark_cost;
        out.push_back(acc / static_cast<double>(t + 1));
    }
    return out;
}

const std::vector<std::string>& RegretLedger::csv_columns() {
    static const std::vector<std::string> cols{"round",          "fractional_loss",
                                               "integral_cost",  "benchmark_cost",
                                               "fractional_benchmark", "explore",
                                               "mistake"};
    return cols;
}

void RegretLedger::write_csv(std::ostream& os) const {
    const auto& cols = csv_columns();
    for (std::size_t c = 0; c < cols.size(); ++c) os << (c ? "," : "") << cols[c];
    os << '\n';
    for (const auto& r : rows)
        os << r.round << ',' << format_number(r.fractional_loss) << ','
           << format_number(r.integral_cost) << ',' << format_number(r.benchmark_cost) << ','
           << format_number(r.fractional_benchmark) << ',' << (r.explore ? 1 : 0) << ','
           << (r.mistake ? 1 : 0) << '\n';
}

RegretLedger RegretLedger::read_csv(std::istream& is) {
    auto split = [](const std::string& line) {
        std::vector<std::string> out;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) out.push_back(cell);
        if (!line.empty() && line.back() == ',') out.emplace_back();
        return out;
    };
    std::string line;
    if (!std::getline(is, line)) throw std::invalid_argument("ledger is empty");
    const auto header = split(line);
    std::map<std::string, std::size_t> col;
    for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
    for (const auto& name : csv_columns())
        if (!col.count(name)) throw std::invalid_argument("ledger is missing column '" + name + "'");

    RegretLedger out;
    int lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto cells = split(line);
        if (cells.size() != header.size())
            throw std::invalid_argument("ledger line " + std::to_string(lineno) + " has " +
                                        std::to_string(cells.size()) + " cells, expected " +
                                        std::to_string(header.size()));
        LedgerRow r;
        r.round = static_cast<int>(parse_number(cells[col["round"]]));
        r.fractional_loss = parse_number(cells[col["fractional_loss"]]);
        r.integral_cost = parse_number(cells[col["integral_cost"]]);
        r.benchmark_cost = parse_number(cells[col["benchmark_cost"]]);
        r.fractional_benchmark = parse_number(cells[col["fractional_benchmark"]]);
        r.explore = cells[col["explore"]] == "1";
        r.mistake = cells[col["mistake"]] == "1";
        out.rows.push_back(r);
    }
    return out;
}

}  // namespace pbox
