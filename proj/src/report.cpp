#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "pbox/harness.hpp"
#include "pbox/ledger.hpp"

namespace pbox::harness {

namespace fs = std::filesystem;

namespace {

struct RunKey {
    std::string config_hash;
    int T;
    std::uint64_t seed;
    int replica;
    auto operator<=>(const RunKey&) const = default;
};

struct Series {
    std::vector<double> frac, integral, bench, frac_bench;
    int explores = 0, mistakes = 0;
};

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double parse_double(const std::string& s) {
    if (s == "nan" || s.empty()) return std::nan("");
    if (s == "inf") return HUGE_VAL;
    if (s == "-inf") return -HUGE_VAL;
    return std::stod(s);
}

void read_ledger(const fs::path& file, std::map<RunKey, Series>& runs) {
    std::ifstream in(file);
    if (!in) throw ReportError("cannot open " + file.string());
    std::string header;
    if (!std::getline(in, header)) throw ReportError(file.string() + ": empty file");
    const auto cols = split(header);
    auto col = [&](const std::string& name) -> int {
        auto it = std::find(cols.begin(), cols.end(), name);
        if (it == cols.end()) throw ReportError(file.string() + ": missing column '" + name + "'");
        return static_cast<int>(it - cols.begin());
    };
    const int c_hash = col("config_hash"), c_T = col("T"), c_seed = col("seed"), c_rep = col("replica");
    const int c_int = col("integral_cost"), c_bench = col("benchmark_cost");
    const int c_frac = col("fractional_loss"), c_fb = col("fractional_benchmark");
    const int c_ex = col("explore"), c_mi = col("mistake");
    std::string line;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto cells = split(line);
        if (cells.size() != cols.size())
            throw ReportError(file.string() + ":" + std::to_string(lineno) + ": expected " + std::to_string(cols.size()) +
                              " cells");
        try {
            RunKey key{cells[c_hash], std::stoi(cells[c_T]), std::stoull(cells[c_seed]), std::stoi(cells[c_rep])};
            auto& s = runs[key];
            s.frac.push_back(parse_double(cells[c_frac]));
            s.integral.push_back(parse_double(cells[c_int]));
            s.bench.push_back(parse_double(cells[c_bench]));
            s.frac_bench.push_back(parse_double(cells[c_fb]));
            s.explores += cells[c_ex] == "1";
            s.mistakes += cells[c_mi] == "1";
        } catch (const std::logic_error&) {
            throw ReportError(file.string() + ":" + std::to_string(lineno) + ": malformed number");
        }
    }
}

bool all_finite(const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return !std::isnan(x); });
}

double mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? std::nan("") : s / static_cast<double>(v.size());
}

// Per-round regret of one run, fractional when both fractional columns are present.
std::vector<double> regret_series(const Series& s) {
    const bool frac = all_finite(s.frac) && all_finite(s.frac_bench);
    std::vector<double> r(s.integral.size());
    for (std::size_t t = 0; t < r.size(); ++t) r[t] = frac ? s.frac[t] - s.frac_bench[t] : s.integral[t] - s.bench[t];
    return r;
}

std::string fmt(double v) { return format_number(v); }

std::string svg_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

void write_regret_svg(const fs::path& p, const std::map<RunKey, Series>& runs, double slope) {
    const double W = 640, H = 400, M = 50;
    std::vector<std::vector<double>> curves;
    double ymin = HUGE_VAL, ymax = -HUGE_VAL;
    int maxT = 1;
    for (const auto& [key, s] : runs) {
        if (curves.size() >= 40) break;
        const auto r = regret_series(s);
        std::vector<double> cum(r.size());
        double acc = 0.0;
        for (std::size_t t = 0; t < r.size(); ++t) {
            acc += r[t];
            cum[t] = acc / static_cast<double>(t + 1);
            if (std::isfinite(cum[t])) {
                ymin = std::min(ymin, cum[t]);
                ymax = std::max(ymax, cum[t]);
            }
        }
        maxT = std::max(maxT, static_cast<int>(cum.size()));
        curves.push_back(std::move(cum));
    }
    if (!(ymin < ymax)) {
        ymin = std::isfinite(ymin) ? ymin - 1.0 : 0.0;
        ymax = ymin + 2.0;
    }
    std::ofstream os(p);
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n"
       << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
       << "<text x=\"" << W / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">average regret vs round</text>\n"
       << "<line x1=\"" << M << "\" y1=\"" << H - M << "\" x2=\"" << W - M << "\" y2=\"" << H - M << "\" stroke=\"black\"/>\n"
       << "<line x1=\"" << M << "\" y1=\"" << M << "\" x2=\"" << M << "\" y2=\"" << H - M << "\" stroke=\"black\"/>\n"
       << "<text x=\"" << M << "\" y=\"" << H - M + 15 << "\" font-size=\"10\">1</text>\n"
       << "<text x=\"" << W - M << "\" y=\"" << H - M + 15 << "\" font-size=\"10\" text-anchor=\"end\">" << maxT << "</text>\n"
       << "<text x=\"" << M - 4 << "\" y=\"" << M << "\" font-size=\"10\" text-anchor=\"end\">" << svg_num(ymax) << "</text>\n"
       << "<text x=\"" << M - 4 << "\" y=\"" << H - M << "\" font-size=\"10\" text-anchor=\"end\">" << svg_num(ymin) << "</text>\n";
    for (const auto& c : curves) {
        os << "<polyline fill=\"none\" stroke=\"steelblue\" stroke-opacity=\"0.6\" points=\"";
        const std::size_t stride = std::max<std::size_t>(1, c.size() / 400);
        for (std::size_t t = 0; t < c.size(); t += stride) {
            if (!std::isfinite(c[t])) continue;
            const double x = M + (W - 2 * M) * (maxT > 1 ? static_cast<double>(t) / (maxT - 1) : 0.0);
            const double y = H - M - (H - 2 * M) * (c[t] - ymin) / (ymax - ymin);
            os << svg_num(x) << ',' << svg_num(y) << ' ';
        }
        os << "\"/>\n";
    }
    os << "<text x=\"" << W - M << "\" y=\"" << M << "\" font-size=\"12\" text-anchor=\"end\">log-log slope: "
       << (std::isnan(slope) ? std::string("n/a") : svg_num(slope)) << "</text>\n</svg>\n";
}

void write_hist_svg(const fs::path& p, const std::vector<double>& ratios) {
    const double W = 640, H = 400, M = 50;
    const int bins = 20;
    std::vector<double> finite;
    for (double r : ratios)
        if (std::isfinite(r)) finite.push_back(r);
    double lo = finite.empty() ? 0.0 : *std::min_element(finite.begin(), finite.end());
    double hi = finite.empty() ? 1.0 : *std::max_element(finite.begin(), finite.end());
    if (!(lo < hi)) hi = lo + 1.0;
    std::vector<int> count(bins, 0);
    for (double r : finite) ++count[std::min(bins - 1, static_cast<int>((r - lo) / (hi - lo) * bins))];
    const int top = std::max(1, *std::max_element(count.begin(), count.end()));
    std::ofstream os(p);
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n"
       << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
       << "<text x=\"" << W / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">cost ratio per run</text>\n"
       << "<line x1=\"" << M << "\" y1=\"" << H - M << "\" x2=\"" << W - M << "\" y2=\"" << H - M << "\" stroke=\"black\"/>\n"
       << "<text x=\"" << M << "\" y=\"" << H - M + 15 << "\" font-size=\"10\">" << svg_num(lo) << "</text>\n"
       << "<text x=\"" << W - M << "\" y=\"" << H - M + 15 << "\" font-size=\"10\" text-anchor=\"end\">" << svg_num(hi) << "</text>\n";
    const double bw = (W - 2 * M) / bins;
    for (int b = 0; b < bins; ++b) {
        const double h = (H - 2 * M) * count[b] / top;
        os << "<rect x=\"" << svg_num(M + b * bw) << "\" y=\"" << svg_num(H - M - h) << "\" width=\"" << svg_num(bw - 1)
           << "\" height=\"" << svg_num(h) << "\" fill=\"darkorange\"/>\n";
    }
    os << "</svg>\n";
}

}  // namespace

void generate_report(const std::vector<fs::path>& results, const fs::path& out) {
    if (results.empty()) throw ReportError("no result directories given");
    std::map<RunKey, Series> runs;
    for (const auto& r : results) read_ledger(fs::is_directory(r) ? r / "ledger.csv" : r, runs);
    if (runs.empty()) throw ReportError("no ledger rows found");
    fs::create_directories(out);

    {
        std::ofstream os(out / "ledger_table.csv");
        os << "config_hash,T,seed,replica,round,regret,cumulative_average_regret\n";
        for (const auto& [k, s] : runs) {
            const auto r = regret_series(s);
            double acc = 0.0;
            for (std::size_t t = 0; t < r.size(); ++t) {
                acc += r[t];
                os << k.config_hash << ',' << k.T << ',' << k.seed << ',' << k.replica << ',' << t + 1 << ',' << fmt(r[t])
                   << ',' << fmt(acc / static_cast<double>(t + 1)) << '\n';
            }
        }
    }

    std::vector<double> ratios;
    std::map<int, std::vector<double>> regret_by_T;
    {
        std::ofstream os(out / "run_summary.csv");
        os << "config_hash,T,seed,replica,rounds,avg_regret,avg_integral_cost,avg_benchmark_cost,cost_ratio,explores,mistakes\n";
        for (const auto& [k, s] : runs) {
            const double reg = mean(regret_series(s));
            const double ic = mean(s.integral), bc = mean(s.bench);
            const double ratio = ic / bc;
            ratios.push_back(ratio);
            regret_by_T[k.T].push_back(reg);
            os << k.config_hash << ',' << k.T << ',' << k.seed << ',' << k.replica << ',' << s.integral.size() << ','
               << fmt(reg) << ',' << fmt(ic) << ',' << fmt(bc) << ',' << fmt(ratio) << ',' << s.explores << ','
               << s.mistakes << '\n';
        }
    }

    std::vector<double> xs, ys;
    for (const auto& [T, v] : regret_by_T) {
        xs.push_back(T);
        ys.push_back(mean(v));
    }
    const auto fit = fit_loglog(xs, ys);
    {
        std::ofstream os(out / "sweep.csv");
        os << "T,runs,mean_regret,slope\n";
        for (std::size_t i = 0; i < xs.size(); ++i)
            os << static_cast<int>(xs[i]) << ',' << regret_by_T[static_cast<int>(xs[i])].size() << ',' << fmt(ys[i]) << ','
               << fmt(fit.slope) << '\n';
    }
    write_regret_svg(out / "regret.svg", runs, fit.slope);
    write_hist_svg(out / "ratio_hist.svg", ratios);
}

}  // namespace pbox::harness
