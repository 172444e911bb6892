#pragma once

#include <cstdint>
#include <limits>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "pbox/core_model.hpp"
#include "pbox/ledger.hpp"

namespace pbox::harness {

inline constexpr int kSchemaVersion = 1;

/// Invalid configuration; what() is "<source>:<line>: <message>".
struct ConfigError : std::runtime_error {
    ConfigError(const std::string& source, int line, const std::string& msg)
        : std::runtime_error(source + ":" + std::to_string(line) + ": " + msg), line(line) {}
    int line;
};

/// Missing or malformed columns in a results file.
struct ReportError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Algorithm { FullInfo, Bandit, Na };
std::string to_string(Algorithm a);

struct InstanceSource {
    std::optional<std::filesystem::path> file;
    std::string generator;
    int n = 0;
    int T = 0;
    std::map<std::string, double> params;
    std::optional<std::uint64_t> seed;  // run seed when unset
};

struct Overrides {
    std::optional<double> eta;
    std::optional<int> interval_length;
    bool alt_interval_formula = false;
    std::optional<double> lipschitz;
    std::optional<double> explore_probability;
    std::optional<double> alpha;
    std::optional<double> beta;
    bool conservative_constants = false;
    std::string stopping = "scenario-aware";
    bool rounding = true;
    std::optional<int> ftrl_max_iter;
};

struct BenchmarkSpec {
    bool enabled = true;
    std::optional<std::filesystem::path> fixture;
    std::optional<std::vector<int>> order;
    std::optional<std::vector<int>> relaxation_order;
    std::optional<std::vector<int>> set;
};

struct ExperimentConfig {
    nlohmann::json raw;  // after overrides, as validated
    std::string hash;    // hex FNV-1a of raw.dump()
    std::string source = "<config>";
    std::filesystem::path base_dir;
    Algorithm algorithm = Algorithm::FullInfo;
    nlohmann::json family_json;  // empty: taken from the instance, else select1
    InstanceSource instance;
    std::vector<std::uint64_t> seeds{0};
    int replicas = 1;
    std::vector<int> sweep_T;  // empty: the instance's own T
    Overrides overrides;
    BenchmarkSpec benchmark;
};

/// Validates `j` against the schema; `text` (the raw file contents, may be
/// empty) is used to anchor error messages to a line.
ExperimentConfig parse_config(const nlohmann::json& j, const std::string& source = "<config>",
                              const std::string& text = {}, const std::filesystem::path& base_dir = {});

/// Reads a config file and applies "a.b.c=value" overrides (value parsed as
/// JSON when possible, else taken as a string) plus seed/replica flags.
ExperimentConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides = {},
                             const std::optional<std::vector<std::uint64_t>>& seeds = std::nullopt,
                             const std::optional<int>& replicas = std::nullopt);

struct RunSummary {
    double avg_integral_cost = 0.0;
    double avg_benchmark_cost = 0.0;
    double avg_regret = 0.0;             // integral - benchmark
    double avg_fractional_loss = 0.0;
    double avg_fractional_benchmark = 0.0;
    double avg_fractional_regret = 0.0;
    double cost_ratio = 0.0;             // avg integral / avg benchmark
    double primary_regret = 0.0;         // fractional when available, else integral
    int explores = 0;
    int mistakes = 0;
};

/// Fractional regret when every row carries both fractional columns,
/// integral regret otherwise.
RunSummary summarize(const RegretLedger& ledger);

struct RunRecord {
    std::string config_hash;
    int T = 0;
    std::uint64_t seed = 0;
    int replica = 0;
    std::uint64_t run_seed = 0;
    std::uint64_t instance_seed = 0;
    RegretLedger ledger;
    RunSummary summary;
};

std::uint64_t replica_seed(std::uint64_t seed, int replica);

/// Builds the instance for horizon T and run seed.
ScenarioSequence build_instance(const ExperimentConfig& cfg, int T, std::uint64_t run_seed);
ConstraintFamily resolve_family(const ExperimentConfig& cfg, int n);

struct Benchmarks {
    std::optional<std::vector<int>> order;
    std::optional<std::vector<int>> relaxation_order;
    std::optional<std::vector<int>> set;
    double order_cost = std::numeric_limits<double>::quiet_NaN();
    double relaxation_cost = std::numeric_limits<double>::quiet_NaN();
    double set_cost = std::numeric_limits<double>::quiet_NaN();
    double lp_na = std::numeric_limits<double>::quiet_NaN();
};

/// Hash of the scenario sequence and family; identifies fixtures.
std::string instance_hash(const ScenarioSequence& seq, const ConstraintFamily& family);

/// Exact oracles for everything the algorithm's ledger needs; throws
/// Throws std::invalid_argument when n exceeds the oracle limits.
Benchmarks compute_benchmarks(const ScenarioSequence& seq, const ConstraintFamily& family, Algorithm algo);

/// Runs every (T, seed, replica) job on up to `threads` workers. Results are
/// ordered by (T, seed, replica) regardless of scheduling.
std::vector<RunRecord> run_experiment(const ExperimentConfig& cfg, int threads = 1);

/// PB_THREADS when set and positive, else hardware concurrency (at least 1).
int default_threads();

struct SlopeFit {
    double slope = std::numeric_limits<double>::quiet_NaN();
    double intercept = std::numeric_limits<double>::quiet_NaN();
};
/// Least squares of ln y on ln x; NaN when fewer than two positive points.
SlopeFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y);

/// ledger.csv, runs.jsonl, summary.csv, summary.json under `out`.
void write_results(const std::filesystem::path& out, const ExperimentConfig& cfg,
                   const std::vector<RunRecord>& records);

/// Ledger columns preceded by config_hash, T, seed, replica.
const std::vector<std::string>& results_columns();

/// Reads results files and writes ledger_table.csv, run_summary.csv,
/// sweep.csv, regret.svg and ratio_hist.svg into `out`. Throws ReportError.
void generate_report(const std::vector<std::filesystem::path>& results, const std::filesystem::path& out);

/// Fixture file for every instance a config would run.
nlohmann::json compute_fixtures(const ExperimentConfig& cfg);

/// The CLI: run | report | oracle | validate. Returns the exit code.
int cli_main(int argc, char** argv);

}  // namespace pbox::harness
