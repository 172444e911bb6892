#include "pbox/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>

#include "pbox/bandit.hpp"
#include "pbox/ftrl.hpp"
#include "pbox/instance_io.hpp"
#include "pbox/na_benchmark.hpp"
#include "pbox/oracle.hpp"
#include "pbox/rounding.hpp"

namespace pbox::harness {

using nlohmann::json;
namespace fs = std::filesystem;

std::string to_string(Algorithm a) {
    switch (a) {
        case Algorithm::FullInfo:
            return "full-info";
        case Algorithm::Bandit:
            return "bandit";
        case Algorithm::Na:
            return "na";
    }
    return "?";
}

namespace {

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

// Line of the last key of `path` in the raw text, searching each key after
// the previous one. Falls back to line 1.
int line_of(const std::string& text, const std::vector<std::string>& path) {
    if (text.empty()) return 1;
    std::size_t pos = 0;
    for (const auto& key : path) {
        const auto found = text.find("\"" + key + "\"", pos);
        if (found == std::string::npos) break;
        pos = found;
    }
    return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(pos), '\n'));
}

class Checker {
public:
    Checker(std::string source, std::string text) : source_(std::move(source)), text_(std::move(text)) {}

    [[noreturn]] void fail(const std::vector<std::string>& path, const std::string& msg) const {
        std::string where;
        for (const auto& p : path) where += (where.empty() ? "" : ".") + p;
        throw ConfigError(source_, line_of(text_, path), (where.empty() ? "" : where + ": ") + msg);
    }

    void keys(const json& j, const std::vector<std::string>& path, std::initializer_list<const char*> allowed,
              std::initializer_list<const char*> required = {}) const {
        if (!j.is_object()) fail(path, "expected an object");
        std::set<std::string> ok(allowed.begin(), allowed.end());
        for (const auto& [k, v] : j.items())
            if (!ok.count(k)) {
                auto p = path;
                p.push_back(k);
                fail(p, "unknown key");
            }
        for (const char* r : required)
            if (!j.contains(r)) fail(path, std::string("missing required key '") + r + "'");
    }

    int integer(const json& j, const std::vector<std::string>& path, int lo, int hi = std::numeric_limits<int>::max()) const {
        if (!j.is_number_integer()) fail(path, "expected an integer");
        const auto v = j.get<long long>();
        if (v < lo || v > hi) fail(path, "value " + std::to_string(v) + " out of range");
        return static_cast<int>(v);
    }

    double number(const json& j, const std::vector<std::string>& path) const {
        if (!j.is_number()) fail(path, "expected a number");
        return j.get<double>();
    }

    bool boolean(const json& j, const std::vector<std::string>& path) const {
        if (!j.is_boolean()) fail(path, "expected true or false");
        return j.get<bool>();
    }

    std::vector<int> int_list(const json& j, const std::vector<std::string>& path) const {
        if (!j.is_array()) fail(path, "expected an array of integers");
        std::vector<int> out;
        for (const auto& v : j) out.push_back(integer(v, path, 0));
        return out;
    }

private:
    std::string source_, text_;
};

bool is_permutation_of(const std::vector<int>& v, int n) {
    if (static_cast<int>(v.size()) != n) return false;
    std::vector<int> s(v);
    std::sort(s.begin(), s.end());
    for (int i = 0; i < n; ++i)
        if (s[i] != i) return false;
    return true;
}

}  // namespace

ExperimentConfig parse_config(const json& j, const std::string& source, const std::string& text,
                              const fs::path& base_dir) {
    Checker c(source, text);
    ExperimentConfig cfg;
    cfg.raw = j;
    cfg.hash = hex(fnv1a(j.dump()));
    cfg.source = source;
    cfg.base_dir = base_dir;
    c.keys(j, {}, {"schema_version", "algorithm", "family", "instance", "seeds", "replicas", "sweep", "overrides", "benchmark"},
           {"schema_version", "algorithm", "instance"});
    if (c.integer(j["schema_version"], {"schema_version"}, 0) != kSchemaVersion)
        c.fail({"schema_version"}, "unsupported schema version (expected " + std::to_string(kSchemaVersion) + ")");

    if (!j["algorithm"].is_string()) c.fail({"algorithm"}, "expected a string");
    const auto algo = j["algorithm"].get<std::string>();
    if (algo == "full-info") cfg.algorithm = Algorithm::FullInfo;
    else if (algo == "bandit") cfg.algorithm = Algorithm::Bandit;
    else if (algo == "na") cfg.algorithm = Algorithm::Na;
    else c.fail({"algorithm"}, "must be one of full-info, bandit, na");

    const auto& inst = j["instance"];
    if (inst.is_object() && inst.contains("file")) {
        c.keys(inst, {"instance"}, {"file"});
        if (!inst["file"].is_string()) c.fail({"instance", "file"}, "expected a path string");
        fs::path p = inst["file"].get<std::string>();
        cfg.instance.file = p.is_absolute() ? p : base_dir / p;
    } else {
        c.keys(inst, {"instance"}, {"generator", "n", "T", "params", "seed"}, {"generator", "n", "T"});
        if (!inst["generator"].is_string()) c.fail({"instance", "generator"}, "expected a string");
        cfg.instance.generator = inst["generator"].get<std::string>();
        static const std::set<std::string> kinds{"mssc", "uniform-costs", "clustered", "adversarial-alternating"};
        if (!kinds.count(cfg.instance.generator))
            c.fail({"instance", "generator"}, "unknown generator '" + cfg.instance.generator + "'");
        cfg.instance.n = c.integer(inst["n"], {"instance", "n"}, 1);
        cfg.instance.T = c.integer(inst["T"], {"instance", "T"}, 1);
        if (inst.contains("params")) {
            if (!inst["params"].is_object()) c.fail({"instance", "params"}, "expected an object");
            for (const auto& [k, v] : inst["params"].items())
                cfg.instance.params[k] = c.number(v, {"instance", "params", k});
        }
        if (inst.contains("seed")) cfg.instance.seed = static_cast<std::uint64_t>(c.integer(inst["seed"], {"instance", "seed"}, 0));
    }

    if (j.contains("family")) {
        cfg.family_json = j["family"];
        const int n = cfg.instance.file ? 0 : cfg.instance.n;
        if (n > 0) {
            try {
                (void)family_from_json(cfg.family_json, n);
            } catch (const std::exception& e) {
                c.fail({"family"}, e.what());
            }
        }
    }

    if (j.contains("seeds")) {
        if (!j["seeds"].is_array() || j["seeds"].empty()) c.fail({"seeds"}, "expected a nonempty array of integers");
        cfg.seeds.clear();
        for (const auto& s : j["seeds"]) cfg.seeds.push_back(static_cast<std::uint64_t>(c.integer(s, {"seeds"}, 0)));
    }
    if (j.contains("replicas")) cfg.replicas = c.integer(j["replicas"], {"replicas"}, 1, 1000000);
    if (j.contains("sweep")) {
        c.keys(j["sweep"], {"sweep"}, {"T"}, {"T"});
        if (!j["sweep"]["T"].is_array() || j["sweep"]["T"].empty()) c.fail({"sweep", "T"}, "expected a nonempty array");
        for (const auto& t : j["sweep"]["T"]) cfg.sweep_T.push_back(c.integer(t, {"sweep", "T"}, 1));
    }

    if (j.contains("overrides")) {
        const auto& o = j["overrides"];
        c.keys(o, {"overrides"}, {"eta", "interval_length", "alt_interval_formula", "lipschitz", "explore_probability",
                                  "alpha", "beta", "conservative_constants", "stopping", "rounding", "ftrl_max_iter"});
        auto& ov = cfg.overrides;
        auto positive = [&](const char* key) {
            const double v = c.number(o[key], {"overrides", key});
            if (!(v > 0.0)) c.fail({"overrides", key}, "must be positive");
            return v;
        };
        if (o.contains("eta")) ov.eta = positive("eta");
        if (o.contains("interval_length")) ov.interval_length = c.integer(o["interval_length"], {"overrides", "interval_length"}, 1);
        if (o.contains("alt_interval_formula")) ov.alt_interval_formula = c.boolean(o["alt_interval_formula"], {"overrides", "alt_interval_formula"});
        if (o.contains("lipschitz")) ov.lipschitz = positive("lipschitz");
        if (o.contains("explore_probability")) {
            ov.explore_probability = positive("explore_probability");
            if (*ov.explore_probability > 1.0) c.fail({"overrides", "explore_probability"}, "must be in (0, 1]");
        }
        if (o.contains("alpha")) ov.alpha = positive("alpha");
        if (o.contains("beta")) ov.beta = positive("beta");
        if (o.contains("conservative_constants")) ov.conservative_constants = c.boolean(o["conservative_constants"], {"overrides", "conservative_constants"});
        if (o.contains("stopping")) {
            if (!o["stopping"].is_string()) c.fail({"overrides", "stopping"}, "expected a string");
            ov.stopping = o["stopping"].get<std::string>();
            if (ov.stopping != "scenario-aware" && ov.stopping != "ski-deterministic" && ov.stopping != "ski-randomized")
                c.fail({"overrides", "stopping"}, "must be scenario-aware, ski-deterministic or ski-randomized");
        }
        if (o.contains("rounding")) ov.rounding = c.boolean(o["rounding"], {"overrides", "rounding"});
        if (o.contains("ftrl_max_iter")) ov.ftrl_max_iter = c.integer(o["ftrl_max_iter"], {"overrides", "ftrl_max_iter"}, 1);
    }

    if (j.contains("benchmark")) {
        const auto& b = j["benchmark"];
        c.keys(b, {"benchmark"}, {"enabled", "fixture", "order", "relaxation_order", "set"});
        auto& bs = cfg.benchmark;
        if (b.contains("enabled")) bs.enabled = c.boolean(b["enabled"], {"benchmark", "enabled"});
        if (b.contains("fixture")) {
            if (!b["fixture"].is_string()) c.fail({"benchmark", "fixture"}, "expected a path string");
            fs::path p = b["fixture"].get<std::string>();
            bs.fixture = p.is_absolute() ? p : base_dir / p;
        }
        if (b.contains("order")) bs.order = c.int_list(b["order"], {"benchmark", "order"});
        if (b.contains("relaxation_order")) bs.relaxation_order = c.int_list(b["relaxation_order"], {"benchmark", "relaxation_order"});
        if (b.contains("set")) bs.set = c.int_list(b["set"], {"benchmark", "set"});
        if (!cfg.instance.file) {
            const int n = cfg.instance.n;
            if (bs.order && !is_permutation_of(*bs.order, n)) c.fail({"benchmark", "order"}, "must be a permutation of 0..n-1");
            if (bs.relaxation_order && !is_permutation_of(*bs.relaxation_order, n))
                c.fail({"benchmark", "relaxation_order"}, "must be a permutation of 0..n-1");
            if (bs.set)
                for (int v : *bs.set)
                    if (v >= n) c.fail({"benchmark", "set"}, "box out of range");
        }
    }
    return cfg;
}

namespace {

json parse_override_value(const std::string& v) {
    try {
        return json::parse(v);
    } catch (const json::parse_error&) {
        return v;
    }
}

}  // namespace

ExperimentConfig load_config(const fs::path& path, const std::vector<std::string>& overrides,
                             const std::optional<std::vector<std::uint64_t>>& seeds, const std::optional<int>& replicas) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path.string(), 1, "cannot open config file");
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        const auto upto = std::min<std::size_t>(e.byte, text.size());
        const int line = 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n'));
        throw ConfigError(path.string(), line, std::string("malformed JSON: ") + e.what());
    }
    for (const auto& o : overrides) {
        const auto eq = o.find('=');
        if (eq == std::string::npos || eq == 0) throw ConfigError("--override", 1, "expected key=value, got '" + o + "'");
        std::string key = o.substr(0, eq);
        json* node = &j;
        std::size_t start = 0;
        while (true) {
            const auto dot = key.find('.', start);
            const auto part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
            if (part.empty()) throw ConfigError("--override", 1, "empty path component in '" + key + "'");
            if (dot == std::string::npos) {
                (*node)[part] = parse_override_value(o.substr(eq + 1));
                break;
            }
            node = &(*node)[part];
            if (!node->is_object() && !node->is_null()) throw ConfigError("--override", 1, "'" + part + "' is not an object");
            start = dot + 1;
        }
    }
    if (seeds) j["seeds"] = *seeds;
    if (replicas) j["replicas"] = *replicas;
    return parse_config(j, path.string(), text,
                        path.has_parent_path() ? path.parent_path() : fs::path("."));
}

RunSummary summarize(const RegretLedger& ledger) {
    RunSummary s;
    const int T = ledger.horizon();
    if (T == 0) return s;
    s.avg_integral_cost = ledger.average_integral_cost();
    s.avg_benchmark_cost = ledger.average_benchmark_cost();
    s.avg_regret = ledger.average_regret(1.0);
    s.avg_fractional_loss = ledger.average_fractional_loss();
    s.avg_fractional_benchmark = ledger.average_fractional_benchmark();
    s.avg_fractional_regret = ledger.average_fractional_regret();
    s.cost_ratio = s.avg_integral_cost / s.avg_benchmark_cost;
    const bool fractional = std::all_of(ledger.rows.begin(), ledger.rows.end(), [](const LedgerRow& r) {
        return !std::isnan(r.fractional_loss) && !std::isnan(r.fractional_benchmark);
    });
    s.primary_regret = fractional ? s.avg_fractional_regret : s.avg_regret;
    s.explores = ledger.explore_count();
    s.mistakes = ledger.mistake_count();
    return s;
}

std::uint64_t replica_seed(std::uint64_t seed, int replica) {
    if (replica == 0) return seed;
    CounterRng r(seed, 0x5EED0000ULL + static_cast<std::uint64_t>(replica));
    return r();
}

ScenarioSequence build_instance(const ExperimentConfig& cfg, int T, std::uint64_t run_seed) {
    if (cfg.instance.file) {
        json j;
        try {
            j = read_json_file(*cfg.instance.file);
        } catch (const FormatError& e) {
            throw ConfigError(cfg.source, line_of(cfg.raw.dump(), {"instance", "file"}), e.what());
        }
        auto seq = instance_from_json(j);
        if (T > seq.horizon())
            throw ConfigError(cfg.source, 1, "sweep T=" + std::to_string(T) + " exceeds the instance file's " +
                                                 std::to_string(seq.horizon()) + " scenarios");
        seq.scenarios.resize(static_cast<std::size_t>(T));
        return seq;
    }
    const std::uint64_t seed = cfg.instance.seed ? *cfg.instance.seed : run_seed;
    return generate_instance(cfg.instance.generator, cfg.instance.n, T, cfg.instance.params, seed);
}

ConstraintFamily resolve_family(const ExperimentConfig& cfg, int n) {
    if (!cfg.family_json.is_null()) return family_from_json(cfg.family_json, n);
    if (cfg.instance.file) {
        const auto j = read_json_file(*cfg.instance.file);
        if (auto f = instance_family(j)) return *f;
    }
    return ConstraintFamily::select1();
}

std::string instance_hash(const ScenarioSequence& seq, const ConstraintFamily& family) {
    std::uint64_t h = fnv1a(family.name());
    ScenarioHash sh;
    h = CounterRng::mix(h ^ static_cast<std::uint64_t>(seq.n));
    for (const auto& s : seq.scenarios) h = CounterRng::mix(h ^ sh(s));
    return hex(h);
}

Benchmarks compute_benchmarks(const ScenarioSequence& seq, const ConstraintFamily& family, Algorithm algo) {
    Benchmarks b;
    const auto ws = oracle::dedupe(seq.scenarios);
    if (algo == Algorithm::Na) {
        if (seq.n > 16) throw std::invalid_argument("n = " + std::to_string(seq.n) + " exceeds the set-oracle limit 16");
        const auto set = oracle::best_nonadaptive_set(seq.scenarios, family);
        b.set = set.set;
        b.set_cost = set.average.as_double();
        if (family.kind() != ConstraintFamily::Kind::Matroid || seq.n <= 12) {
            const auto e = oracle::lp_na(seq.scenarios, family);
            b.lp_na = e.trivially_infeasible ? HUGE_VAL : oracle::float_relaxation_value(e).as_double();
        }
        return b;
    }
    if (seq.n > 8) throw std::invalid_argument("n = " + std::to_string(seq.n) + " exceeds the permutation-oracle limit 8");
    const auto p = oracle::best_fixed_permutation(seq.scenarios, family);
    const auto r = oracle::best_permutation_relaxation(seq.scenarios, family);
    b.order = p.order;
    b.order_cost = p.average.as_double();
    b.relaxation_order = r.order;
    b.relaxation_cost = r.average.as_double();
    return b;
}

int default_threads() {
    if (const char* env = std::getenv("PB_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

struct Job {
    int T;
    std::uint64_t seed;
    int replica;
};

class BenchmarkStore {
public:
    BenchmarkStore(const ExperimentConfig& cfg) : cfg_(cfg) {
        if (cfg.benchmark.fixture) {
            try {
                fixture_ = read_json_file(*cfg.benchmark.fixture);
            } catch (const FormatError& e) {
                throw ConfigError(cfg.source, 1, e.what());
            }
        }
    }

    Benchmarks get(const ScenarioSequence& seq, const ConstraintFamily& family) {
        Benchmarks b;
        if (!cfg_.benchmark.enabled) return b;
        const bool explicit_given = cfg_.benchmark.order || cfg_.benchmark.relaxation_order || cfg_.benchmark.set;
        if (explicit_given) {
            b.order = cfg_.benchmark.order;
            b.relaxation_order = cfg_.benchmark.relaxation_order ? cfg_.benchmark.relaxation_order : cfg_.benchmark.order;
            b.set = cfg_.benchmark.set;
            return b;
        }
        const auto key = instance_hash(seq, family);
        if (!fixture_.is_null()) return from_fixture(key);
        std::lock_guard lock(mu_);
        auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;
        Benchmarks fresh;
        try {
            fresh = compute_benchmarks(seq, family, cfg_.algorithm);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(cfg_.source, line_of(cfg_.raw.dump(), {"instance"}),
                              std::string(e.what()) + "; supply benchmark.fixture or benchmark.order/set, or set benchmark.enabled=false");
        }
        cache_.emplace(key, fresh);
        return fresh;
    }

private:
    Benchmarks from_fixture(const std::string& key) const {
        for (const auto& f : fixture_.at("fixtures")) {
            if (f.at("instance_hash").get<std::string>() != key) continue;
            Benchmarks b;
            if (f.contains("order") && !f["order"].is_null()) b.order = f["order"].get<std::vector<int>>();
            if (f.contains("relaxation_order") && !f["relaxation_order"].is_null())
                b.relaxation_order = f["relaxation_order"].get<std::vector<int>>();
            if (f.contains("set") && !f["set"].is_null()) b.set = f["set"].get<std::vector<int>>();
            return b;
        }
        throw std::runtime_error("fixture has no entry for instance " + key);
    }

    const ExperimentConfig& cfg_;
    json fixture_;
    std::mutex mu_;
    std::map<std::string, Benchmarks> cache_;
};

StoppingRule stopping_rule(const std::string& s) {
    if (s == "ski-deterministic") return StoppingRule::SkiRentalDeterministic;
    if (s == "ski-randomized") return StoppingRule::SkiRentalRandomized;
    return StoppingRule::ScenarioAware;
}

RunRecord run_job(const ExperimentConfig& cfg, const Job& job, BenchmarkStore& store) {
    RunRecord rec;
    rec.config_hash = cfg.hash;
    rec.T = job.T;
    rec.seed = job.seed;
    rec.replica = job.replica;
    rec.run_seed = replica_seed(job.seed, job.replica);
    rec.instance_seed = cfg.instance.seed ? *cfg.instance.seed : rec.run_seed;
    const auto seq = build_instance(cfg, job.T, rec.run_seed);
    const auto family = resolve_family(cfg, seq.n);
    const auto bench = store.get(seq, family);
    const auto& ov = cfg.overrides;

    FtrlSettings ftrl;
    if (ov.ftrl_max_iter) ftrl.max_iter = *ov.ftrl_max_iter;
    Rounder rounder;
    if (ov.rounding) {
        const auto rule = stopping_rule(ov.stopping);
        rounder = [family, rule](const FractionalSchedule& x, const Scenario& s, CounterRng& rng) {
            return round_schedule(x, s, family, rng, rule).cost;
        };
    }
    switch (cfg.algorithm) {
        case Algorithm::FullInfo: {
            FullInfoSettings st;
            st.eta = ov.eta;
            st.ftrl = ftrl;
            st.rounder = rounder;
            st.benchmark_order = bench.order;
            st.fractional_benchmark_order = bench.relaxation_order;
            st.seed = rec.run_seed;
            rec.ledger = run_full_information(seq, family, st);
            break;
        }
        case Algorithm::Bandit: {
            BanditSettings st;
            st.interval_length = ov.interval_length;
            st.alt_interval_formula = ov.alt_interval_formula;
            st.L = ov.lipschitz;
            st.eta = ov.eta;
            st.ftrl = ftrl;
            st.rounder = rounder;
            st.benchmark_order = bench.order;
            st.fractional_benchmark_order = bench.relaxation_order;
            st.seed = rec.run_seed;
            rec.ledger = run_bandit(seq, family, st);
            break;
        }
        case Algorithm::Na: {
            NaRunSettings st;
            st.explore_probability = ov.explore_probability;
            if (ov.conservative_constants) st.constants = NaConstants::conservative();
            if (ov.alpha) st.constants.alpha = *ov.alpha;
            if (ov.beta) st.constants.beta = *ov.beta;
            st.benchmark_set = bench.set;
            st.seed = rec.run_seed;
            rec.ledger = run_na(seq, family, st);
            break;
        }
    }
    rec.summary = summarize(rec.ledger);
    return rec;
}

}  // namespace

std::vector<RunRecord> run_experiment(const ExperimentConfig& cfg, int threads) {
    std::vector<int> Ts = cfg.sweep_T;
    if (Ts.empty())
        Ts.push_back(cfg.instance.file ? instance_from_json(read_json_file(*cfg.instance.file)).horizon() : cfg.instance.T);
    {
        // Family-level checks that need n.
        const auto seq = build_instance(cfg, Ts.front(), cfg.seeds.front());
        ConstraintFamily family = ConstraintFamily::select1();
        try {
            family = resolve_family(cfg, seq.n);
        } catch (const std::exception& e) {
            throw ConfigError(cfg.source, line_of(cfg.raw.dump(), {"family"}), e.what());
        }
        const bool single = family.kind() == ConstraintFamily::Kind::Select1 ||
                            (family.kind() == ConstraintFamily::Kind::SelectK && family.required() == 1);
        if (cfg.overrides.stopping != "scenario-aware" && !single)
            throw ConfigError(cfg.source, 1, "overrides.stopping: ski-rental stopping needs a select-1 family");
        if (cfg.algorithm == Algorithm::Na && family.kind() == ConstraintFamily::Kind::Matroid &&
            !family.matroid().supports_separation())
            throw ConfigError(cfg.source, 1, "family: the na algorithm needs a uniform or partition matroid");
    }
    std::vector<Job> jobs;
    for (int T : Ts)
        for (auto seed : cfg.seeds)
            for (int r = 0; r < cfg.replicas; ++r) jobs.push_back({T, seed, r});

    BenchmarkStore store(cfg);
    std::vector<RunRecord> out(jobs.size());
    std::vector<std::exception_ptr> errors(jobs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < jobs.size();) {
            try {
                out[i] = run_job(cfg, jobs[i], store);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const int nthreads = std::clamp(threads, 1, static_cast<int>(std::max<std::size_t>(jobs.size(), 1)));
    std::vector<std::thread> pool;
    for (int t = 1; t < nthreads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

SlopeFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y) {
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < x.size() && i < y.size(); ++i)
        if (x[i] > 0.0 && y[i] > 0.0 && std::isfinite(y[i])) {
            lx.push_back(std::log(x[i]));
            ly.push_back(std::log(y[i]));
        }
    SlopeFit f;
    if (lx.size() < 2) return f;
    const double n = static_cast<double>(lx.size());
    const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / n;
    const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
    }
    if (sxx == 0.0) return f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    return f;
}

const std::vector<std::string>& results_columns() {
    static const std::vector<std::string> cols = [] {
        std::vector<std::string> c{"config_hash", "T", "seed", "replica"};
        for (const auto& k : RegretLedger::csv_columns()) c.push_back(k);
        return c;
    }();
    return cols;
}

namespace {

json summary_json(const RunSummary& s) {
    auto num = [](double v) { return std::isfinite(v) ? json(v) : json(format_number(v)); };
    return {{"avg_integral_cost", num(s.avg_integral_cost)},
            {"avg_benchmark_cost", num(s.avg_benchmark_cost)},
            {"avg_regret", num(s.avg_regret)},
            {"avg_fractional_loss", num(s.avg_fractional_loss)},
            {"avg_fractional_benchmark", num(s.avg_fractional_benchmark)},
            {"avg_fractional_regret", num(s.avg_fractional_regret)},
            {"cost_ratio", num(s.cost_ratio)},
            {"primary_regret", num(s.primary_regret)},
            {"explores", s.explores},
            {"mistakes", s.mistakes}};
}

struct TRow {
    int T = 0;
    int runs = 0;
    double mean_regret = 0.0, std_regret = 0.0, mean_integral_regret = 0.0;
    double mean_ratio = 0.0, min_ratio = 0.0, max_ratio = 0.0;
    double mean_mistakes = 0.0, mean_explores = 0.0;
};

std::vector<TRow> per_T(const std::vector<RunRecord>& records) {
    std::map<int, std::vector<const RunRecord*>> by;
    for (const auto& r : records) by[r.T].push_back(&r);
    std::vector<TRow> rows;
    for (const auto& [T, rs] : by) {
        TRow row;
        row.T = T;
        row.runs = static_cast<int>(rs.size());
        const double n = row.runs;
        row.min_ratio = HUGE_VAL;
        row.max_ratio = -HUGE_VAL;
        for (const auto* r : rs) {
            row.mean_regret += r->summary.primary_regret / n;
            row.mean_integral_regret += r->summary.avg_regret / n;
            row.mean_ratio += r->summary.cost_ratio / n;
            row.min_ratio = std::min(row.min_ratio, r->summary.cost_ratio);
            row.max_ratio = std::max(row.max_ratio, r->summary.cost_ratio);
            row.mean_mistakes += r->summary.mistakes / n;
            row.mean_explores += r->summary.explores / n;
        }
        if (rs.size() > 1) {
            double ss = 0.0;
            for (const auto* r : rs) ss += (r->summary.primary_regret - row.mean_regret) * (r->summary.primary_regret - row.mean_regret);
            row.std_regret = std::sqrt(ss / (n - 1.0));
        }
        rows.push_back(row);
    }
    return rows;
}

void write_ledger_rows(std::ostream& os, const RunRecord& r) {
    for (const auto& row : r.ledger.rows)
        os << r.config_hash << ',' << r.T << ',' << r.seed << ',' << r.replica << ',' << row.round << ','
           << format_number(row.fractional_loss) << ',' << format_number(row.integral_cost) << ','
           << format_number(row.benchmark_cost) << ',' << format_number(row.fractional_benchmark) << ','
           << (row.explore ? 1 : 0) << ',' << (row.mistake ? 1 : 0) << '\n';
}

std::ofstream open_out(const fs::path& p) {
    std::ofstream os(p, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + p.string());
    return os;
}

}  // namespace

void write_results(const fs::path& out, const ExperimentConfig& cfg, const std::vector<RunRecord>& records) {
    fs::create_directories(out);
    // Per-replica parts first, merged in (T, seed, replica) order.
    const fs::path tmp = out / ".parts";
    fs::create_directories(tmp);
    std::vector<std::size_t> order(records.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto& x = records[a];
        const auto& y = records[b];
        return std::tie(x.T, x.seed, x.replica) < std::tie(y.T, y.seed, y.replica);
    });
    for (std::size_t i = 0; i < records.size(); ++i) {
        auto os = open_out(tmp / ("part_" + std::to_string(i) + ".csv"));
        write_ledger_rows(os, records[i]);
    }
    {
        auto os = open_out(out / "ledger.csv");
        const auto& cols = results_columns();
        for (std::size_t c = 0; c < cols.size(); ++c) os << (c ? "," : "") << cols[c];
        os << '\n';
        for (std::size_t i : order) {
            std::ifstream part(tmp / ("part_" + std::to_string(i) + ".csv"), std::ios::binary);
            os << part.rdbuf();
        }
    }
    fs::remove_all(tmp);

    {
        auto os = open_out(out / "runs.jsonl");
        for (std::size_t i : order) {
            const auto& r = records[i];
            json j = {{"config_hash", r.config_hash},
                      {"algorithm", to_string(cfg.algorithm)},
                      {"T", r.T},
                      {"seed", r.seed},
                      {"replica", r.replica},
                      {"run_seed", r.run_seed},
                      {"instance_seed", r.instance_seed},
                      {"summary", summary_json(r.summary)}};
            os << j.dump() << '\n';
        }
    }

    const auto rows = per_T(records);
    std::vector<double> xs, ys;
    for (const auto& r : rows) {
        xs.push_back(r.T);
        ys.push_back(r.mean_regret);
    }
    const auto fit = fit_loglog(xs, ys);
    {
        auto os = open_out(out / "summary.csv");
        os << "T,runs,mean_regret,std_regret,mean_integral_regret,mean_cost_ratio,min_cost_ratio,max_cost_ratio,"
              "mean_mistakes,mean_explores,slope\n";
        for (const auto& r : rows)
            os << r.T << ',' << r.runs << ',' << format_number(r.mean_regret) << ',' << format_number(r.std_regret) << ','
               << format_number(r.mean_integral_regret) << ',' << format_number(r.mean_ratio) << ','
               << format_number(r.min_ratio) << ',' << format_number(r.max_ratio) << ','
               << format_number(r.mean_mistakes) << ',' << format_number(r.mean_explores) << ','
               << format_number(fit.slope) << '\n';
    }
    {
        json jr = json::array();
        auto num = [](double v) { return std::isfinite(v) ? json(v) : json(format_number(v)); };
        for (const auto& r : rows)
            jr.push_back({{"T", r.T},
                          {"runs", r.runs},
                          {"mean_regret", num(r.mean_regret)},
                          {"std_regret", num(r.std_regret)},
                          {"mean_integral_regret", num(r.mean_integral_regret)},
                          {"mean_cost_ratio", num(r.mean_ratio)},
                          {"min_cost_ratio", num(r.min_ratio)},
                          {"max_cost_ratio", num(r.max_ratio)},
                          {"mean_mistakes", num(r.mean_mistakes)},
                          {"mean_explores", num(r.mean_explores)}});
        json j = {{"schema_version", kSchemaVersion},
                  {"config_hash", cfg.hash},
                  {"algorithm", to_string(cfg.algorithm)},
                  {"rows", jr},
                  {"slope", num(fit.slope)},
                  {"intercept", num(fit.intercept)}};
        auto os = open_out(out / "summary.json");
        os << j.dump(2) << '\n';
    }
}

json compute_fixtures(const ExperimentConfig& cfg) {
    std::vector<int> Ts = cfg.sweep_T;
    if (Ts.empty())
        Ts.push_back(cfg.instance.file ? instance_from_json(read_json_file(*cfg.instance.file)).horizon() : cfg.instance.T);
    json list = json::array();
    std::set<std::string> seen;
    auto opt_vec = [](const std::optional<std::vector<int>>& v) { return v ? json(*v) : json(nullptr); };
    auto num = [](double v) { return std::isfinite(v) ? json(v) : json(format_number(v)); };
    for (int T : Ts)
        for (auto seed : cfg.seeds)
            for (int r = 0; r < cfg.replicas; ++r) {
                const auto run_seed = replica_seed(seed, r);
                const auto seq = build_instance(cfg, T, run_seed);
                const auto family = resolve_family(cfg, seq.n);
                const auto key = instance_hash(seq, family);
                if (!seen.insert(key).second) continue;
                const auto b = compute_benchmarks(seq, family, cfg.algorithm);
                list.push_back({{"instance_hash", key},
                                {"T", T},
                                {"instance_seed", cfg.instance.seed ? *cfg.instance.seed : run_seed},
                                {"family", family_to_json(family)},
                                {"order", opt_vec(b.order)},
                                {"order_cost", num(b.order_cost)},
                                {"relaxation_order", opt_vec(b.relaxation_order)},
                                {"relaxation_cost", num(b.relaxation_cost)},
                                {"set", opt_vec(b.set)},
                                {"set_cost", num(b.set_cost)},
                                {"lp_na", num(b.lp_na)}});
            }
    return {{"schema_version", kSchemaVersion}, {"config_hash", cfg.hash}, {"fixtures", list}};
}

}  // namespace pbox::harness
