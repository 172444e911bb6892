#include <CLI11.hpp>
#include <fstream>
#include <iostream>

#include "pbox/harness.hpp"
#include "pbox/instance_io.hpp"

namespace pbox::harness {

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 1;

std::optional<std::vector<std::uint64_t>> opt_seeds(const std::vector<std::uint64_t>& v) {
    if (v.empty()) return std::nullopt;
    return v;
}

std::optional<int> opt_replicas(int r) {
    if (r <= 0) return std::nullopt;
    return r;
}

}  // namespace

int cli_main(int argc, char** argv) {
    CLI::App app{"Online Pandora's box experiments"};
    app.require_subcommand(1);

    std::string config, out;
    std::vector<std::string> overrides;
    std::vector<std::uint64_t> seeds;
    int replicas = 0;
    int threads = 0;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
        sub->add_option("--override", overrides, "dotted.key=value, value parsed as JSON when possible");
        sub->add_option("--seeds", seeds, "replace the config's seed list (comma separated)")->delimiter(',');
        sub->add_option("--replicas", replicas, "replicas per seed")->check(CLI::PositiveNumber);
    };

    auto* run = app.add_subcommand("run", "run an experiment and write results");
    add_common(run);
    run->add_option("--out", out, "output directory")->required();
    run->add_option("--threads", threads, "worker threads (default PB_THREADS or hardware)");

    auto* validate = app.add_subcommand("validate", "check a config without running it");
    add_common(validate);

    auto* oracle = app.add_subcommand("oracle", "compute benchmark fixtures for a config");
    add_common(oracle);
    oracle->add_option("--out", out, "fixture JSON file")->required();

    std::vector<std::string> inputs;
    auto* report = app.add_subcommand("report", "tables and plots from result directories");
    report->add_option("results", inputs, "result directories or ledger.csv files")->required();
    report->add_option("--out", out, "report directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitConfig;
    }

    try {
        if (*report) {
            std::vector<std::filesystem::path> paths(inputs.begin(), inputs.end());
            generate_report(paths, out);
            std::cout << "report written to " << out << '\n';
            return 0;
        }
        const auto cfg = load_config(config, overrides, opt_seeds(seeds), opt_replicas(replicas));
        if (*validate) {
            std::cout << "ok " << cfg.hash << '\n';
            return 0;
        }
        if (*oracle) {
            const auto fx = compute_fixtures(cfg);
            std::ofstream os(out);
            if (!os) throw std::runtime_error("cannot write " + out);
            os << fx.dump(2) << '\n';
            std::cout << fx["fixtures"].size() << " fixtures written to " << out << '\n';
            return 0;
        }
        const auto records = run_experiment(cfg, threads > 0 ? threads : default_threads());
        write_results(out, cfg, records);
        std::cout << records.size() << " runs written to " << out << '\n';
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const FormatError& e) {
        std::cerr << "invalid input: " << e.what() << '\n';
        return kExitConfig;
    } catch (const ReportError& e) {
        std::cerr << "report error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
}

}  // namespace pbox::harness
