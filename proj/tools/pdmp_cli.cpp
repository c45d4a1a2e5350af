// pdmp: run, compare and data-simulation front end.
//
//   pdmp run           --config exp.yaml [--seed S] [--out DIR] [--threads N]
//   pdmp compare       --config exp.yaml [--seed S] [--out DIR] [--threads N]
//   pdmp simulate-data --config data.yaml | --kind logistic|lgcp  [--seed S] [--out DIR]
//
// Exit status: 0 success, 1 runtime failure, 2 configuration error.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "pdmp/experiment.hpp"

namespace ex = pdmp::experiment;

namespace {

struct CommonOptions {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::optional<std::size_t> threads;
};

void add_common(CLI::App* cmd, CommonOptions& o, bool config_required)
{
    auto* opt = cmd->add_option("--config", o.config, "YAML configuration file");
    if (config_required) {
        opt->required();
    }
    cmd->add_option("--seed", o.seed, "base seed (overrides the config)");
    cmd->add_option("--out", o.out, "output directory (overrides the config)");
    cmd->add_option("--threads", o.threads, "worker threads (0 = all cores)");
}

int run_experiment(const CommonOptions& o, bool comparison)
{
    ex::ExperimentConfig config = ex::load_config(o.config);
    if (o.seed) {
        config.seed = *o.seed;
    }
    if (o.threads) {
        config.threads = *o.threads;
    }
    if (comparison) {
        ex::validate_for_compare(config);
    }
    std::filesystem::path out = !o.out.empty() ? std::filesystem::path(o.out)
                                               : config.out.value_or(std::filesystem::path("results") / config.name);
    const auto result = ex::run_experiment(config);
    std::cout << ex::write_reports(result, out, comparison);
    std::cout << "outputs written to " << out.string() << '\n';
    return 0;
}

int simulate(const CommonOptions& o, const std::string& kind)
{
    ex::SimulateConfig config;
    if (!o.config.empty()) {
        std::ifstream in(o.config, std::ios::binary);
        if (!in) {
            throw ex::ConfigError("cannot read config file: " + o.config);
        }
        std::ostringstream ss;
        ss << in.rdbuf();
        config = ex::parse_simulate_config(ss.str(), o.config);
        if (!kind.empty()) {
            throw ex::ConfigError("--kind cannot be combined with --config");
        }
    } else if (kind == "logistic") {
        config.kind = ex::TargetKind::Logistic;
    } else if (kind == "lgcp") {
        config.kind = ex::TargetKind::Lgcp;
    } else {
        throw ex::ConfigError("simulate-data needs --config or --kind logistic|lgcp");
    }
    if (o.seed) {
        config.seed = *o.seed;
    }
    const std::filesystem::path dir = o.out.empty() ? std::filesystem::path(".") : std::filesystem::path(o.out);
    const auto path = ex::simulate_data(config, dir);
    std::cout << "wrote " << path.string() << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Piecewise deterministic Markov process samplers: experiments and datasets"};
    app.require_subcommand(1);

    CommonOptions run_opts;
    CommonOptions compare_opts;
    CommonOptions sim_opts;
    std::string kind;
    auto* run_cmd = app.add_subcommand("run", "run replicates and write per-replicate and aggregate reports");
    add_common(run_cmd, run_opts, true);
    auto* compare_cmd = app.add_subcommand("compare", "compare two or more samplers at equal budgets");
    add_common(compare_cmd, compare_opts, true);
    auto* sim_cmd = app.add_subcommand("simulate-data", "simulate a logistic or lgcp dataset CSV");
    add_common(sim_cmd, sim_opts, false);
    sim_cmd->add_option("--kind", kind, "logistic or lgcp (defaults for the remaining parameters)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (run_cmd->parsed()) {
            return run_experiment(run_opts, false);
        }
        if (compare_cmd->parsed()) {
            return run_experiment(compare_opts, true);
        }
        return simulate(sim_opts, kind);
    } catch (const ex::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
