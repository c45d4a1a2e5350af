// Experiment runner behind the command line tool: YAML configuration,
// replicate scheduling over a thread pool, per-replicate estimators and the
// CSV / text reports.
#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pdmp/diagnostics.hpp"
#include "pdmp/samplers.hpp"
#include "pdmp/targets.hpp"

namespace pdmp::experiment {

/// Invalid configuration; the tool exits with status 2.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A replicate failed; the message carries the replicate context. Exit 1.
class RunFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class BudgetKind { RateEvals, Horizon, Events, WallSeconds };

struct Budget {
    BudgetKind kind = BudgetKind::RateEvals;
    double value = 0.0;

    StopRule stop_rule() const;
    std::string describe() const;
    bool machine_relative() const noexcept { return kind == BudgetKind::WallSeconds; }
};

enum class TargetKind { Banana, Mvn1, Mvn2, MvnIdentity, Logistic, Lgcp };

const char* to_string(TargetKind kind) noexcept;

struct TargetConfig {
    TargetKind kind = TargetKind::Mvn1;
    std::vector<double> kappa{1.0};       // banana; one configuration per value
    std::vector<std::size_t> dim{10};     // mvn families; one configuration per value
    std::optional<std::filesystem::path> data;  // logistic / lgcp dataset CSV
    std::optional<std::uint64_t> data_seed;     // simulate when no data path
    std::size_t observations = 40;        // logistic N
    std::size_t covariates = 10;          // logistic d
    LgcpParams lgcp;
    double window = 1.0;                  // thinning window for General profiles
};

struct SamplerConfig {
    std::string label;  // unique; used in file names
    SamplerSpec spec;
};

enum class InitMode { Zero, Draw, Map };
enum class KsMode { None, Marginal, TwoSample };

struct ExperimentConfig {
    std::string name = "experiment";
    std::vector<SamplerConfig> samplers;
    TargetConfig target;
    Budget budget;
    std::size_t replicates = 1;
    std::size_t discretization = 1000;
    std::uint64_t seed = 0;
    InitMode init = InitMode::Zero;
    KsMode ks = KsMode::None;
    double ks_reference_scale = 10.0;  // two-sample mode: reference budget multiple
    bool write_samples = false;
    std::size_t threads = 0;           // 0 = hardware concurrency
    std::optional<std::filesystem::path> out;
};

/// Parses and validates a YAML document. Errors name the file and line.
ExperimentConfig parse_config(const std::string& text, const std::string& source = "<config>",
                              const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);
/// Semantic checks shared by run and compare; throws ConfigError.
void validate(const ExperimentConfig& config);
/// compare additionally needs >= 2 samplers and a KS mode.
void validate_for_compare(const ExperimentConfig& config);

struct SimulateConfig {
    TargetKind kind = TargetKind::Logistic;
    std::size_t observations = 40;
    std::size_t covariates = 10;
    LgcpParams lgcp;
    std::uint64_t seed = 0;
    std::string file;  // defaults to "<kind>.csv"
};

SimulateConfig parse_simulate_config(const std::string& text, const std::string& source = "<config>");
/// Writes the dataset and returns its path.
std::filesystem::path simulate_data(const SimulateConfig& config, const std::filesystem::path& out_dir);

// --- Running -----------------------------------------------------------------

/// One point of a sweep (a kappa value or a dimension) with its target.
struct Configuration {
    std::size_t index = 0;
    std::string label;
    double kappa = 0.0;
    std::size_t dim = 0;
    std::shared_ptr<const Target> target;
};

std::vector<Configuration> build_configurations(const ExperimentConfig& config);

struct ReplicateResult {
    std::size_t configuration = 0;
    std::size_t sampler = 0;
    std::size_t replicate = 0;
    std::uint64_t stream = 0;
    RunResult run;
    std::size_t rows = 0;
    Vector path_mean;
    Vector path_mean_se;
    Vector second_moment;
    Vector ess;
    Vector ks;  // empty when KS is off
    SampleMatrix samples;  // kept only when write_samples is set
};

struct ExperimentResult {
    ExperimentConfig config;
    std::vector<Configuration> configurations;
    std::vector<ReplicateResult> replicates;  // ordered (configuration, sampler, replicate)
};

/// Random stream of replicate r in configuration c; shared by all samplers
/// so that comparisons use common random numbers.
std::uint64_t replicate_stream(std::size_t configuration, std::size_t replicate) noexcept;

ExperimentResult run_experiment(const ExperimentConfig& config);

// --- Reports -------------------------------------------------------------------

/// Named per-replicate scalar metrics, in column order.
std::vector<std::string> metric_names(const ExperimentConfig& config);
Vector metric_values(const ExperimentConfig& config, const ReplicateResult& r);

struct AggregateRow {
    std::size_t configuration = 0;
    std::size_t sampler = 0;
    std::size_t replicates = 0;
    Vector mean;  // per metric
    Vector se;    // sd / sqrt(R); NaN for R = 1
};

std::vector<AggregateRow> aggregate(const ExperimentResult& result);

/// Writes replicates/, replicates.csv, aggregate.csv, ratios.csv (two or more
/// samplers), comparison.csv (compare) and report.txt. Returns report text.
std::string write_reports(const ExperimentResult& result, const std::filesystem::path& out_dir,
                          bool comparison);

std::string replicate_csv(const ExperimentResult& result, const ReplicateResult& r);
std::string replicate_file_name(const ExperimentResult& result, const ReplicateResult& r);

}  // namespace pdmp::experiment
