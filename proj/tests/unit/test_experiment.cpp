#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "pdmp/experiment.hpp"

namespace ex = pdmp::experiment;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name)
{
    const auto dir = fs::temp_directory_path() / ("pdmp-test-" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write(const fs::path& p, const std::string& text)
{
    std::ofstream(p, std::ios::binary) << text;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p)
{
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(slurp(p));
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ',')) {
            cells.push_back(cell);
        }
        if (!line.empty() && line.back() == ',') {
            cells.emplace_back();
        }
        rows.push_back(std::move(cells));
    }
    return rows;
}

std::string config_error(const std::string& yaml)
{
    try {
        ex::parse_config(yaml, "exp.yaml");
    } catch (const ex::ConfigError& e) {
        return e.what();
    }
    return "";
}

int cli(const std::string& args)
{
    const std::string cmd = std::string(PDMP_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

const char* kSmall = R"(experiment: small
samplers: [cs, zs, {kind: bps, refresh: 1.0}]
target: {kind: mvn2, dim: [2, 3]}
budget: {rate_evals: 20000}
replicates: 3
discretization: 200
seed: 11
threads: 2
)";

}  // namespace

// --- Configuration -------------------------------------------------------------

TEST(Config, ParsesDefaults)
{
    const auto c = ex::parse_config(kSmall, "exp.yaml");
    EXPECT_EQ(c.name, "small");
    ASSERT_EQ(c.samplers.size(), 3u);
    EXPECT_EQ(c.samplers[0].label, "cs");
    EXPECT_EQ(c.samplers[2].label, "bps");
    EXPECT_EQ(c.target.kind, ex::TargetKind::Mvn2);
    EXPECT_EQ(c.target.dim, (std::vector<std::size_t>{2, 3}));
    EXPECT_EQ(c.budget.kind, ex::BudgetKind::RateEvals);
    EXPECT_EQ(c.replicates, 3u);
    EXPECT_EQ(c.ks, ex::KsMode::Marginal);
}

TEST(Config, UnknownKeyNamesLine)
{
    const auto msg = config_error("samplers: cs\ntarget: {kind: banana}\nbudget: {horizon: 10}\nreplicates: 1\nrefersh: 2\n");
    EXPECT_NE(msg.find("exp.yaml:5"), std::string::npos) << msg;
    EXPECT_NE(msg.find("refersh"), std::string::npos) << msg;
}

TEST(Config, Rejections)
{
    const std::string base = "samplers: cs\ntarget: {kind: banana}\n";
    EXPECT_NE(config_error(base + "budget: {horizon: 10}\nreplicates:\n").find("replicates"), std::string::npos);
    EXPECT_NE(config_error(base + "budget: {horizon: 10}\nreplicates: 0\n").find("replicates"), std::string::npos);
    EXPECT_NE(config_error(base + "budget: {horizon: 10, events: 5}\nreplicates: 1\n"), "");
    EXPECT_NE(config_error(base + "budget: {horizon: 10}\nreplicates: 1\nks: marginal\n").find("two-sample"),
              std::string::npos);
    EXPECT_NE(config_error("samplers: bps\ntarget: {kind: lgcp}\nbudget: {horizon: 10}\nreplicates: 1\n"), "");
    EXPECT_NE(config_error("samplers: cs\ntarget: {kind: logistic, data: /nonexistent/x.csv}\n"
                           "budget: {horizon: 10}\nreplicates: 1\n")
                  .find("does not exist"),
              std::string::npos);
    EXPECT_NE(config_error(base + "budget: {horizon: 10}\nreplicates: 1\ndiscretization: 10\n"), "");
    EXPECT_NE(config_error("samplers: {kind: cs, velocity: sphere}\ntarget: {kind: banana}\n"
                           "budget: {horizon: 10}\nreplicates: 1\n"),
              "");
    EXPECT_NE(config_error("samplers: cs\ntarget: {kind: banana, dim: 3}\nbudget: {horizon: 10}\nreplicates: 1\n"),
              "");
    EXPECT_NE(config_error("samplers: [cs\n"), "");
}

TEST(Config, DuplicateSamplersGetDistinctLabels)
{
    const auto c = ex::parse_config("samplers: [cs, {kind: cs, refresh: 0.5}]\ntarget: {kind: mvn1}\n"
                                    "budget: {events: 1000}\nreplicates: 1\n");
    EXPECT_NE(c.samplers[0].label, c.samplers[1].label);
}

TEST(Config, CompareNeedsTwoSamplers)
{
    auto c = ex::parse_config("samplers: cs\ntarget: {kind: mvn1}\nbudget: {events: 1000}\nreplicates: 1\n");
    EXPECT_THROW(ex::validate_for_compare(c), ex::ConfigError);
}

// --- Running --------------------------------------------------------------------

TEST(Experiment, ReplicatesAreOrderedAndUseSharedStreams)
{
    const auto result = ex::run_experiment(ex::parse_config(kSmall));
    ASSERT_EQ(result.replicates.size(), 2u * 3u * 3u);
    for (std::size_t k = 0; k < result.replicates.size(); ++k) {
        const auto& r = result.replicates[k];
        EXPECT_EQ(k, (r.configuration * 3 + r.sampler) * 3 + r.replicate);
        EXPECT_EQ(r.stream, ex::replicate_stream(r.configuration, r.replicate));
        EXPECT_GE(r.run.counters.rate_evals, 20000u);
        EXPECT_GE(r.rows, 200u);
        EXPECT_LT(r.rows, 400u);
        EXPECT_EQ(r.ks.size(), result.configurations[r.configuration].dim);
    }
    EXPECT_EQ(ex::replicate_stream(1, 2), (std::uint64_t{1} << 32) | 2u);
}

TEST(Experiment, DeterministicReplicateFiles)
{
    auto config = ex::parse_config(kSmall);
    const auto a = scratch("det-a");
    const auto b = scratch("det-b");
    ex::write_reports(ex::run_experiment(config), a, false);
    config.threads = 1;
    ex::write_reports(ex::run_experiment(config), b, false);
    std::size_t files = 0;
    for (const auto& entry : fs::directory_iterator(a / "replicates")) {
        EXPECT_EQ(slurp(entry.path()), slurp(b / "replicates" / entry.path().filename())) << entry.path();
        ++files;
    }
    EXPECT_EQ(files, 18u);
}

TEST(Experiment, AggregateRecomputesFromReplicates)
{
    const auto dir = scratch("aggregate");
    ex::write_reports(ex::run_experiment(ex::parse_config(kSmall)), dir, false);
    const auto reps = read_csv(dir / "replicates.csv");
    const auto agg = read_csv(dir / "aggregate.csv");
    const auto& rh = reps[0];
    const auto& ah = agg[0];
    for (std::size_t row = 1; row < agg.size(); ++row) {
        const auto& a = agg[row];
        for (std::size_t col = 5; col < rh.size(); ++col) {
            pdmp::Vector values;
            for (std::size_t k = 1; k < reps.size(); ++k) {
                if (reps[k][0] == a[0] && reps[k][2] == a[4]) {
                    values.push_back(std::stod(reps[k][col]));
                }
            }
            ASSERT_EQ(values.size(), 3u);
            double mean = 0.0;
            for (double v : values) {
                mean += v / 3.0;
            }
            double ss = 0.0;
            for (double v : values) {
                ss += (v - mean) * (v - mean);
            }
            const auto it = std::find(ah.begin(), ah.end(), rh[col] + "_mean");
            ASSERT_NE(it, ah.end()) << rh[col];
            const auto idx = static_cast<std::size_t>(it - ah.begin());
            const double got_mean = std::stod(a[idx]);
            const double got_se = std::stod(a[idx + 1]);
            EXPECT_NEAR(got_mean, mean, 1e-12 * std::max(1.0, std::fabs(mean))) << rh[col];
            EXPECT_NEAR(got_se, std::sqrt(ss / 2.0 / 3.0), 1e-12 * std::max(1.0, got_se)) << rh[col];
        }
    }
}

TEST(Experiment, IdenticalSamplersHaveUnitRatio)
{
    const auto dir = scratch("ratio");
    const auto config = ex::parse_config("samplers: [cs, cs]\ntarget: {kind: mvn1, dim: 3}\n"
                                         "budget: {rate_evals: 20000}\nreplicates: 2\ndiscretization: 200\n");
    ex::write_reports(ex::run_experiment(config), dir, false);
    const auto ratios = read_csv(dir / "ratios.csv");
    ASSERT_EQ(ratios.size(), 2u);
    const auto& h = ratios[0];
    const auto idx = static_cast<std::size_t>(std::find(h.begin(), h.end(), "ess_per_rate_eval_ratio_mean") -
                                              h.begin());
    ASSERT_LT(idx, h.size());
    EXPECT_EQ(std::stod(ratios[1][idx]), 1.0);
}

TEST(Experiment, TwoSampleModeOnBanana)
{
    const auto config = ex::parse_config("samplers: [cs, zs]\ntarget: {kind: banana, kappa: [0.5, 2]}\n"
                                         "budget: {horizon: 200}\nreplicates: 2\ndiscretization: 200\n"
                                         "ks: two-sample\nks_reference_scale: 5\n");
    const auto result = ex::run_experiment(config);
    ASSERT_EQ(result.configurations.size(), 2u);
    for (const auto& r : result.replicates) {
        ASSERT_EQ(r.ks.size(), 2u);
        for (double d : r.ks) {
            EXPECT_GT(d, 0.0);
            EXPECT_LT(d, 1.0);
        }
        EXPECT_EQ(r.run.horizon, 200.0);
        EXPECT_EQ(r.rows, 200u);
    }
}

TEST(Experiment, LogisticAndLgcpRun)
{
    const auto logistic = ex::run_experiment(ex::parse_config(
        "samplers: [cs, bps]\ntarget: {kind: logistic, observations: 20, covariates: 3}\n"
        "budget: {events: 5000}\nreplicates: 1\ninit: map\ndiscretization: 100\n"));
    EXPECT_EQ(logistic.configurations[0].dim, 3u);
    const auto lgcp = ex::run_experiment(ex::parse_config(
        "samplers: cs\ntarget: {kind: lgcp, side: 4}\nbudget: {events: 5000}\nreplicates: 1\n"
        "discretization: 100\n"));
    EXPECT_EQ(lgcp.configurations[0].dim, 16u);
}

TEST(Experiment, ReportMentionsRefreshConditions)
{
    const auto dir = scratch("report");
    const auto text = ex::write_reports(ex::run_experiment(ex::parse_config(kSmall)), dir, true);
    EXPECT_NE(text.find("sqrt(8 alpha1)"), std::string::npos);
    EXPECT_TRUE(fs::exists(dir / "comparison.csv"));
    EXPECT_EQ(slurp(dir / "report.txt"), text);
}

// --- Command line -------------------------------------------------------------------

TEST(Cli, ExitCodes)
{
    const auto dir = scratch("cli");
    write(dir / "bad.yaml", "samplers: cs\ntarget: {kind: banana}\nbudget: {horizon: 10}\nreplicates: 1\nbogus: 1\n");
    write(dir / "good.yaml",
          "samplers: [cs, zs]\ntarget: {kind: mvn1, dim: 2}\nbudget: {events: 2000}\nreplicates: 1\n"
          "discretization: 100\n");
    write(dir / "single.yaml",
          "samplers: cs\ntarget: {kind: mvn1, dim: 2}\nbudget: {events: 2000}\nreplicates: 1\ndiscretization: 100\n");
    EXPECT_EQ(cli("run --config " + (dir / "bad.yaml").string()), 2);
    EXPECT_EQ(cli("run --config " + (dir / "missing.yaml").string()), 2);
    EXPECT_EQ(cli("run"), 2);
    EXPECT_EQ(cli("compare --config " + (dir / "single.yaml").string()), 2);
    EXPECT_EQ(cli("run --config " + (dir / "good.yaml").string() + " --out " + (dir / "out").string()), 0);
    EXPECT_TRUE(fs::exists(dir / "out" / "aggregate.csv"));
    write(dir / "file", "x");
    EXPECT_EQ(cli("run --config " + (dir / "good.yaml").string() + " --out " + (dir / "file" / "sub").string()), 1);
    EXPECT_EQ(cli("compare --config " + (dir / "good.yaml").string() + " --out " + (dir / "cmp").string()), 0);
    EXPECT_TRUE(fs::exists(dir / "cmp" / "comparison.csv"));
}

TEST(Cli, SimulateData)
{
    const auto dir = scratch("simulate");
    ASSERT_EQ(cli("simulate-data --kind logistic --seed 5 --out " + (dir / "a").string()), 0);
    ASSERT_EQ(cli("simulate-data --kind logistic --seed 5 --out " + (dir / "b").string()), 0);
    const auto a = slurp(dir / "a" / "logistic.csv");
    EXPECT_EQ(a, slurp(dir / "b" / "logistic.csv"));
    EXPECT_EQ(std::count(a.begin(), a.end(), '\n'), 41);
    ASSERT_EQ(cli("simulate-data --kind lgcp --out " + dir.string()), 0);
    const auto g = slurp(dir / "lgcp.csv");
    EXPECT_EQ(std::count(g.begin(), g.end(), '\n'), 401);
    write(dir / "small.yaml", "kind: lgcp\nside: 4\nseed: 2\nfile: small.csv\n");
    ASSERT_EQ(cli("simulate-data --config " + (dir / "small.yaml").string() + " --out " + dir.string()), 0);
    const auto s = slurp(dir / "small.csv");
    EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), 17);
    EXPECT_EQ(cli("simulate-data --kind poisson"), 2);

    // A simulated dataset feeds a run through the data key.
    write(dir / "use.yaml", "samplers: cs\ntarget: {kind: logistic, data: a/logistic.csv}\n"
                            "budget: {events: 2000}\nreplicates: 1\ndiscretization: 100\n");
    const auto config = ex::load_config(dir / "use.yaml");
    EXPECT_EQ(ex::build_configurations(config)[0].dim, 10u);
}

TEST(Config, ShippedConfigsParse)
{
    std::size_t count = 0;
    for (const auto& entry : fs::directory_iterator(PDMP_CONFIG_DIR)) {
        if (entry.path().extension() != ".yaml" || entry.path().filename().string().rfind("simulate_", 0) == 0) {
            continue;
        }
        EXPECT_NO_THROW(ex::validate(ex::load_config(entry.path()))) << entry.path();
        ++count;
    }
    EXPECT_GE(count, 6u);
    const auto sim = ex::parse_simulate_config(slurp(fs::path(PDMP_CONFIG_DIR) / "simulate_logistic.yaml"));
    EXPECT_EQ(sim.seed, 7u);
}
