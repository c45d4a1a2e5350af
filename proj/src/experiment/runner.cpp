#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <thread>

#include "pdmp/experiment.hpp"

namespace pdmp::experiment {

namespace {

constexpr std::uint64_t kReferenceReplicate = 0xffffffffu;
constexpr std::uint64_t kDataStream = 0xda7a;

SymmetricMatrix identity_covariance(std::size_t d)
{
    SymmetricMatrix m(d);
    for (std::size_t i = 0; i < d; ++i) {
        m(i, i) = 1.0;
    }
    return m;
}

std::shared_ptr<const Target> make_mvn(TargetKind kind, std::size_t d)
{
    switch (kind) {
    case TargetKind::Mvn1:
        return std::make_shared<MvnTarget>(mvn1_covariance(d), Vector{}, "mvn1");
    case TargetKind::Mvn2:
        return std::make_shared<MvnTarget>(mvn2_covariance(d), Vector{}, "mvn2");
    default:
        return std::make_shared<MvnTarget>(identity_covariance(d), Vector{}, "mvn");
    }
}

/// ZS refresh given as a single rate applies to every coordinate.
SamplerSpec resolve_spec(const SamplerSpec& spec, std::size_t d)
{
    if (const auto* zs = std::get_if<ZigzagSpec>(&spec)) {
        ZigzagSpec out;
        out.refresh.assign(d, zs->refresh.empty() ? 0.0 : zs->refresh.front());
        return out;
    }
    return spec;
}

Vector initial_position(const ExperimentConfig& config, const Target& target, RandomSource& rng)
{
    switch (config.init) {
    case InitMode::Draw:
        return dynamic_cast<const MvnTarget&>(target).sample(rng);
    case InitMode::Map:
        return dynamic_cast<const LogisticTarget&>(target).approximate_mode();
    case InitMode::Zero:
        break;
    }
    return Vector(target.dim(), 0.0);
}

struct RunOutput {
    RunResult run;
    SampleMatrix samples;
    MomentAccumulator moments;
};

RunOutput simulate(const ExperimentConfig& config, const Configuration& conf, const SamplerSpec& spec,
                   const Budget& budget, std::uint64_t stream)
{
    RandomSource rng(config.seed, stream);
    const Target& target = *conf.target;
    Vector x0 = initial_position(config, target, rng);
    Vector v0 = initial_velocity(spec, target.dim(), rng);
    auto grid = budget.kind == BudgetKind::Horizon ? GridRecorder(config.discretization, budget.value)
                                                   : GridRecorder::adaptive(config.discretization, 1e-6);
    RunOutput out;
    PathSink* sinks[] = {&grid, &out.moments};
    out.run = run(spec, target, PhaseState(std::move(x0), std::move(v0), 0.0), budget.stop_rule(), rng, sinks);
    out.samples = grid.take(Provenance{sampler_name(spec), conf.label, config.seed, out.run.horizon});
    if (out.samples.n < 100) {
        throw SamplerError("only " + std::to_string(out.samples.n) +
                           " grid rows were recorded; the budget is too small for the requested discretization");
    }
    return out;
}

std::string context(const ExperimentConfig& config, const Configuration& conf, const std::string& sampler,
                    std::uint64_t replicate, std::uint64_t stream)
{
    std::string where = "configuration " + conf.label + ", sampler " + sampler + ", ";
    where += replicate == kReferenceReplicate ? std::string("two-sample reference run")
                                              : "replicate " + std::to_string(replicate);
    return where + " (seed " + std::to_string(config.seed) + ", stream " + std::to_string(stream) + ")";
}

template <typename Task>
void parallel_for(std::size_t count, std::size_t threads, Task task)
{
    std::atomic<std::size_t> next{0};
    std::atomic<bool> stop{false};
    std::mutex error_mutex;
    std::exception_ptr error;
    auto worker = [&] {
        for (;;) {
            const std::size_t k = next.fetch_add(1);
            if (k >= count || stop.load()) {
                return;
            }
            try {
                task(k);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) {
                    error = std::current_exception();
                }
                stop = true;
            }
        }
    };
    const std::size_t n = std::max<std::size_t>(1, std::min(threads, count));
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < n; ++t) {
        pool.emplace_back(worker);
    }
    worker();
    for (auto& th : pool) {
        th.join();
    }
    if (error) {
        std::rethrow_exception(error);
    }
}

}  // namespace

std::uint64_t replicate_stream(std::size_t configuration, std::size_t replicate) noexcept
{
    return (static_cast<std::uint64_t>(configuration) << 32) | static_cast<std::uint64_t>(replicate);
}

std::vector<Configuration> build_configurations(const ExperimentConfig& config)
{
    const auto& t = config.target;
    std::vector<Configuration> out;
    auto add = [&](std::string label, double kappa, std::size_t dim, std::shared_ptr<const Target> target) {
        Configuration c;
        c.index = out.size();
        c.label = std::move(label);
        c.kappa = kappa;
        c.dim = dim;
        c.target = std::move(target);
        out.push_back(std::move(c));
    };
    const std::uint64_t data_seed = t.data_seed.value_or(config.seed);
    switch (t.kind) {
    case TargetKind::Banana:
        for (double k : t.kappa) {
            add("kappa=" + format_real(k), k, 2, std::make_shared<BananaTarget>(k, t.window));
        }
        break;
    case TargetKind::Mvn1:
    case TargetKind::Mvn2:
    case TargetKind::MvnIdentity:
        for (std::size_t d : t.dim) {
            try {
                add("d=" + std::to_string(d), 0.0, d, make_mvn(t.kind, d));
            } catch (const std::exception& e) {
                throw ConfigError(std::string("target d=") + std::to_string(d) + ": " + e.what());
            }
        }
        break;
    case TargetKind::Logistic: {
        LogisticData data;
        if (t.data) {
            data = read_logistic_csv(*t.data);
        } else {
            RandomSource rng(data_seed, kDataStream);
            data = simulate_logistic_data(t.observations, t.covariates, rng);
        }
        const std::size_t d = data.d;
        add("logistic", 0.0, d, std::make_shared<LogisticTarget>(std::move(data)));
        break;
    }
    case TargetKind::Lgcp: {
        LgcpData data;
        if (t.data) {
            data = read_lgcp_csv(*t.data, t.lgcp);
        } else {
            RandomSource rng(data_seed, kDataStream);
            data = simulate_lgcp_data(t.lgcp, rng);
        }
        const std::size_t d = data.counts.size();
        add("lgcp", 0.0, d, std::make_shared<LgcpTarget>(std::move(data), t.window));
        break;
    }
    }
    return out;
}

ExperimentResult run_experiment(const ExperimentConfig& config)
{
    validate(config);
    ExperimentResult result;
    result.config = config;
    try {
        result.configurations = build_configurations(config);
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw RunFailure(std::string("building the target failed: ") + e.what());
    }
    const auto& confs = result.configurations;
    const std::size_t ns = config.samplers.size();
    const std::size_t threads =
        config.threads > 0 ? config.threads : std::max<std::size_t>(1, std::thread::hardware_concurrency());

    std::vector<std::vector<SamplerSpec>> specs(confs.size());
    for (const auto& c : confs) {
        for (const auto& s : config.samplers) {
            specs[c.index].push_back(resolve_spec(s.spec, c.dim));
            try {
                validate_spec(specs[c.index].back(), c.dim);
            } catch (const std::exception& e) {
                throw ConfigError("sampler " + s.label + ": " + e.what());
            }
        }
    }

    // Two-sample KS compares each run with a longer run of the first sampler.
    std::vector<std::vector<Vector>> reference(confs.size());
    if (config.ks == KsMode::TwoSample) {
        Budget longer = config.budget;
        longer.value *= config.ks_reference_scale;
        if (longer.kind != BudgetKind::Horizon && longer.kind != BudgetKind::WallSeconds) {
            longer.value = std::round(longer.value);
        }
        parallel_for(confs.size(), threads, [&](std::size_t k) {
            const auto stream = replicate_stream(k, kReferenceReplicate);
            try {
                auto out = simulate(config, confs[k], specs[k][0], longer, stream);
                for (std::size_t i = 0; i < confs[k].dim; ++i) {
                    reference[k].push_back(out.samples.column(i));
                }
            } catch (const std::exception& e) {
                throw RunFailure(context(config, confs[k], config.samplers[0].label, kReferenceReplicate, stream) +
                                 ": " + e.what());
            }
        });
    }

    const std::size_t total = confs.size() * ns * config.replicates;
    result.replicates.resize(total);
    parallel_for(total, threads, [&](std::size_t k) {
        const std::size_t rep = k % config.replicates;
        const std::size_t s = (k / config.replicates) % ns;
        const std::size_t c = k / (config.replicates * ns);
        const auto& conf = confs[c];
        const auto stream = replicate_stream(c, rep);
        try {
            auto out = simulate(config, conf, specs[c][s], config.budget, stream);
            ReplicateResult& r = result.replicates[k];
            r.configuration = c;
            r.sampler = s;
            r.replicate = rep;
            r.stream = stream;
            r.run = out.run;
            r.rows = out.samples.n;
            r.path_mean = out.moments.means();
            r.second_moment = out.moments.second_moments();
            const Target& target = *conf.target;
            for (std::size_t i = 0; i < conf.dim; ++i) {
                const Vector col = out.samples.column(i);
                r.path_mean_se.push_back(mcse(col));
                try {
                    r.ess.push_back(ess(col));
                } catch (const std::invalid_argument& e) {
                    throw SamplerError("coordinate " + std::to_string(i + 1) + ": " + e.what());
                }
                if (config.ks == KsMode::Marginal) {
                    const double mean = target.marginal_mean(i);
                    const double sd = *target.marginal_sd(i);
                    r.ks.push_back(ks_one_sample(col, [&](double x) { return normal_cdf(x, mean, sd); }));
                } else if (config.ks == KsMode::TwoSample) {
                    r.ks.push_back(ks_two_sample(col, reference[c][i]));
                }
            }
            if (config.write_samples) {
                r.samples = std::move(out.samples);
            }
        } catch (const std::exception& e) {
            throw RunFailure(context(config, conf, config.samplers[s].label, rep, stream) + ": " + e.what());
        }
    });
    return result;
}

}  // namespace pdmp::experiment
