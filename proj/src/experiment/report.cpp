#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "pdmp/experiment.hpp"

namespace pdmp::experiment {

namespace {

const char* const kStats[] = {"min", "mean", "median", "max"};

void append_summary(Vector& out, std::span<const double> values)
{
    const Summary s = summarize(values);
    out.insert(out.end(), {s.min, s.mean, s.median, s.max});
}

void write_text(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw std::runtime_error("cannot open for writing: " + path.string());
    }
    out << text;
    if (!out) {
        throw std::runtime_error("write failed: " + path.string());
    }
}

std::string short_real(double x)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", x);
    return buf;
}

std::string pad(const std::string& s, std::size_t width)
{
    return s.size() >= width ? s + " " : s + std::string(width - s.size(), ' ');
}

std::size_t metric_index(const std::vector<std::string>& names, const std::string& name)
{
    for (std::size_t k = 0; k < names.size(); ++k) {
        if (names[k] == name) {
            return k;
        }
    }
    throw std::logic_error("unknown metric " + name);
}

std::string describe_sampler(const SamplerSpec& spec)
{
    if (const auto* cs = std::get_if<CoordinateSpec>(&spec)) {
        std::string s = "coordinate sampler, refresh " + short_real(cs->refresh);
        if (cs->refresh == 0.0) {
            s += " (canonical; invariance of the target is only guaranteed with refresh > 0)";
        }
        return s;
    }
    if (const auto* zs = std::get_if<ZigzagSpec>(&spec)) {
        return "zigzag sampler, refresh " + short_real(zs->refresh.empty() ? 0.0 : zs->refresh.front()) +
               " per coordinate";
    }
    const auto& bps = std::get<BouncySpec>(spec);
    return "bouncy particle sampler, refresh " + short_real(bps.refresh) + ", " +
           (bps.law == VelocityLaw::Sphere ? "unit-sphere" : "Gaussian") + " velocities";
}

}  // namespace

std::vector<std::string> metric_names(const ExperimentConfig& config)
{
    std::vector<std::string> names{"horizon", "events", "rate_evals", "thinning_rejections", "wall_seconds", "rows"};
    for (const char* family : {"ess", "ess_per_rate_eval", "ess_per_second"}) {
        for (const char* stat : kStats) {
            names.push_back(std::string(family) + "_" + stat);
        }
    }
    if (config.ks != KsMode::None) {
        for (const char* stat : kStats) {
            names.push_back(std::string("ks_") + stat);
        }
    }
    return names;
}

Vector metric_values(const ExperimentConfig& config, const ReplicateResult& r)
{
    const auto& c = r.run.counters;
    Vector out{r.run.horizon,
               static_cast<double>(c.events),
               static_cast<double>(c.rate_evals),
               static_cast<double>(c.thinning_rejections),
               r.run.wall_seconds,
               static_cast<double>(r.rows)};
    append_summary(out, r.ess);
    Vector per_eval(r.ess);
    Vector per_second(r.ess);
    for (std::size_t i = 0; i < r.ess.size(); ++i) {
        per_eval[i] /= static_cast<double>(c.rate_evals);
        per_second[i] /= r.run.wall_seconds;
    }
    append_summary(out, per_eval);
    append_summary(out, per_second);
    if (config.ks != KsMode::None) {
        append_summary(out, r.ks);
    }
    return out;
}

std::vector<AggregateRow> aggregate(const ExperimentResult& result)
{
    const auto& config = result.config;
    const std::size_t ns = config.samplers.size();
    const std::size_t nr = config.replicates;
    const std::size_t m = metric_names(config).size();
    std::vector<AggregateRow> rows;
    for (std::size_t c = 0; c < result.configurations.size(); ++c) {
        for (std::size_t s = 0; s < ns; ++s) {
            AggregateRow row;
            row.configuration = c;
            row.sampler = s;
            row.replicates = nr;
            std::vector<Vector> values;
            for (std::size_t r = 0; r < nr; ++r) {
                values.push_back(metric_values(config, result.replicates[(c * ns + s) * nr + r]));
            }
            row.mean.assign(m, 0.0);
            row.se.assign(m, 0.0);
            for (std::size_t k = 0; k < m; ++k) {
                double sum = 0.0;
                for (const auto& v : values) {
                    sum += v[k];
                }
                const double mean = sum / static_cast<double>(nr);
                double ss = 0.0;
                for (const auto& v : values) {
                    ss += (v[k] - mean) * (v[k] - mean);
                }
                row.mean[k] = mean;
                row.se[k] = nr > 1 ? std::sqrt(ss / static_cast<double>(nr - 1) / static_cast<double>(nr))
                                   : std::nan("");
            }
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

std::string replicate_file_name(const ExperimentResult& result, const ReplicateResult& r)
{
    return "c" + std::to_string(r.configuration) + "_" + result.config.samplers[r.sampler].label + "_r" +
           std::to_string(r.replicate) + ".csv";
}

std::string replicate_csv(const ExperimentResult& result, const ReplicateResult& r)
{
    const bool ks = result.config.ks != KsMode::None;
    std::ostringstream out;
    out << "coordinate,path_mean,path_mean_se,second_moment,ess,ess_per_rate_eval";
    out << (ks ? ",ks\n" : "\n");
    const double evals = static_cast<double>(r.run.counters.rate_evals);
    for (std::size_t i = 0; i < r.path_mean.size(); ++i) {
        out << (i + 1) << ',' << format_real(r.path_mean[i]) << ',' << format_real(r.path_mean_se[i]) << ','
            << format_real(r.second_moment[i]) << ',' << format_real(r.ess[i]) << ','
            << format_real(r.ess[i] / evals);
        if (ks) {
            out << ',' << format_real(r.ks[i]);
        }
        out << '\n';
    }
    return out.str();
}

std::string write_reports(const ExperimentResult& result, const std::filesystem::path& out_dir, bool comparison)
{
    const auto& config = result.config;
    const auto& confs = result.configurations;
    const std::size_t ns = config.samplers.size();
    const auto names = metric_names(config);
    std::error_code ec;
    std::filesystem::create_directories(out_dir / "replicates", ec);
    if (ec) {
        throw std::runtime_error("cannot create output directory " + out_dir.string() + ": " + ec.message());
    }
    if (config.write_samples) {
        std::filesystem::create_directories(out_dir / "samples", ec);
        if (ec) {
            throw std::runtime_error("cannot create " + (out_dir / "samples").string() + ": " + ec.message());
        }
    }

    for (const auto& r : result.replicates) {
        write_text(out_dir / "replicates" / replicate_file_name(result, r), replicate_csv(result, r));
        if (config.write_samples) {
            std::ostringstream s;
            for (std::size_t i = 0; i < r.samples.d; ++i) {
                s << (i ? "," : "") << 'x' << (i + 1);
            }
            s << '\n';
            for (std::size_t k = 0; k < r.samples.n; ++k) {
                const auto row = r.samples.row(k);
                for (std::size_t i = 0; i < row.size(); ++i) {
                    s << (i ? "," : "") << format_real(row[i]);
                }
                s << '\n';
            }
            write_text(out_dir / "samples" / replicate_file_name(result, r), s.str());
        }
    }

    {
        std::ostringstream out;
        out << "configuration,label,sampler,replicate,stream";
        for (const auto& n : names) {
            out << ',' << n;
        }
        out << '\n';
        for (const auto& r : result.replicates) {
            out << r.configuration << ',' << confs[r.configuration].label << ',' << config.samplers[r.sampler].label
                << ',' << r.replicate << ',' << r.stream;
            for (double v : metric_values(config, r)) {
                out << ',' << format_real(v);
            }
            out << '\n';
        }
        write_text(out_dir / "replicates.csv", out.str());
    }

    const auto rows = aggregate(result);
    {
        std::ostringstream out;
        out << "configuration,label,kappa,dim,sampler,replicates";
        for (const auto& n : names) {
            out << ',' << n << "_mean," << n << "_se";
        }
        out << '\n';
        for (const auto& row : rows) {
            const auto& conf = confs[row.configuration];
            out << row.configuration << ',' << conf.label << ','
                << (config.target.kind == TargetKind::Banana ? format_real(conf.kappa) : std::string()) << ','
                << conf.dim << ',' << config.samplers[row.sampler].label << ',' << row.replicates;
            for (std::size_t k = 0; k < names.size(); ++k) {
                out << ',' << format_real(row.mean[k]) << ',' << format_real(row.se[k]);
            }
            out << '\n';
        }
        write_text(out_dir / "aggregate.csv", out.str());
    }

    auto at = [&](std::size_t c, std::size_t s) -> const AggregateRow& { return rows[c * ns + s]; };
    const bool ks = config.ks != KsMode::None;
    if (ns >= 2) {
        std::ostringstream out;
        out << "configuration,label,numerator,denominator";
        for (const char* family : {"ess_per_rate_eval", "ess_per_second"}) {
            for (const char* stat : kStats) {
                out << ',' << family << "_ratio_" << stat;
            }
        }
        if (ks) {
            out << ",ks_mean_ratio";
        }
        out << '\n';
        for (std::size_t c = 0; c < confs.size(); ++c) {
            for (std::size_t a = 0; a < ns; ++a) {
                for (std::size_t b = a + 1; b < ns; ++b) {
                    out << c << ',' << confs[c].label << ',' << config.samplers[a].label << ','
                        << config.samplers[b].label;
                    for (const char* family : {"ess_per_rate_eval", "ess_per_second"}) {
                        for (const char* stat : kStats) {
                            const auto k = metric_index(names, std::string(family) + "_" + stat);
                            out << ',' << format_real(at(c, a).mean[k] / at(c, b).mean[k]);
                        }
                    }
                    if (ks) {
                        const auto k = metric_index(names, "ks_mean");
                        out << ',' << format_real(at(c, a).mean[k] / at(c, b).mean[k]);
                    }
                    out << '\n';
                }
            }
        }
        write_text(out_dir / "ratios.csv", out.str());
    }

    if (comparison) {
        std::ostringstream out;
        out << "configuration,label,sampler";
        for (const char* family : {"ks", "ess"}) {
            for (const char* stat : kStats) {
                out << ',' << family << '_' << stat;
            }
        }
        out << ",ess_per_rate_eval_mean,ess_per_second_mean\n";
        for (const auto& row : rows) {
            out << row.configuration << ',' << confs[row.configuration].label << ','
                << config.samplers[row.sampler].label;
            for (const char* family : {"ks", "ess"}) {
                for (const char* stat : kStats) {
                    out << ',' << format_real(row.mean[metric_index(names, std::string(family) + "_" + stat)]);
                }
            }
            out << ',' << format_real(row.mean[metric_index(names, "ess_per_rate_eval_mean")]) << ','
                << format_real(row.mean[metric_index(names, "ess_per_second_mean")]) << '\n';
        }
        write_text(out_dir / "comparison.csv", out.str());
    }

    // Human-readable report.
    std::ostringstream rep;
    rep << "experiment: " << config.name << '\n';
    rep << "target: " << to_string(config.target.kind) << " (" << confs.size() << " configuration"
        << (confs.size() == 1 ? "" : "s") << ")\n";
    rep << "budget per run: " << config.budget.describe() << '\n';
    rep << "replicates: " << config.replicates << ", seed " << config.seed << '\n';
    rep << "discretization: N = " << config.discretization
        << (config.budget.kind == BudgetKind::Horizon ? " grid rows at n T / N\n"
                                                      : " minimum grid rows (adaptive grid keeps between N and 2N)\n");
    rep << "samplers:\n";
    for (const auto& s : config.samplers) {
        rep << "  " << s.label << ": " << describe_sampler(s.spec) << '\n';
    }
    double smallest_cs_refresh = kInfinity;
    for (const auto& s : config.samplers) {
        if (const auto* cs = std::get_if<CoordinateSpec>(&s.spec)) {
            smallest_cs_refresh = std::min(smallest_cs_refresh, cs->refresh);
        }
    }
    if (smallest_cs_refresh < kInfinity) {
        rep << "coordinate sampler refresh conditions for geometric ergodicity (reported, not enforced):\n";
        rep << "  light tails (bounded Hessian norm alpha1): refresh > sqrt(8 alpha1)\n";
        rep << "  linear tails (|grad U| -> 2 alpha2): refresh < alpha2 / (14 d)\n";
        for (const auto& conf : confs) {
            if (const auto alpha1 = conf.target->hessian_norm_bound()) {
                rep << "  " << conf.label << ": alpha1 = " << short_real(*alpha1)
                    << ", light-tail threshold sqrt(8 alpha1) = " << short_real(std::sqrt(8.0 * *alpha1)) << '\n';
            }
        }
    }
    rep << '\n';
    const std::size_t width = 14;
    for (std::size_t c = 0; c < confs.size(); ++c) {
        rep << "[" << confs[c].label << "]\n";
        std::vector<std::pair<std::string, std::string>> columns{
            {"events", "events"},     {"rate_evals", "rate_evals"}, {"ess_min", "ess_min"},
            {"ess_mean", "ess_mean"}, {"ess_median", "ess_median"}, {"ess_max", "ess_max"},
            {"ess/eval", "ess_per_rate_eval_mean"}, {"ess/s", "ess_per_second_mean"}};
        if (ks) {
            for (const char* stat : kStats) {
                columns.emplace_back(std::string("ks_") + stat, std::string("ks_") + stat);
            }
        }
        rep << pad("sampler", width);
        for (const auto& col : columns) {
            rep << pad(col.first, width);
        }
        rep << '\n';
        for (std::size_t s = 0; s < ns; ++s) {
            rep << pad(config.samplers[s].label, width);
            for (const auto& col : columns) {
                rep << pad(short_real(at(c, s).mean[metric_index(names, col.second)]), width);
            }
            rep << '\n';
        }
        for (std::size_t a = 0; a < ns; ++a) {
            for (std::size_t b = a + 1; b < ns; ++b) {
                const auto ke = metric_index(names, "ess_per_rate_eval_mean");
                const auto kw = metric_index(names, "ess_per_second_mean");
                rep << "  " << config.samplers[a].label << '/' << config.samplers[b].label
                    << ": ESS per rate evaluation ratio " << short_real(at(c, a).mean[ke] / at(c, b).mean[ke])
                    << ", ESS per second ratio " << short_real(at(c, a).mean[kw] / at(c, b).mean[kw])
                    << " (machine-relative)\n";
            }
        }
        rep << '\n';
    }
    rep << "Values are means over replicates; ESS is per coordinate (batch means on the grid rows).\n";
    rep << "Wall-clock quantities depend on the machine and are secondary to rate-evaluation counts.\n";
    const std::string text = rep.str();
    write_text(out_dir / "report.txt", text);
    return text;
}

}  // namespace pdmp::experiment
