#include <yaml-cpp/yaml.h>

#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <set>
#include <sstream>

#include "pdmp/experiment.hpp"

namespace pdmp::experiment {

namespace {

class Reader {
public:
    explicit Reader(std::string source) : source_(std::move(source)) {}

    [[noreturn]] void fail(const YAML::Node& node, const std::string& message) const
    {
        const auto mark = node.Mark();
        if (mark.line >= 0) {
            throw ConfigError(source_ + ":" + std::to_string(mark.line + 1) + ": " + message);
        }
        throw ConfigError(source_ + ": " + message);
    }

    void require_map(const YAML::Node& node, const std::string& what) const
    {
        if (!node.IsMap()) {
            fail(node, what + " must be a mapping");
        }
    }

    void check_keys(const YAML::Node& node, const std::set<std::string>& allowed, const std::string& where) const
    {
        for (const auto& kv : node) {
            const auto key = kv.first.as<std::string>();
            if (!allowed.count(key)) {
                std::string list;
                for (const auto& a : allowed) {
                    list += (list.empty() ? "" : ", ") + a;
                }
                fail(kv.first, "unknown key '" + key + "' in " + where + " (allowed: " + list + ")");
            }
        }
    }

    std::string text(const YAML::Node& node, const std::string& key) const
    {
        if (!node.IsScalar()) {
            fail(node, key + " must be a scalar");
        }
        return node.Scalar();
    }

    double real(const YAML::Node& node, const std::string& key) const
    {
        const auto s = text(node, key);
        try {
            std::size_t used = 0;
            const double v = std::stod(s, &used);
            if (used != s.size() || !std::isfinite(v)) {
                throw std::invalid_argument(s);
            }
            return v;
        } catch (const std::exception&) {
            fail(node, key + " must be a finite number, got '" + s + "'");
        }
    }

    double positive(const YAML::Node& node, const std::string& key) const
    {
        const double v = real(node, key);
        if (!(v > 0.0)) {
            fail(node, key + " must be positive");
        }
        return v;
    }

    double nonnegative(const YAML::Node& node, const std::string& key) const
    {
        const double v = real(node, key);
        if (v < 0.0) {
            fail(node, key + " must be nonnegative");
        }
        return v;
    }

    std::uint64_t count(const YAML::Node& node, const std::string& key) const
    {
        const auto s = text(node, key);
        if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) {
            fail(node, key + " must be a nonnegative integer, got '" + s + "'");
        }
        try {
            return std::stoull(s);
        } catch (const std::exception&) {
            fail(node, key + " is out of range");
        }
    }

    bool boolean(const YAML::Node& node, const std::string& key) const
    {
        const auto s = text(node, key);
        if (s == "true" || s == "yes") {
            return true;
        }
        if (s == "false" || s == "no") {
            return false;
        }
        fail(node, key + " must be true or false");
    }

    template <typename F>
    auto list(const YAML::Node& node, const std::string& key, F item) const
    {
        using T = decltype(item(node));
        std::vector<T> out;
        if (node.IsSequence()) {
            if (node.size() == 0) {
                fail(node, key + " must not be empty");
            }
            for (const auto& n : node) {
                out.push_back(item(n));
            }
        } else {
            out.push_back(item(node));
        }
        return out;
    }

    const std::string& source() const noexcept { return source_; }

private:
    std::string source_;
};

TargetKind parse_target_kind(const Reader& r, const YAML::Node& node)
{
    const auto s = r.text(node, "kind");
    if (s == "banana") return TargetKind::Banana;
    if (s == "mvn1") return TargetKind::Mvn1;
    if (s == "mvn2") return TargetKind::Mvn2;
    if (s == "mvn") return TargetKind::MvnIdentity;
    if (s == "logistic") return TargetKind::Logistic;
    if (s == "lgcp") return TargetKind::Lgcp;
    r.fail(node, "unknown target kind '" + s + "' (banana, mvn, mvn1, mvn2, logistic, lgcp)");
}

void read_lgcp_params(const Reader& r, const YAML::Node& node, LgcpParams& p)
{
    if (node["side"]) {
        const auto side = r.count(node["side"], "side");
        if (side < 2) {
            r.fail(node["side"], "side must be at least 2");
        }
        p.side = side;
    }
    if (node["sigma2"]) {
        p.sigma2 = r.positive(node["sigma2"], "sigma2");
        if (!node["mu"]) {
            p.mu = std::log(126.0) - p.sigma2 / 2.0;
        }
    }
    if (node["mu"]) {
        p.mu = r.real(node["mu"], "mu");
    }
    if (node["beta"]) {
        p.beta = r.positive(node["beta"], "beta");
    }
}

TargetConfig parse_target(const Reader& r, const YAML::Node& node, const std::filesystem::path& base_dir)
{
    r.require_map(node, "target");
    r.check_keys(node,
                 {"kind", "kappa", "dim", "data", "data_seed", "observations", "covariates", "side", "sigma2",
                  "mu", "beta", "window"},
                 "target");
    if (!node["kind"]) {
        r.fail(node, "target needs a kind");
    }
    TargetConfig t;
    t.kind = parse_target_kind(r, node["kind"]);
    const bool banana = t.kind == TargetKind::Banana;
    const bool mvn = t.kind == TargetKind::Mvn1 || t.kind == TargetKind::Mvn2 || t.kind == TargetKind::MvnIdentity;
    const bool logistic = t.kind == TargetKind::Logistic;
    const bool lgcp = t.kind == TargetKind::Lgcp;
    auto only = [&](const char* key, bool ok, const char* kinds) {
        if (node[key] && !ok) {
            r.fail(node[key], std::string(key) + " applies only to " + kinds + " targets");
        }
    };
    only("kappa", banana, "banana");
    only("dim", mvn, "mvn");
    only("data", logistic || lgcp, "logistic and lgcp");
    only("data_seed", logistic || lgcp, "logistic and lgcp");
    only("observations", logistic, "logistic");
    only("covariates", logistic, "logistic");
    for (const char* key : {"side", "sigma2", "mu", "beta"}) {
        only(key, lgcp, "lgcp");
    }
    if (node["kappa"]) {
        t.kappa = r.list(node["kappa"], "kappa", [&](const YAML::Node& n) { return r.positive(n, "kappa"); });
    }
    if (node["dim"]) {
        t.dim = r.list(node["dim"], "dim", [&](const YAML::Node& n) {
            const auto d = r.count(n, "dim");
            if (d < 1) {
                r.fail(n, "dim must be at least 1");
            }
            return static_cast<std::size_t>(d);
        });
    }
    if (node["data"]) {
        std::filesystem::path p = r.text(node["data"], "data");
        if (p.is_relative() && !base_dir.empty()) {
            p = base_dir / p;
        }
        if (!std::filesystem::is_regular_file(p)) {
            r.fail(node["data"], "dataset file does not exist: " + p.string());
        }
        if (node["data_seed"] || node["observations"] || node["covariates"] || node["side"]) {
            r.fail(node["data"], "data cannot be combined with simulation settings (data_seed, observations, "
                                 "covariates, side)");
        }
        t.data = p;
    }
    if (node["data_seed"]) {
        t.data_seed = r.count(node["data_seed"], "data_seed");
    }
    if (node["observations"]) {
        t.observations = r.count(node["observations"], "observations");
        if (t.observations < 1) {
            r.fail(node["observations"], "observations must be at least 1");
        }
    }
    if (node["covariates"]) {
        t.covariates = r.count(node["covariates"], "covariates");
        if (t.covariates < 1) {
            r.fail(node["covariates"], "covariates must be at least 1");
        }
    }
    read_lgcp_params(r, node, t.lgcp);
    if (node["window"]) {
        t.window = r.positive(node["window"], "window");
    }
    return t;
}

SamplerConfig parse_sampler(const Reader& r, const YAML::Node& node)
{
    std::string kind;
    std::optional<YAML::Node> refresh;
    std::optional<YAML::Node> velocity;
    std::string label;
    if (node.IsScalar()) {
        kind = node.Scalar();
    } else {
        r.require_map(node, "sampler");
        r.check_keys(node, {"kind", "refresh", "velocity", "label"}, "sampler");
        if (!node["kind"]) {
            r.fail(node, "sampler needs a kind");
        }
        kind = r.text(node["kind"], "kind");
        if (node["refresh"]) {
            refresh = node["refresh"];
        }
        if (node["velocity"]) {
            velocity = node["velocity"];
        }
        if (node["label"]) {
            label = r.text(node["label"], "label");
        }
    }
    SamplerConfig s;
    if (kind == "cs") {
        CoordinateSpec spec;
        if (refresh) {
            spec.refresh = r.nonnegative(*refresh, "refresh");
        }
        s.spec = spec;
    } else if (kind == "zs") {
        ZigzagSpec spec;
        if (refresh) {
            // One rate for every coordinate; expanded once the dimension is known.
            spec.refresh = {r.nonnegative(*refresh, "refresh")};
        }
        s.spec = spec;
    } else if (kind == "bps") {
        BouncySpec spec;
        if (refresh) {
            spec.refresh = r.nonnegative(*refresh, "refresh");
        }
        if (velocity) {
            const auto law = r.text(*velocity, "velocity");
            if (law == "sphere") {
                spec.law = VelocityLaw::Sphere;
            } else if (law == "gaussian") {
                spec.law = VelocityLaw::Gaussian;
            } else {
                r.fail(*velocity, "velocity must be sphere or gaussian");
            }
        }
        s.spec = spec;
    } else {
        r.fail(node, "unknown sampler '" + kind + "' (cs, zs, bps)");
    }
    if (velocity && kind != "bps") {
        r.fail(*velocity, "velocity applies only to bps");
    }
    s.label = label.empty() ? kind : label;
    for (char c : s.label) {
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.')) {
            r.fail(node, "sampler label '" + s.label + "' may only use letters, digits, '-', '_' and '.'");
        }
    }
    return s;
}

Budget parse_budget(const Reader& r, const YAML::Node& node)
{
    r.require_map(node, "budget");
    r.check_keys(node, {"rate_evals", "horizon", "events", "wall_seconds"}, "budget");
    if (node.size() != 1) {
        r.fail(node, "budget must set exactly one of rate_evals, horizon, events, wall_seconds");
    }
    Budget b;
    const auto key = node.begin()->first.as<std::string>();
    const auto& value = node.begin()->second;
    if (key == "rate_evals" || key == "events") {
        const auto n = r.count(value, key);
        if (n == 0) {
            r.fail(value, key + " must be positive");
        }
        b.kind = key == "events" ? BudgetKind::Events : BudgetKind::RateEvals;
        b.value = static_cast<double>(n);
    } else {
        b.kind = key == "horizon" ? BudgetKind::Horizon : BudgetKind::WallSeconds;
        b.value = r.positive(value, key);
    }
    return b;
}

YAML::Node load_yaml(const std::string& text, const std::string& source)
{
    try {
        return YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw ConfigError(source + ":" + std::to_string(e.mark.line + 1) + ": " + e.msg);
    }
}

std::string read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("cannot read config file: " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

StopRule Budget::stop_rule() const
{
    switch (kind) {
    case BudgetKind::RateEvals:
        return StopRule::rate_evals(static_cast<std::uint64_t>(value));
    case BudgetKind::Horizon:
        return StopRule::at_horizon(value);
    case BudgetKind::Events:
        return StopRule::events(static_cast<std::uint64_t>(value));
    case BudgetKind::WallSeconds:
        return StopRule::wall_seconds(value);
    }
    return {};
}

std::string Budget::describe() const
{
    switch (kind) {
    case BudgetKind::RateEvals:
        return format_real(value) + " rate evaluations";
    case BudgetKind::Horizon:
        return "horizon T = " + format_real(value);
    case BudgetKind::Events:
        return format_real(value) + " events";
    case BudgetKind::WallSeconds:
        return format_real(value) + " wall-clock seconds (machine-relative)";
    }
    return {};
}

const char* to_string(TargetKind kind) noexcept
{
    switch (kind) {
    case TargetKind::Banana: return "banana";
    case TargetKind::Mvn1: return "mvn1";
    case TargetKind::Mvn2: return "mvn2";
    case TargetKind::MvnIdentity: return "mvn";
    case TargetKind::Logistic: return "logistic";
    case TargetKind::Lgcp: return "lgcp";
    }
    return "?";
}

ExperimentConfig parse_config(const std::string& text, const std::string& source,
                              const std::filesystem::path& base_dir)
{
    const Reader r(source);
    const YAML::Node root = load_yaml(text, source);
    if (!root.IsMap()) {
        throw ConfigError(source + ": config must be a mapping");
    }
    r.check_keys(root,
                 {"experiment", "samplers", "target", "budget", "replicates", "discretization", "seed", "init",
                  "ks", "ks_reference_scale", "write_samples", "threads", "out"},
                 "config");
    ExperimentConfig c;
    if (root["experiment"]) {
        c.name = r.text(root["experiment"], "experiment");
    }
    if (!root["samplers"]) {
        r.fail(root, "missing samplers");
    }
    {
        const auto& node = root["samplers"];
        if (node.IsSequence()) {
            if (node.size() == 0) {
                r.fail(node, "samplers must not be empty");
            }
            for (const auto& n : node) {
                c.samplers.push_back(parse_sampler(r, n));
            }
        } else {
            c.samplers.push_back(parse_sampler(r, node));
        }
        std::set<std::string> labels;
        for (auto& s : c.samplers) {
            if (labels.count(s.label)) {
                // Duplicate kinds get positional labels so file names stay unique.
                s.label += "-" + std::to_string(labels.size());
            }
            labels.insert(s.label);
        }
    }
    if (!root["target"]) {
        r.fail(root, "missing target");
    }
    c.target = parse_target(r, root["target"], base_dir);
    if (!root["budget"]) {
        r.fail(root, "missing budget (one of rate_evals, horizon, events, wall_seconds)");
    }
    c.budget = parse_budget(r, root["budget"]);
    if (!root["replicates"]) {
        r.fail(root, "missing replicates");
    }
    if (root["replicates"].IsNull()) {
        r.fail(root["replicates"], "replicates must be at least 1");
    }
    c.replicates = r.count(root["replicates"], "replicates");
    if (c.replicates < 1) {
        r.fail(root["replicates"], "replicates must be at least 1");
    }
    if (root["discretization"]) {
        c.discretization = r.count(root["discretization"], "discretization");
        if (c.discretization < 100) {
            r.fail(root["discretization"], "discretization must be at least 100 (ESS needs 100 rows)");
        }
    }
    if (root["seed"]) {
        c.seed = r.count(root["seed"], "seed");
    }
    if (root["init"]) {
        const auto s = r.text(root["init"], "init");
        if (s == "zero") {
            c.init = InitMode::Zero;
        } else if (s == "draw") {
            c.init = InitMode::Draw;
        } else if (s == "map") {
            c.init = InitMode::Map;
        } else {
            r.fail(root["init"], "init must be zero, draw or map");
        }
    }
    if (root["ks"]) {
        const auto s = r.text(root["ks"], "ks");
        if (s == "none") {
            c.ks = KsMode::None;
        } else if (s == "marginal") {
            c.ks = KsMode::Marginal;
        } else if (s == "two-sample") {
            c.ks = KsMode::TwoSample;
        } else {
            r.fail(root["ks"], "ks must be none, marginal or two-sample");
        }
    } else {
        const auto k = c.target.kind;
        c.ks = k == TargetKind::Mvn1 || k == TargetKind::Mvn2 || k == TargetKind::MvnIdentity ? KsMode::Marginal
                                                                                               : KsMode::None;
    }
    if (root["ks_reference_scale"]) {
        c.ks_reference_scale = r.positive(root["ks_reference_scale"], "ks_reference_scale");
    }
    if (root["write_samples"]) {
        c.write_samples = r.boolean(root["write_samples"], "write_samples");
    }
    if (root["threads"]) {
        c.threads = r.count(root["threads"], "threads");
    }
    if (root["out"]) {
        std::filesystem::path p = r.text(root["out"], "out");
        if (p.is_relative() && !base_dir.empty()) {
            p = base_dir / p;
        }
        c.out = p;
    }

    // Semantic checks that still have a line to point at.
    const bool mvn = c.target.kind == TargetKind::Mvn1 || c.target.kind == TargetKind::Mvn2 ||
                     c.target.kind == TargetKind::MvnIdentity;
    if (c.ks == KsMode::Marginal && !mvn) {
        r.fail(root["ks"] ? root["ks"] : root, std::string("ks: marginal needs a target with known marginals; ") +
                                                   to_string(c.target.kind) + " has none, use ks: two-sample");
    }
    if (c.init == InitMode::Draw && !mvn) {
        r.fail(root["init"], "init: draw needs an mvn target (exact draws)");
    }
    if (c.init == InitMode::Map && c.target.kind != TargetKind::Logistic) {
        r.fail(root["init"], "init: map is available for the logistic target only");
    }
    if (c.target.kind == TargetKind::Lgcp) {
        for (std::size_t k = 0; k < c.samplers.size(); ++k) {
            if (std::holds_alternative<BouncySpec>(c.samplers[k].spec)) {
                r.fail(root["samplers"], "bps is not supported on the lgcp target (coordinate rays only)");
            }
        }
    }
    validate(c);
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path)
{
    return parse_config(read_file(path), path.string(), path.parent_path());
}

void validate(const ExperimentConfig& c)
{
    if (c.samplers.empty()) {
        throw ConfigError("at least one sampler is required");
    }
    if (c.replicates < 1) {
        throw ConfigError("replicates must be at least 1");
    }
    if (!(c.budget.value > 0.0)) {
        throw ConfigError("budget must be positive");
    }
    if (c.discretization < 100) {
        throw ConfigError("discretization must be at least 100");
    }
    if (c.target.data && !std::filesystem::is_regular_file(*c.target.data)) {
        throw ConfigError("dataset file does not exist: " + c.target.data->string());
    }
}

void validate_for_compare(const ExperimentConfig& c)
{
    validate(c);
    if (c.samplers.size() < 2) {
        throw ConfigError("compare needs at least two samplers");
    }
    if (c.ks == KsMode::None) {
        throw ConfigError("compare needs ks: marginal or ks: two-sample");
    }
}

SimulateConfig parse_simulate_config(const std::string& text, const std::string& source)
{
    const Reader r(source);
    const YAML::Node root = load_yaml(text, source);
    if (!root.IsMap()) {
        throw ConfigError(source + ": config must be a mapping");
    }
    r.check_keys(root, {"kind", "observations", "covariates", "side", "sigma2", "mu", "beta", "seed", "file"},
                 "simulate-data config");
    SimulateConfig c;
    if (!root["kind"]) {
        r.fail(root, "missing kind (logistic or lgcp)");
    }
    c.kind = parse_target_kind(r, root["kind"]);
    if (c.kind != TargetKind::Logistic && c.kind != TargetKind::Lgcp) {
        r.fail(root["kind"], "simulate-data supports logistic and lgcp");
    }
    const bool logistic = c.kind == TargetKind::Logistic;
    for (const char* key : {"observations", "covariates"}) {
        if (root[key] && !logistic) {
            r.fail(root[key], std::string(key) + " applies only to logistic data");
        }
    }
    for (const char* key : {"side", "sigma2", "mu", "beta"}) {
        if (root[key] && logistic) {
            r.fail(root[key], std::string(key) + " applies only to lgcp data");
        }
    }
    if (root["observations"]) {
        c.observations = r.count(root["observations"], "observations");
        if (c.observations < 1) {
            r.fail(root["observations"], "observations must be at least 1");
        }
    }
    if (root["covariates"]) {
        c.covariates = r.count(root["covariates"], "covariates");
        if (c.covariates < 1) {
            r.fail(root["covariates"], "covariates must be at least 1");
        }
    }
    read_lgcp_params(r, root, c.lgcp);
    if (root["seed"]) {
        c.seed = r.count(root["seed"], "seed");
    }
    if (root["file"]) {
        c.file = r.text(root["file"], "file");
    }
    return c;
}

std::filesystem::path simulate_data(const SimulateConfig& c, const std::filesystem::path& out_dir)
{
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) {
        throw std::runtime_error("cannot create output directory " + out_dir.string() + ": " + ec.message());
    }
    const auto path = out_dir / (c.file.empty() ? std::string(to_string(c.kind)) + ".csv" : c.file);
    RandomSource rng(c.seed, 0);
    if (c.kind == TargetKind::Logistic) {
        write_logistic_csv(simulate_logistic_data(c.observations, c.covariates, rng), path);
    } else {
        write_lgcp_csv(simulate_lgcp_data(c.lgcp, rng), path);
    }
    return path;
}

}  // namespace pdmp::experiment
