#include "pdmp/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "pdmp/simd.hpp"

namespace pdmp {

const char* sampler_name(const SamplerSpec& spec) noexcept
{
    switch (spec.index()) {
    case 0: return "cs";
    case 1: return "zs";
    default: return "bps";
    }
}

void validate_spec(const SamplerSpec& spec, std::size_t dim)
{
    if (const auto* cs = std::get_if<CoordinateSpec>(&spec)) {
        if (!(cs->refresh >= 0.0)) {
            throw std::invalid_argument("cs: refresh rate must be nonnegative");
        }
    } else if (const auto* zs = std::get_if<ZigzagSpec>(&spec)) {
        if (!zs->refresh.empty() && zs->refresh.size() != dim) {
            throw std::invalid_argument("zs: refresh vector length differs from the dimension");
        }
        for (double r : zs->refresh) {
            if (!(r >= 0.0)) {
                throw std::invalid_argument("zs: refresh rates must be nonnegative");
            }
        }
    } else {
        const auto& bps = std::get<BouncySpec>(spec);
        if (!(bps.refresh >= 0.0)) {
            throw std::invalid_argument("bps: refresh rate must be nonnegative");
        }
    }
}

bool is_canonical_coordinate(const SamplerSpec& spec) noexcept
{
    const auto* cs = std::get_if<CoordinateSpec>(&spec);
    return cs != nullptr && cs->refresh == 0.0;
}

double cs_rate(std::span<const double> grad, std::span<const double> v, double refresh)
{
    const double a = simd::dot(v, grad);
    return (a > 0.0 ? a : 0.0) + refresh;
}

double cs_total_rate(std::span<const double> grad, double refresh)
{
    return 2.0 * static_cast<double>(grad.size()) * refresh + simd::sum_abs(grad);
}

Vector cs_transition_weights(std::span<const double> grad, double refresh)
{
    Vector w(2 * grad.size());
    for (std::size_t j = 0; j < grad.size(); ++j) {
        const double g = grad[j];
        w[2 * j] = (g < 0.0 ? -g : 0.0) + refresh;      // v* = +e_j: lambda(x, -e_j)
        w[2 * j + 1] = (g > 0.0 ? g : 0.0) + refresh;  // v* = -e_j: lambda(x, +e_j)
    }
    return w;
}

AxisVelocity cs_transition(std::span<const double> grad, double refresh, RandomSource& rng)
{
    const double total = cs_total_rate(grad, refresh);
    if (!(total > 0.0)) {
        throw SamplerError("transition kernel undefined at critical point with lambda_ref=0");
    }
    const double target = rng.uniform() * total;
    double cumulative = 0.0;
    AxisVelocity last{0, 1.0};
    for (std::size_t j = 0; j < grad.size(); ++j) {
        const double g = grad[j];
        const double plus = (g < 0.0 ? -g : 0.0) + refresh;
        const double minus = (g > 0.0 ? g : 0.0) + refresh;
        if (plus > 0.0) {
            cumulative += plus;
            last = {j, 1.0};
            if (target < cumulative) {
                return last;
            }
        }
        if (minus > 0.0) {
            cumulative += minus;
            last = {j, -1.0};
            if (target < cumulative) {
                return last;
            }
        }
    }
    // Rounding between the vectorized total and this scan.
    return last;
}

Vector zz_rates(std::span<const double> grad, std::span<const double> v, std::span<const double> refresh)
{
    Vector rates(grad.size());
    for (std::size_t i = 0; i < grad.size(); ++i) {
        const double a = v[i] * grad[i];
        rates[i] = (a > 0.0 ? a : 0.0) + (refresh.empty() ? 0.0 : refresh[i]);
    }
    return rates;
}

Vector zz_flip(std::span<const double> v, std::size_t i)
{
    if (i >= v.size()) {
        throw std::out_of_range("zz_flip: index out of range");
    }
    Vector out(v.begin(), v.end());
    out[i] = -out[i];
    return out;
}

void bps_bounce_in_place(std::span<double> v, std::span<const double> w)
{
    const double ww = simd::dot(w, w);
    if (!(std::sqrt(ww) >= 1e-14)) {
        throw SamplerError("bounce at critical point");
    }
    const double scale = -2.0 * simd::dot(w, v) / ww;
    simd::axpy(scale, w, v);
}

Vector bps_bounce(std::span<const double> v, std::span<const double> w)
{
    Vector out(v.begin(), v.end());
    bps_bounce_in_place(out, w);
    return out;
}

namespace {

void normalize(std::span<double> v)
{
    const double norm = std::sqrt(simd::dot(v, v));
    for (double& vi : v) {
        vi /= norm;
    }
}

}  // namespace

void draw_velocity(VelocityLaw law, std::span<double> v, RandomSource& rng)
{
    for (double& vi : v) {
        vi = rng.normal();
    }
    if (law == VelocityLaw::Sphere) {
        normalize(v);
    }
}

EventKind bps_step_kernel(std::span<const double> grad, std::span<double> v, double refresh,
                          VelocityLaw law, RandomSource& rng)
{
    double bounce = simd::dot(v, grad);
    bounce = bounce > 0.0 ? bounce : 0.0;
    const double total = bounce + refresh;
    if (!(total > 0.0)) {
        throw SamplerError("bps: event rate vanishes at the event");
    }
    if (rng.uniform() * total < bounce) {
        bps_bounce_in_place(v, grad);
        if (law == VelocityLaw::Sphere) {
            normalize(v);
        }
        return EventKind::Bounce;
    }
    draw_velocity(law, v, rng);
    return EventKind::Refresh;
}

double cs_generator(const Target& target, const TestFunction& f, std::span<const double> x,
                    std::span<const double> v, double refresh)
{
    const std::size_t d = target.dim();
    const Vector grad = target.gradient(x);
    Vector fx(d);
    f.gradient_x(x, v, fx);
    double drift = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        drift += v[i] * fx[i];
    }
    const double total = cs_total_rate(grad, refresh);
    if (total == 0.0) {
        return drift;
    }
    const double rate = cs_rate(grad, v, refresh);
    const double here = f.value(x, v);
    const Vector weights = cs_transition_weights(grad, refresh);
    Vector atom(d, 0.0);
    double jump = 0.0;
    for (std::size_t k = 0; k < weights.size(); ++k) {
        std::fill(atom.begin(), atom.end(), 0.0);
        atom[k / 2] = k % 2 == 0 ? 1.0 : -1.0;
        jump += (f.value(x, atom) - here) * weights[k] / total;
    }
    return drift + rate * jump;
}

Vector initial_velocity(const SamplerSpec& spec, std::size_t dim, RandomSource& rng)
{
    Vector v(dim, 0.0);
    if (std::holds_alternative<CoordinateSpec>(spec)) {
        const std::size_t k = rng.index(2 * dim);
        v[k / 2] = k % 2 == 0 ? 1.0 : -1.0;
    } else if (std::holds_alternative<ZigzagSpec>(spec)) {
        for (double& vi : v) {
            vi = rng.uniform() < 0.5 ? -1.0 : 1.0;
        }
    } else {
        draw_velocity(std::get<BouncySpec>(spec).law, v, rng);
    }
    return v;
}

void check_velocity(const SamplerSpec& spec, std::span<const double> v)
{
    if (std::holds_alternative<CoordinateSpec>(spec)) {
        std::size_t nonzero = 0;
        for (double vi : v) {
            if (vi != 0.0) {
                ++nonzero;
                if (vi != 1.0 && vi != -1.0) {
                    throw SamplerError("cs: velocity entries must be 0 or +-1");
                }
            }
        }
        if (nonzero != 1) {
            throw SamplerError("cs: velocity must be +-e_i");
        }
    } else if (std::holds_alternative<ZigzagSpec>(spec)) {
        for (double vi : v) {
            if (vi != 1.0 && vi != -1.0) {
                throw SamplerError("zs: velocity entries must be +-1");
            }
        }
    } else {
        const auto& bps = std::get<BouncySpec>(spec);
        double norm2 = 0.0;
        for (double vi : v) {
            if (!std::isfinite(vi)) {
                throw SamplerError("bps: velocity is not finite");
            }
            norm2 += vi * vi;
        }
        if (bps.law == VelocityLaw::Sphere && std::fabs(std::sqrt(norm2) - 1.0) > 1e-12) {
            throw SamplerError("bps: velocity must lie on the unit sphere");
        }
    }
}

bool StopRule::bounded() const noexcept
{
    return horizon < kInfinity || max_rate_evals > 0 || max_events > 0 || max_wall_seconds > 0.0;
}

// ---------------------------------------------------------------------------
// Engine

namespace {

struct NextEvent {
    double eta = clocks::kNever;
    std::size_t clock = 0;
    std::uint64_t rate_evals = 0;
    std::uint64_t rejections = 0;
};

class CoordinateKernel {
public:
    explicit CoordinateKernel(const CoordinateSpec& spec) : refresh_(spec.refresh) {}

    NextEvent next(TargetCursor& cursor, const PhaseState& z, RandomSource& rng, double t_cap)
    {
        const auto profile = cursor.directional(z.x, z.v, refresh_);
        const auto draw = clocks::first_arrival(profile, rng, t_cap);
        return {draw.eta, 0, draw.rate_evals, draw.rejections};
    }

    EventKind transition(TargetCursor& cursor, PhaseState& z, RandomSource& rng, std::size_t)
    {
        const AxisVelocity next = cs_transition(cursor.gradient(), refresh_, rng);
        std::fill(z.v.begin(), z.v.end(), 0.0);
        z.v[next.axis] = next.sign;
        cursor.velocity_changed(z.x, z.v, VelocityChange::axis(next.axis));
        return EventKind::CoordinateSwitch;
    }

private:
    double refresh_;
};

class ZigzagKernel {
public:
    ZigzagKernel(const ZigzagSpec& spec, std::size_t dim)
        : refresh_(spec.refresh.empty() ? Vector(dim, 0.0) : spec.refresh), arrivals_(dim)
    {
    }

    NextEvent next(TargetCursor& cursor, const PhaseState& z, RandomSource& rng, double t_cap)
    {
        NextEvent out;
        double best = t_cap;
        pending_.clear();
        for (std::size_t i = 0; i < arrivals_.size(); ++i) {
            auto profile = cursor.coordinate(z.x, z.v, i, refresh_[i]);
            arrivals_[i] = clocks::kNever;
            if (auto* general = std::get_if<clocks::General>(&profile)) {
                pending_.emplace_back(i, std::move(*general));
                continue;
            }
            const auto draw = clocks::first_arrival(profile, rng);
            arrivals_[i] = draw.eta;
            out.rate_evals += draw.rate_evals;
            best = std::min(best, draw.eta);
        }
        // Thinned clocks advance together one slice at a time, each slice
        // capped at the earliest arrival so far. A clock whose rate has died
        // out then stops as soon as another clock fires.
        double from = 0.0;
        double slice = 1.0;
        while (!pending_.empty() && from < best) {
            const double to = std::min(best, from + slice);
            for (std::size_t k = 0; k < pending_.size();) {
                const auto draw = clocks::thin(pending_[k].second, rng, to, from);
                out.rate_evals += draw.rate_evals;
                out.rejections += draw.rejections;
                if (!clocks::is_never(draw.eta)) {
                    arrivals_[pending_[k].first] = draw.eta;
                    best = std::min(best, draw.eta);
                    pending_[k] = std::move(pending_.back());
                    pending_.pop_back();
                } else {
                    ++k;
                }
            }
            from = to;
            if (!(from < kMaxSilence)) {
                break;
            }
            slice *= 2.0;
        }
        const auto first = clocks::superpose(arrivals_);
        out.eta = first.eta;
        out.clock = first.index;
        return out;
    }

    EventKind transition(TargetCursor& cursor, PhaseState& z, RandomSource&, std::size_t clock)
    {
        z.v[clock] = -z.v[clock];
        cursor.velocity_changed(z.x, z.v, VelocityChange::flip(clock));
        return EventKind::ZigzagFlip;
    }

private:
    // Same order as the window limit of a single thinned clock.
    static constexpr double kMaxSilence = 1e8;

    Vector refresh_;
    std::vector<std::pair<std::size_t, clocks::General>> pending_;
    Vector arrivals_;
};

class BouncyKernel {
public:
    explicit BouncyKernel(const BouncySpec& spec) : spec_(spec) {}

    NextEvent next(TargetCursor& cursor, const PhaseState& z, RandomSource& rng, double t_cap)
    {
        const auto profile = cursor.directional(z.x, z.v, spec_.refresh);
        const auto draw = clocks::first_arrival(profile, rng, t_cap);
        return {draw.eta, 0, draw.rate_evals, draw.rejections};
    }

    EventKind transition(TargetCursor& cursor, PhaseState& z, RandomSource& rng, std::size_t)
    {
        const EventKind kind = bps_step_kernel(cursor.gradient(), z.v, spec_.refresh, spec_.law, rng);
        cursor.velocity_changed(z.x, z.v, VelocityChange::arbitrary());
        return kind;
    }

private:
    BouncySpec spec_;
};

std::string describe(const PhaseState& z, std::uint64_t event)
{
    std::ostringstream msg;
    msg.precision(17);
    msg << " [event " << event << ", t=" << z.t << ", x=(";
    const std::size_t shown = std::min<std::size_t>(z.x.size(), 8);
    for (std::size_t i = 0; i < shown; ++i) {
        msg << (i ? "," : "") << z.x[i];
    }
    msg << (z.x.size() > shown ? ",...)" : ")") << "]";
    return msg.str();
}

template <class Kernel>
RunResult run_loop(Kernel& kernel, const SamplerSpec& spec, const Target& target, PhaseState z,
                   const StopRule& stop, RandomSource& rng, std::span<PathSink* const> sinks)
{
    using Clock = std::chrono::steady_clock;
    const auto started = Clock::now();

    RunResult result;
    result.canonical_coordinate = is_canonical_coordinate(spec);
    auto cursor = target.cursor(z.x, z.v);
    for (PathSink* sink : sinks) {
        sink->on_start(z);
    }

    const double horizon = stop.horizon;
    Counters& counters = result.counters;
    double estimation_horizon = horizon;

    for (;;) {
        const double t_cap = horizon - z.t;
        NextEvent next;
        try {
            next = kernel.next(*cursor, z, rng, t_cap);
        } catch (const std::exception& e) {
            throw SamplerError(e.what() + describe(z, counters.events));
        }
        counters.rate_evals += next.rate_evals;
        counters.thinning_rejections += next.rejections;

        const bool crosses = !(next.eta < t_cap);
        if (crosses && !(t_cap < kInfinity)) {
            throw SamplerError("no event in finite time and no horizon" + describe(z, counters.events));
        }
        const double seg = crosses ? t_cap : next.eta;
        for (PathSink* sink : sinks) {
            sink->on_segment(z.x, z.v, z.t, seg);
        }

        EventRecord record;
        record.rate_evals = next.rate_evals;
        record.thinning_rejections = next.rejections;
        if (crosses && clocks::is_never(next.eta)) {
            advance_in_place(z, t_cap);
            z.t = horizon;
            cursor->advanced(z.x, z.v, t_cap);
            record.kind = EventKind::Horizon;
        } else {
            advance_in_place(z, next.eta);
            cursor->advanced(z.x, z.v, next.eta);
            try {
                record.kind = kernel.transition(*cursor, z, rng, next.clock);
                check_velocity(spec, z.v);
            } catch (const std::exception& e) {
                throw SamplerError(e.what() + describe(z, counters.events));
            }
            ++counters.events;
        }
        record.time = z.t;
        for (PathSink* sink : sinks) {
            sink->on_event(z, record);
        }
        if (crosses) {
            break;
        }
        if ((stop.max_rate_evals > 0 && counters.rate_evals >= stop.max_rate_evals)
            || (stop.max_events > 0 && counters.events >= stop.max_events)) {
            estimation_horizon = z.t;
            break;
        }
        if (stop.max_wall_seconds > 0.0 && (counters.events & 63u) == 0
            && std::chrono::duration<double>(Clock::now() - started).count() >= stop.max_wall_seconds) {
            estimation_horizon = z.t;
            break;
        }
    }

    for (PathSink* sink : sinks) {
        sink->on_finish(estimation_horizon);
    }
    result.horizon = estimation_horizon;
    result.final_state = std::move(z);
    result.wall_seconds = std::chrono::duration<double>(Clock::now() - started).count();
    return result;
}

}  // namespace

RunResult run(const SamplerSpec& spec, const Target& target, PhaseState start, const StopRule& stop,
              RandomSource& rng, std::span<PathSink* const> sinks)
{
    if (!stop.bounded()) {
        throw std::invalid_argument("run: no stopping rule set");
    }
    if (!(stop.horizon > 0.0)) {
        throw std::invalid_argument("run: horizon must be positive");
    }
    if (start.dim() != target.dim() || start.v.size() != target.dim()) {
        throw std::invalid_argument("run: start state dimension differs from the target");
    }
    validate_spec(spec, target.dim());
    check_velocity(spec, start.v);
    start.t = 0.0;

    return std::visit(
        [&](const auto& s) -> RunResult {
            using S = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<S, CoordinateSpec>) {
                CoordinateKernel kernel(s);
                return run_loop(kernel, spec, target, std::move(start), stop, rng, sinks);
            } else if constexpr (std::is_same_v<S, ZigzagSpec>) {
                ZigzagKernel kernel(s, target.dim());
                return run_loop(kernel, spec, target, std::move(start), stop, rng, sinks);
            } else {
                BouncyKernel kernel(s);
                return run_loop(kernel, spec, target, std::move(start), stop, rng, sinks);
            }
        },
        spec);
}

void TrajectoryRecorder::on_start(const PhaseState& z)
{
    trajectory_.push(z.t, z.x, z.v);
}

void TrajectoryRecorder::on_event(const PhaseState& z, const EventRecord& record)
{
    trajectory_.push(z.t, z.x, z.v);
    if (events_ != nullptr) {
        events_->push_back(record);
    }
}

std::pair<Trajectory, RunResult> run_trajectory(const SamplerSpec& spec, const Target& target,
                                                PhaseState start, const StopRule& stop, RandomSource& rng,
                                                std::vector<EventRecord>* events)
{
    TrajectoryRecorder recorder(events);
    PathSink* sinks[] = {&recorder};
    RunResult result = run(spec, target, std::move(start), stop, rng, sinks);
    return {recorder.take(), std::move(result)};
}

}  // namespace pdmp
