// Coordinate, Zigzag and Bouncy Particle samplers as (event rate, transition
// kernel) pairs, and the single event-driven loop that runs them.
#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <span>
#include <variant>
#include <vector>

#include "pdmp/clocks.hpp"
#include "pdmp/core.hpp"
#include "pdmp/targets.hpp"

namespace pdmp {

enum class VelocityLaw { Sphere, Gaussian };

/// Velocities {+-e_i}. refresh == 0 is the canonical sampler; invariance of
/// the target is only guaranteed for refresh > 0.
struct CoordinateSpec {
    double refresh = 0.0;
};

/// Velocities {-1, 1}^d, one refresh rate per coordinate (empty = all 0).
struct ZigzagSpec {
    Vector refresh;
};

struct BouncySpec {
    double refresh = 1.0;
    VelocityLaw law = VelocityLaw::Sphere;
};

using SamplerSpec = std::variant<CoordinateSpec, ZigzagSpec, BouncySpec>;

const char* sampler_name(const SamplerSpec& spec) noexcept;
/// Throws std::invalid_argument on negative refresh rates or a ZS refresh
/// vector of the wrong length.
void validate_spec(const SamplerSpec& spec, std::size_t dim);
/// True for a Coordinate sampler with zero refresh.
bool is_canonical_coordinate(const SamplerSpec& spec) noexcept;

// --- Coordinate sampler ----------------------------------------------------

/// (<v, grad>)_+ + refresh
double cs_rate(std::span<const double> grad, std::span<const double> v, double refresh);
/// 2 d refresh + sum_i |d_i U|
double cs_total_rate(std::span<const double> grad, double refresh);
/// Weights lambda(x, -v*) of the 2d atoms, ordered (+e_1, -e_1, +e_2, ...).
Vector cs_transition_weights(std::span<const double> grad, double refresh);

struct AxisVelocity {
    std::size_t axis = 0;
    double sign = 1.0;
};

/// Samples v* with probability lambda(x, -v*) / lambda(x). Throws
/// SamplerError when the total rate vanishes.
AxisVelocity cs_transition(std::span<const double> grad, double refresh, RandomSource& rng);

// --- Zigzag sampler ----------------------------------------------------------

/// lambda_i = (v_i d_i U)_+ + refresh_i
Vector zz_rates(std::span<const double> grad, std::span<const double> v, std::span<const double> refresh);
/// F_i v (0-based index).
Vector zz_flip(std::span<const double> v, std::size_t i);

// --- Bouncy particle sampler -----------------------------------------------

/// R_w v = v - 2 <w, v> / <w, w> w. Throws SamplerError when |w| < 1e-14.
Vector bps_bounce(std::span<const double> v, std::span<const double> w);
void bps_bounce_in_place(std::span<double> v, std::span<const double> w);

void draw_velocity(VelocityLaw law, std::span<double> v, RandomSource& rng);

/// Bounce with probability <v, grad>_+ / (<v, grad>_+ + refresh), otherwise
/// an independent draw from the velocity law. Returns the event kind.
EventKind bps_step_kernel(std::span<const double> grad, std::span<double> v, double refresh,
                          VelocityLaw law, RandomSource& rng);

// --- Generators (for invariance checks) ----------------------------------

/// Scalar test function f(x, v) with its x-gradient.
struct TestFunction {
    std::function<double(std::span<const double>, std::span<const double>)> value;
    std::function<void(std::span<const double>, std::span<const double>, std::span<double>)> gradient_x;
};

/// L f(x, v) = <v, grad_x f> + lambda(x, v) sum_{v*} [f(x, v*) - f(x, v)] Q(v* | x)
/// for the Coordinate sampler.
double cs_generator(const Target& target, const TestFunction& f, std::span<const double> x,
                    std::span<const double> v, double refresh);

// --- Velocity sets -----------------------------------------------------------

/// Uniform draw from the sampler's velocity law.
Vector initial_velocity(const SamplerSpec& spec, std::size_t dim, RandomSource& rng);
/// Throws SamplerError when v is outside the velocity set.
void check_velocity(const SamplerSpec& spec, std::span<const double> v);

// --- Engine ------------------------------------------------------------------

/// Stopping rules; a run stops at the first one that triggers. A horizon
/// caps event times: the event crossing it is still applied and recorded,
/// and estimators truncate at the horizon. Budget rules
/// stop after the event that exhausts them; the horizon is then that event's
/// time.
struct StopRule {
    double horizon = kInfinity;
    std::uint64_t max_rate_evals = 0;  // 0 = unlimited
    std::uint64_t max_events = 0;      // 0 = unlimited
    double max_wall_seconds = 0.0;     // 0 = unlimited

    static StopRule at_horizon(double t) { return StopRule{t}; }
    static StopRule rate_evals(std::uint64_t n) { return StopRule{kInfinity, n}; }
    static StopRule events(std::uint64_t n) { return StopRule{kInfinity, 0, n}; }
    static StopRule wall_seconds(double s) { return StopRule{kInfinity, 0, 0, s}; }

    bool bounded() const noexcept;
};

/// Observer of the piecewise-linear path.
class PathSink {
public:
    virtual ~PathSink() = default;
    virtual void on_start(const PhaseState&) {}
    /// Linear piece x(s) = x + (s - t0) v for s in [t0, t0 + dt]; already
    /// truncated at the horizon.
    virtual void on_segment(std::span<const double> x, std::span<const double> v, double t0, double dt) = 0;
    /// Post-event state and the event's bookkeeping.
    virtual void on_event(const PhaseState&, const EventRecord&) {}
    virtual void on_finish(double /*horizon*/) {}
};

struct RunResult {
    PhaseState final_state;
    Counters counters;
    double horizon = 0.0;  // estimation horizon T
    double wall_seconds = 0.0;
    bool canonical_coordinate = false;
};

/// The event loop: rate profile from the target along (x, v), first arrival
/// by exact inversion or thinning (per-coordinate clocks superposed for ZS),
/// advance, transition kernel, repeat until a stop rule fires. Throws
/// SamplerError with the event index and state on any kernel failure.
RunResult run(const SamplerSpec& spec, const Target& target, PhaseState start, const StopRule& stop,
              RandomSource& rng, std::span<PathSink* const> sinks = {});

/// Full-skeleton form: (Trajectory, result).
std::pair<Trajectory, RunResult> run_trajectory(const SamplerSpec& spec, const Target& target,
                                                PhaseState start, const StopRule& stop, RandomSource& rng,
                                                std::vector<EventRecord>* events = nullptr);

/// Records every skeleton point (and optionally the event records).
class TrajectoryRecorder final : public PathSink {
public:
    explicit TrajectoryRecorder(std::vector<EventRecord>* events = nullptr) : events_(events) {}

    void on_start(const PhaseState& z) override;
    void on_segment(std::span<const double>, std::span<const double>, double, double) override {}
    void on_event(const PhaseState& z, const EventRecord& record) override;
    void on_finish(double horizon) override { trajectory_.set_horizon(horizon); }

    Trajectory take() { return std::move(trajectory_); }

private:
    Trajectory trajectory_;
    std::vector<EventRecord>* events_;
};

}  // namespace pdmp
