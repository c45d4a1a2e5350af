// Phase-space types, trajectories, counters and seeded randomness shared by
// every sampler.
#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace pdmp {

using Vector = std::vector<double>;

/// Raised when a run or kernel hits a state where the process is undefined
/// (critical point with zero refresh, bound violation, ...).
class SamplerError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Augmented state Z = (X, V) at process time t.
struct PhaseState {
    Vector x;
    Vector v;
    double t = 0.0;

    PhaseState() = default;
    PhaseState(Vector position, Vector velocity, double time = 0.0);

    std::size_t dim() const noexcept { return x.size(); }
};

/// Linear flow: (x + dt v, v, t + dt). Throws std::invalid_argument for dt < 0.
PhaseState advance(const PhaseState& state, double dt);

/// In-place variant used by the engine.
void advance_in_place(PhaseState& state, double dt);

enum class EventKind : std::uint8_t {
    CoordinateSwitch,
    ZigzagFlip,
    Bounce,
    Refresh,
    Horizon,  // no event before the horizon; the path was capped there
};

const char* to_string(EventKind kind) noexcept;

/// Work counters; monotone over a run.
struct Counters {
    std::uint64_t events = 0;
    std::uint64_t rate_evals = 0;
    std::uint64_t thinning_rejections = 0;

    Counters& operator+=(const Counters& other) noexcept;
};

struct EventRecord {
    double time = 0.0;
    EventKind kind = EventKind::CoordinateSwitch;
    std::uint64_t rate_evals = 0;           // since the previous event
    std::uint64_t thinning_rejections = 0;  // since the previous event
};

/// Ordered event skeleton {(tau_m, x_m, v_m)} of a piecewise-linear path.
/// x_m, v_m are the post-event state at tau_m; skeleton[0] is the start.
struct SkeletonPoint {
    double time;
    Vector x;
    Vector v;
};

class Trajectory {
public:
    Trajectory() = default;
    explicit Trajectory(double horizon) : horizon_(horizon) {}

    void push(double time, std::span<const double> x, std::span<const double> v);

    const std::vector<SkeletonPoint>& skeleton() const noexcept { return points_; }
    std::size_t size() const noexcept { return points_.size(); }
    std::size_t dim() const noexcept { return points_.empty() ? 0 : points_.front().x.size(); }

    /// Estimation horizon T; the last skeleton time may exceed it.
    double horizon() const noexcept { return horizon_; }
    void set_horizon(double horizon) noexcept { horizon_ = horizon; }

    /// Position at time t in [0, last event time].
    Vector position_at(double t) const;

    /// Index m of the segment [tau_m, tau_{m+1}) containing t.
    std::size_t segment_index(double t) const;

private:
    std::vector<SkeletonPoint> points_;
    double horizon_ = 0.0;
};

/// Seeded uniform/exponential/normal source. Identical (seed, stream)
/// reproduces identical draws; distinct streams are independent.
class RandomSource {
public:
    RandomSource(std::uint64_t seed, std::uint64_t stream = 0);

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream() const noexcept { return stream_; }

    /// Uniform draw on the open interval (0, 1).
    double uniform() noexcept
    {
        return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Standard exponential, -log(U).
    double exponential() noexcept;
    double normal();
    /// Index in [0, n).
    std::size_t index(std::size_t n) noexcept;
    int poisson(double mean);

    /// Independent child stream, e.g. one per replicate.
    RandomSource split(std::uint64_t child) const;

    std::mt19937_64& engine() noexcept { return engine_; }

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

}  // namespace pdmp
