#include "pdmp/core.hpp"

#include <algorithm>
#include <cmath>

namespace pdmp {

PhaseState::PhaseState(Vector position, Vector velocity, double time)
    : x(std::move(position)), v(std::move(velocity)), t(time)
{
    if (x.size() != v.size() || x.empty()) {
        throw std::invalid_argument("PhaseState: position and velocity must share a dimension >= 1");
    }
    if (!(t >= 0.0)) {
        throw std::invalid_argument("PhaseState: time must be nonnegative");
    }
}

PhaseState advance(const PhaseState& state, double dt)
{
    PhaseState out = state;
    advance_in_place(out, dt);
    return out;
}

void advance_in_place(PhaseState& state, double dt)
{
    if (!(dt >= 0.0)) {
        throw std::invalid_argument("advance: dt must be nonnegative");
    }
    if (dt == 0.0) {
        return;
    }
    for (std::size_t i = 0; i < state.x.size(); ++i) {
        state.x[i] += dt * state.v[i];
    }
    state.t += dt;
}

const char* to_string(EventKind kind) noexcept
{
    switch (kind) {
    case EventKind::CoordinateSwitch: return "coordinate-switch";
    case EventKind::ZigzagFlip: return "zigzag-flip";
    case EventKind::Bounce: return "bounce";
    case EventKind::Refresh: return "refresh";
    case EventKind::Horizon: return "horizon";
    }
    return "unknown";
}

Counters& Counters::operator+=(const Counters& other) noexcept
{
    events += other.events;
    rate_evals += other.rate_evals;
    thinning_rejections += other.thinning_rejections;
    return *this;
}

void Trajectory::push(double time, std::span<const double> x, std::span<const double> v)
{
    if (!points_.empty() && !(time > points_.back().time)) {
        throw std::invalid_argument("Trajectory: event times must be strictly increasing");
    }
    points_.push_back({time, Vector(x.begin(), x.end()), Vector(v.begin(), v.end())});
}

std::size_t Trajectory::segment_index(double t) const
{
    if (points_.empty()) {
        throw std::logic_error("Trajectory: empty skeleton");
    }
    // Last m with tau_m <= t.
    auto it = std::upper_bound(points_.begin(), points_.end(), t,
                               [](double value, const SkeletonPoint& p) { return value < p.time; });
    if (it == points_.begin()) {
        return 0;
    }
    return static_cast<std::size_t>(std::distance(points_.begin(), it) - 1);
}

Vector Trajectory::position_at(double t) const
{
    const auto& p = points_[segment_index(t)];
    Vector x = p.x;
    const double dt = t - p.time;
    for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] += dt * p.v[i];
    }
    return x;
}

namespace {

std::mt19937_64 seeded_engine(std::uint64_t seed, std::uint64_t stream)
{
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                      0x9e3779b9u};
    return std::mt19937_64(seq);
}

std::uint64_t splitmix(std::uint64_t z) noexcept
{
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace

RandomSource::RandomSource(std::uint64_t seed, std::uint64_t stream)
    : seed_(seed), stream_(stream), engine_(seeded_engine(seed, stream))
{
}

double RandomSource::exponential() noexcept
{
    return -std::log(uniform());
}

double RandomSource::normal()
{
    return normal_(engine_);
}

std::size_t RandomSource::index(std::size_t n) noexcept
{
    auto k = static_cast<std::size_t>(uniform() * static_cast<double>(n));
    return std::min(k, n - 1);
}

int RandomSource::poisson(double mean)
{
    std::poisson_distribution<int> dist(mean);
    return dist(engine_);
}

RandomSource RandomSource::split(std::uint64_t child) const
{
    return RandomSource(seed_, splitmix(stream_ ^ splitmix(child + 1)));
}

}  // namespace pdmp
