// Event-time generation for time-inhomogeneous Poisson processes: closed-form
// inversion of constant and affine-plus rates, thinning against windowed
// constant envelopes, and superposition of competing clocks.
//
// A first-arrival time of +infinity (kNever) is the "no event in finite
// time" signal; callers cap it at the remaining horizon.
#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <variant>

#include "pdmp/core.hpp"

namespace pdmp::clocks {

inline constexpr double kNever = kInfinity;

inline bool is_never(double eta) noexcept { return !(eta < kNever); }

/// lambda(t) = c
struct Constant {
    double c = 0.0;
    double operator()(double) const noexcept { return c; }
};

/// lambda(t) = (a + b t)_+ + c
struct LinearPlus {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
    double operator()(double t) const noexcept
    {
        const double lin = a + b * t;
        return (lin > 0.0 ? lin : 0.0) + c;
    }
};

/// Horizon-slice envelope: value(s) is a constant that dominates the rate on
/// [s, s + window]. When a window is exhausted the envelope is re-anchored
/// at its end. window may be +infinity for a global bound.
struct BoundEnvelope {
    double window = 1.0;
    std::function<double(double start)> value;
};

struct General {
    std::function<double(double)> rate;
    BoundEnvelope bound;
    // Names the target in bound-violation errors.
    std::string label = "target";
};

using RateProfile = std::variant<Constant, LinearPlus, General>;

double rate_at(const RateProfile& profile, double t);

/// eta = -log(u) / c; kNever when c == 0.
double invert_constant(double c, double u);

/// Closed-form Lambda(t) = int_0^t [(a + b s)_+ + c] ds.
double integrated_linear_plus(double a, double b, double c, double t) noexcept;

/// Solves Lambda(eta) = -log(u) for the affine-plus rate by case analysis on
/// the signs of a and b. kNever when the rate is identically zero, or when
/// b < 0, c == 0 and the total mass is below -log(u).
double invert_linear_plus(double a, double b, double c, double u);

inline double invert_linear_plus(const LinearPlus& p, double u)
{
    return invert_linear_plus(p.a, p.b, p.c, u);
}

struct Draw {
    double eta = kNever;
    std::uint64_t rate_evals = 0;
    std::uint64_t rejections = 0;
};

/// First accepted arrival of the thinned envelope process on (t_from, t_max].
/// Candidates past t_max are not examined; the result is then kNever. Throws
/// SamplerError when the rate exceeds the envelope at a candidate.
Draw thin(const General& profile, RandomSource& rng, double t_max = kNever, double t_from = 0.0);

/// Exact inversion for Constant/LinearPlus (one rate evaluation), thinning
/// for General.
Draw first_arrival(const RateProfile& profile, RandomSource& rng, double t_max = kNever);

struct Arrival {
    double eta = kNever;
    std::size_t index = 0;

    bool fired() const noexcept { return !is_never(eta); }
};

/// Minimum of the sub-clock arrivals, index = position in the list; ties go
/// to the lowest index. All kNever yields {kNever, size}.
Arrival superpose(std::span<const double> first_arrivals);

}  // namespace pdmp::clocks
