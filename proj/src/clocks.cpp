#include "pdmp/clocks.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace pdmp::clocks {

namespace {

// Positive root of (b/2) t^2 + p t = e for p >= 0, written to avoid
// cancellation. Works for b of either sign as long as the discriminant is
// nonnegative (clamped).
double quadratic_root(double b, double p, double e) noexcept
{
    double disc = p * p + 2.0 * b * e;
    if (disc < 0.0) {
        disc = 0.0;
    }
    const double denom = p + std::sqrt(disc);
    if (denom <= 0.0) {
        return kNever;
    }
    return 2.0 * e / denom;
}

// Window bookkeeping guard: a profile whose envelope keeps coming back zero
// or whose rate never accepts would otherwise spin forever.
constexpr std::uint64_t kMaxWindows = 100'000'000;

}  // namespace

double rate_at(const RateProfile& profile, double t)
{
    return std::visit(
        [t](const auto& p) -> double {
            if constexpr (std::is_same_v<std::decay_t<decltype(p)>, General>) {
                return p.rate(t);
            } else {
                return p(t);
            }
        },
        profile);
}

double invert_constant(double c, double u)
{
    if (!(c >= 0.0)) {
        throw std::invalid_argument("invert_constant: rate must be nonnegative");
    }
    if (!(u > 0.0 && u < 1.0)) {
        throw std::invalid_argument("invert_constant: u must lie in (0,1)");
    }
    if (c == 0.0) {
        return kNever;
    }
    return -std::log(u) / c;
}

double integrated_linear_plus(double a, double b, double c, double t) noexcept
{
    double lin = 0.0;
    if (b == 0.0) {
        lin = a > 0.0 ? a * t : 0.0;
    } else {
        // Interval where a + b s > 0, intersected with [0, t].
        const double root = -a / b;
        double lo = 0.0;
        double hi = t;
        if (b > 0.0) {
            lo = std::max(0.0, root);
        } else {
            hi = std::min(t, root);
        }
        if (hi > lo) {
            lin = a * (hi - lo) + 0.5 * b * (hi * hi - lo * lo);
        }
    }
    return lin + c * t;
}

double invert_linear_plus(double a, double b, double c, double u)
{
    if (!(u > 0.0 && u < 1.0)) {
        throw std::invalid_argument("invert_linear_plus: u must lie in (0,1)");
    }
    if (!(c >= 0.0)) {
        throw std::invalid_argument("invert_linear_plus: c must be nonnegative");
    }
    const double e = -std::log(u);

    if (b == 0.0) {
        const double r = (a > 0.0 ? a : 0.0) + c;
        return r > 0.0 ? e / r : kNever;
    }

    if (b > 0.0) {
        if (a >= 0.0) {
            return quadratic_root(b, a + c, e);
        }
        // Rate is c on [0, s0], then c + b (s - s0).
        const double s0 = -a / b;
        const double flat_mass = c * s0;
        if (flat_mass >= e) {
            return e / c;
        }
        return s0 + quadratic_root(b, c, e - flat_mass);
    }

    // b < 0: positive part dies at s1 = a / (-b) when a > 0.
    if (a <= 0.0) {
        return c > 0.0 ? e / c : kNever;
    }
    const double s1 = a / -b;
    const double mass = 0.5 * a * s1 + c * s1;
    if (e <= mass) {
        return std::min(quadratic_root(b, a + c, e), s1);
    }
    if (c == 0.0) {
        return kNever;
    }
    return s1 + (e - mass) / c;
}

Draw thin(const General& profile, RandomSource& rng, double t_max, double t_from)
{
    Draw draw;
    const double window = profile.bound.window;
    if (!(window > 0.0)) {
        throw std::invalid_argument("thin: envelope window must be positive");
    }
    if (!(t_from >= 0.0)) {
        throw std::invalid_argument("thin: start time must be nonnegative");
    }
    double start = t_from;
    for (std::uint64_t windows = 0; windows < kMaxWindows; ++windows) {
        if (start >= t_max) {
            return draw;
        }
        const double end = start + window;
        const double bound = profile.bound.value(start);
        if (!(bound >= 0.0)) {
            throw SamplerError("thin: envelope value is negative or NaN for " + profile.label);
        }
        if (bound == 0.0) {
            if (!(end < kNever)) {
                return draw;
            }
            start = end;
            continue;
        }
        double t = start;
        for (;;) {
            t += rng.exponential() / bound;
            if (t > end) {
                break;
            }
            if (t > t_max) {
                return draw;
            }
            const double r = profile.rate(t);
            ++draw.rate_evals;
            if (r > bound * (1.0 + 1e-9)) {
                std::ostringstream msg;
                msg.precision(17);
                msg << "envelope violated for " << profile.label << " at t=" << t << ": rate " << r
                    << " > bound " << bound;
                throw SamplerError(msg.str());
            }
            if (rng.uniform() * bound <= r) {
                draw.eta = t;
                return draw;
            }
            ++draw.rejections;
        }
        start = end;
    }
    throw SamplerError("thin: no arrival after the window limit for " + profile.label);
}

Draw first_arrival(const RateProfile& profile, RandomSource& rng, double t_max)
{
    if (const auto* general = std::get_if<General>(&profile)) {
        return thin(*general, rng, t_max);
    }
    Draw draw;
    draw.rate_evals = 1;
    if (const auto* lin = std::get_if<LinearPlus>(&profile)) {
        draw.eta = invert_linear_plus(lin->a, lin->b, lin->c, rng.uniform());
    } else {
        draw.eta = invert_constant(std::get<Constant>(profile).c, rng.uniform());
    }
    return draw;
}

Arrival superpose(std::span<const double> first_arrivals)
{
    if (first_arrivals.empty()) {
        throw std::invalid_argument("superpose: no sub-clocks");
    }
    Arrival best{kNever, first_arrivals.size()};
    for (std::size_t k = 0; k < first_arrivals.size(); ++k) {
        if (first_arrivals[k] < best.eta) {
            best = {first_arrivals[k], k};
        }
    }
    return best;
}

}  // namespace pdmp::clocks
