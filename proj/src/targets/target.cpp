#include <cstdio>

#include "pdmp/targets.hpp"

namespace pdmp {

double Target::partial(std::span<const double> x, std::size_t i) const
{
    Vector g(dim());
    gradient(x, g);
    return g[i];
}

Vector Target::gradient(std::span<const double> x) const
{
    Vector g(dim());
    gradient(x, g);
    return g;
}

clocks::RateProfile Target::directional_profile(std::span<const double> x, std::span<const double> v,
                                                double refresh) const
{
    // General profiles borrow cursor state, so the cursor must outlive the
    // profile: keep it alive inside the rate/bound closures.
    std::shared_ptr<TargetCursor> c = cursor(x, v);
    auto profile = c->directional(x, v, refresh);
    if (auto* general = std::get_if<clocks::General>(&profile)) {
        general->rate = [c, f = general->rate](double t) { return f(t); };
        general->bound.value = [c, f = general->bound.value](double s) { return f(s); };
    }
    return profile;
}

clocks::RateProfile Target::coordinate_profile(std::span<const double> x, std::span<const double> v,
                                               std::size_t i, double refresh) const
{
    std::shared_ptr<TargetCursor> c = cursor(x, v);
    auto profile = c->coordinate(x, v, i, refresh);
    if (auto* general = std::get_if<clocks::General>(&profile)) {
        general->rate = [c, f = general->rate](double t) { return f(t); };
        general->bound.value = [c, f = general->bound.value](double s) { return f(s); };
    }
    return profile;
}

RecomputingCursor::RecomputingCursor(const Target& target, std::span<const double> x) : target_(target)
{
    grad_.assign(target.dim(), 0.0);
    target_.gradient(x, grad_);
}

void RecomputingCursor::advanced(std::span<const double> x, std::span<const double>, double)
{
    target_.gradient(x, grad_);
}

std::string format_real(double value)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

}  // namespace pdmp
