#include <stdexcept>

#include "pdmp/targets.hpp"

namespace pdmp {

Cubic Cubic::shifted(double start) const noexcept
{
    const double s = start;
    return Cubic{{(*this)(s), c[1] + (2.0 * c[2] + 3.0 * c[3] * s) * s, c[2] + 3.0 * c[3] * s, c[3]}};
}

double Cubic::positive_bound(double start, double w) const noexcept
{
    const Cubic p = shifted(start);
    double bound = 0.0;
    double wk = 1.0;
    for (double ck : p.c) {
        if (ck > 0.0) {
            bound += ck * wk;
        }
        wk *= w;
    }
    return bound;
}

namespace {

clocks::General cubic_profile(const Cubic& poly, double refresh, double window)
{
    clocks::General g;
    g.rate = [poly, refresh](double t) {
        const double p = poly(t);
        return (p > 0.0 ? p : 0.0) + refresh;
    };
    g.bound.window = window;
    g.bound.value = [poly, refresh, window](double start) {
        return poly.positive_bound(start, window) + refresh;
    };
    g.label = "banana";
    return g;
}

class BananaCursor final : public RecomputingCursor {
public:
    BananaCursor(const BananaTarget& target, std::span<const double> x)
        : RecomputingCursor(target, x), banana_(target)
    {
    }

    clocks::RateProfile directional(std::span<const double> x, std::span<const double> v,
                                    double refresh) override
    {
        const auto p1 = banana_.partial_polynomial(x, v, 0);
        const auto p2 = banana_.partial_polynomial(x, v, 1);
        Cubic poly;
        for (std::size_t k = 0; k < 4; ++k) {
            poly.c[k] = v[0] * p1[k] + v[1] * p2[k];
        }
        return cubic_profile(poly, refresh, banana_.window());
    }

    clocks::RateProfile coordinate(std::span<const double> x, std::span<const double> v,
                                   std::size_t i, double refresh) override
    {
        const auto p = banana_.partial_polynomial(x, v, i);
        Cubic poly;
        for (std::size_t k = 0; k < 4; ++k) {
            poly.c[k] = v[i] * p[k];
        }
        return cubic_profile(poly, refresh, banana_.window());
    }

private:
    const BananaTarget& banana_;
};

}  // namespace

BananaTarget::BananaTarget(double kappa, double window) : kappa_(kappa), window_(window)
{
    if (!(kappa > 0.0)) {
        throw std::invalid_argument("banana: kappa must be positive");
    }
    if (!(window > 0.0)) {
        throw std::invalid_argument("banana: envelope window must be positive");
    }
}

double BananaTarget::potential(std::span<const double> x) const
{
    const double a = x[0] - 1.0;
    const double b = x[1] - x[0] * x[0];
    return a * a + kappa_ * b * b;
}

void BananaTarget::gradient(std::span<const double> x, std::span<double> out) const
{
    const double w = x[1] - x[0] * x[0];
    out[0] = 2.0 * (x[0] - 1.0) - 4.0 * kappa_ * x[0] * w;
    out[1] = 2.0 * kappa_ * w;
}

std::array<double, 4> BananaTarget::partial_polynomial(std::span<const double> x,
                                                       std::span<const double> v, std::size_t i) const
{
    // w(t) = x2(t) - x1(t)^2
    const double w0 = x[1] - x[0] * x[0];
    const double w1 = v[1] - 2.0 * x[0] * v[0];
    const double w2 = -v[0] * v[0];
    if (i == 1) {
        return {2.0 * kappa_ * w0, 2.0 * kappa_ * w1, 2.0 * kappa_ * w2, 0.0};
    }
    // x1(t) w(t)
    const double q0 = x[0] * w0;
    const double q1 = x[0] * w1 + v[0] * w0;
    const double q2 = x[0] * w2 + v[0] * w1;
    const double q3 = v[0] * w2;
    const double k4 = 4.0 * kappa_;
    return {2.0 * x[0] - 2.0 - k4 * q0, 2.0 * v[0] - k4 * q1, -k4 * q2, -k4 * q3};
}

std::unique_ptr<TargetCursor> BananaTarget::cursor(std::span<const double> x, std::span<const double>) const
{
    return std::make_unique<BananaCursor>(*this, x);
}

}  // namespace pdmp
