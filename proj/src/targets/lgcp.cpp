#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "pdmp/simd.hpp"
#include "pdmp/targets.hpp"

namespace pdmp {

SymmetricMatrix lgcp_covariance(const LgcpParams& params)
{
    if (params.side < 2) {
        throw std::invalid_argument("lgcp: grid side must be at least 2");
    }
    if (!(params.sigma2 > 0.0) || !(params.beta > 0.0)) {
        throw std::invalid_argument("lgcp: sigma2 and beta must be positive");
    }
    const std::size_t side = params.side;
    const std::size_t n = side * side;
    const double scale = params.beta * static_cast<double>(side);
    SymmetricMatrix cov(n);
    for (std::size_t a = 0; a < n; ++a) {
        const double ia = static_cast<double>(a / side);
        const double ja = static_cast<double>(a % side);
        for (std::size_t b = 0; b < n; ++b) {
            const double di = ia - static_cast<double>(b / side);
            const double dj = ja - static_cast<double>(b % side);
            cov(a, b) = params.sigma2 * std::exp(-std::sqrt(di * di + dj * dj) / scale);
        }
    }
    return cov;
}

void LgcpData::validate() const
{
    if (counts.size() != params.side * params.side) {
        throw std::invalid_argument("lgcp data: expected side^2 counts");
    }
    if (!latent.empty() && latent.size() != counts.size()) {
        throw std::invalid_argument("lgcp data: latent field size differs from counts");
    }
    for (int y : counts) {
        if (y < 0) {
            throw std::invalid_argument("lgcp data: counts must be nonnegative");
        }
    }
}

LgcpData simulate_lgcp_data(const LgcpParams& params, RandomSource& rng)
{
    const SymmetricMatrix cov = lgcp_covariance(params);
    const SpdFactor factor(cov);
    LgcpData data;
    data.params = params;
    Vector z(cov.n);
    for (double& zi : z) {
        zi = rng.normal();
    }
    data.latent = factor.lower_times(z);
    data.counts.resize(cov.n);
    const double area = data.area();
    for (std::size_t k = 0; k < cov.n; ++k) {
        data.latent[k] += params.mu;
        data.counts[k] = rng.poisson(area * std::exp(data.latent[k]));
    }
    return data;
}

namespace {

// gp = P (x - mu 1), h = P v, ex = exp(x). The directional derivative of a
// convex potential is nondecreasing along any ray, so the envelope on a
// window is the rate at the window end.
class LgcpCursor final : public TargetCursor {
public:
    LgcpCursor(const LgcpTarget& target, std::span<const double> x, std::span<const double> v)
        : target_(target), n_(target.dim()), area_(target.data().area()), gp_(n_), h_(n_), ex_(n_),
          centered_(n_)
    {
        grad_.assign(n_, 0.0);
        y_.resize(n_);
        for (std::size_t k = 0; k < n_; ++k) {
            y_[k] = target.data().counts[k];
        }
        axis_ = detect_axis(v);
        resync(x, v);
    }

    void advanced(std::span<const double> x, std::span<const double> v, double dt) override
    {
        if (++moves_ >= kResync) {
            resync(x, v);
            return;
        }
        simd::axpy(dt, h_, gp_);
        if (axis_ >= 0) {
            const auto j = static_cast<std::size_t>(axis_);
            ex_[j] = std::exp(x[j]);
        } else {
            for (std::size_t k = 0; k < n_; ++k) {
                ex_[k] = std::exp(x[k]);
            }
        }
        assemble_gradient();
    }

    void velocity_changed(std::span<const double>, std::span<const double> v, VelocityChange change) override
    {
        const auto& p = target_.precision();
        switch (change.kind) {
        case VelocityChange::Kind::Axis: {
            const double s = v[change.index];
            const auto row = p.row(change.index);
            for (std::size_t k = 0; k < n_; ++k) {
                h_[k] = s * row[k];
            }
            axis_ = static_cast<long>(change.index);
            break;
        }
        case VelocityChange::Kind::Flip:
            simd::axpy(2.0 * v[change.index], p.row(change.index), h_);
            axis_ = -1;
            break;
        case VelocityChange::Kind::Arbitrary:
            simd::gemv(p.values, v, h_);
            axis_ = detect_axis(v);
            break;
        }
    }

    clocks::RateProfile directional(std::span<const double>, std::span<const double> v,
                                    double refresh) override
    {
        clocks::General g;
        g.label = "lgcp";
        g.bound.window = target_.window();
        if (axis_ >= 0) {
            const auto j = static_cast<std::size_t>(axis_);
            const double s = v[j];
            const double alpha = s * (gp_[j] - y_[j]);
            const double beta = s * h_[j];
            const double gamma = s * area_ * ex_[j];
            g.rate = [=](double t) {
                const double r = alpha + beta * t + gamma * std::exp(s * t);
                return (r > 0.0 ? r : 0.0) + refresh;
            };
        } else {
            double alpha = 0.0;
            for (std::size_t k = 0; k < n_; ++k) {
                alpha += v[k] * (gp_[k] - y_[k]);
            }
            const double beta = simd::dot(v, h_);
            const double* vp = v.data();
            g.rate = [this, alpha, beta, refresh, vp](double t) {
                double r = alpha + beta * t;
                for (std::size_t k = 0; k < n_; ++k) {
                    if (vp[k] != 0.0) {
                        r += vp[k] * area_ * ex_[k] * std::exp(vp[k] * t);
                    }
                }
                return (r > 0.0 ? r : 0.0) + refresh;
            };
        }
        const double window = target_.window();
        g.bound.value = [rate = g.rate, window](double start) { return rate(start + window); };
        return g;
    }

    clocks::RateProfile coordinate(std::span<const double>, std::span<const double> v, std::size_t i,
                                   double refresh) override
    {
        const double s = v[i];
        const double alpha = s * (gp_[i] - y_[i]);
        const double beta = s * h_[i];
        const double gamma = s * area_ * ex_[i];
        const double window = target_.window();
        clocks::General g;
        g.label = "lgcp";
        g.bound.window = window;
        g.rate = [=](double t) {
            const double r = alpha + beta * t + gamma * std::exp(s * t);
            return (r > 0.0 ? r : 0.0) + refresh;
        };
        // Linear part peaks at a window endpoint; the exponential part is
        // nondecreasing in t for either sign of s.
        g.bound.value = [=](double start) {
            const double end = start + window;
            const double r = std::max(alpha + beta * start, alpha + beta * end) + gamma * std::exp(s * end);
            return (r > 0.0 ? r : 0.0) + refresh;
        };
        return g;
    }

private:
    static constexpr unsigned kResync = 256;

    void resync(std::span<const double> x, std::span<const double> v)
    {
        const double mu = target_.data().params.mu;
        for (std::size_t k = 0; k < n_; ++k) {
            centered_[k] = x[k] - mu;
            ex_[k] = std::exp(x[k]);
        }
        simd::gemv(target_.precision().values, centered_, gp_);
        simd::gemv(target_.precision().values, v, h_);
        moves_ = 0;
        assemble_gradient();
    }

    void assemble_gradient()
    {
        for (std::size_t k = 0; k < n_; ++k) {
            grad_[k] = area_ * ex_[k] - y_[k] + gp_[k];
        }
    }

    static long detect_axis(std::span<const double> v)
    {
        long axis = -1;
        for (std::size_t k = 0; k < v.size(); ++k) {
            if (v[k] != 0.0) {
                if (axis >= 0) {
                    return -1;
                }
                axis = static_cast<long>(k);
            }
        }
        return axis;
    }

    const LgcpTarget& target_;
    std::size_t n_;
    double area_;
    Vector gp_;
    Vector h_;
    Vector ex_;
    Vector centered_;
    Vector y_;
    long axis_ = -1;
    unsigned moves_ = 0;
};

}  // namespace

LgcpTarget::LgcpTarget(LgcpData data, double window)
    : data_(std::move(data)),
      window_(window),
      covariance_(lgcp_covariance(data_.params)),
      factor_(covariance_),
      precision_(factor_.inverse())
{
    data_.validate();
    if (!(window > 0.0)) {
        throw std::invalid_argument("lgcp: envelope window must be positive");
    }
}

double LgcpTarget::potential(std::span<const double> x) const
{
    const double area = data_.area();
    Vector centered(x.size());
    double u = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        u += area * std::exp(x[k]) - data_.counts[k] * x[k];
        centered[k] = x[k] - data_.params.mu;
    }
    return u + 0.5 * factor_.inverse_quadratic_form(centered);
}

void LgcpTarget::gradient(std::span<const double> x, std::span<double> out) const
{
    const double area = data_.area();
    Vector centered(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) {
        centered[k] = x[k] - data_.params.mu;
    }
    simd::gemv(precision_.values, centered, out);
    for (std::size_t k = 0; k < x.size(); ++k) {
        out[k] += area * std::exp(x[k]) - data_.counts[k];
    }
}

double LgcpTarget::partial(std::span<const double> x, std::size_t i) const
{
    const auto row = precision_.row(i);
    double s = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        s += row[k] * (x[k] - data_.params.mu);
    }
    return s + data_.area() * std::exp(x[i]) - data_.counts[i];
}

std::unique_ptr<TargetCursor> LgcpTarget::cursor(std::span<const double> x, std::span<const double> v) const
{
    return std::make_unique<LgcpCursor>(*this, x, v);
}

}  // namespace pdmp
