#include <cmath>
#include <stdexcept>

#include "pdmp/simd.hpp"
#include "pdmp/targets.hpp"

namespace pdmp {

namespace {

double sigmoid(double z) noexcept
{
    if (z >= 0.0) {
        return 1.0 / (1.0 + std::exp(-z));
    }
    const double e = std::exp(z);
    return e / (1.0 + e);
}

// log(1 + e^z)
double softplus(double z) noexcept
{
    return (z > 0.0 ? z : 0.0) + std::log1p(std::exp(-std::fabs(z)));
}

// Keeps the projections xr_n = <x, r_n> and vr_n = <v, r_n>; the gradient
// R^T (sigma(xr) - t) is recomputed after every move.
class LogisticCursor final : public TargetCursor {
public:
    LogisticCursor(const LogisticTarget& target, std::span<const double> x, std::span<const double> v)
        : target_(target), data_(target.data()), xr_(data_.n), vr_(data_.n), resid_(data_.n),
          column_abs_(data_.d, 0.0)
    {
        grad_.assign(data_.d, 0.0);
        for (std::size_t k = 0; k < data_.n; ++k) {
            for (std::size_t i = 0; i < data_.d; ++i) {
                column_abs_[i] += std::fabs(data_.covariates[k * data_.d + i]);
            }
        }
        simd::gemv(data_.covariates, v, vr_);
        resync(x);
    }

    void advanced(std::span<const double> x, std::span<const double>, double dt) override
    {
        if (++moves_ >= kResync) {
            resync(x);
            return;
        }
        simd::axpy(dt, vr_, xr_);
        refresh_gradient();
    }

    void velocity_changed(std::span<const double>, std::span<const double> v, VelocityChange change) override
    {
        const auto column = [&](std::size_t i) {
            return std::span<const double>(target_.transposed().data() + i * data_.n, data_.n);
        };
        switch (change.kind) {
        case VelocityChange::Kind::Axis: {
            const auto col = column(change.index);
            const double s = v[change.index];
            for (std::size_t k = 0; k < data_.n; ++k) {
                vr_[k] = s * col[k];
            }
            break;
        }
        case VelocityChange::Kind::Flip:
            simd::axpy(2.0 * v[change.index], column(change.index), vr_);
            break;
        case VelocityChange::Kind::Arbitrary:
            simd::gemv(data_.covariates, v, vr_);
            break;
        }
    }

    clocks::RateProfile directional(std::span<const double>, std::span<const double>,
                                    double refresh) override
    {
        clocks::General g;
        g.rate = [this, refresh](double t) {
            double s = 0.0;
            for (std::size_t k = 0; k < data_.n; ++k) {
                s += vr_[k] * (sigmoid(xr_[k] + t * vr_[k]) - data_.labels[k]);
            }
            return (s > 0.0 ? s : 0.0) + refresh;
        };
        // |sigma - t| <= 1 gives a bound valid for every t.
        const double bound = simd::sum_abs(vr_) + refresh;
        g.bound.window = kInfinity;
        g.bound.value = [bound](double) { return bound; };
        g.label = "logistic";
        return g;
    }

    clocks::RateProfile coordinate(std::span<const double>, std::span<const double> v, std::size_t i,
                                   double refresh) override
    {
        clocks::General g;
        const double vi = v[i];
        const double* col = target_.transposed().data() + i * data_.n;
        g.rate = [this, refresh, vi, col](double t) {
            double s = 0.0;
            for (std::size_t k = 0; k < data_.n; ++k) {
                s += col[k] * (sigmoid(xr_[k] + t * vr_[k]) - data_.labels[k]);
            }
            s *= vi;
            return (s > 0.0 ? s : 0.0) + refresh;
        };
        const double bound = column_abs_[i] + refresh;
        g.bound.window = kInfinity;
        g.bound.value = [bound](double) { return bound; };
        g.label = "logistic";
        return g;
    }

private:
    static constexpr unsigned kResync = 256;

    void resync(std::span<const double> x)
    {
        simd::gemv(data_.covariates, x, xr_);
        moves_ = 0;
        refresh_gradient();
    }

    void refresh_gradient()
    {
        for (std::size_t k = 0; k < data_.n; ++k) {
            resid_[k] = sigmoid(xr_[k]) - data_.labels[k];
        }
        simd::gemv(target_.transposed(), resid_, grad_);
    }

    const LogisticTarget& target_;
    const LogisticData& data_;
    Vector xr_;
    Vector vr_;
    Vector resid_;
    Vector column_abs_;
    unsigned moves_ = 0;
};

}  // namespace

void LogisticData::validate() const
{
    if (n == 0 || d == 0) {
        throw std::invalid_argument("logistic data: N and d must be positive");
    }
    if (covariates.size() != n * d || labels.size() != n) {
        throw std::invalid_argument("logistic data: array sizes do not match N and d");
    }
    for (int t : labels) {
        if (t != 0 && t != 1) {
            throw std::invalid_argument("logistic data: labels must be 0 or 1");
        }
    }
}

LogisticData simulate_logistic_data(std::size_t n, std::size_t d, RandomSource& rng)
{
    if (n == 0 || d == 0) {
        throw std::invalid_argument("simulate_logistic_data: N and d must be positive");
    }
    LogisticData data;
    data.n = n;
    data.d = d;
    data.covariates.resize(n * d);
    data.labels.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t i = 0; i < d; ++i) {
            data.covariates[k * d + i] = rng.normal();
        }
        data.labels[k] = rng.uniform() < 0.5 ? 0 : 1;
    }
    return data;
}

LogisticTarget::LogisticTarget(LogisticData data) : data_(std::move(data))
{
    data_.validate();
    transposed_.resize(data_.n * data_.d);
    for (std::size_t k = 0; k < data_.n; ++k) {
        for (std::size_t i = 0; i < data_.d; ++i) {
            transposed_[i * data_.n + k] = data_.covariates[k * data_.d + i];
        }
    }
}

double LogisticTarget::potential(std::span<const double> x) const
{
    double u = 0.0;
    for (std::size_t k = 0; k < data_.n; ++k) {
        const double z = simd::dot(data_.row(k), x);
        u += softplus(z) - data_.labels[k] * z;
    }
    return u;
}

void LogisticTarget::gradient(std::span<const double> x, std::span<double> out) const
{
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t k = 0; k < data_.n; ++k) {
        const auto r = data_.row(k);
        const double w = sigmoid(simd::dot(r, x)) - data_.labels[k];
        simd::axpy(w, r, out);
    }
}

std::unique_ptr<TargetCursor> LogisticTarget::cursor(std::span<const double> x,
                                                     std::span<const double> v) const
{
    return std::make_unique<LogisticCursor>(*this, x, v);
}

Vector LogisticTarget::approximate_mode(std::size_t steps) const
{
    // Hessian is bounded by R^T R / 4 <= (sum_n |r_n|^2) / 4.
    double lipschitz = 0.0;
    for (double r : data_.covariates) {
        lipschitz += r * r;
    }
    lipschitz *= 0.25;
    Vector x(data_.d, 0.0);
    Vector g(data_.d);
    if (lipschitz <= 0.0) {
        return x;
    }
    for (std::size_t s = 0; s < steps; ++s) {
        gradient(x, g);
        simd::axpy(-1.0 / lipschitz, g, x);
    }
    return x;
}

}  // namespace pdmp
