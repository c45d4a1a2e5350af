#include "pdmp/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "pdmp/simd.hpp"

namespace pdmp {

Vector SampleMatrix::column(std::size_t i) const
{
    Vector out(n);
    for (std::size_t k = 0; k < n; ++k) {
        out[k] = values[k * d + i];
    }
    return out;
}

SampleMatrix discretize(const Trajectory& trajectory, std::size_t n)
{
    if (n == 0) {
        throw std::invalid_argument("discretize: N must be positive");
    }
    const double horizon = trajectory.horizon();
    if (!(horizon > 0.0)) {
        throw std::invalid_argument("discretize: trajectory horizon must be positive");
    }
    const auto& skel = trajectory.skeleton();
    SampleMatrix out;
    out.n = n;
    out.d = trajectory.dim();
    out.values.resize(n * out.d);
    out.provenance.horizon = horizon;
    std::size_t m = 0;
    for (std::size_t k = 1; k <= n; ++k) {
        const double t = horizon * static_cast<double>(k) / static_cast<double>(n);
        while (m + 1 < skel.size() && skel[m + 1].time <= t) {
            ++m;
        }
        const auto& p = skel[m];
        const double dt = t - p.time;
        for (std::size_t i = 0; i < out.d; ++i) {
            out.values[(k - 1) * out.d + i] = p.x[i] + dt * p.v[i];
        }
    }
    return out;
}

namespace {

// 5-point Gauss-Legendre on [-1, 1].
constexpr double kGaussNodes[5] = {0.0, -0.5384693101056831, 0.5384693101056831, -0.9061798459386640,
                                   0.9061798459386640};
constexpr double kGaussWeights[5] = {0.5688888888888889, 0.4786286704993665, 0.4786286704993665,
                                     0.2369268850561891, 0.2369268850561891};

}  // namespace

double path_average(const Trajectory& trajectory, const PathFunction& h)
{
    const double horizon = trajectory.horizon();
    if (!(horizon > 0.0)) {
        throw std::invalid_argument("path_average: trajectory horizon must be positive");
    }
    const auto& skel = trajectory.skeleton();
    Vector point(trajectory.dim());
    double total = 0.0;
    for (std::size_t m = 0; m < skel.size() && skel[m].time < horizon; ++m) {
        const double end = m + 1 < skel.size() ? std::min(skel[m + 1].time, horizon) : horizon;
        const double len = end - skel[m].time;
        const auto& x = skel[m].x;
        const auto& v = skel[m].v;
        if (const auto* c = std::get_if<CoordinateOf>(&h)) {
            total += x[c->i] * len + 0.5 * v[c->i] * len * len;
        } else if (const auto* s = std::get_if<SquareOf>(&h)) {
            const double xi = x[s->i];
            const double vi = v[s->i];
            total += xi * xi * len + xi * vi * len * len + vi * vi * len * len * len / 3.0;
        } else {
            const auto& f = std::get<GenericFunction>(h);
            double seg = 0.0;
            for (int q = 0; q < 5; ++q) {
                const double s_q = 0.5 * len * (kGaussNodes[q] + 1.0);
                for (std::size_t i = 0; i < point.size(); ++i) {
                    point[i] = x[i] + s_q * v[i];
                }
                seg += kGaussWeights[q] * f(point);
            }
            total += 0.5 * len * seg;
        }
    }
    return total / horizon;
}

// ---------------------------------------------------------------------------

GridRecorder::GridRecorder(std::size_t rows, double horizon)
    : target_rows_(rows), fixed_(true), horizon_(horizon), spacing_(horizon / static_cast<double>(rows))
{
    if (rows == 0 || !(horizon > 0.0) || !(horizon < kInfinity)) {
        throw std::invalid_argument("GridRecorder: need N >= 1 and a finite positive horizon");
    }
}

GridRecorder GridRecorder::adaptive(std::size_t min_rows, double initial_spacing)
{
    if (min_rows == 0 || !(initial_spacing > 0.0)) {
        throw std::invalid_argument("GridRecorder: need N >= 1 and a positive spacing");
    }
    GridRecorder g;
    g.target_rows_ = min_rows;
    g.fixed_ = false;
    g.spacing_ = initial_spacing;
    return g;
}

void GridRecorder::on_start(const PhaseState& z)
{
    d_ = z.dim();
    rows_ = 0;
    values_.clear();
    values_.reserve((fixed_ ? target_rows_ : 2 * target_rows_) * d_);
    last_x_ = z.x;
    last_v_ = z.v;
    last_t0_ = z.t;
}

double GridRecorder::grid_time(std::size_t k) const noexcept
{
    if (fixed_) {
        return horizon_ * static_cast<double>(k) / static_cast<double>(target_rows_);
    }
    return spacing_ * static_cast<double>(k);
}

void GridRecorder::emit(std::span<const double> x, std::span<const double> v, double t0, double t)
{
    const double dt = t - t0;
    for (std::size_t i = 0; i < d_; ++i) {
        values_.push_back(x[i] + dt * v[i]);
    }
    ++rows_;
    if (!fixed_ && rows_ == 2 * target_rows_) {
        // Keep grid points 2, 4, 6, ... and double the spacing.
        for (std::size_t k = 0; k < target_rows_; ++k) {
            std::copy_n(values_.begin() + static_cast<std::ptrdiff_t>((2 * k + 1) * d_), d_,
                        values_.begin() + static_cast<std::ptrdiff_t>(k * d_));
        }
        values_.resize(target_rows_ * d_);
        rows_ = target_rows_;
        spacing_ *= 2.0;
    }
}

void GridRecorder::on_segment(std::span<const double> x, std::span<const double> v, double t0, double dt)
{
    const double end = t0 + dt;
    for (;;) {
        if (fixed_ && rows_ >= target_rows_) {
            break;
        }
        const double t = grid_time(rows_ + 1);
        if (t > end) {
            break;
        }
        emit(x, v, t0, t);
    }
    last_x_.assign(x.begin(), x.end());
    last_v_.assign(v.begin(), v.end());
    last_t0_ = t0;
}

void GridRecorder::on_finish(double horizon)
{
    if (fixed_) {
        // Grid points lost to rounding at the final segment's end.
        while (rows_ < target_rows_) {
            emit(last_x_, last_v_, last_t0_, grid_time(rows_ + 1));
        }
    } else {
        horizon_ = horizon;
    }
}

SampleMatrix GridRecorder::take(Provenance provenance)
{
    SampleMatrix out;
    out.n = rows_;
    out.d = d_;
    out.values = std::move(values_);
    out.provenance = std::move(provenance);
    out.provenance.horizon = horizon_;
    rows_ = 0;
    return out;
}

void MomentAccumulator::on_start(const PhaseState& z)
{
    first_.assign(z.dim(), 0.0);
    second_.assign(z.dim(), 0.0);
}

void MomentAccumulator::on_segment(std::span<const double> x, std::span<const double> v, double, double dt)
{
    simd::segment_moments(x, v, dt, first_, second_);
}

Vector MomentAccumulator::means() const
{
    Vector out(first_);
    for (double& m : out) {
        m /= horizon_;
    }
    return out;
}

Vector MomentAccumulator::second_moments() const
{
    Vector out(second_);
    for (double& m : out) {
        m /= horizon_;
    }
    return out;
}

void LyapunovMonitor::accumulate(const PhaseState& z)
{
    const double value = lyapunov(target_, z.x, z.v, refresh_);
    sum_ += value;
    min_ = std::min(min_, value);
    ++count_;
}

// ---------------------------------------------------------------------------

double batch_means_variance(std::span<const double> series)
{
    const std::size_t n = series.size();
    if (n < 4) {
        throw std::invalid_argument("batch means: series too short");
    }
    const auto size = static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(n))));
    const std::size_t batches = n / size;
    Vector means(batches);
    for (std::size_t b = 0; b < batches; ++b) {
        double s = 0.0;
        for (std::size_t k = 0; k < size; ++k) {
            s += series[b * size + k];
        }
        means[b] = s / static_cast<double>(size);
    }
    const double grand = std::accumulate(means.begin(), means.end(), 0.0) / static_cast<double>(batches);
    double ss = 0.0;
    for (double m : means) {
        ss += (m - grand) * (m - grand);
    }
    return static_cast<double>(size) * ss / static_cast<double>(batches - 1);
}

namespace {

double sample_variance(std::span<const double> series)
{
    const double n = static_cast<double>(series.size());
    const double mean = std::accumulate(series.begin(), series.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : series) {
        ss += (x - mean) * (x - mean);
    }
    return ss / (n - 1.0);
}

}  // namespace

double ess(std::span<const double> series)
{
    const std::size_t n = series.size();
    if (n < 100) {
        throw std::invalid_argument("ess: need at least 100 samples");
    }
    const double s2 = sample_variance(series);
    if (!(s2 > 0.0)) {
        throw std::invalid_argument("degenerate series");
    }
    const double lrv = batch_means_variance(series);
    const double nd = static_cast<double>(n);
    if (!(lrv > 0.0)) {
        return nd;
    }
    return std::min(nd, nd * s2 / lrv);
}

double mcse(std::span<const double> series)
{
    return std::sqrt(batch_means_variance(series) / static_cast<double>(series.size()));
}

double ks_one_sample(std::span<const double> series, const std::function<double(double)>& cdf)
{
    if (series.empty()) {
        throw std::invalid_argument("ks_one_sample: empty series");
    }
    Vector sorted(series.begin(), series.end());
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());
    double d = 0.0;
    for (std::size_t k = 0; k < sorted.size(); ++k) {
        const double f = cdf(sorted[k]);
        const double upper = static_cast<double>(k + 1) / n;
        const double lower = static_cast<double>(k) / n;
        d = std::max({d, std::fabs(upper - f), std::fabs(lower - f)});
    }
    return d;
}

double ks_two_sample(std::span<const double> a, std::span<const double> b)
{
    if (a.empty() || b.empty()) {
        throw std::invalid_argument("ks_two_sample: empty series");
    }
    Vector sa(a.begin(), a.end());
    Vector sb(b.begin(), b.end());
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    const double n = static_cast<double>(sa.size());
    const double m = static_cast<double>(sb.size());
    std::size_t i = 0;
    std::size_t j = 0;
    double d = 0.0;
    while (i < sa.size() || j < sb.size()) {
        double t;
        if (i == sa.size()) {
            t = sb[j];
        } else if (j == sb.size()) {
            t = sa[i];
        } else {
            t = std::min(sa[i], sb[j]);
        }
        while (i < sa.size() && sa[i] == t) {
            ++i;
        }
        while (j < sb.size() && sb[j] == t) {
            ++j;
        }
        d = std::max(d, std::fabs(static_cast<double>(i) / n - static_cast<double>(j) / m));
    }
    return d;
}

double ks_pvalue(double statistic, double n_eff)
{
    const double root = std::sqrt(n_eff);
    const double lambda = (root + 0.12 + 0.11 / root) * statistic;
    if (lambda < 0.3) {
        return 1.0;
    }
    double sum = 0.0;
    double sign = 1.0;
    for (int j = 1; j <= 100; ++j) {
        const double term = sign * std::exp(-2.0 * j * j * lambda * lambda);
        sum += term;
        if (std::fabs(term) < 1e-16) {
            break;
        }
        sign = -sign;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

double ks_two_sample_pvalue(double statistic, std::size_t n, std::size_t m)
{
    const double nn = static_cast<double>(n);
    const double mm = static_cast<double>(m);
    return ks_pvalue(statistic, nn * mm / (nn + mm));
}

double normal_cdf(double x, double mean, double sd)
{
    return 0.5 * std::erfc(-(x - mean) / (sd * std::sqrt(2.0)));
}

double lyapunov(const Target& target, std::span<const double> x, std::span<const double> v, double refresh)
{
    const Vector g = target.gradient(x);
    double a = -simd::dot(g, v);
    a = a > 0.0 ? a : 0.0;
    const double denom = refresh + a;
    if (!(denom > 0.0)) {
        throw std::domain_error("Lyapunov undefined");
    }
    return std::exp(0.5 * target.potential(x)) / std::sqrt(denom);
}

Summary summarize(std::span<const double> values)
{
    if (values.empty()) {
        throw std::invalid_argument("summarize: no values");
    }
    Vector sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    Summary s;
    s.min = sorted.front();
    s.max = sorted.back();
    s.mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(n);
    s.median = n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
    return s;
}

}  // namespace pdmp
