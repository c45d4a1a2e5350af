// Estimators over PDMP paths: exact path averages, discretization onto a
// time grid, batch-means ESS, Kolmogorov-Smirnov statistics and the
// Lyapunov drift diagnostic.
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "pdmp/core.hpp"
#include "pdmp/samplers.hpp"
#include "pdmp/targets.hpp"

namespace pdmp {

struct Provenance {
    std::string sampler;
    std::string target;
    std::uint64_t seed = 0;
    double horizon = 0.0;
};

/// n x d row-major samples.
struct SampleMatrix {
    std::size_t n = 0;
    std::size_t d = 0;
    Vector values;
    Provenance provenance;

    std::span<const double> row(std::size_t k) const noexcept { return {values.data() + k * d, d}; }
    Vector column(std::size_t i) const;
};

/// Row n (1-based) is X at time n T / N.
SampleMatrix discretize(const Trajectory& trajectory, std::size_t n);

// Path functionals h for path_average.
struct CoordinateOf {
    std::size_t i;
};
struct SquareOf {
    std::size_t i;
};
using GenericFunction = std::function<double(std::span<const double>)>;
using PathFunction = std::variant<CoordinateOf, SquareOf, GenericFunction>;

/// (1/T) int_0^T h(X_t) dt; exact for coordinates and squares, 5-point
/// Gauss-Legendre per segment for generic h.
double path_average(const Trajectory& trajectory, const PathFunction& h);

/// Streams grid rows while a run is in progress. With a known horizon the
/// rows are X at n T / N exactly. Without one (budget runs) the grid starts
/// at spacing `initial_spacing` and doubles whenever 2N rows are held,
/// keeping every other row, so the final count lies in [N, 2N) once the run
/// covers N initial spacings.
class GridRecorder final : public PathSink {
public:
    GridRecorder(std::size_t rows, double horizon);
    static GridRecorder adaptive(std::size_t min_rows, double initial_spacing = 1e-3);

    void on_start(const PhaseState& z) override;
    void on_segment(std::span<const double> x, std::span<const double> v, double t0, double dt) override;
    void on_finish(double horizon) override;

    SampleMatrix take(Provenance provenance = {});
    double spacing() const noexcept { return spacing_; }

private:
    GridRecorder() = default;
    void emit(std::span<const double> x, std::span<const double> v, double t0, double t);
    double grid_time(std::size_t k) const noexcept;

    std::size_t target_rows_ = 0;
    std::size_t d_ = 0;
    bool fixed_ = true;
    double horizon_ = 0.0;
    double spacing_ = 0.0;
    std::size_t rows_ = 0;
    Vector values_;
    Vector last_x_;
    Vector last_v_;
    double last_t0_ = 0.0;
};

/// Exact running integrals of x_i and x_i^2 over the path.
class MomentAccumulator final : public PathSink {
public:
    void on_start(const PhaseState& z) override;
    void on_segment(std::span<const double> x, std::span<const double> v, double t0, double dt) override;
    void on_finish(double horizon) override { horizon_ = horizon; }

    double horizon() const noexcept { return horizon_; }
    Vector means() const;
    Vector second_moments() const;

private:
    Vector first_;
    Vector second_;
    double horizon_ = 0.0;
};

/// Mean of the Lyapunov function over post-event states (refresh > 0).
class LyapunovMonitor final : public PathSink {
public:
    LyapunovMonitor(const Target& target, double refresh) : target_(target), refresh_(refresh) {}

    void on_start(const PhaseState& z) override { accumulate(z); }
    void on_segment(std::span<const double>, std::span<const double>, double, double) override {}
    void on_event(const PhaseState& z, const EventRecord&) override { accumulate(z); }

    double mean() const noexcept { return count_ ? sum_ / static_cast<double>(count_) : 0.0; }
    double minimum() const noexcept { return min_; }

private:
    void accumulate(const PhaseState& z);

    const Target& target_;
    double refresh_;
    double sum_ = 0.0;
    double min_ = kInfinity;
    std::size_t count_ = 0;
};

/// Batch-means long-run variance with batch size floor(sqrt(n)); the
/// remainder is discarded.
double batch_means_variance(std::span<const double> series);

/// ESS = n s^2 / sigma_bm^2, clipped to (0, n]. Requires n >= 100; throws
/// std::invalid_argument("degenerate series") on zero variance.
double ess(std::span<const double> series);

/// Monte Carlo standard error of the series mean, sqrt(sigma_bm^2 / n).
double mcse(std::span<const double> series);

/// D = max_k max(|k/n - F(x_(k))|, |(k-1)/n - F(x_(k))|).
double ks_one_sample(std::span<const double> series, const std::function<double(double)>& cdf);

/// Sup distance between the two empirical CDFs (merge scan over ties).
double ks_two_sample(std::span<const double> a, std::span<const double> b);

/// Asymptotic Kolmogorov tail P(D > d) for effective sample size n_eff
/// (Stephens' small-sample correction).
double ks_pvalue(double statistic, double n_eff);
double ks_two_sample_pvalue(double statistic, std::size_t n, std::size_t m);

double normal_cdf(double x, double mean = 0.0, double sd = 1.0);

/// V(x, v) = e^{U(x)/2} / sqrt(refresh + <grad U(x), -v>_+). Throws
/// std::domain_error("Lyapunov undefined") when the denominator vanishes.
double lyapunov(const Target& target, std::span<const double> x, std::span<const double> v, double refresh);

struct Summary {
    double min = 0.0;
    double mean = 0.0;
    double median = 0.0;
    double max = 0.0;
};

Summary summarize(std::span<const double> values);

}  // namespace pdmp
