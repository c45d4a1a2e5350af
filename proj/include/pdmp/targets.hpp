// Benchmark targets: potential U = -log pi, its gradient, and the rate
// profiles t -> (<v, grad U(x + t v)>)_+ + refresh along a ray.
//
// Rate profiles are produced by a TargetCursor, a per-run cache of the
// gradient (and whatever else the target needs to update it cheaply) at the
// current position and velocity. Profiles of kind General borrow the
// cursor's buffers and stay valid until the cursor is next mutated.
#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pdmp/clocks.hpp"
#include "pdmp/core.hpp"

namespace pdmp {

/// How the velocity changed at an event; lets cursors update products with
/// the velocity in O(d) instead of recomputing them.
struct VelocityChange {
    enum class Kind { Arbitrary, Flip, Axis };
    Kind kind = Kind::Arbitrary;
    std::size_t index = 0;  // flipped coordinate, or active axis

    static VelocityChange arbitrary() noexcept { return {}; }
    static VelocityChange flip(std::size_t i) noexcept { return {Kind::Flip, i}; }
    static VelocityChange axis(std::size_t i) noexcept { return {Kind::Axis, i}; }
};

class TargetCursor {
public:
    virtual ~TargetCursor() = default;

    /// grad U at the current position.
    std::span<const double> gradient() const noexcept { return grad_; }

    /// Position has moved by dt along v (x already updated).
    virtual void advanced(std::span<const double> x, std::span<const double> v, double dt) = 0;
    /// Velocity replaced by v (x unchanged).
    virtual void velocity_changed(std::span<const double> x, std::span<const double> v,
                                  VelocityChange change) = 0;

    /// t -> (<v, grad U(x + t v)>)_+ + refresh
    virtual clocks::RateProfile directional(std::span<const double> x, std::span<const double> v,
                                            double refresh) = 0;
    /// t -> (v_i d_i U(x + t v))_+ + refresh
    virtual clocks::RateProfile coordinate(std::span<const double> x, std::span<const double> v,
                                           std::size_t i, double refresh) = 0;

protected:
    Vector grad_;
};

class Target {
public:
    virtual ~Target() = default;

    virtual std::string name() const = 0;
    virtual std::size_t dim() const noexcept = 0;
    virtual double potential(std::span<const double> x) const = 0;
    virtual void gradient(std::span<const double> x, std::span<double> out) const = 0;
    virtual double partial(std::span<const double> x, std::size_t i) const;

    virtual std::unique_ptr<TargetCursor> cursor(std::span<const double> x,
                                                 std::span<const double> v) const = 0;

    /// Standard deviation of the i-th marginal when it is Gaussian with
    /// known parameters (mean in marginal_mean).
    virtual std::optional<double> marginal_sd(std::size_t) const { return std::nullopt; }
    virtual double marginal_mean(std::size_t) const { return 0.0; }

    /// Bound on the Hessian operator norm when known (reported alongside the
    /// refresh-rate threshold sqrt(8 alpha1)).
    virtual std::optional<double> hessian_norm_bound() const { return std::nullopt; }

    Vector gradient(std::span<const double> x) const;

    /// Fresh-cursor convenience forms of the cursor profiles.
    clocks::RateProfile directional_profile(std::span<const double> x, std::span<const double> v,
                                            double refresh) const;
    clocks::RateProfile coordinate_profile(std::span<const double> x, std::span<const double> v,
                                           std::size_t i, double refresh) const;
};

/// Cursor that recomputes the full gradient after every move and builds
/// General profiles from a per-target directional derivative and envelope.
class RecomputingCursor : public TargetCursor {
public:
    RecomputingCursor(const Target& target, std::span<const double> x);

    void advanced(std::span<const double> x, std::span<const double> v, double dt) override;
    void velocity_changed(std::span<const double>, std::span<const double>, VelocityChange) override {}

protected:
    const Target& target_;
};

// ---------------------------------------------------------------------------
// Banana: pi(x) ~ exp{-(x1 - 1)^2 - kappa (x2 - x1^2)^2}

class BananaTarget final : public Target {
public:
    explicit BananaTarget(double kappa, double window = 1.0);

    std::string name() const override { return "banana"; }
    std::size_t dim() const noexcept override { return 2; }
    double kappa() const noexcept { return kappa_; }
    double window() const noexcept { return window_; }

    double potential(std::span<const double> x) const override;
    using Target::gradient;
    void gradient(std::span<const double> x, std::span<double> out) const override;
    std::unique_ptr<TargetCursor> cursor(std::span<const double> x,
                                         std::span<const double> v) const override;

    /// Coefficients c_0..c_3 of t -> d_i U(x + t v).
    std::array<double, 4> partial_polynomial(std::span<const double> x, std::span<const double> v,
                                             std::size_t i) const;

private:
    double kappa_;
    double window_;
};

/// Cubic c0 + c1 t + c2 t^2 + c3 t^3 with a windowed coefficient bound on its
/// positive part.
struct Cubic {
    std::array<double, 4> c{};

    double operator()(double t) const noexcept { return ((c[3] * t + c[2]) * t + c[1]) * t + c[0]; }
    /// Coefficients of s -> p(start + s).
    Cubic shifted(double start) const noexcept;
    /// sup over s in [0, w] of p(start + s)_+ is at most sum_k (c'_k)_+ w^k.
    double positive_bound(double start, double w) const noexcept;
};

// ---------------------------------------------------------------------------
// Multivariate Gaussian N(mean, Sigma)

/// Row-major dense symmetric matrix.
struct SymmetricMatrix {
    std::size_t n = 0;
    Vector values;

    SymmetricMatrix() = default;
    explicit SymmetricMatrix(std::size_t size) : n(size), values(size * size, 0.0) {}

    double& operator()(std::size_t r, std::size_t c) noexcept { return values[r * n + c]; }
    double operator()(std::size_t r, std::size_t c) const noexcept { return values[r * n + c]; }
    std::span<const double> row(std::size_t r) const noexcept { return {values.data() + r * n, n}; }
};

/// A_ii = 1, A_ij = 0.9.
SymmetricMatrix mvn1_covariance(std::size_t d, double rho = 0.9);
/// A_ij = 0.9^|i-j|.
SymmetricMatrix mvn2_covariance(std::size_t d, double rho = 0.9);

/// Cholesky factor of an SPD matrix and solves with it. Throws
/// std::invalid_argument("covariance not SPD") on failure.
class SpdFactor {
public:
    explicit SpdFactor(const SymmetricMatrix& a);
    ~SpdFactor();
    SpdFactor(SpdFactor&&) noexcept;
    SpdFactor& operator=(SpdFactor&&) noexcept;

    std::size_t dim() const noexcept { return n_; }
    /// Returns A^{-1} b.
    Vector solve(std::span<const double> b) const;
    /// Returns L z with A = L L^T.
    Vector lower_times(std::span<const double> z) const;
    /// |L^{-1} b|^2 = b^T A^{-1} b.
    double inverse_quadratic_form(std::span<const double> b) const;
    /// A^{-1}, assembled column by column from solves.
    SymmetricMatrix inverse() const;
    /// max |L L^T - A|.
    double reconstruction_error(const SymmetricMatrix& a) const;

private:
    struct Impl;
    std::size_t n_ = 0;
    std::unique_ptr<Impl> impl_;
};

class MvnTarget final : public Target {
public:
    explicit MvnTarget(SymmetricMatrix covariance, Vector mean = {}, std::string label = "mvn");

    std::string name() const override { return label_; }
    std::size_t dim() const noexcept override { return covariance_.n; }
    const SymmetricMatrix& covariance() const noexcept { return covariance_; }
    const SymmetricMatrix& precision() const noexcept { return precision_; }
    const SpdFactor& factor() const noexcept { return factor_; }

    double potential(std::span<const double> x) const override;
    using Target::gradient;
    void gradient(std::span<const double> x, std::span<double> out) const override;
    double partial(std::span<const double> x, std::size_t i) const override;
    std::unique_ptr<TargetCursor> cursor(std::span<const double> x,
                                         std::span<const double> v) const override;

    std::optional<double> marginal_sd(std::size_t i) const override;
    double marginal_mean(std::size_t i) const override { return mean_[i]; }
    std::optional<double> hessian_norm_bound() const override;

    /// Exact draw from the target.
    Vector sample(RandomSource& rng) const;

private:
    SymmetricMatrix covariance_;
    Vector mean_;
    std::string label_;
    SpdFactor factor_;
    SymmetricMatrix precision_;
};

// ---------------------------------------------------------------------------
// Bayesian logistic regression under a flat prior, no intercept.

struct LogisticData {
    std::size_t n = 0;
    std::size_t d = 0;
    Vector covariates;  // n x d row-major
    std::vector<int> labels;

    std::span<const double> row(std::size_t k) const noexcept { return {covariates.data() + k * d, d}; }
    void validate() const;
};

LogisticData simulate_logistic_data(std::size_t n, std::size_t d, RandomSource& rng);

class LogisticTarget final : public Target {
public:
    explicit LogisticTarget(LogisticData data);

    std::string name() const override { return "logistic"; }
    std::size_t dim() const noexcept override { return data_.d; }
    const LogisticData& data() const noexcept { return data_; }

    double potential(std::span<const double> x) const override;
    using Target::gradient;
    void gradient(std::span<const double> x, std::span<double> out) const override;
    std::unique_ptr<TargetCursor> cursor(std::span<const double> x,
                                         std::span<const double> v) const override;

    /// Gradient descent towards the posterior mode from the origin.
    Vector approximate_mode(std::size_t steps = 200) const;

    const Vector& transposed() const noexcept { return transposed_; }

private:
    LogisticData data_;
    Vector transposed_;  // d x n row-major
};

// ---------------------------------------------------------------------------
// Log-Gaussian Cox process on a side x side grid.

struct LgcpParams {
    std::size_t side = 20;
    double sigma2 = 1.91;
    double mu = std::log(126.0) - 1.91 / 2.0;
    double beta = 1.0 / 6.0;
};

/// Sigma((i,j),(i',j')) = sigma2 exp(-delta / (beta side)).
SymmetricMatrix lgcp_covariance(const LgcpParams& params);

struct LgcpData {
    LgcpParams params;
    std::vector<int> counts;  // side^2, index i * side + j
    Vector latent;            // side^2 (the simulated X; may be empty)

    double area() const noexcept { return 1.0 / static_cast<double>(params.side * params.side); }
    void validate() const;
};

LgcpData simulate_lgcp_data(const LgcpParams& params, RandomSource& rng);

class LgcpTarget final : public Target {
public:
    explicit LgcpTarget(LgcpData data, double window = 1.0);

    std::string name() const override { return "lgcp"; }
    std::size_t dim() const noexcept override { return data_.counts.size(); }
    const LgcpData& data() const noexcept { return data_; }
    const SymmetricMatrix& precision() const noexcept { return precision_; }
    const SpdFactor& factor() const noexcept { return factor_; }
    double window() const noexcept { return window_; }

    double potential(std::span<const double> x) const override;
    using Target::gradient;
    void gradient(std::span<const double> x, std::span<double> out) const override;
    double partial(std::span<const double> x, std::size_t i) const override;
    std::unique_ptr<TargetCursor> cursor(std::span<const double> x,
                                         std::span<const double> v) const override;

private:
    LgcpData data_;
    double window_;
    SymmetricMatrix covariance_;
    SpdFactor factor_;
    SymmetricMatrix precision_;
};

// ---------------------------------------------------------------------------
// Dataset CSV (header row, 17 significant digits, LF line endings).
//   logistic: r1,...,rd,label
//   lgcp:     i,j,y,x

void write_logistic_csv(const LogisticData& data, const std::filesystem::path& path);
LogisticData read_logistic_csv(const std::filesystem::path& path);
void write_lgcp_csv(const LgcpData& data, const std::filesystem::path& path);
/// Grid side inferred from the row count; hyperparameters taken from params.
LgcpData read_lgcp_csv(const std::filesystem::path& path, LgcpParams params);

/// "%.17g" rendering shared by every CSV writer.
std::string format_real(double value);

}  // namespace pdmp
