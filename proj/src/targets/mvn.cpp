#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>

#include "pdmp/simd.hpp"
#include "pdmp/targets.hpp"

namespace pdmp {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

SymmetricMatrix mvn1_covariance(std::size_t d, double rho)
{
    SymmetricMatrix a(d);
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            a(i, j) = i == j ? 1.0 : rho;
        }
    }
    return a;
}

SymmetricMatrix mvn2_covariance(std::size_t d, double rho)
{
    SymmetricMatrix a(d);
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            a(i, j) = std::pow(rho, std::fabs(static_cast<double>(i) - static_cast<double>(j)));
        }
    }
    return a;
}

struct SpdFactor::Impl {
    Eigen::LLT<Eigen::MatrixXd> llt;
};

SpdFactor::SpdFactor(const SymmetricMatrix& a) : n_(a.n), impl_(std::make_unique<Impl>())
{
    if (a.n == 0 || a.values.size() != a.n * a.n) {
        throw std::invalid_argument("covariance not SPD: empty or malformed matrix");
    }
    for (std::size_t i = 0; i < a.n; ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            if (std::fabs(a(i, j) - a(j, i)) > 1e-12 * (std::fabs(a(i, j)) + std::fabs(a(j, i)) + 1.0)) {
                throw std::invalid_argument("covariance not SPD: matrix is not symmetric");
            }
        }
    }
    const Eigen::Map<const RowMatrix> m(a.values.data(), a.n, a.n);
    impl_->llt.compute(m);
    if (impl_->llt.info() != Eigen::Success) {
        throw std::invalid_argument("covariance not SPD");
    }
    // LLT only fails on nonpositive pivots; reject near-singular factors too.
    const Eigen::VectorXd diag = impl_->llt.matrixL().toDenseMatrix().diagonal();
    if (!(diag.minCoeff() > 0.0) || !std::isfinite(diag.maxCoeff())) {
        throw std::invalid_argument("covariance not SPD");
    }
}

SpdFactor::~SpdFactor() = default;
SpdFactor::SpdFactor(SpdFactor&&) noexcept = default;
SpdFactor& SpdFactor::operator=(SpdFactor&&) noexcept = default;

Vector SpdFactor::solve(std::span<const double> b) const
{
    const Eigen::Map<const Eigen::VectorXd> rhs(b.data(), static_cast<Eigen::Index>(b.size()));
    const Eigen::VectorXd sol = impl_->llt.solve(rhs);
    return Vector(sol.data(), sol.data() + sol.size());
}

Vector SpdFactor::lower_times(std::span<const double> z) const
{
    const Eigen::Map<const Eigen::VectorXd> zz(z.data(), static_cast<Eigen::Index>(z.size()));
    const Eigen::VectorXd out = impl_->llt.matrixL() * zz;
    return Vector(out.data(), out.data() + out.size());
}

double SpdFactor::inverse_quadratic_form(std::span<const double> b) const
{
    const Eigen::Map<const Eigen::VectorXd> rhs(b.data(), static_cast<Eigen::Index>(b.size()));
    const Eigen::VectorXd w = impl_->llt.matrixL().solve(rhs);
    return w.squaredNorm();
}

SymmetricMatrix SpdFactor::inverse() const
{
    const Eigen::MatrixXd inv = impl_->llt.solve(Eigen::MatrixXd::Identity(n_, n_));
    SymmetricMatrix out(n_);
    for (std::size_t i = 0; i < n_; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            // Symmetrize: the two triangles of a solve differ by rounding.
            const double value = 0.5 * (inv(i, j) + inv(j, i));
            out(i, j) = value;
            out(j, i) = value;
        }
    }
    return out;
}

double SpdFactor::reconstruction_error(const SymmetricMatrix& a) const
{
    const Eigen::MatrixXd l = impl_->llt.matrixL();
    const Eigen::MatrixXd rebuilt = l * l.transpose();
    const Eigen::Map<const RowMatrix> m(a.values.data(), a.n, a.n);
    return (rebuilt - m).cwiseAbs().maxCoeff();
}

namespace {

// g = P (x - m) and h = P v maintained by O(d) updates; both are recomputed
// from scratch every kResync moves to stop rounding drift.
class MvnCursor final : public TargetCursor {
public:
    MvnCursor(const MvnTarget& target, std::span<const double> x, std::span<const double> v)
        : target_(target), d_(target.dim()), centered_(d_), h_(d_)
    {
        grad_.assign(d_, 0.0);
        resync(x, v);
        axis_ = detect_axis(v);
    }

    void advanced(std::span<const double> x, std::span<const double> v, double dt) override
    {
        if (++moves_ >= kResync) {
            resync(x, v);
            return;
        }
        simd::axpy(dt, h_, grad_);
    }

    void velocity_changed(std::span<const double> x, std::span<const double> v,
                          VelocityChange change) override
    {
        const auto& p = target_.precision();
        switch (change.kind) {
        case VelocityChange::Kind::Axis: {
            const double s = v[change.index];
            const auto row = p.row(change.index);
            for (std::size_t k = 0; k < d_; ++k) {
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
        (void)x;
    }

    clocks::RateProfile directional(std::span<const double>, std::span<const double> v,
                                    double refresh) override
    {
        if (axis_ >= 0) {
            const auto j = static_cast<std::size_t>(axis_);
            return clocks::LinearPlus{v[j] * grad_[j], v[j] * h_[j], refresh};
        }
        return clocks::LinearPlus{simd::dot(v, grad_), simd::dot(v, h_), refresh};
    }

    clocks::RateProfile coordinate(std::span<const double>, std::span<const double> v, std::size_t i,
                                   double refresh) override
    {
        return clocks::LinearPlus{v[i] * grad_[i], v[i] * h_[i], refresh};
    }

private:
    static constexpr unsigned kResync = 256;

    void resync(std::span<const double> x, std::span<const double> v)
    {
        for (std::size_t k = 0; k < d_; ++k) {
            centered_[k] = x[k] - target_.marginal_mean(k);
        }
        simd::gemv(target_.precision().values, centered_, grad_);
        simd::gemv(target_.precision().values, v, h_);
        moves_ = 0;
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

    const MvnTarget& target_;
    std::size_t d_;
    Vector centered_;
    Vector h_;
    long axis_ = -1;
    unsigned moves_ = 0;
};

}  // namespace

MvnTarget::MvnTarget(SymmetricMatrix covariance, Vector mean, std::string label)
    : covariance_(std::move(covariance)),
      mean_(std::move(mean)),
      label_(std::move(label)),
      factor_(covariance_),
      precision_(factor_.inverse())
{
    if (mean_.empty()) {
        mean_.assign(covariance_.n, 0.0);
    }
    if (mean_.size() != covariance_.n) {
        throw std::invalid_argument("mvn: mean and covariance dimensions differ");
    }
}

double MvnTarget::potential(std::span<const double> x) const
{
    Vector c(x.begin(), x.end());
    for (std::size_t k = 0; k < c.size(); ++k) {
        c[k] -= mean_[k];
    }
    return 0.5 * factor_.inverse_quadratic_form(c);
}

void MvnTarget::gradient(std::span<const double> x, std::span<double> out) const
{
    Vector c(x.begin(), x.end());
    for (std::size_t k = 0; k < c.size(); ++k) {
        c[k] -= mean_[k];
    }
    simd::gemv(precision_.values, c, out);
}

double MvnTarget::partial(std::span<const double> x, std::size_t i) const
{
    const auto row = precision_.row(i);
    double s = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        s += row[k] * (x[k] - mean_[k]);
    }
    return s;
}

std::unique_ptr<TargetCursor> MvnTarget::cursor(std::span<const double> x, std::span<const double> v) const
{
    return std::make_unique<MvnCursor>(*this, x, v);
}

std::optional<double> MvnTarget::marginal_sd(std::size_t i) const
{
    return std::sqrt(covariance_(i, i));
}

std::optional<double> MvnTarget::hessian_norm_bound() const
{
    const Eigen::Map<const RowMatrix> m(precision_.values.data(), precision_.n, precision_.n);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m, Eigen::EigenvaluesOnly);
    return eig.eigenvalues().maxCoeff();
}

Vector MvnTarget::sample(RandomSource& rng) const
{
    Vector z(dim());
    for (double& zi : z) {
        zi = rng.normal();
    }
    Vector x = factor_.lower_times(z);
    for (std::size_t k = 0; k < x.size(); ++k) {
        x[k] += mean_[k];
    }
    return x;
}

}  // namespace pdmp
