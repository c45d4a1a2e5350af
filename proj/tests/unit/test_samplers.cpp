#include <gtest/gtest.h>

#include <cmath>

#include "pdmp/diagnostics.hpp"
#include "pdmp/samplers.hpp"
#include "support/oracles.hpp"

using pdmp::Vector;

namespace {

// Standard Gaussian: grad U(x) = x.
const Vector kX{1, -2};

double fraction(int hits, int n) { return static_cast<double>(hits) / n; }

double binomial_se(double p, int n) { return std::sqrt(p * (1.0 - p) / n); }

void expect_trajectory_invariants(const pdmp::Trajectory& traj, const pdmp::SamplerSpec& spec, double horizon)
{
    const auto& skel = traj.skeleton();
    ASSERT_GE(skel.size(), 2u);
    EXPECT_EQ(skel.front().time, 0.0);
    for (std::size_t m = 0; m + 1 < skel.size(); ++m) {
        const auto& a = skel[m];
        const auto& b = skel[m + 1];
        ASSERT_GT(b.time, a.time);
        for (std::size_t i = 0; i < a.x.size(); ++i) {
            const double want = a.x[i] + (b.time - a.time) * a.v[i];
            ASSERT_NEAR(b.x[i], want, 1e-12 * std::max(1.0, std::fabs(want)));
        }
        pdmp::check_velocity(spec, b.v);
    }
    EXPECT_GE(skel.back().time, horizon);
    EXPECT_LT(skel[skel.size() - 2].time, horizon);
}

}  // namespace

// --- Coordinate sampler ----------------------------------------------------

TEST(CoordinateSampler, RateExamples)
{
    EXPECT_EQ(pdmp::cs_rate(kX, Vector{0, 1}, 0.0), 0.0);
    EXPECT_EQ(pdmp::cs_rate(kX, Vector{0, -1}, 0.0), 2.0);
    EXPECT_EQ(pdmp::cs_rate(kX, Vector{1, 0}, 0.5), 1.5);
}

TEST(CoordinateSampler, TotalRateExamples)
{
    EXPECT_EQ(pdmp::cs_total_rate(kX, 0.0), 3.0);
    EXPECT_EQ(pdmp::cs_total_rate(Vector{0, 0}, 1.0), 4.0);
    const pdmp::BananaTarget banana(1.0);
    EXPECT_EQ(pdmp::cs_total_rate(banana.gradient(Vector{1, 1}), 0.0), 0.0);
}

TEST(CoordinateSampler, WeightsEnumerateAtoms)
{
    const auto w = pdmp::cs_transition_weights(kX, 0.0);
    EXPECT_EQ(w, (Vector{0, 1, 2, 0}));
    pdmp::RandomSource rng(1);
    for (int k = 0; k < 200; ++k) {
        const std::size_t d = 1 + rng.index(8);
        const auto g = oracle::normal_vector(rng, d, 3.0);
        const double refresh = rng.uniform() < 0.3 ? 0.0 : 2.0 * rng.uniform();
        const auto weights = pdmp::cs_transition_weights(g, refresh);
        double sum = 0.0;
        for (std::size_t j = 0; j < weights.size(); ++j) {
            Vector atom(d, 0.0);
            atom[j / 2] = j % 2 == 0 ? 1.0 : -1.0;
            Vector minus(atom);
            for (double& a : minus) {
                a = -a;
            }
            // Weight of v* is the rate at -v*.
            EXPECT_DOUBLE_EQ(weights[j], pdmp::cs_rate(g, minus, refresh));
            sum += weights[j];
        }
        EXPECT_NEAR(sum, pdmp::cs_total_rate(g, refresh), 1e-12 * std::max(1.0, sum));
    }
}

TEST(CoordinateSampler, TransitionFrequencies)
{
    pdmp::RandomSource rng(2);
    const int n = 100000;
    int minus_e1 = 0;
    int plus_e2 = 0;
    for (int k = 0; k < n; ++k) {
        const auto v = pdmp::cs_transition(kX, 0.0, rng);
        if (v.axis == 0 && v.sign < 0) {
            ++minus_e1;
        } else if (v.axis == 1 && v.sign > 0) {
            ++plus_e2;
        } else {
            FAIL() << "zero-weight atom drawn";
        }
    }
    EXPECT_NEAR(fraction(minus_e1, n), 1.0 / 3.0, 3.0 * binomial_se(1.0 / 3.0, n));
    EXPECT_NEAR(fraction(plus_e2, n), 2.0 / 3.0, 3.0 * binomial_se(2.0 / 3.0, n));
}

TEST(CoordinateSampler, TransitionTowardsMode)
{
    pdmp::RandomSource rng(3);
    for (int k = 0; k < 1000; ++k) {
        const auto v = pdmp::cs_transition(Vector{2.0}, 0.0, rng);
        EXPECT_EQ(v.axis, 0u);
        EXPECT_EQ(v.sign, -1.0);
    }
}

TEST(CoordinateSampler, UniformAtModeWithRefresh)
{
    pdmp::RandomSource rng(4);
    const int n = 100000;
    int counts[6] = {};
    for (int k = 0; k < n; ++k) {
        const auto v = pdmp::cs_transition(Vector{0, 0, 0}, 0.5, rng);
        ++counts[2 * v.axis + (v.sign > 0 ? 0 : 1)];
    }
    for (int c : counts) {
        EXPECT_NEAR(fraction(c, n), 1.0 / 6.0, 3.5 * binomial_se(1.0 / 6.0, n));
    }
}

TEST(CoordinateSampler, CriticalPointWithoutRefreshAborts)
{
    pdmp::RandomSource rng(5);
    try {
        pdmp::cs_transition(Vector{0, 0}, 0.0, rng);
        FAIL();
    } catch (const pdmp::SamplerError& e) {
        EXPECT_NE(std::string(e.what()).find("transition kernel undefined at critical point"), std::string::npos);
    }
}

// --- Zigzag --------------------------------------------------------------------

TEST(Zigzag, RateExamples)
{
    EXPECT_EQ(pdmp::zz_rates(kX, Vector{1, 1}, Vector{0, 0}), (Vector{1, 0}));
    EXPECT_EQ(pdmp::zz_rates(kX, Vector{-1, -1}, Vector{0, 0}), (Vector{0, 2}));
    EXPECT_EQ(pdmp::zz_rates(kX, Vector{1, 1}, Vector{1, 1}), (Vector{2, 1}));
}

TEST(Zigzag, FlipExamples)
{
    EXPECT_EQ(pdmp::zz_flip(Vector{1, -1, 1}, 1), (Vector{1, 1, 1}));
    EXPECT_EQ(pdmp::zz_flip(Vector{1}, 0), (Vector{-1}));
    pdmp::RandomSource rng(6);
    for (int k = 0; k < 100; ++k) {
        const std::size_t d = 1 + rng.index(10);
        Vector v(d);
        for (double& x : v) {
            x = rng.uniform() < 0.5 ? -1.0 : 1.0;
        }
        const std::size_t i = rng.index(d);
        const auto once = pdmp::zz_flip(v, i);
        std::size_t changed = 0;
        for (std::size_t j = 0; j < d; ++j) {
            changed += once[j] != v[j];
        }
        EXPECT_EQ(changed, 1u);
        EXPECT_EQ(pdmp::zz_flip(once, i), v);
    }
    EXPECT_THROW(pdmp::zz_flip(Vector{1, 1}, 2), std::out_of_range);
}

// --- BPS ---------------------------------------------------------------------

TEST(Bouncy, BounceExamples)
{
    EXPECT_EQ(pdmp::bps_bounce(Vector{1, 1}, Vector{1, 0}), (Vector{-1, 1}));
    EXPECT_EQ(pdmp::bps_bounce(Vector{0, 3}, Vector{2, 0}), (Vector{0, 3}));
    EXPECT_EQ(pdmp::bps_bounce(Vector{2, 0}, Vector{2, 0}), (Vector{-2, 0}));
    EXPECT_THROW(pdmp::bps_bounce(Vector{1, 0}, Vector{1e-15, 0}), pdmp::SamplerError);
}

TEST(Bouncy, BouncePreservesNormAndReversesGradientComponent)
{
    pdmp::RandomSource rng(7);
    for (int k = 0; k < 1000; ++k) {
        const std::size_t d = 1 + rng.index(20);
        const auto v = oracle::normal_vector(rng, d);
        const auto w = oracle::normal_vector(rng, d, 5.0);
        const auto r = pdmp::bps_bounce(v, w);
        double nv = 0.0, nr = 0.0, vw = 0.0, rw = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            nv += v[i] * v[i];
            nr += r[i] * r[i];
            vw += v[i] * w[i];
            rw += r[i] * w[i];
        }
        EXPECT_NEAR(std::sqrt(nr), std::sqrt(nv), 1e-12 * std::max(1.0, std::sqrt(nv)));
        EXPECT_NEAR(rw, -vw, 1e-12 * std::max(1.0, std::fabs(vw)));
    }
}

TEST(Bouncy, DegenerateMixtures)
{
    pdmp::RandomSource rng(8);
    const Vector grad{1.0, 0.5};
    for (int k = 0; k < 100; ++k) {
        Vector v{0.6, 0.8};
        EXPECT_EQ(pdmp::bps_step_kernel(grad, v, 0.0, pdmp::VelocityLaw::Sphere, rng), pdmp::EventKind::Bounce);
        Vector w{-0.6, -0.8};
        EXPECT_EQ(pdmp::bps_step_kernel(grad, w, 1.0, pdmp::VelocityLaw::Sphere, rng), pdmp::EventKind::Refresh);
    }
}

TEST(Bouncy, BounceFractionMatchesRates)
{
    pdmp::RandomSource rng(9);
    const Vector grad{1.0, 2.0, -0.5};
    const Vector v0{0.48, 0.6, 0.64};
    double dot = 0.0;
    for (int i = 0; i < 3; ++i) {
        dot += grad[i] * v0[i];
    }
    const double refresh = 0.8;
    const double p = dot / (dot + refresh);
    const int n = 100000;
    int bounces = 0;
    for (int k = 0; k < n; ++k) {
        Vector v(v0);
        bounces += pdmp::bps_step_kernel(grad, v, refresh, pdmp::VelocityLaw::Gaussian, rng) == pdmp::EventKind::Bounce;
    }
    EXPECT_NEAR(fraction(bounces, n), p, 3.0 * binomial_se(p, n));
}

TEST(Bouncy, SphereDrawsHaveUnitNorm)
{
    pdmp::RandomSource rng(10);
    Vector v(7);
    for (int k = 0; k < 100; ++k) {
        pdmp::draw_velocity(pdmp::VelocityLaw::Sphere, v, rng);
        double n = 0.0;
        for (double x : v) {
            n += x * x;
        }
        EXPECT_NEAR(std::sqrt(n), 1.0, 1e-12);
    }
}

// --- Specs ---------------------------------------------------------------------

TEST(Specs, Validation)
{
    EXPECT_THROW(pdmp::validate_spec(pdmp::CoordinateSpec{-1.0}, 2), std::invalid_argument);
    EXPECT_THROW(pdmp::validate_spec(pdmp::ZigzagSpec{{1.0}}, 2), std::invalid_argument);
    EXPECT_THROW(pdmp::validate_spec(pdmp::BouncySpec{-0.1}, 2), std::invalid_argument);
    EXPECT_NO_THROW(pdmp::validate_spec(pdmp::ZigzagSpec{{0.0, 1.0}}, 2));
    EXPECT_TRUE(pdmp::is_canonical_coordinate(pdmp::CoordinateSpec{0.0}));
    EXPECT_FALSE(pdmp::is_canonical_coordinate(pdmp::CoordinateSpec{0.1}));
    EXPECT_FALSE(pdmp::is_canonical_coordinate(pdmp::ZigzagSpec{}));
}

TEST(Specs, VelocityMembership)
{
    EXPECT_NO_THROW(pdmp::check_velocity(pdmp::CoordinateSpec{}, Vector{0, -1, 0}));
    EXPECT_THROW(pdmp::check_velocity(pdmp::CoordinateSpec{}, Vector{0, 1, 1}), pdmp::SamplerError);
    EXPECT_THROW(pdmp::check_velocity(pdmp::ZigzagSpec{}, Vector{0, 1}), pdmp::SamplerError);
    EXPECT_THROW(pdmp::check_velocity(pdmp::BouncySpec{}, Vector{1, 1}), pdmp::SamplerError);
    pdmp::RandomSource rng(11);
    for (const pdmp::SamplerSpec& spec :
         {pdmp::SamplerSpec{pdmp::CoordinateSpec{}}, pdmp::SamplerSpec{pdmp::ZigzagSpec{}},
          pdmp::SamplerSpec{pdmp::BouncySpec{}}}) {
        for (int k = 0; k < 50; ++k) {
            EXPECT_NO_THROW(pdmp::check_velocity(spec, pdmp::initial_velocity(spec, 5, rng)));
        }
    }
}

// --- Generator -------------------------------------------------------------------

TEST(Generator, BalanceOnStandardGaussian)
{
    const oracle::StandardGaussian target(1);
    const pdmp::TestFunction f{[](auto x, auto v) { return x[0] * v[0]; },
                               [](auto, auto v, auto out) { out[0] = v[0]; }};
    double total = 0.0;
    for (double v : {-1.0, 1.0}) {
        auto integrand = [&](double x) {
            const double xs[] = {x};
            const double vs[] = {v};
            return pdmp::cs_generator(target, f, xs, vs, 1.0) * std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI) * 0.5;
        };
        total += oracle::integrate(integrand, -10.0, 10.0, {0.0});
    }
    EXPECT_LT(std::fabs(total), 1e-6);
}

// --- Engine ------------------------------------------------------------------------

TEST(Engine, FlatTargetGivesExponentialGaps)
{
    const oracle::Flat target(3);
    pdmp::RandomSource rng(12);
    const double refresh = 0.7;
    auto [traj, result] = pdmp::run_trajectory(pdmp::CoordinateSpec{refresh}, target,
                                               pdmp::PhaseState({0, 0, 0}, {1, 0, 0}), pdmp::StopRule::events(20000),
                                               rng);
    const auto& skel = traj.skeleton();
    Vector gaps;
    for (std::size_t m = 0; m + 1 < skel.size(); ++m) {
        gaps.push_back(skel[m + 1].time - skel[m].time);
    }
    const double stat = pdmp::ks_one_sample(gaps, [=](double t) { return 1.0 - std::exp(-refresh * t); });
    EXPECT_GE(pdmp::ks_pvalue(stat, static_cast<double>(gaps.size())), 0.001);
    EXPECT_EQ(result.counters.events, 20000u);
    EXPECT_EQ(result.counters.rate_evals, 20000u);
}

TEST(Engine, TrajectoryInvariantsForAllSamplers)
{
    const pdmp::MvnTarget mvn(pdmp::mvn2_covariance(5));
    const pdmp::BananaTarget banana(2.0);
    const std::vector<pdmp::SamplerSpec> specs{pdmp::CoordinateSpec{0.0}, pdmp::CoordinateSpec{0.5},
                                               pdmp::ZigzagSpec{}, pdmp::BouncySpec{1.0},
                                               pdmp::BouncySpec{0.5, pdmp::VelocityLaw::Gaussian}};
    pdmp::RandomSource rng(13);
    for (const pdmp::Target* target : {static_cast<const pdmp::Target*>(&mvn), static_cast<const pdmp::Target*>(&banana)}) {
        for (const auto& spec : specs) {
            const std::size_t d = target->dim();
            const auto v0 = pdmp::initial_velocity(spec, d, rng);
            const double horizon = 50.0;
            std::vector<pdmp::EventRecord> events;
            auto [traj, result] = pdmp::run_trajectory(spec, *target, pdmp::PhaseState(Vector(d, 0.5), v0),
                                                       pdmp::StopRule::at_horizon(horizon), rng, &events);
            expect_trajectory_invariants(traj, spec, horizon);
            EXPECT_EQ(result.horizon, horizon);
            std::uint64_t evals = 0;
            for (const auto& e : events) {
                evals += e.rate_evals;
            }
            EXPECT_EQ(evals, result.counters.rate_evals);
        }
    }
}

TEST(Engine, ZigzagCountsOneEvaluationPerCoordinate)
{
    const pdmp::MvnTarget mvn(pdmp::mvn1_covariance(8));
    pdmp::RandomSource rng(14);
    const auto v0 = pdmp::initial_velocity(pdmp::ZigzagSpec{}, 8, rng);
    const auto result = pdmp::run(pdmp::ZigzagSpec{}, mvn, pdmp::PhaseState(Vector(8, 0.0), v0),
                                  pdmp::StopRule::events(1000), rng);
    EXPECT_EQ(result.counters.rate_evals, 8u * 1000u);
}

TEST(Engine, RateEvaluationBudget)
{
    const pdmp::MvnTarget mvn(pdmp::mvn1_covariance(4));
    pdmp::RandomSource rng(15);
    const auto result = pdmp::run(pdmp::CoordinateSpec{}, mvn, pdmp::PhaseState(Vector(4, 0.0), {0, 1, 0, 0}),
                                  pdmp::StopRule::rate_evals(5000), rng);
    EXPECT_EQ(result.counters.rate_evals, 5000u);
    EXPECT_EQ(result.horizon, result.final_state.t);
}

TEST(Engine, DeterministicForSameStream)
{
    const pdmp::BananaTarget banana(1.0);
    auto once = [&] {
        pdmp::RandomSource rng(99, 7);
        return pdmp::run_trajectory(pdmp::ZigzagSpec{}, banana, pdmp::PhaseState({0, 0}, {1, -1}),
                                    pdmp::StopRule::at_horizon(100.0), rng)
            .first;
    };
    const auto a = once();
    const auto b = once();
    ASSERT_EQ(a.skeleton().size(), b.skeleton().size());
    for (std::size_t m = 0; m < a.skeleton().size(); ++m) {
        EXPECT_EQ(a.skeleton()[m].time, b.skeleton()[m].time);
        EXPECT_EQ(a.skeleton()[m].x, b.skeleton()[m].x);
    }
}

TEST(Engine, NoStopRuleRejected)
{
    const oracle::Flat target(1);
    pdmp::RandomSource rng(16);
    EXPECT_THROW(pdmp::run(pdmp::CoordinateSpec{1.0}, target, pdmp::PhaseState({0}, {1}), pdmp::StopRule{}, rng),
                 std::invalid_argument);
}

TEST(Engine, FlatTargetWithoutRefreshReachesHorizon)
{
    const oracle::Flat target(2);
    pdmp::RandomSource rng(17);
    auto [traj, result] = pdmp::run_trajectory(pdmp::CoordinateSpec{0.0}, target, pdmp::PhaseState({0, 0}, {1, 0}),
                                               pdmp::StopRule::at_horizon(3.0), rng);
    EXPECT_EQ(result.counters.events, 0u);
    EXPECT_EQ(traj.skeleton().back().time, 3.0);
    EXPECT_DOUBLE_EQ(traj.skeleton().back().x[0], 3.0);
}

TEST(Engine, ErrorsCarryEventContext)
{
    // A General profile whose envelope is too small.
    class Broken final : public pdmp::Target {
    public:
        std::string name() const override { return "broken"; }
        std::size_t dim() const noexcept override { return 1; }
        double potential(std::span<const double> x) const override { return 2.0 * x[0]; }
        void gradient(std::span<const double>, std::span<double> out) const override { out[0] = 2.0; }
        std::unique_ptr<pdmp::TargetCursor> cursor(std::span<const double>, std::span<const double>) const override
        {
            class C final : public pdmp::TargetCursor {
            public:
                C() { grad_ = {2.0}; }
                void advanced(std::span<const double>, std::span<const double>, double) override {}
                void velocity_changed(std::span<const double>, std::span<const double>, pdmp::VelocityChange) override {}
                pdmp::clocks::RateProfile directional(std::span<const double>, std::span<const double> v,
                                                      double refresh) override
                {
                    const double r = std::max(2.0 * v[0], 0.0) + refresh;
                    return pdmp::clocks::General{[r](double) { return r; }, {1.0, [](double) { return 0.5; }}, "broken"};
                }
                pdmp::clocks::RateProfile coordinate(std::span<const double> x, std::span<const double> v,
                                                     std::size_t, double refresh) override
                {
                    return directional(x, v, refresh);
                }
            };
            return std::make_unique<C>();
        }
    } target;
    pdmp::RandomSource rng(18);
    try {
        pdmp::run(pdmp::CoordinateSpec{1.0}, target, pdmp::PhaseState({0}, {1}), pdmp::StopRule::at_horizon(10.0), rng);
        FAIL();
    } catch (const pdmp::SamplerError& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("broken"), std::string::npos);
        EXPECT_NE(msg.find("[event 0"), std::string::npos) << msg;
    }
}

TEST(Engine, CoordinateSamplerPathMeanNearZero)
{
    const oracle::StandardGaussian target(1);
    pdmp::RandomSource rng(19);
    auto [traj, result] = pdmp::run_trajectory(pdmp::CoordinateSpec{0.0}, target, pdmp::PhaseState({0}, {1}),
                                               pdmp::StopRule::at_horizon(20000.0), rng);
    const double mean = pdmp::path_average(traj, pdmp::CoordinateOf{0});
    const auto grid = pdmp::discretize(traj, 10000);
    const double se = pdmp::mcse(grid.column(0));
    EXPECT_LT(std::fabs(mean), 3.0 * se);
    EXPECT_NEAR(pdmp::path_average(traj, pdmp::SquareOf{0}), 1.0, 0.1);
}

TEST(Engine, ZigzagAndCoordinateAgreeInOneDimension)
{
    const oracle::StandardGaussian target(1);
    auto gaps = [&](const pdmp::SamplerSpec& spec, std::uint64_t seed) {
        pdmp::RandomSource rng(seed);
        auto [traj, result] = pdmp::run_trajectory(spec, target, pdmp::PhaseState({0}, {1}),
                                                   pdmp::StopRule::events(10000), rng);
        Vector out;
        const auto& skel = traj.skeleton();
        for (std::size_t m = 0; m + 1 < skel.size(); ++m) {
            out.push_back(skel[m + 1].time - skel[m].time);
        }
        return out;
    };
    const auto cs = gaps(pdmp::CoordinateSpec{0.0}, 20);
    const auto zs = gaps(pdmp::ZigzagSpec{{0.0}}, 21);
    const double stat = pdmp::ks_two_sample(cs, zs);
    EXPECT_GE(pdmp::ks_two_sample_pvalue(stat, cs.size(), zs.size()), 0.001);
}

namespace {

// Standard Gaussian whose coordinate rates are handed to the engine as
// thinned profiles instead of closed forms.
class ThinnedGaussian final : public pdmp::Target {
public:
    explicit ThinnedGaussian(std::size_t d) : d_(d) {}
    std::string name() const override { return "thinned-gaussian"; }
    std::size_t dim() const noexcept override { return d_; }
    double potential(std::span<const double> x) const override { return exact_.potential(x); }
    void gradient(std::span<const double> x, std::span<double> out) const override { exact_.gradient(x, out); }
    std::unique_ptr<pdmp::TargetCursor> cursor(std::span<const double> x, std::span<const double>) const override
    {
        return std::make_unique<Cursor>(x);
    }

private:
    class Cursor final : public pdmp::TargetCursor {
    public:
        explicit Cursor(std::span<const double> x) { grad_.assign(x.begin(), x.end()); }
        void advanced(std::span<const double> x, std::span<const double>, double) override
        {
            grad_.assign(x.begin(), x.end());
        }
        void velocity_changed(std::span<const double>, std::span<const double>, pdmp::VelocityChange) override {}
        pdmp::clocks::RateProfile directional(std::span<const double>, std::span<const double>, double) override
        {
            throw std::logic_error("coordinate profiles only");
        }
        pdmp::clocks::RateProfile coordinate(std::span<const double> x, std::span<const double> v, std::size_t i,
                                             double refresh) override
        {
            const double a = v[i] * x[i];
            const double b = v[i] * v[i];
            return pdmp::clocks::General{[=](double t) { return std::max(a + b * t, 0.0) + refresh; },
                                         {0.5, [=](double s) { return std::max(a + b * (s + 0.5), 0.0) + refresh; }},
                                         "thinned-gaussian"};
        }
    };

    std::size_t d_;
    oracle::StandardGaussian exact_{d_};
};

}  // namespace

TEST(Engine, ZigzagThinnedClocksMatchClosedForms)
{
    const ThinnedGaussian thinned(3);
    const oracle::StandardGaussian exact(3);
    auto positions = [](const pdmp::Target& target, std::uint64_t seed) {
        pdmp::RandomSource rng(seed);
        pdmp::GridRecorder grid(20000, 20000.0);
        pdmp::PathSink* sinks[] = {&grid};
        pdmp::run(pdmp::ZigzagSpec{}, target, pdmp::PhaseState({0, 0, 0}, {1, -1, 1}),
                  pdmp::StopRule::at_horizon(20000.0), rng, sinks);
        return grid.take().column(1);
    };
    const auto a = positions(thinned, 22);
    const auto b = positions(exact, 23);
    // Grid rows are autocorrelated; compare with a loose statistic bound.
    EXPECT_LT(pdmp::ks_two_sample(a, b), 0.05);
}

TEST(Engine, ZigzagOnBananaWithRateEvaluationBudget)
{
    for (double kappa : {0.5, 4.0}) {
        const pdmp::BananaTarget banana(kappa);
        pdmp::RandomSource rng(24);
        const auto result = pdmp::run(pdmp::ZigzagSpec{}, banana, pdmp::PhaseState({0, 0}, {1, 1}),
                                      pdmp::StopRule::rate_evals(200000), rng);
        EXPECT_GE(result.counters.rate_evals, 200000u);
        EXPECT_GT(result.counters.events, 1000u);
    }
}
