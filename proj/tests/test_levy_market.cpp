#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

using namespace emvj;
using namespace emvj::testing;

namespace {

const TimeGrid kDaily(1.0, 252);

std::vector<double> terminal_wealths(const Theta& theta, const PreferenceParams& pref, const SimOptions& opts,
                                     int n_paths, std::uint64_t seed)
{
    std::vector<double> out;
    for (int i = 0; i < n_paths; ++i) {
        Rng rng = make_rng(seed, static_cast<std::uint64_t>(i));
        out.push_back(simulate_wealth_theta(theta, kEnv, pref, kDaily, 1.0, rng, opts).terminal());
    }
    return out;
}

} // namespace

TEST(JumpIncrement, NoArrivalsWithoutIntensity)
{
    Rng rng = make_rng(1, 0);
    for (double dt : {1e-3, 0.5, 10.0}) {
        const JumpIncrement inc = sample_jump_increment(JumpParams{0.0, -0.1, 0.2}, dt, rng);
        EXPECT_EQ(inc.count, 0);
        EXPECT_EQ(inc.total_mult, 1.0);
        EXPECT_EQ(inc.compensated_sum, 0.0);
    }
}

TEST(JumpIncrement, CountAndCompensatedSumMoments)
{
    const double dt = 1.0 / 252.0;
    const double lam = kJumps.zeta * dt;
    EXPECT_NEAR(lam, 0.10985, 5e-6);

    Rng rng = make_rng(2, 0);
    constexpr int n = 1'000'000;
    std::vector<double> counts(n), sums(n);
    for (int i = 0; i < n; ++i) {
        const JumpIncrement inc = sample_jump_increment(kJumps, dt, rng);
        counts[i] = inc.count;
        sums[i] = inc.compensated_sum;
    }
    const Moments c = moments(counts);
    EXPECT_LT(std::abs(c.mean - lam), 3.0 * std::sqrt(lam / n));
    const Moments s = moments(sums);
    EXPECT_LT(std::abs(s.mean), 3.0 * s.se());
}

TEST(JumpIncrement, CompensatedMeanZeroForOtherLaws)
{
    const JumpParams laws[] = {{5.0, 0.05, 0.1}, {80.0, -0.02, 0.01}, {1.0, -0.3, 0.4}};
    for (const auto& jp : laws) {
        Rng rng = make_rng(3, 0);
        std::vector<double> sums(200'000);
        for (double& x : sums) x = sample_jump_increment(jp, 0.01, rng).compensated_sum;
        const Moments s = moments(sums);
        EXPECT_LT(std::abs(s.mean), 3.0 * s.se()) << "zeta " << jp.zeta;
    }
}

TEST(JumpIncrement, UncompensatedVariantKeepsRawSum)
{
    Rng a = make_rng(4, 0), b = make_rng(4, 0);
    const JumpIncrement with = sample_jump_increment(kJumps, 0.1, a, true);
    const JumpIncrement without = sample_jump_increment(kJumps, 0.1, b, false);
    EXPECT_EQ(with.count, without.count);
    EXPECT_DOUBLE_EQ(without.compensated_sum - with.compensated_sum, kJumps.zeta * 0.1 * kJumps.kappa());
}

TEST(StockPath, FlatWithoutDriftOrNoise)
{
    Rng rng = make_rng(5, 0);
    const PathGrid p = simulate_stock_path({0.0, 0.0}, {}, kDaily, 3.5, rng);
    ASSERT_EQ(p.size(), 253u);
    for (double s : p.values) EXPECT_EQ(s, 3.5);
}

TEST(StockPath, ExpectedTerminalPriceGrowsAtMu)
{
    for (auto schedule : {JumpSchedule::PerStep, JumpSchedule::PerPath}) {
        SimOptions opts;
        opts.schedule = schedule;
        std::vector<double> st;
        for (int i = 0; i < 10'000; ++i) {
            Rng rng = make_rng(6, static_cast<std::uint64_t>(i));
            st.push_back(simulate_stock_path(kMarket, kJumps, kDaily, 1.0, rng, opts).terminal());
        }
        const Moments m = moments(st);
        EXPECT_LT(std::abs(m.mean - std::exp(kMarket.mu)), 3.0 * m.se());
    }
}

TEST(StockPath, LogVarianceMatchesGbm)
{
    std::vector<double> logs;
    for (int i = 0; i < 10'000; ++i) {
        Rng rng = make_rng(7, static_cast<std::uint64_t>(i));
        logs.push_back(std::log(simulate_stock_path(kMarket, {}, kDaily, 2.0, rng).terminal() / 2.0));
    }
    const Moments m = moments(logs);
    const double want = kMarket.sigma * kMarket.sigma;
    EXPECT_LT(std::abs(m.var - want), 3.0 * m.se_var());
}

TEST(StockPath, StrictlyPositive)
{
    const MarketParams wild{0.5, 1.5};
    const JumpParams big{50.0, -0.5, 0.6};
    for (int i = 0; i < 200; ++i) {
        Rng rng = make_rng(8, static_cast<std::uint64_t>(i));
        for (double s : simulate_stock_path(wild, big, kDaily, 1.0, rng).values) ASSERT_GT(s, 0.0);
    }
}

TEST(StockPath, SeedFixesPath)
{
    Rng a = make_rng(9, 3), b = make_rng(9, 3), c = make_rng(9, 4);
    const auto pa = simulate_stock_path(kMarket, kJumps, kDaily, 1.0, a);
    const auto pb = simulate_stock_path(kMarket, kJumps, kDaily, 1.0, b);
    const auto pc = simulate_stock_path(kMarket, kJumps, kDaily, 1.0, c);
    EXPECT_EQ(pa.values, pb.values);
    EXPECT_NE(pa.values, pc.values);
}

TEST(WealthTheta, ZeroPositionStaysPut)
{
    const PreferenceParams pref{1.0, 0.0, 0.03};
    Rng rng = make_rng(10, 0);
    const auto p = simulate_wealth_theta(Theta{0.03, 0.2, 0.1}, kEnv, pref, kDaily, 1.7, rng);
    for (double x : p.values) EXPECT_EQ(x, 1.7);
}

TEST(WealthTheta, NoJumpsMatchesDiffusionOracle)
{
    const Environment env{kMarket, {0.0, -0.004, 0.0274}};
    const Theta theta{0.07, 0.15, 0.12};
    const PreferenceParams pref{2.0, 0.5, 0.01};
    const GaussianPolicy pol = equilibrium_policy(theta, pref);
    const double a = (env.market.mu - pref.r) * pol.mean;
    const double b = env.market.sigma * std::sqrt(pol.variance + pol.mean * pol.mean);
    const double dt = kDaily.dt();

    for (std::uint64_t i = 0; i < 5; ++i) {
        Rng sim = make_rng(11, i), oracle = make_rng(11, i);
        const auto path = simulate_wealth_theta(theta, env, pref, kDaily, 1.0, sim);
        double x = 1.0;
        for (std::size_t n = 0; n < kDaily.n_steps(); ++n) {
            std::normal_distribution<double> n01(0.0, 1.0);
            x += a * dt + b * (std::sqrt(dt) * n01(oracle));
            ASSERT_EQ(path.values[n + 1], x) << "step " << n;
        }
    }
}

TEST(WealthTheta, TerminalMeanMatchesAuxiliaryValue)
{
    const PreferenceParams pref{1.0, 1.0, 0.0};
    const double want = 1.0 + aux_h(0.0, theta_true(), pref, 1.0);
    EXPECT_NEAR(want, 1.2005, 1e-4);
    EXPECT_LT(rel_err(want, 1.2021), 0.01);
    for (auto coef : {JumpCoefficient::PolicyMean, JumpCoefficient::SampledAction}) {
        SimOptions opts;
        opts.coefficient = coef;
        const Moments m = moments(terminal_wealths(theta_true(), pref, opts, 10'000, 12));
        EXPECT_LT(std::abs(m.mean - want), 3.0 * m.se());
    }
}

TEST(WealthTheta, TerminalVarianceFollowsIsometry)
{
    const PreferenceParams pref{1.0, 1.0, 0.0};
    const GaussianPolicy pol = equilibrium_policy(theta_true(), pref);
    const double b2 = kMarket.sigma * kMarket.sigma * (pol.variance + pol.mean * pol.mean);
    const double d2 = delta_squared_merton(kJumps);

    SimOptions mean_coef;
    mean_coef.coefficient = JumpCoefficient::PolicyMean;
    const Moments pm = moments(terminal_wealths(theta_true(), pref, mean_coef, 10'000, 13));
    EXPECT_LT(std::abs(pm.var - (b2 + pol.mean * pol.mean * d2)), 3.0 * pm.se_var());

    // With an independent action per jump the jump exposure has second moment v + m^2.
    const Moments sa = moments(terminal_wealths(theta_true(), pref, {}, 10'000, 13));
    EXPECT_LT(std::abs(sa.var - (b2 + (pol.variance + pol.mean * pol.mean) * d2)), 3.0 * sa.se_var());
}

TEST(WealthSampled, PointMassAtZero)
{
    Rng rng = make_rng(14, 0);
    const auto p = simulate_wealth_sampled({0.0, 0.0}, kEnv, 0.0, kDaily, 1.0, rng);
    for (double x : p.values) EXPECT_EQ(x, 1.0);
}

TEST(WealthSampled, DeterministicLimit)
{
    const Environment flat{{0.08, 0.0}, {}};
    Rng rng = make_rng(15, 0);
    const double u = 1.5, r = 0.02;
    const auto p = simulate_wealth_sampled({u, 0.0}, flat, r, kDaily, 1.0, rng);
    EXPECT_NEAR(p.terminal(), 1.0 + u * (0.08 - r), 1e-12);
}

TEST(WealthSampled, PolicyMeanRowOfExperimentTable)
{
    // Investing the mean of the gamma = 1 equilibrium policy, one jump draw per path.
    const double u = kMarket.mu / theta_true().total_variance();
    EXPECT_NEAR(u, 2.2837, 1e-4);
    SimOptions opts;
    opts.schedule = JumpSchedule::PerPath;
    std::vector<double> xt;
    for (int i = 0; i < 100; ++i) {
        Rng rng = make_rng(16, static_cast<std::uint64_t>(i));
        xt.push_back(simulate_wealth_sampled({u, 0.0}, kEnv, 0.0, kDaily, 1.0, rng, opts).terminal());
    }
    const Moments m = moments(xt);
    EXPECT_LT(std::abs(m.mean - 1.1998), 3.0 * 0.0303);
    EXPECT_LT(std::abs(std::sqrt(m.var) - 0.3032), 3.0 * 0.0215);
}
