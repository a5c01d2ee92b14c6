#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "collide/errors.hpp"
#include "collide/limit_laws.hpp"
#include "collide/poisson_embed.hpp"
#include "collide/stats_gof.hpp"
#include "collide/urn_sim.hpp"

using namespace collide;

namespace {

SimOptions opts(std::uint64_t seed) {
    SimOptions o;
    o.seed = seed;
    return o;
}

double two_stage(double r) { return 2 * std::exp(-r / 2) - std::exp(-r); }

}  // namespace

TEST(InhomogQuadratic, FirstArrivalIsRayleigh) {
    RandomSource rng(1);
    std::vector<double> first;
    for (int i = 0; i < 100000; ++i) first.push_back(sample_inhomog_quadratic(1.0, 1, rng).times[0]);
    const auto ks = ks_against(first, [](double t) { return std::exp(-t * t / 2); });
    EXPECT_TRUE(ks.pass) << ks.statistic;
}

TEST(InhomogQuadratic, SecondArrivalIsGammaTimeChange) {
    RandomSource rng(2);
    const double c = 0.5;
    std::vector<double> second;
    for (int i = 0; i < 100000; ++i) second.push_back(sample_inhomog_quadratic(c, 2, rng).times[1]);
    // c T^2 / 2 ~ Gamma(2, 1).
    const auto ks = ks_against(second, [c](double t) {
        const double x = c * t * t / 2;
        return std::exp(-x) * (1 + x);
    });
    EXPECT_TRUE(ks.pass) << ks.statistic;
}

TEST(InhomogQuadratic, FourfoldRateHalvesTimes) {
    RandomSource a(3), b(3);
    const auto slow = sample_inhomog_quadratic(1.0, 20, a);
    const auto fast = sample_inhomog_quadratic(4.0, 20, b);
    for (std::size_t k = 0; k < 20; ++k) EXPECT_NEAR(fast.times[k], slow.times[k] / 2, 1e-14 * slow.times[k]);
}

TEST(InhomogQuadratic, HorizonVariantStopsAtHorizon) {
    RandomSource rng(4);
    const auto s = sample_inhomog_quadratic_until(1.0, 3.0, rng);
    for (std::size_t k = 0; k < s.times.size(); ++k) {
        EXPECT_LE(s.times[k], 3.0);
        if (k) EXPECT_LT(s.times[k - 1], s.times[k]);
    }
    EXPECT_THROW(sample_inhomog_quadratic(0.0, 1, rng), InvalidArgument);
}

TEST(ChannelRetained, FirstRetainedEventLaw) {
    // Two colour streams of rate 1/2: the first two-colour epoch is the max of
    // two Exp(1/2) clocks, mean 2 + 2 - 1 = 3, survival 2e^{-r/2} - e^{-r}.
    RandomSource rng(5);
    std::vector<double> first;
    for (int i = 0; i < 100000; ++i) {
        const auto s = sample_channel_retained({1.0, 2}, 60.0, rng);
        ASSERT_FALSE(s.times.empty());
        first.push_back(s.times[0]);
    }
    const auto m = moments_of(first, 1);
    EXPECT_LE(std::abs(m.mean - 3.0), 4 * m.mean_se);
    EXPECT_TRUE(ks_against(first, two_stage).pass);
}

TEST(ChannelRetained, ShortHorizonIsEmpty) {
    RandomSource rng(6);
    int empty = 0;
    for (int i = 0; i < 1000; ++i) empty += sample_channel_retained({1.0, 2}, 1e-6, rng).times.empty();
    EXPECT_GE(empty, 999);
    EXPECT_THROW(sample_channel_retained({0.0, 2}, 1.0, rng), InvalidParams);
}

TEST(ChannelRetained, EventsStrictlyIncrease) {
    RandomSource rng(7);
    const auto s = sample_channel_retained({2.0, 3}, 500.0, rng);
    ASSERT_GT(s.times.size(), 100u);
    for (std::size_t k = 1; k < s.times.size(); ++k) ASSERT_LT(s.times[k - 1], s.times[k]);
}

TEST(LimitProcess, NoAtomsFirstArrival) {
    const auto spec = LimitProcessSpec::from_atoms(2, {});
    const auto b = sample_limit_process(spec, 1, 100000, opts(8));
    const auto ks = ks_against(b.scaled(1.0), [](double r) { return std::exp(-r * r / 4); });
    EXPECT_TRUE(ks.pass) << ks.statistic;
}

TEST(LimitProcess, SingleUnitAtomFirstArrival) {
    const auto spec = LimitProcessSpec::from_atoms(2, {1.0});
    EXPECT_EQ(spec.background_coeff, 0.0);
    const auto b = sample_limit_process(spec, 1, 100000, opts(9));
    EXPECT_TRUE(ks_against(b.scaled(1.0), two_stage).pass);
}

TEST(LimitProcess, MixedSpecMatchesQColorLaw) {
    LimitParams p;
    p.q = 3;
    p.psi = {0.6, 0.5};
    const auto b = sample_limit_process(LimitProcessSpec::from_atoms(3, p.psi), 1, 100000, opts(10));
    EXPECT_TRUE(ks_against(b.scaled(1.0), [&](double r) { return survival_qcolor(p, r); }).pass);
}

TEST(LimitProcess, ArrivalsStrictlyIncrease) {
    const auto b = sample_limit_process(LimitProcessSpec::from_atoms(2, {0.7, 0.3}), 6, 2000, opts(11));
    for (std::size_t t = 0; t < b.trials(); ++t)
        for (unsigned k = 1; k < 6; ++k) ASSERT_LT(b.at(t, k - 1), b.at(t, k));
}

TEST(LimitProcess, PoissonCountDispersion) {
    // Arrivals in [0, 2] for q = 2 without atoms: Poisson with mean (1/2) * 4 / 2 = 1.
    const auto b = sample_limit_process(LimitProcessSpec::from_atoms(2, {}), 12, 100000, opts(12));
    std::vector<double> counts;
    for (std::size_t t = 0; t < b.trials(); ++t) {
        int c = 0;
        for (unsigned k = 0; k < 12; ++k) c += b.at(t, k) <= 2.0;
        counts.push_back(c);
    }
    const auto m = moments_of(counts, 1);
    EXPECT_NEAR(m.mean, 1.0, 4 * m.mean_se);
    const double ratio = m.variance / m.mean;
    EXPECT_GE(ratio, 0.97);
    EXPECT_LE(ratio, 1.03);
}

TEST(LimitProcess, InvalidSpecs) {
    LimitProcessSpec empty;
    empty.q = 2;
    empty.background_coeff = 0.0;
    EXPECT_THROW(sample_limit_process(empty, 1, 10, opts(1)), InvalidSpec);
    EXPECT_THROW(sample_limit_process(LimitProcessSpec::from_atoms(2, {0.9, 0.9}), 1, 10, opts(1)), InvalidParams);
    EXPECT_THROW(sample_limit_process(LimitProcessSpec::from_atoms(2, {}), 0, 10, opts(1)), InvalidArgument);
}

TEST(EmbeddedContinuous, SingleUrnTwoColours) {
    const auto spec = UrnModelSpec::identical(ColorMix::uniform(2), RankedDistribution({1.0}));
    const auto b = sim_embedded_continuous(spec, 100000, opts(13));
    const auto ks = ks_against(b.scaled(1.0), [](double t) { return std::exp(-t / 2) * (2 - std::exp(-t / 2)); });
    EXPECT_TRUE(ks.pass) << ks.statistic;
}

TEST(EmbeddedContinuous, MatchesPrelimitOracle) {
    const auto d = make_uniform(100);
    const auto b = sim_embedded_continuous(UrnModelSpec::identical(ColorMix::uniform(2), d), 100000, opts(14));
    const auto ks = ks_against(b.scaled(1.0), [&](double t) { return survival_prelimit_exact(d, 2, t); });
    EXPECT_TRUE(ks.pass) << ks.statistic;
}

TEST(EmbeddedContinuous, GeneralSpecMatchesPrelimitOracle) {
    const UrnModelSpec spec(ColorMix({0.7, 0.2, 0.1}), {{0.5, 0.5, 0.0}, {0.0, 0.6, 0.4}, {0.2, 0.3, 0.5}});
    const auto b = sim_embedded_continuous(spec, 100000, opts(15));
    EXPECT_TRUE(ks_against(b.scaled(1.0), [&](double t) { return survival_prelimit_exact(spec, t); }).pass);
}

TEST(EmbeddedContinuous, DisjointSupportsRaiseRunaway) {
    const UrnModelSpec spec(ColorMix::uniform(2), {{1.0, 0.0}, {0.0, 1.0}});
    EXPECT_THROW(sim_embedded_continuous(spec, 10, opts(16)), RunawayTrial);
}

// The three routes to the first collision law agree for the uniform, sqrt-atom
// and log-atom families at n = 5e4.
class CrossLaw : public ::testing::TestWithParam<int> {};

TEST_P(CrossLaw, LimitProcessSimulationAndLawAgree) {
    const std::size_t n = 50000;
    const std::size_t trials = 50000;
    const double s2 = std::sqrt(2.0);
    RankedDistribution d = make_uniform(n);
    std::vector<double> atoms;
    if (GetParam() == 1) {
        d = make_sqrt_atom(n);
        atoms = {1 / s2};
    } else if (GetParam() == 2) {
        d = make_log_atom(n);
        atoms = {1.0};
    }
    LimitParams law;
    law.q = 2;
    law.psi = atoms;
    const SurvivalFn limit = [&](double r) { return survival_qcolor(law, r); };

    const auto process = sample_limit_process(LimitProcessSpec::from_atoms(2, atoms), 1, trials, opts(17)).scaled(1.0);
    const double s_n = scaling_of(d).s_n;
    const auto sim = sim_first_collision(UrnModelSpec::identical(ColorMix::uniform(2), d), trials, opts(18)).scaled(s_n);

    const auto process_vs_law = ks_against(process, limit);
    const auto sim_vs_law = ks_against(sim, limit);
    const auto sim_vs_process = ks_two_sample(sim, process);
    EXPECT_LE(process_vs_law.statistic, 0.02);
    EXPECT_LE(sim_vs_law.statistic, 0.02);
    EXPECT_LE(sim_vs_process.statistic, 0.02);
}

INSTANTIATE_TEST_SUITE_P(Families, CrossLaw, ::testing::Values(0, 1, 2));
