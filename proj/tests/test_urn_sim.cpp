#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <sstream>
#include <vector>

#include "collide/dist_core.hpp"
#include "collide/errors.hpp"
#include "collide/stats_gof.hpp"
#include "collide/urn_sim.hpp"

using namespace collide;

namespace {

SimOptions opts(std::uint64_t seed, unsigned threads = 1) {
    SimOptions o;
    o.seed = seed;
    o.threads = threads;
    return o;
}

double mean_of(const TrialBatch& b, unsigned k = 0) {
    double s = 0;
    for (std::size_t t = 0; t < b.trials(); ++t) s += static_cast<double>(b.at(t, k));
    return s / static_cast<double>(b.trials());
}

// P(T > k) for k = 0..depth by enumerating every (colour, urn) sequence.
std::vector<double> enumerate_survival(const std::vector<double>& masses, int depth) {
    std::vector<double> surv(depth + 1, 0.0);
    std::vector<int> first(masses.size(), -1), mixed(masses.size(), 0);
    std::function<void(int, double)> walk = [&](int k, double prob) {
        surv[k] += prob;
        if (k == depth) return;
        for (int a = 0; a < 2; ++a) {
            for (std::size_t u = 0; u < masses.size(); ++u) {
                const bool collide = first[u] >= 0 && first[u] != a;
                if (collide) continue;
                const int saved = first[u];
                if (saved < 0) first[u] = a;
                walk(k + 1, prob * 0.5 * masses[u]);
                first[u] = saved;
            }
        }
    };
    walk(0, 1.0);
    return surv;
}

}  // namespace

TEST(UrnState, CountsPerColour) {
    UrnState s(3, 2);
    EXPECT_TRUE(s.counts(17).empty());
    for (std::uint64_t u = 0; u < 1000; ++u) s.add(u * 7919, static_cast<unsigned>(u % 3));
    EXPECT_EQ(s.occupied(), 1000u);
    const auto c = s.add(7919, 1);
    EXPECT_EQ(c[1], 2u);
    EXPECT_EQ(c[0], 0u);
    EXPECT_EQ(s.counts(7919 * 2)[2], 1u);
    s.clear();
    EXPECT_EQ(s.occupied(), 0u);
    EXPECT_THROW(s.add(1, 3), InvalidArgument);
}

TEST(RepeatTime, PointMassAlwaysTwo) {
    const auto b = sim_repeat_time(RankedDistribution({1.0}), 1000, opts(1));
    for (std::size_t t = 0; t < b.trials(); ++t) ASSERT_EQ(b.at(t), 2u);
}

TEST(RepeatTime, UniformTwoIsHalfHalf) {
    const std::size_t n = 100000;
    const auto b = sim_repeat_time(make_uniform(2), n, opts(2));
    std::size_t twos = 0;
    for (std::size_t t = 0; t < n; ++t) {
        ASSERT_TRUE(b.at(t) == 2 || b.at(t) == 3);
        twos += b.at(t) == 2;
    }
    EXPECT_LE(std::abs(static_cast<double>(twos) - n / 2.0), 4 * std::sqrt(n * 0.25));
}

TEST(RepeatTime, BirthdayMean) {
    // 1 + sum_{k>=1} prod_{j<k} (1 - j/365), summed exactly offline.
    const double exact = 24.616585894598852;
    const std::size_t n = 100000;
    const auto b = sim_repeat_time(make_uniform(365), n, opts(3));
    const auto m = moments_of(b.scaled(1.0), 1);
    EXPECT_LE(std::abs(m.mean - exact), 4 * m.mean_se);
}

TEST(FirstCollision, SingleUrnGeometric) {
    const auto spec = UrnModelSpec::identical(ColorMix::uniform(2), RankedDistribution({1.0}));
    const std::size_t n = 200000;
    const auto b = sim_first_collision(spec, n, opts(4));
    const auto m = moments_of(b.scaled(1.0), 1);
    EXPECT_LE(std::abs(m.mean - 3.0), 4 * m.mean_se);
    // P(T > k) = (1/2)^(k-1) for k >= 1.
    for (std::uint64_t k = 1; k <= 5; ++k) {
        std::size_t above = 0;
        for (std::size_t t = 0; t < n; ++t) above += b.at(t) > k;
        const double p = std::pow(0.5, static_cast<double>(k) - 1);
        EXPECT_LE(std::abs(static_cast<double>(above) / n - p), 4 * std::sqrt(p * (1 - p) / n) + 1e-12) << k;
    }
}

TEST(FirstCollision, DisjointSupportsRaiseRunaway) {
    const UrnModelSpec spec(ColorMix::uniform(2), {{0.5, 0.5, 0, 0}, {0, 0, 0.5, 0.5}});
    EXPECT_THROW(sim_first_collision(spec, 10, opts(5)), RunawayTrial);
}

TEST(FirstCollision, DrawCapRaisesRunaway) {
    const auto spec = UrnModelSpec::identical(ColorMix::uniform(2), make_uniform(1000));
    SimOptions o = opts(6);
    o.draw_cap = 3;
    try {
        sim_first_collision(spec, 100, o);
        FAIL() << "expected RunawayTrial";
    } catch (const RunawayTrial& e) {
        EXPECT_LT(e.trial(), 100u);
    }
}

TEST(FirstCollision, ExhaustiveEnumerationOracle) {
    const std::vector<double> masses{0.5, 0.3, 0.2};
    const auto surv = enumerate_survival(masses, 8);
    const auto spec = UrnModelSpec::identical(ColorMix::uniform(2), RankedDistribution(masses));
    const std::size_t n = 1000000;
    const auto b = sim_first_collision(spec, n, opts(7));
    for (std::uint64_t k = 1; k <= 8; ++k) {
        std::size_t above = 0;
        for (std::size_t t = 0; t < n; ++t) above += b.at(t) > k;
        const double p = surv[k];
        EXPECT_LE(std::abs(static_cast<double>(above) / n - p), 4 * std::sqrt(p * (1 - p) / n) + 1e-12) << k;
    }
}

TEST(FirstCollision, ExtraSmallUrnDoesNotShortenCollisions) {
    // Adding an urn of mass eps < 2/(n+1) lowers sum p^2, so E[T] should not drop.
    const std::size_t n = 50;
    std::vector<double> means, ses;
    for (double eps : {0.0, 0.005, 0.01, 0.02}) {
        std::vector<double> m(n, (1.0 - eps) / n);
        if (eps > 0) m.push_back(eps);
        const auto spec = UrnModelSpec::identical(ColorMix::uniform(2), RankedDistribution::from_unsorted(m));
        const auto s = moments_of(sim_first_collision(spec, 100000, opts(8)).scaled(1.0), 1);
        means.push_back(s.mean);
        ses.push_back(s.mean_se);
    }
    for (std::size_t i = 1; i < means.size(); ++i)
        EXPECT_GE(means[i], means[i - 1] - 3 * std::hypot(ses[i], ses[i - 1])) << i;
}

TEST(JointCollisions, StrictlyIncreasing) {
    const auto spec = UrnModelSpec::identical(ColorMix({0.7, 0.3}), make_uniform(200));
    const auto b = sim_joint_collisions(spec, 4, 2000, opts(9));
    ASSERT_EQ(b.width, 4u);
    for (std::size_t t = 0; t < b.trials(); ++t) {
        ASSERT_GE(b.at(t, 0), 2u);
        for (unsigned k = 1; k < 4; ++k) ASSERT_LT(b.at(t, k - 1), b.at(t, k));
    }
}

TEST(JointCollisions, FirstCoordinateMatchesFirstCollision) {
    const auto spec = UrnModelSpec::identical(ColorMix::uniform(2), make_uniform(1000));
    const auto joint = sim_joint_collisions(spec, 2, 100000, opts(10));
    const auto first = sim_first_collision(spec, 100000, opts(11));
    const auto ks = ks_two_sample(joint.scaled(1.0, 0), first.scaled(1.0));
    EXPECT_TRUE(ks.pass) << ks.statistic << " > " << ks.threshold();
    // Same streams give the same first coordinate.
    const auto same = sim_first_collision(spec, 1000, opts(10));
    for (std::size_t t = 0; t < 1000; ++t) ASSERT_EQ(same.at(t), joint.at(t, 0));
}

TEST(MfoldCollision, OneFoldIsFirstCollision) {
    const auto d = make_sqrt_atom(40);
    const auto a = sim_mfold_collision(d, 3, 1, 5000, opts(12));
    const auto b = sim_first_collision(UrnModelSpec::identical(ColorMix::uniform(3), d), 5000, opts(12));
    EXPECT_EQ(a.times, b.times);
}

TEST(MfoldCollision, SingleUrnTwoFoldMean) {
    // Chain on capped counts (c1, c2) absorbing at min >= 2: E[T] = 11/2.
    const std::size_t n = 200000;
    const auto b = sim_mfold_collision(RankedDistribution({1.0}), 2, 2, n, opts(13));
    const auto m = moments_of(b.scaled(1.0), 1);
    EXPECT_LE(std::abs(m.mean - 5.5), 4 * m.mean_se);
    for (std::size_t t = 0; t < n; ++t) ASSERT_GE(b.at(t), 4u);
}

TEST(MfoldCollision, RejectsBadArguments) {
    EXPECT_THROW(sim_mfold_collision(make_uniform(3), 1, 2, 10, opts(1)), InvalidArgument);
    EXPECT_THROW(sim_mfold_collision(make_uniform(3), 2, 0, 10, opts(1)), InvalidArgument);
    EXPECT_THROW(sim_repeat_time(make_uniform(3), 0, opts(1)), InvalidArgument);
}

TEST(Determinism, ThreadCountDoesNotMatter) {
    const auto spec = UrnModelSpec::identical(ColorMix({0.6, 0.4}), make_log_atom(5000));
    const auto a = sim_joint_collisions(spec, 3, 3000, opts(14, 1));
    const auto b = sim_joint_collisions(spec, 3, 3000, opts(14, 4));
    EXPECT_EQ(a.times, b.times);
    EXPECT_EQ(a.model_digest, b.model_digest);
}

TEST(Determinism, ChunkedRunsConcatenate) {
    const auto d = make_uniform(500);
    const auto full = sim_repeat_time(d, 1000, opts(15));
    SimOptions tail = opts(15);
    tail.first_trial = 600;
    const auto part = sim_repeat_time(d, 400, tail);
    for (std::size_t t = 0; t < 400; ++t) ASSERT_EQ(part.at(t), full.at(600 + t));
}

TEST(Determinism, DigestSeparatesModels) {
    EXPECT_NE(model_digest(make_uniform(10), "repeat"), model_digest(make_uniform(11), "repeat"));
    EXPECT_NE(model_digest(make_uniform(10), "repeat"), model_digest(make_uniform(10), "mfold"));
    EXPECT_EQ(model_digest(make_uniform(10), "repeat"), model_digest(make_uniform(10), "repeat"));
}

TEST(BatchIo, CsvAndJson) {
    const auto spec = UrnModelSpec::identical(ColorMix::uniform(2), make_uniform(50));
    const auto b = sim_joint_collisions(spec, 2, 3, opts(16));
    std::ostringstream csv;
    write_csv(csv, b);
    std::istringstream lines(csv.str());
    std::string line;
    std::getline(lines, line);
    EXPECT_EQ(line, "trial,k,time");
    std::getline(lines, line);
    EXPECT_EQ(line, "0,1," + std::to_string(b.at(0, 0)));
    std::getline(lines, line);
    EXPECT_EQ(line, "0,2," + std::to_string(b.at(0, 1)));
    const auto j = to_json(b);
    EXPECT_EQ(j["width"], 2);
    EXPECT_EQ(j["times"].size(), 3u);
    EXPECT_EQ(j["times"][2][1].get<std::uint64_t>(), b.at(2, 1));
}

TEST(BatchIo, StreamingMatchesSingleBatch) {
    const auto d = make_uniform(100);
    const SimOptions o = opts(17);
    std::ostringstream whole, streamed;
    write_csv(whole, sim_repeat_time(d, 1000, o));
    stream_csv(
        streamed, [&](std::uint64_t n, const SimOptions& so) { return sim_repeat_time(d, n, so); }, 1000, o, 128);
    EXPECT_EQ(whole.str(), streamed.str());
}
