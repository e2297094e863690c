#include <gtest/gtest.h>

#include <cmath>

#include "fedfft/ks_detector.hpp"
#include "fedfft/adversary.hpp"
#include "fedfft/oracles.hpp"
#include "helpers.hpp"

using namespace fedfft;
using fedfft::testing::error_code;
using fedfft::testing::normal_vector;
using fedfft::testing::vec;

namespace {

std::vector<ClientUpdate> gaussian_clients(std::uint64_t seed, std::size_t k, std::size_t dim) {
    auto rng = make_rng(seed, {});
    std::vector<ClientUpdate> out;
    for (std::size_t c = 0; c < k; ++c) out.emplace_back(c, vec(normal_vector(rng, dim)), 1);
    return out;
}

double mean_score(const std::vector<CoordinateScore>& s) {
    double total = 0.0;
    for (const auto& c : s) total += c.score;
    return total / static_cast<double>(s.size());
}

}  // namespace

TEST(KsStatistic, HandValues) {
    std::vector<double> a{1, 2, 3, 4}, b{2, 3, 4, 5}, c{0, 1}, d{10, 11};
    EXPECT_EQ(ks_statistic(a, a), 0.0);
    EXPECT_EQ(ks_statistic(c, d), 1.0);
    EXPECT_EQ(ks_statistic(a, b), 0.25);
    std::vector<double> none;
    EXPECT_EQ(error_code([&] { ks_statistic(none, a); }), ErrorCode::EmptySample);
}

TEST(KsStatistic, MatchesBruteForceOnIntegerGrid) {
    auto rng = make_rng(20, {});
    std::uniform_int_distribution<int> value(0, 4), size(1, 8);
    for (int t = 0; t < 3000; ++t) {
        std::vector<double> a(static_cast<std::size_t>(size(rng))), b(static_cast<std::size_t>(size(rng)));
        for (double& v : a) v = value(rng);
        for (double& v : b) v = value(rng);
        ASSERT_EQ(ks_statistic(a, b), oracle::ks_brute_force(a, b));
        ASSERT_EQ(ks_statistic(a, b), ks_statistic(b, a));
    }
}

TEST(KsStatistic, BoundedAndShiftInvariant) {
    auto rng = make_rng(21, {});
    for (int t = 0; t < 50; ++t) {
        auto a = normal_vector(rng, 13), b = normal_vector(rng, 7, 0.5);
        double d = ks_statistic(a, b);
        EXPECT_GE(d, 0.0);
        EXPECT_LE(d, 1.0);
        for (double& v : a) v = 2.0 * v + 5.0;
        for (double& v : b) v = 2.0 * v + 5.0;
        EXPECT_EQ(ks_statistic(a, b), d);
    }
}

TEST(KsPValue, LimitsAndCriticalValue) {
    EXPECT_EQ(ks_pvalue(0.0, 10, 10), 1.0);
    EXPECT_LT(ks_pvalue(1.0, 50, 50), 1e-10);
    EXPECT_NEAR(kolmogorov_q(1.358), 0.050, 0.002);
    EXPECT_EQ(kolmogorov_q(0.0), 1.0);
}

TEST(KsPValue, MonotoneInStatistic) {
    double prev = 1.0;
    for (double d = 0.0; d <= 1.0; d += 0.01) {
        double p = ks_pvalue(d, 12, 9);
        EXPECT_LE(p, prev + 1e-15);
        EXPECT_GE(p, 0.0);
        prev = p;
    }
    prev = 1.0;
    for (double lambda = 0.0; lambda < 4.0; lambda += 0.005) {
        double q = kolmogorov_q(lambda);
        EXPECT_LE(q, prev + 1e-12) << lambda;
        prev = q;
    }
}

TEST(KsPValue, BranchesAgreeAtSwitch) {
    EXPECT_NEAR(kolmogorov_q(1.18 - 1e-12), kolmogorov_q(1.18 + 1e-12), 1e-10);
}

TEST(KsTest, CombinesStatisticAndPValue) {
    std::vector<double> a{1, 2, 3}, b{4, 5, 6};
    auto r = ks_test(a, b);
    EXPECT_EQ(r.statistic, 1.0);
    EXPECT_DOUBLE_EQ(r.p_value, ks_pvalue(1.0, 3, 3));
}

TEST(MalTest, IdenticalClientsScoreZero) {
    std::vector<ClientUpdate> u;
    for (std::size_t c = 0; c < 10; ++c) u.emplace_back(c, vec({1, 2, 3}), 1);
    for (const auto& s : mal_test(u, {}, 3)) EXPECT_EQ(s.score, 0.0);
}

TEST(MalTest, BenignNullRate) {
    auto u = gaussian_clients(22, 20, 100);
    DetectorConfig cfg;
    EXPECT_LE(mean_score(mal_test(u, cfg, 5)), cfg.reject_level + 0.05);
}

TEST(MalTest, ConstantColludersStayNearNullRate) {
    // A random S-subset against its complement does not separate the two
    // populations: constant colluders only add ties, which lowers the
    // rejection rate.
    auto u = gaussian_clients(23, 20, 100);
    for (std::size_t c = 0; c < 6; ++c) u[c] = ClientUpdate(c, vec(std::vector<double>(100, 50.0)), 1);
    EXPECT_LE(mean_score(mal_test(u, {}, 5)), 0.10);
}

TEST(MalTest, DeterministicForSeed) {
    auto u = gaussian_clients(24, 12, 30);
    DetectorConfig cfg;
    cfg.subset_size = 4;
    auto a = mal_test(u, cfg, 9), b = mal_test(u, cfg, 9);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].score, b[i].score);
}

TEST(MalTest, CoordinateFractionSubsamples) {
    auto u = gaussian_clients(25, 10, 200);
    DetectorConfig cfg;
    cfg.coordinate_fraction = 0.1;
    EXPECT_EQ(mal_test(u, cfg, 1).size(), 20u);
}

TEST(MalTest, SubsetTooLarge) {
    auto u = gaussian_clients(26, 5, 3);
    EXPECT_EQ(error_code([&] { mal_test(u, {}, 1); }), ErrorCode::SubsetTooLarge);
}

TEST(MalTest, MeanPValueMode) {
    std::vector<ClientUpdate> u;
    for (std::size_t c = 0; c < 10; ++c) u.emplace_back(c, vec({1, 2}), 1);
    DetectorConfig cfg;
    cfg.score_mode = ScoreMode::MeanPValue;
    for (const auto& s : mal_test(u, cfg, 3)) EXPECT_EQ(s.score, 1.0);
}

TEST(DetectorConfig, Validation) {
    DetectorConfig bad;
    bad.repetitions = 0;
    EXPECT_EQ(error_code([&] { bad.validate(); }), ErrorCode::InvalidArgument);
    bad = {};
    bad.threshold = 1.5;
    EXPECT_EQ(error_code([&] { bad.validate(); }), ErrorCode::InvalidArgument);
    bad = {};
    bad.coordinate_fraction = 0.0;
    EXPECT_EQ(error_code([&] { bad.validate(); }), ErrorCode::InvalidArgument);
}

TEST(DynamicAggregate, IdenticalUpdatesUseFedAvg) {
    std::vector<ClientUpdate> u;
    for (std::size_t c = 0; c < 10; ++c) u.emplace_back(c, vec({0.5, -0.5}), 1);
    auto r = dynamic_aggregate(u, {}, FftStrategy::kde(), 1);
    EXPECT_EQ(r.decision, Decision::FedAvg);
    EXPECT_EQ(r.score, 0.0);
    EXPECT_EQ(r.weights, vec({0.5, -0.5}));
}

TEST(DynamicAggregate, RandomWeightAttackersChooseFft) {
    auto u = gaussian_clients(27, 20, 100);
    AttackSpec spec{AttackKind::RandomWeights, Perturbation::InverseUnitVector, 0.3};
    auto poisoned = apply_attack(u, spec, {0, 1, 2, 3, 4, 5}, 8);
    auto r = dynamic_aggregate(poisoned, {}, FftStrategy::kde(), 2);
    EXPECT_EQ(r.decision, Decision::FFT);
}

TEST(DynamicAggregate, ThresholdOneAlwaysFedAvg) {
    auto u = gaussian_clients(28, 20, 50);
    for (std::size_t c = 0; c < 6; ++c) u[c] = ClientUpdate(c, vec(std::vector<double>(50, 50.0)), 1);
    DetectorConfig cfg;
    cfg.threshold = 1.0;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        EXPECT_EQ(dynamic_aggregate(u, cfg, FftStrategy::kde(), seed).decision, Decision::FedAvg);
    }
}

TEST(Decision, Names) {
    EXPECT_STREQ(to_string(Decision::FedAvg), "fedavg");
    EXPECT_STREQ(to_string(Decision::FFT), "fft");
}
