#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include "fedfft/aggregators.hpp"
#include "fedfft/fft_aggregator.hpp"
#include "fedfft/oracles.hpp"
#include "helpers.hpp"

using namespace fedfft;
using fedfft::testing::error_code;
using fedfft::testing::normal_vector;
using fedfft::testing::scalar_clients;
using fedfft::testing::vec;

namespace {

std::vector<ClientUpdate> random_clients(Rng& rng, std::size_t k, std::size_t dim) {
    std::vector<ClientUpdate> out;
    std::uniform_int_distribution<std::size_t> size(1, 50);
    for (std::size_t c = 0; c < k; ++c) out.emplace_back(c, vec(normal_vector(rng, dim)), size(rng));
    return out;
}

double only(const ModelWeights& w) { return w.at(0, 0); }

}  // namespace

TEST(FedAvg, IdenticalUpdates) {
    std::vector<ClientUpdate> u{{0, vec({0.1, 0.7}), 3}, {1, vec({0.1, 0.7}), 9}, {2, vec({0.1, 0.7}), 1}};
    EXPECT_EQ(fed_avg(u), vec({0.1, 0.7}));
}

TEST(FedAvg, WeightedHandValue) {
    std::vector<ClientUpdate> u{{0, vec({0, 0}), 1}, {1, vec({4, 8}), 3}};
    auto w = fed_avg(u);
    EXPECT_DOUBLE_EQ(w.at(0, 0), 3.0);
    EXPECT_DOUBLE_EQ(w.at(0, 1), 6.0);
}

TEST(FedAvg, EqualSizesIsPlainMean) {
    auto rng = make_rng(10, {});
    std::vector<ClientUpdate> u;
    for (std::size_t c = 0; c < 9; ++c) u.emplace_back(c, vec(normal_vector(rng, 5)), 4);
    auto w = fed_avg(u);
    for (std::size_t i = 0; i < 5; ++i) {
        double mean = 0.0;
        for (const auto& x : u) mean += x.weights.at(0, i);
        EXPECT_NEAR(w.at(0, i), mean / 9.0, 1e-12);
    }
}

TEST(FedAvg, EmptyAndMismatched) {
    EXPECT_EQ(error_code([] { fed_avg({}); }), ErrorCode::EmptyUpdateSet);
    std::vector<ClientUpdate> u{{0, vec({1}), 1}, {1, vec({1, 2}), 1}};
    EXPECT_EQ(error_code([&] { fed_avg(u); }), ErrorCode::ShapeMismatch);
}

TEST(Median, OddEvenAndIdentical) {
    EXPECT_EQ(only(coordinate_median(scalar_clients({1, 2, 100}))), 2.0);
    EXPECT_EQ(only(coordinate_median(scalar_clients({1, 3}))), 2.0);
    EXPECT_EQ(only(coordinate_median(scalar_clients({4.25, 4.25, 4.25, 4.25}))), 4.25);
    EXPECT_EQ(median_of({5, -1, 3, 9}), 4.0);
}

TEST(TrimmedMean, HandValues) {
    EXPECT_DOUBLE_EQ(only(trimmed_mean(scalar_clients({0, 1, 2, 3, 100}), {1})), 2.0);
    EXPECT_DOUBLE_EQ(only(trimmed_mean(scalar_clients({-9, 0, 1, 2, 9}), {2})), 1.0);
    EXPECT_EQ(error_code([] { trimmed_mean(scalar_clients({1, 2, 3, 4}), {2}); }), ErrorCode::TrimTooLarge);
}

TEST(TrimmedMean, NoTrimIsUnweightedMean) {
    auto rng = make_rng(11, {});
    auto u = random_clients(rng, 7, 4);
    auto w = trimmed_mean(u, {0});
    for (std::size_t i = 0; i < 4; ++i) {
        double mean = 0.0;
        for (const auto& x : u) mean += x.weights.at(0, i) / 7.0;
        EXPECT_NEAR(w.at(0, i), mean, 1e-12);
    }
}

TEST(TrimmedMean, MatchesSliceOracle) {
    auto rng = make_rng(12, {});
    std::uniform_int_distribution<std::size_t> kpick(1, 15);
    for (int t = 0; t < 300; ++t) {
        std::size_t k = kpick(rng);
        std::uniform_int_distribution<std::size_t> npick(0, (k - 1) / 2);
        std::size_t n = npick(rng);
        auto values = normal_vector(rng, k);
        EXPECT_NEAR(trimmed_mean_of(values, n), oracle::trimmed_slice_mean(values, n), 1e-12);
    }
}

TEST(Krum, HandExample) {
    auto sel = krum_select(scalar_clients({0, 1, 2, 10}), {1});
    EXPECT_EQ(sel.position, 0u);
    EXPECT_EQ(sel.scores, (std::vector<double>{1, 1, 1, 64}));
}

TEST(Krum, IdenticalPicksFirst) {
    EXPECT_EQ(krum_select(scalar_clients({3, 3, 3, 3}), {1}).position, 0u);
}

TEST(Krum, TooFewClients) {
    EXPECT_EQ(error_code([] { krum(scalar_clients({1, 2, 3}), {1}); }), ErrorCode::TooFewClients);
    EXPECT_NO_THROW(krum(scalar_clients({1, 2, 3}), {0}));
}

TEST(Krum, MatchesExhaustiveOracle) {
    auto rng = make_rng(13, {});
    std::uniform_int_distribution<std::size_t> kpick(3, 7), dpick(1, 4);
    for (int t = 0; t < 300; ++t) {
        std::size_t k = kpick(rng);
        std::uniform_int_distribution<std::size_t> fpick(0, k - 3);
        auto u = random_clients(rng, k, dpick(rng));
        std::size_t f = fpick(rng);
        EXPECT_EQ(krum_select(u, {f}).position, oracle::krum_exhaustive(u, f));
    }
}

TEST(AggregatorProperty, PermutationInvariance) {
    auto rng = make_rng(14, {});
    for (int t = 0; t < 20; ++t) {
        auto u = random_clients(rng, 9, 6);
        auto p = u;
        std::shuffle(p.begin(), p.end(), rng);
        EXPECT_EQ(coordinate_median(u), coordinate_median(p));
        EXPECT_EQ(trimmed_mean(u, {2}), trimmed_mean(p, {2}));
        EXPECT_EQ(fft_aggregate(u, FftStrategy::kde()), fft_aggregate(p, FftStrategy::kde()));
        EXPECT_EQ(fft_aggregate(u, FftStrategy::literal()), fft_aggregate(p, FftStrategy::literal()));
        auto a = fed_avg(u).flatten(), b = fed_avg(p).flatten();
        for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-12);
    }
}

TEST(AggregatorProperty, OutputWithinBenignRange) {
    // 3 of 10 clients at an arbitrarily large value
    auto rng = make_rng(15, {});
    auto u = random_clients(rng, 10, 8);
    for (std::size_t c = 0; c < 3; ++c) u[c] = ClientUpdate(c, vec(std::vector<double>(8, 1e6)), 1);
    for (const auto& w : {coordinate_median(u), trimmed_mean(u, {3}), krum(u, {3})}) {
        for (std::size_t i = 0; i < 8; ++i) {
            double lo = 1e300, hi = -1e300;
            for (std::size_t c = 3; c < 10; ++c) {
                lo = std::min(lo, u[c].weights.at(0, i));
                hi = std::max(hi, u[c].weights.at(0, i));
            }
            EXPECT_GE(w.at(0, i), lo);
            EXPECT_LE(w.at(0, i), hi);
        }
    }
}

TEST(FftSelect, UnanimousClients) {
    std::vector<double> v{2.5, 2.5, 2.5, 2.5};
    for (auto s : {FftStrategy::kde(), FftStrategy::literal(), FftStrategy::literal(true)}) {
        auto sel = fft_select(v, s);
        EXPECT_EQ(sel.value, 2.5);
        EXPECT_EQ(sel.client, 0u);
    }
}

TEST(FftSelect, LiteralHandExample) {
    std::vector<double> v{3, 1, 4, 2};
    auto sel = fft_select(v, FftStrategy::literal());
    EXPECT_EQ(sel.value, 2.0);
    EXPECT_EQ(sel.client, 3u);
    EXPECT_EQ(fft_select(v, FftStrategy::literal(true)).value, 1.0);
}

TEST(FftSelect, KdeFindsBenignCluster) {
    std::vector<double> v{0.0, 0.01, -0.01, 0.005, -0.005, 0.002, -0.002, 0.008, -0.008, 50.0};
    auto sel = fft_select(v, FftStrategy::kde());
    EXPECT_GE(sel.value, -0.01);
    EXPECT_LE(sel.value, 0.01);
    EXPECT_EQ(sel.value, v[sel.client]);
}

TEST(FftSelect, EmptyVector) {
    std::vector<double> none;
    EXPECT_EQ(error_code([&] { fft_select(none, FftStrategy::kde()); }), ErrorCode::EmptyVector);
}

TEST(FftAggregate, IdenticalAndSingle) {
    std::vector<ClientUpdate> same{{0, vec({1, -2}), 1}, {1, vec({1, -2}), 5}, {2, vec({1, -2}), 2}};
    EXPECT_EQ(fft_aggregate(same, FftStrategy::kde()), vec({1, -2}));
    std::vector<ClientUpdate> one{{4, vec({0.3, 0.4}), 1}};
    EXPECT_EQ(fft_aggregate(one, FftStrategy::kde()), vec({0.3, 0.4}));
    EXPECT_EQ(fft_aggregate(one, FftStrategy::literal()), vec({0.3, 0.4}));
}

TEST(FftAggregate, IgnoresConstantColluders) {
    auto rng = make_rng(16, {});
    std::vector<ClientUpdate> u;
    for (std::size_t c = 0; c < 14; ++c) u.emplace_back(c, vec(normal_vector(rng, 50, 0.0, 0.01)), 1);
    for (std::size_t c = 14; c < 20; ++c) u.emplace_back(c, vec(std::vector<double>(50, 10.0)), 1);
    auto w = fft_aggregate(u, FftStrategy::kde());
    for (std::size_t i = 0; i < 50; ++i) {
        double lo = 1e300, hi = -1e300;
        for (std::size_t c = 0; c < 14; ++c) {
            lo = std::min(lo, u[c].weights.at(0, i));
            hi = std::max(hi, u[c].weights.at(0, i));
        }
        EXPECT_GE(w.at(0, i), lo);
        EXPECT_LE(w.at(0, i), hi);
    }
}

TEST(FftAggregate, OutputIsAlwaysSomeClientsValue) {
    auto rng = make_rng(17, {});
    auto u = random_clients(rng, 8, 12);
    for (auto s : {FftStrategy::kde(), FftStrategy::literal()}) {
        auto w = fft_aggregate(u, s);
        for (std::size_t i = 0; i < 12; ++i) {
            bool found = std::any_of(u.begin(), u.end(), [&](const ClientUpdate& c) { return c.weights.at(0, i) == w.at(0, i); });
            EXPECT_TRUE(found);
        }
    }
}
