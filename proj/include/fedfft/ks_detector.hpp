#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "fedfft/fft_aggregator.hpp"
#include "fedfft/tensor.hpp"

namespace fedfft {

struct KsResult {
    double statistic = 0.0;
    double p_value = 1.0;
};

enum class ScoreMode {
    DeviationFrequency,  // share of repetitions with p < reject_level
    MeanPValue,          // mean raw p-value
};

struct DetectorConfig {
    std::size_t repetitions = 10;  // C
    std::size_t subset_size = 5;   // S
    double reject_level = 0.05;
    double threshold = 0.02;
    ScoreMode score_mode = ScoreMode::DeviationFrequency;
    // Share of coordinates evaluated per call; 1 evaluates every (l, i).
    double coordinate_fraction = 1.0;

    void validate() const;
};

/// Two-sided sup |F_a(x) - F_b(x)| over all x, by merging the sorted samples.
double ks_statistic(std::span<const double> a, std::span<const double> b);

/// Kolmogorov tail Q(lambda) = 2 sum_{j>=1} (-1)^{j-1} exp(-2 j^2 lambda^2),
/// clamped to [0, 1].
double kolmogorov_q(double lambda);

/// Asymptotic p-value with the effective-size correction
/// lambda = (sqrt(ne) + 0.12 + 0.11 / sqrt(ne)) d, ne = n m / (n + m).
double ks_pvalue(double d, std::size_t n, std::size_t m);

KsResult ks_test(std::span<const double> a, std::span<const double> b);

struct CoordinateScore {
    CoordinateKey coordinate;
    double score = 0.0;
};

/// For each evaluated coordinate, repeats C times: split the coordinate
/// vector into a random S-subset and its complement, run the K-S test, and
/// score the repetitions per `cfg.score_mode`. Each coordinate draws from its
/// own substream of `seed`.
std::vector<CoordinateScore> mal_test(std::span<const ClientUpdate> updates, const DetectorConfig& cfg,
                                      std::uint64_t seed);

enum class Decision { FedAvg, FFT };

const char* to_string(Decision d);

struct DynamicResult {
    ModelWeights weights;
    Decision decision = Decision::FedAvg;
    double score = 0.0;
};

/// Mean mal_test score <= threshold aggregates with FedAvg, otherwise with
/// the FFT aggregator.
DynamicResult dynamic_aggregate(std::span<const ClientUpdate> updates, const DetectorConfig& cfg,
                                const FftStrategy& strategy, std::uint64_t seed);

}  // namespace fedfft
