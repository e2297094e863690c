#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "fedfft/adversary.hpp"
#include "fedfft/aggregators.hpp"
#include "fedfft/dataset.hpp"
#include "fedfft/fft_aggregator.hpp"
#include "fedfft/ks_detector.hpp"
#include "fedfft/mlp.hpp"

namespace fedfft {

enum class AggregatorKind { FedAvg, Median, TrimmedMean, Krum, FFT, Dynamic };

struct AggregatorSpec {
    AggregatorKind kind = AggregatorKind::FedAvg;
    TrimParam trim;
    KrumParam krum;
    // Trimmed mean / Krum take n = f = the true attacker count.
    bool match_attackers = false;
    FftStrategy fft;
    DetectorConfig detector;

    std::string name() const;
};

struct TrainConfig {
    std::size_t rounds = 30;
    std::size_t epochs = 2;
    std::size_t batch_size = 32;
    double learning_rate = 0.05;
    std::size_t hidden = 16;
    AggregatorSpec aggregator;
    AttackSpec attack;
    std::size_t attack_start_round = 1;  // first poisoned round (1-based)
    std::uint64_t seed = 0;

    void validate() const;
};

struct RoundRecord {
    std::size_t round = 0;  // 1-based
    std::optional<Decision> decision;
    std::optional<double> detector_score;
    double accuracy = 0.0;
    double loss = 0.0;
    std::int64_t wall_ms = 0;
    std::optional<std::size_t> selected_client;  // Krum only
    bool selected_attacker = false;
};

struct ExperimentResult {
    std::vector<RoundRecord> rounds;
    std::set<std::size_t> attackers;
    ModelWeights final_weights;
};

struct AggregationOutcome {
    ModelWeights weights;
    std::optional<Decision> decision;
    std::optional<double> score;
    std::optional<std::size_t> selected_client;
};

AggregationOutcome aggregate(std::span<const ClientUpdate> updates, const AggregatorSpec& spec,
                             std::size_t attacker_count, std::uint64_t seed);

/// Runs the federated loop of rounds: every client trains locally from the
/// current global model, attackers poison their submissions, the server
/// aggregates and the result is scored on the global test set.
///
/// `threads` caps the workers used for local training (0 = hardware
/// concurrency). Every random draw comes from a substream keyed by
/// (seed, round, client), so results do not depend on `threads`.
ExperimentResult run_experiment(const TrainConfig& cfg, const SyntheticTask& task, std::size_t threads = 1);

}  // namespace fedfft
