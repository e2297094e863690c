#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include "fedfft/experiment.hpp"

namespace fedfft::cli {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
    SyntheticTask task;
    TrainConfig train;
    std::size_t repeats = 5;
    std::filesystem::path output_dir = "out";
    // Off by default: wall-clock times would make the round CSV differ
    // between otherwise identical runs.
    bool record_wall_time = false;
};

/// Parses the JSON experiment document. Field names mirror the structs:
///   {"task": {...}, "train": {..., "aggregator": {...}, "attack": {...}},
///    "repeats": 5, "output_dir": "out", "record_wall_time": false}
/// Missing fields keep their defaults; unknown fields are rejected.
ExperimentConfig parse_experiment_config(const std::string& text);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

/// The fully resolved config (defaults expanded) as pretty-printed JSON.
std::string resolved_config_json(const ExperimentConfig& cfg);

/// Aggregator by short name: fedavg, median, trimmed_mean, krum, fft,
/// fft_literal, dynamic. trimmed_mean and krum follow the attacker count.
AggregatorSpec aggregator_from_name(const std::string& name, const AggregatorSpec& base = {});

std::string attack_name(AttackKind kind);

}  // namespace fedfft::cli
