#pragma once

#include <filesystem>
#include <iosfwd>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fedfft/cli/config.hpp"

namespace fedfft::cli {

enum ExitCode : int {
    kExitOk = 0,
    kExitSelftestFailed = 1,
    kExitBadInput = 2,
    kExitRuntime = 3,
    kExitShapeMismatch = 4,
};

inline constexpr const char* kRoundCsvHeader =
    "round,repeat,aggregator,attack,fraction,decision,detector_score,accuracy,loss,wall_ms";

/// Reads FEDFFT_THREADS (unset or 0 = hardware concurrency). Throws
/// ConfigError on a malformed value.
std::size_t thread_budget();

struct RunSummary {
    std::vector<double> final_accuracy;  // one per repeat
    double mean = 0.0;
    double stddev = 0.0;
};

/// Runs `cfg.repeats` experiments (seed offsets 0..repeats-1 on both the task
/// and training seeds) and writes rounds.csv and summary.json into `dir`.
RunSummary run_and_write(const ExperimentConfig& cfg, const std::filesystem::path& dir, std::size_t threads);

int cmd_run(const std::filesystem::path& config_path, std::ostream& out, std::ostream& err);

struct SweepOptions {
    std::vector<double> fractions;
    std::vector<double> thresholds;
    std::vector<std::string> aggregators;  // empty = the config's aggregator
};

/// Fraction sweep: rows = attacker fraction, columns = aggregator.
/// Threshold sweep: rows = detector threshold, columns = attacker fraction,
/// aggregator fixed to dynamic. Cells are mean final accuracy.
int cmd_sweep(const std::filesystem::path& config_path, const SweepOptions& opts, std::ostream& out,
              std::ostream& err);

struct AggregateOptions {
    std::vector<std::filesystem::path> inputs;
    std::filesystem::path output;
    std::string method = "fedavg";
    std::size_t trim = 0;
    std::size_t krum_f = 0;
    std::string fft_strategy = "kde";
    bool include_dc = false;
    std::size_t grid_size = 256;
    double threshold = 0.02;
    std::uint64_t seed = 0;
};

int cmd_aggregate(const AggregateOptions& opts, std::ostream& out, std::ostream& err);

int cmd_ks_test(const std::filesystem::path& a, const std::filesystem::path& b, std::ostream& out, std::ostream& err);

int cmd_selftest(std::ostream& out, std::ostream& err);

}  // namespace fedfft::cli
