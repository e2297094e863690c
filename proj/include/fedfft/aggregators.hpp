#pragma once

#include <cstddef>
#include <span>

#include "fedfft/tensor.hpp"

namespace fedfft {

struct TrimParam {
    std::size_t n = 0;  // values dropped from each end
    // Weight the retained values by dataset size instead of a plain mean.
    bool weight_by_dataset = false;
};

struct KrumParam {
    std::size_t f = 0;  // declared attacker count
};

/// Dataset-size weighted mean: sum_k (D_k / D) W^k.
ModelWeights fed_avg(std::span<const ClientUpdate> updates);

/// Even K takes the midpoint of the two central order statistics.
ModelWeights coordinate_median(std::span<const ClientUpdate> updates);

ModelWeights trimmed_mean(std::span<const ClientUpdate> updates, TrimParam p);

struct KrumSelection {
    std::size_t position = 0;  // index into the update list
    std::vector<double> scores;
};

/// Scores every update by the sum of squared L2 distances to its K - f - 2
/// nearest neighbours; lowest score wins, ties go to the lowest position.
KrumSelection krum_select(std::span<const ClientUpdate> updates, KrumParam p);
ModelWeights krum(std::span<const ClientUpdate> updates, KrumParam p);

// Scalar kernels, exposed for the CLI and the tests.
double median_of(std::vector<double> values);
double trimmed_mean_of(std::vector<double> values, std::size_t n);

}  // namespace fedfft
