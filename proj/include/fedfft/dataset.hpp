#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

namespace fedfft {

/// Gaussian-blob classification task split across clients.
struct SyntheticTask {
    std::size_t dim = 8;
    std::size_t classes = 4;
    std::size_t per_client = 200;
    std::size_t clients = 20;
    double dirichlet_alpha = std::numeric_limits<double>::infinity();  // inf = IID
    double noise_sigma = 0.5;
    std::uint64_t seed = 0;

    void validate() const;
};

struct Dataset {
    std::size_t dim = 0;
    std::vector<double> features;  // size() x dim, row-major
    std::vector<std::size_t> labels;

    std::size_t size() const noexcept { return labels.size(); }
    const double* row(std::size_t i) const { return features.data() + i * dim; }
};

struct ClientData {
    Dataset train;
    Dataset test;
};

struct TaskData {
    std::vector<std::vector<double>> centers;
    std::vector<ClientData> clients;
    Dataset global_test;
};

inline constexpr double kCenterRadius = 3.0;
inline constexpr std::size_t kGlobalTestSize = 1000;

/// Class centres on a sphere of radius 3; samples are centre + N(0, sigma^2 I).
/// IID labels deal a class-balanced pool uniformly to clients; finite alpha
/// draws each client's label mix from Dirichlet(alpha). Each client keeps the
/// first 80% of its samples for training.
TaskData gen_task(const SyntheticTask& task);

}  // namespace fedfft
