#include "fedfft/aggregators.hpp"

#include <algorithm>
#include <numeric>
#include <string>

namespace fedfft {

double median_of(std::vector<double> values) {
    if (values.empty()) throw Error(ErrorCode::EmptyVector, "median of an empty vector");
    const std::size_t k = values.size();
    const std::size_t mid = k / 2;
    std::nth_element(values.begin(), values.begin() + mid, values.end());
    const double upper = values[mid];
    if (k % 2 == 1) return upper;
    const double lower = *std::max_element(values.begin(), values.begin() + mid);
    return lower + (upper - lower) / 2.0;
}

double trimmed_mean_of(std::vector<double> values, std::size_t n) {
    if (2 * n >= values.size()) throw Error(ErrorCode::TrimTooLarge, "trim must satisfy 2n < K");
    std::sort(values.begin(), values.end());
    double sum = 0.0;
    for (std::size_t i = n; i < values.size() - n; ++i) sum += values[i];
    return sum / static_cast<double>(values.size() - 2 * n);
}

ModelWeights fed_avg(std::span<const ClientUpdate> updates) {
    validate_uniform(updates);
    double total = 0.0;
    for (const auto& u : updates) total += static_cast<double>(u.dataset_size);

    std::vector<double> share(updates.size());
    for (std::size_t k = 0; k < updates.size(); ++k) share[k] = static_cast<double>(updates[k].dataset_size) / total;

    return coordinate_wise(updates, [&](const CoordinateVector& v) {
        double acc = 0.0;
        for (std::size_t k = 0; k < v.values.size(); ++k) acc += share[k] * v.values[k];
        // rounding can push the sum just outside the hull; identical inputs must come back unchanged
        auto [lo, hi] = std::minmax_element(v.values.begin(), v.values.end());
        return std::clamp(acc, *lo, *hi);
    });
}

ModelWeights coordinate_median(std::span<const ClientUpdate> updates) {
    return coordinate_wise(updates, [](const CoordinateVector& v) { return median_of(v.values); });
}

ModelWeights trimmed_mean(std::span<const ClientUpdate> updates, TrimParam p) {
    validate_uniform(updates);
    if (2 * p.n >= updates.size()) {
        throw Error(ErrorCode::TrimTooLarge,
                    "trim " + std::to_string(p.n) + " too large for " + std::to_string(updates.size()) + " clients");
    }
    if (!p.weight_by_dataset) {
        return coordinate_wise(updates, [&](const CoordinateVector& v) { return trimmed_mean_of(v.values, p.n); });
    }

    std::vector<std::size_t> order(updates.size());
    return coordinate_wise(updates, [&](const CoordinateVector& v) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return v.values[a] < v.values[b]; });
        double acc = 0.0, mass = 0.0;
        for (std::size_t r = p.n; r < order.size() - p.n; ++r) {
            auto d = static_cast<double>(updates[order[r]].dataset_size);
            acc += d * v.values[order[r]];
            mass += d;
        }
        return acc / mass;
    });
}

KrumSelection krum_select(std::span<const ClientUpdate> updates, KrumParam p) {
    validate_uniform(updates);
    const std::size_t k = updates.size();
    if (k < p.f + 3) {
        throw Error(ErrorCode::TooFewClients,
                    "krum needs K - f - 2 >= 1 (K=" + std::to_string(k) + ", f=" + std::to_string(p.f) + ")");
    }
    const std::size_t neighbours = k - p.f - 2;

    std::vector<std::vector<double>> dist(k, std::vector<double>(k, 0.0));
    for (std::size_t a = 0; a < k; ++a) {
        for (std::size_t b = a + 1; b < k; ++b) {
            dist[a][b] = dist[b][a] = squared_distance(updates[a].weights, updates[b].weights);
        }
    }

    KrumSelection sel;
    sel.scores.resize(k);
    std::vector<double> row;
    for (std::size_t a = 0; a < k; ++a) {
        row.clear();
        for (std::size_t b = 0; b < k; ++b) {
            if (b != a) row.push_back(dist[a][b]);
        }
        std::partial_sort(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(neighbours), row.end());
        sel.scores[a] = std::accumulate(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(neighbours), 0.0);
    }
    sel.position = static_cast<std::size_t>(std::min_element(sel.scores.begin(), sel.scores.end()) - sel.scores.begin());
    return sel;
}

ModelWeights krum(std::span<const ClientUpdate> updates, KrumParam p) {
    return updates[krum_select(updates, p).position].weights;
}

}  // namespace fedfft
