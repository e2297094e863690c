#include "fedfft/fft_aggregator.hpp"

#include <algorithm>
#include <cmath>

#include "fedfft/spectral.hpp"

namespace fedfft {

namespace {

constexpr double kBandwidthFloorRatio = 1.0 / 4096.0;
constexpr std::size_t kMaxSelectionGrid = std::size_t{1} << 16;

std::size_t lowest_index_of(std::span<const double> values, double target) {
    for (std::size_t k = 0; k < values.size(); ++k) {
        if (values[k] == target) return k;
    }
    return 0;
}

FftSelection select_literal(std::span<const double> values, bool include_dc) {
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const auto mag = magnitudes(fft(sorted));

    std::size_t first = (include_dc || mag.size() == 1) ? 0 : 1;
    std::size_t best = first;
    for (std::size_t k = first + 1; k < mag.size(); ++k) {
        if (mag[k] > mag[best]) best = k;
    }
    return {sorted[best], lowest_index_of(values, sorted[best])};
}

FftSelection select_kde(std::span<const double> values, std::size_t grid_size) {
    auto [min_it, max_it] = std::minmax_element(values.begin(), values.end());
    const double span = *max_it - *min_it;
    const double h = std::max(silverman_bandwidth(values), span * kBandwidthFloorRatio);

    const double extent = span + 6.0 * h;
    auto wanted = static_cast<std::size_t>(std::ceil(extent / (0.5 * h))) + 1;
    const std::size_t grid = std::clamp(wanted, std::max<std::size_t>(grid_size, 2), kMaxSelectionGrid);

    const auto est = kde_density(values, grid, h);
    const auto peak = static_cast<std::size_t>(std::max_element(est.density.begin(), est.density.end()) -
                                               est.density.begin());
    const double mode = est.grid[peak];

    std::size_t nearest = 0;
    for (std::size_t k = 1; k < values.size(); ++k) {
        if (std::abs(values[k] - mode) < std::abs(values[nearest] - mode)) nearest = k;
    }
    return {values[nearest], nearest};
}

}  // namespace

FftSelection fft_select(std::span<const double> values, const FftStrategy& s) {
    if (values.empty()) throw Error(ErrorCode::EmptyVector, "fft_select on an empty coordinate vector");
    auto [min_it, max_it] = std::minmax_element(values.begin(), values.end());
    if (*min_it == *max_it) return {values[0], 0};

    switch (s.kind) {
        case FftKind::Literal: return select_literal(values, s.include_dc);
        case FftKind::KdeMode: return select_kde(values, s.grid_size);
    }
    throw Error(ErrorCode::InvalidArgument, "unknown fft strategy");
}

ModelWeights fft_aggregate(std::span<const ClientUpdate> updates, const FftStrategy& s) {
    return coordinate_wise(updates, [&](const CoordinateVector& v) { return fft_select(v.values, s).value; });
}

}  // namespace fedfft
