#pragma once

#include <cstddef>
#include <span>

#include "fedfft/tensor.hpp"

namespace fedfft {

enum class FftKind { Literal, KdeMode };

struct FftStrategy {
    FftKind kind = FftKind::KdeMode;
    bool include_dc = false;      // Literal only
    std::size_t grid_size = 256;  // KdeMode only

    static FftStrategy literal(bool include_dc = false) { return {FftKind::Literal, include_dc, 256}; }
    static FftStrategy kde(std::size_t grid_size = 256) { return {FftKind::KdeMode, false, grid_size}; }
};

struct FftSelection {
    double value = 0.0;
    std::size_t client = 0;  // position in the coordinate vector
};

/// Picks one submitted value out of a coordinate vector.
///
/// Literal: sort the values, take the FFT of the sorted vector, and use the
/// index of the largest-magnitude bin (bin 0 skipped unless include_dc) as an
/// index into the sorted values.
///
/// KdeMode: locate the maximum of an FFT-computed Gaussian KDE and return the
/// submitted value closest to it. The evaluation grid is refined to at most
/// h/2 spacing (`grid_size` is a lower bound) and the bandwidth is floored at
/// span/4096 so that a tight cluster next to far outliers stays resolvable.
///
/// All-equal vectors return (value, 0). Ties resolve to the lowest index.
FftSelection fft_select(std::span<const double> values, const FftStrategy& s);

ModelWeights fft_aggregate(std::span<const ClientUpdate> updates, const FftStrategy& s);

}  // namespace fedfft
