#pragma once

// Slow reference computations used by the tests and `selftest`. Each one is
// written independently of the production path it is compared against.

#include <cstddef>
#include <span>
#include <vector>

#include "fedfft/adversary.hpp"
#include "fedfft/tensor.hpp"

namespace fedfft::oracle {

/// sup_x |F_a(x) - F_b(x)| by counting, for every candidate x, how many
/// values of each sample are <= x.
double ks_brute_force(std::span<const double> a, std::span<const double> b);

/// Krum by full pairwise scoring with explicitly flattened vectors and a full
/// sort per row. Returns the winning position (lowest on ties).
std::size_t krum_exhaustive(std::span<const ClientUpdate> updates, std::size_t f);

double trimmed_slice_mean(std::vector<double> values, std::size_t n);

/// Largest γ on a uniform grid of `points` over [0, 2 D / ||Θ^p||] that
/// satisfies the min-max constraint.
double gamma_grid_search(std::span<const ModelWeights> malicious, Perturbation kind, std::size_t points = 100000);

/// Direct-sum Gaussian KDE at the given points.
std::vector<double> kde_direct(std::span<const double> sample, std::span<const double> points, double bandwidth);

}  // namespace fedfft::oracle
