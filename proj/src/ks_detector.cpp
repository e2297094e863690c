#include "fedfft/ks_detector.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "fedfft/aggregators.hpp"
#include "fedfft/rng.hpp"

namespace fedfft {

namespace {

// |i/n - j/m| as a single rounding of an exact integer ratio.
double ecdf_gap(std::size_t i, std::size_t n, std::size_t j, std::size_t m) {
    auto num = static_cast<long long>(i * m) - static_cast<long long>(j * n);
    return static_cast<double>(num < 0 ? -num : num) / static_cast<double>(n * m);
}

// Statistic between the marked members of `values` and the rest, given the
// value order once up front.
double split_statistic(const std::vector<double>& values, const std::vector<std::size_t>& order,
                       const std::vector<char>& in_subset, std::size_t n, std::size_t m) {
    std::size_t i = 0, j = 0;
    double best = 0.0;
    for (std::size_t r = 0; r < order.size(); ++r) {
        if (in_subset[order[r]]) ++i; else ++j;
        if (r + 1 < order.size() && values[order[r + 1]] == values[order[r]]) continue;
        best = std::max(best, ecdf_gap(i, n, j, m));
    }
    return best;
}

std::vector<CoordinateKey> pick_coordinates(const ModelWeights& ref, double fraction, std::uint64_t seed) {
    std::vector<CoordinateKey> all;
    all.reserve(ref.parameter_count());
    for (std::size_t l = 0; l < ref.num_layers(); ++l) {
        for (std::size_t i = 0; i < ref.layer(l).data.size(); ++i) all.push_back({l, i});
    }
    if (fraction >= 1.0) return all;

    auto count = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(all.size())));
    count = std::clamp<std::size_t>(count, 1, all.size());
    auto rng = make_rng(seed, {tag("coordinates")});
    for (std::size_t k = 0; k < count; ++k) {
        std::uniform_int_distribution<std::size_t> pick(k, all.size() - 1);
        std::swap(all[k], all[pick(rng)]);
    }
    all.resize(count);
    std::sort(all.begin(), all.end());
    return all;
}

}  // namespace

void DetectorConfig::validate() const {
    if (repetitions == 0) throw Error(ErrorCode::InvalidArgument, "detector repetitions must be >= 1");
    if (subset_size == 0) throw Error(ErrorCode::InvalidArgument, "detector subset size must be >= 1");
    if (!(reject_level > 0.0 && reject_level < 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "reject_level must lie in (0, 1)");
    }
    if (!(threshold >= 0.0 && threshold <= 1.0)) throw Error(ErrorCode::InvalidArgument, "threshold must lie in [0, 1]");
    if (!(coordinate_fraction > 0.0 && coordinate_fraction <= 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "coordinate_fraction must lie in (0, 1]");
    }
}

double ks_statistic(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw Error(ErrorCode::EmptySample, "ks_statistic needs two non-empty samples");
    std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());

    std::size_t i = 0, j = 0;
    double best = 0.0;
    while (i < x.size() || j < y.size()) {
        double v;
        if (j == y.size() || (i < x.size() && x[i] <= y[j])) v = x[i]; else v = y[j];
        while (i < x.size() && x[i] == v) ++i;
        while (j < y.size() && y[j] == v) ++j;
        best = std::max(best, ecdf_gap(i, x.size(), j, y.size()));
    }
    return best;
}

double kolmogorov_q(double lambda) {
    if (!(lambda > 0.0)) return 1.0;
    double q;
    if (lambda < 1.18) {
        // Same function written as a theta series; the alternating form
        // converges too slowly near zero.
        const double pi2 = std::numbers::pi * std::numbers::pi;
        double cdf_sum = 0.0;
        for (int j = 1; j < 100; ++j) {
            double odd = 2.0 * j - 1.0;
            double term = std::exp(-odd * odd * pi2 / (8.0 * lambda * lambda));
            cdf_sum += term;
            if (term < 1e-12 * cdf_sum || term == 0.0) break;
        }
        q = 1.0 - std::sqrt(2.0 * std::numbers::pi) / lambda * cdf_sum;
    } else {
        q = 0.0;
        double sign = 1.0;
        for (int j = 1; j < 100; ++j) {
            double term = 2.0 * std::exp(-2.0 * j * j * lambda * lambda);
            q += sign * term;
            if (term < 1e-12) break;
            sign = -sign;
        }
    }
    return std::clamp(q, 0.0, 1.0);
}

double ks_pvalue(double d, std::size_t n, std::size_t m) {
    if (n == 0 || m == 0) throw Error(ErrorCode::EmptySample, "ks_pvalue needs positive sample sizes");
    const double ne = static_cast<double>(n) * static_cast<double>(m) / static_cast<double>(n + m);
    const double root = std::sqrt(ne);
    return kolmogorov_q((root + 0.12 + 0.11 / root) * d);
}

KsResult ks_test(std::span<const double> a, std::span<const double> b) {
    double d = ks_statistic(a, b);
    return {d, ks_pvalue(d, a.size(), b.size())};
}

std::vector<CoordinateScore> mal_test(std::span<const ClientUpdate> updates, const DetectorConfig& cfg,
                                      std::uint64_t seed) {
    cfg.validate();
    validate_uniform(updates);
    const std::size_t k = updates.size();
    if (cfg.subset_size >= k) {
        throw Error(ErrorCode::SubsetTooLarge, "subset size " + std::to_string(cfg.subset_size) +
                                                   " must be below the client count " + std::to_string(k));
    }
    const std::size_t n = cfg.subset_size;
    const std::size_t m = k - n;

    const auto coords = pick_coordinates(updates.front().weights, cfg.coordinate_fraction, seed);
    std::vector<CoordinateScore> scores;
    scores.reserve(coords.size());

    std::vector<double> values(k);
    std::vector<std::size_t> order(k), perm(k);
    std::vector<char> in_subset(k);
    for (const auto& c : coords) {
        for (std::size_t q = 0; q < k; ++q) values[q] = updates[q].weights.layer(c.layer).data[c.index];
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return values[a] < values[b]; });

        auto rng = make_rng(seed, {c.layer, c.index});
        double acc = 0.0;
        for (std::size_t rep = 0; rep < cfg.repetitions; ++rep) {
            std::iota(perm.begin(), perm.end(), std::size_t{0});
            std::fill(in_subset.begin(), in_subset.end(), 0);
            for (std::size_t s = 0; s < n; ++s) {
                std::uniform_int_distribution<std::size_t> pick(s, k - 1);
                std::swap(perm[s], perm[pick(rng)]);
                in_subset[perm[s]] = 1;
            }
            double p = ks_pvalue(split_statistic(values, order, in_subset, n, m), n, m);
            acc += cfg.score_mode == ScoreMode::DeviationFrequency ? (p < cfg.reject_level ? 1.0 : 0.0) : p;
        }
        scores.push_back({c, acc / static_cast<double>(cfg.repetitions)});
    }
    return scores;
}

const char* to_string(Decision d) {
    return d == Decision::FedAvg ? "fedavg" : "fft";
}

DynamicResult dynamic_aggregate(std::span<const ClientUpdate> updates, const DetectorConfig& cfg,
                                const FftStrategy& strategy, std::uint64_t seed) {
    const auto scores = mal_test(updates, cfg, seed);
    double total = 0.0;
    for (const auto& s : scores) total += s.score;
    const double score = scores.empty() ? 0.0 : total / static_cast<double>(scores.size());

    if (score <= cfg.threshold) return {fed_avg(updates), Decision::FedAvg, score};
    return {fft_aggregate(updates, strategy), Decision::FFT, score};
}

}  // namespace fedfft
