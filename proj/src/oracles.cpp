#include "fedfft/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace fedfft::oracle {

double ks_brute_force(std::span<const double> a, std::span<const double> b) {
    std::vector<double> candidates(a.begin(), a.end());
    candidates.insert(candidates.end(), b.begin(), b.end());
    const auto n = static_cast<long long>(a.size());
    const auto m = static_cast<long long>(b.size());
    double best = 0.0;
    for (double x : candidates) {
        long long below_a = 0, below_b = 0;
        for (double v : a) below_a += v <= x;
        for (double v : b) below_b += v <= x;
        long long num = below_a * m - below_b * n;
        best = std::max(best, static_cast<double>(num < 0 ? -num : num) / static_cast<double>(n * m));
    }
    return best;
}

std::size_t krum_exhaustive(std::span<const ClientUpdate> updates, std::size_t f) {
    const std::size_t k = updates.size();
    std::vector<std::vector<double>> flat;
    for (const auto& u : updates) flat.push_back(u.weights.flatten());

    std::size_t best = 0;
    double best_score = 0.0;
    for (std::size_t a = 0; a < k; ++a) {
        std::vector<double> d;
        for (std::size_t b = 0; b < k; ++b) {
            if (a == b) continue;
            double s = 0.0;
            for (std::size_t i = 0; i < flat[a].size(); ++i) s += (flat[a][i] - flat[b][i]) * (flat[a][i] - flat[b][i]);
            d.push_back(s);
        }
        std::sort(d.begin(), d.end());
        double score = 0.0;
        for (std::size_t j = 0; j < k - f - 2; ++j) score += d[j];
        if (a == 0 || score < best_score) {
            best = a;
            best_score = score;
        }
    }
    return best;
}

double trimmed_slice_mean(std::vector<double> values, std::size_t n) {
    std::sort(values.begin(), values.end());
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = n; i + n < values.size(); ++i, ++count) sum += values[i];
    return sum / static_cast<double>(count);
}

double gamma_grid_search(std::span<const ModelWeights> malicious, Perturbation kind, std::size_t points) {
    std::vector<std::vector<double>> w;
    for (const auto& m : malicious) w.push_back(m.flatten());
    const std::size_t dim = w.front().size();

    std::vector<double> mean(dim, 0.0);
    for (const auto& v : w) {
        for (std::size_t i = 0; i < dim; ++i) mean[i] += v[i] / static_cast<double>(w.size());
    }
    auto dist = [&](const std::vector<double>& x, const std::vector<double>& y) {
        double s = 0.0;
        for (std::size_t i = 0; i < dim; ++i) s += (x[i] - y[i]) * (x[i] - y[i]);
        return std::sqrt(s);
    };
    double diameter = 0.0;
    for (const auto& x : w) {
        for (const auto& y : w) diameter = std::max(diameter, dist(x, y));
    }
    if (diameter == 0.0) return 0.0;

    const auto p = perturbation_vector(malicious, kind).flatten();
    double p_norm = 0.0;
    for (double v : p) p_norm += v * v;
    p_norm = std::sqrt(p_norm);
    const double upper = 2.0 * diameter / p_norm;

    double best = 0.0;
    std::vector<double> theta(dim);
    for (std::size_t g = 0; g <= points; ++g) {
        double gamma = upper * static_cast<double>(g) / static_cast<double>(points);
        for (std::size_t i = 0; i < dim; ++i) theta[i] = mean[i] + gamma * p[i];
        double worst = 0.0;
        for (const auto& x : w) worst = std::max(worst, dist(theta, x));
        if (worst <= diameter) best = gamma;
    }
    return best;
}

std::vector<double> kde_direct(std::span<const double> sample, std::span<const double> points, double bandwidth) {
    const double norm = 1.0 / (static_cast<double>(sample.size()) * bandwidth * std::sqrt(2.0 * std::numbers::pi));
    std::vector<double> out;
    out.reserve(points.size());
    for (double g : points) {
        double s = 0.0;
        for (double x : sample) {
            double z = (g - x) / bandwidth;
            s += std::exp(-0.5 * z * z);
        }
        out.push_back(s * norm);
    }
    return out;
}

}  // namespace fedfft::oracle
