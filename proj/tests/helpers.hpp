#pragma once

#include <optional>
#include <random>
#include <vector>

#include "fedfft/error.hpp"
#include "fedfft/rng.hpp"
#include "fedfft/tensor.hpp"

namespace fedfft::testing {

template <typename F>
std::optional<ErrorCode> error_code(F&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    return std::nullopt;
}

inline ModelWeights vec(std::vector<double> v) {
    const std::size_t n = v.size();
    return ModelWeights({Layer{TensorShape{n}, std::move(v)}});
}

inline std::vector<ClientUpdate> scalar_clients(const std::vector<double>& values) {
    std::vector<ClientUpdate> out;
    for (std::size_t k = 0; k < values.size(); ++k) out.emplace_back(k, vec({values[k]}), 1);
    return out;
}

inline std::vector<double> normal_vector(Rng& rng, std::size_t n, double mean = 0.0, double sd = 1.0) {
    std::normal_distribution<double> d(mean, sd);
    std::vector<double> v(n);
    for (double& x : v) x = d(rng);
    return v;
}

}  // namespace fedfft::testing
