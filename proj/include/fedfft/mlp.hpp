#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "fedfft/dataset.hpp"
#include "fedfft/rng.hpp"
#include "fedfft/tensor.hpp"

namespace fedfft {

struct MlpShape {
    std::size_t input = 8;
    std::size_t hidden = 16;
    std::size_t output = 4;

    std::size_t parameter_count() const noexcept { return input * hidden + hidden + hidden * output + output; }
};

struct Evaluation {
    double accuracy = 0.0;
    double loss = 0.0;
};

/// One hidden ReLU layer, softmax output, cross-entropy loss.
///
/// Parameters live in one flat vector ordered W1 (input x hidden, row-major),
/// b1, W2 (hidden x output), b2; `weights()` exposes them as four layers in
/// that order.
class Mlp {
public:
    explicit Mlp(MlpShape shape);
    Mlp(MlpShape shape, const ModelWeights& weights);

    static Mlp glorot(MlpShape shape, Rng& rng);

    const MlpShape& shape() const noexcept { return shape_; }
    std::span<double> params() noexcept { return params_; }
    std::span<const double> params() const noexcept { return params_; }

    ModelWeights weights() const;
    void set_weights(const ModelWeights& w);

    std::vector<double> predict_proba(std::span<const double> x) const;

    /// Mean cross-entropy over `batch` (indices into `data`).
    double loss(const Dataset& data, std::span<const std::size_t> batch) const;

    /// Mean loss over `batch`; writes d(loss)/d(params) into `grad`.
    double loss_and_gradient(const Dataset& data, std::span<const std::size_t> batch, std::vector<double>& grad) const;

    Evaluation evaluate(const Dataset& data) const;

private:
    std::size_t w1() const noexcept { return 0; }
    std::size_t b1() const noexcept { return shape_.input * shape_.hidden; }
    std::size_t w2() const noexcept { return b1() + shape_.hidden; }
    std::size_t b2() const noexcept { return w2() + shape_.hidden * shape_.output; }

    // Fills hidden pre-activations and log-probabilities for one sample.
    void forward(const double* x, std::vector<double>& hidden_pre, std::vector<double>& log_probs) const;

    MlpShape shape_;
    std::vector<double> params_;
};

struct LocalTraining {
    std::size_t epochs = 2;
    std::size_t batch_size = 32;
    double learning_rate = 0.05;
};

/// E epochs of shuffled mini-batch SGD starting from `global`.
ClientUpdate local_update(const ModelWeights& global, const MlpShape& shape, const Dataset& train,
                          std::size_t client_id, const LocalTraining& cfg, Rng& rng);

/// Largest |a - b| / max(|a|, |b|, 1e-4) over paired entries.
double max_relative_error(std::span<const double> a, std::span<const double> b);

/// Backprop gradient against central finite differences over every parameter
/// on the whole of `data`; returns the largest relative error.
double grad_check(const Mlp& model, const Dataset& data, double step = 1e-5);

}  // namespace fedfft
