#include "fedfft/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fedfft/adversary.hpp"

namespace fedfft {

Mlp::Mlp(MlpShape shape) : shape_(shape), params_(shape.parameter_count(), 0.0) {
    if (shape.input == 0 || shape.hidden == 0 || shape.output < 2) {
        throw Error(ErrorCode::InvalidArgument, "mlp needs input, hidden >= 1 and output >= 2");
    }
}

Mlp::Mlp(MlpShape shape, const ModelWeights& weights) : Mlp(shape) { set_weights(weights); }

Mlp Mlp::glorot(MlpShape shape, Rng& rng) {
    Mlp model(shape);
    // Same initializer the random-weights attacker uses.
    model.set_weights(random_weights(model.weights(), rng));
    return model;
}

ModelWeights Mlp::weights() const {
    auto slice = [&](std::size_t from, std::size_t count) {
        return std::vector<double>(params_.begin() + static_cast<std::ptrdiff_t>(from),
                                   params_.begin() + static_cast<std::ptrdiff_t>(from + count));
    };
    return ModelWeights({
        Layer{TensorShape{shape_.input, shape_.hidden}, slice(w1(), shape_.input * shape_.hidden)},
        Layer{TensorShape{shape_.hidden}, slice(b1(), shape_.hidden)},
        Layer{TensorShape{shape_.hidden, shape_.output}, slice(w2(), shape_.hidden * shape_.output)},
        Layer{TensorShape{shape_.output}, slice(b2(), shape_.output)},
    });
}

void Mlp::set_weights(const ModelWeights& w) {
    if (!w.same_shape(weights())) throw Error(ErrorCode::ShapeMismatch, "weights do not fit the mlp shape");
    params_ = w.flatten();
}

void Mlp::forward(const double* x, std::vector<double>& hidden_pre, std::vector<double>& log_probs) const {
    const auto& s = shape_;
    hidden_pre.assign(params_.begin() + static_cast<std::ptrdiff_t>(b1()),
                      params_.begin() + static_cast<std::ptrdiff_t>(b1() + s.hidden));
    for (std::size_t i = 0; i < s.input; ++i) {
        const double xi = x[i];
        const double* row = params_.data() + w1() + i * s.hidden;
        for (std::size_t j = 0; j < s.hidden; ++j) hidden_pre[j] += xi * row[j];
    }

    log_probs.assign(params_.begin() + static_cast<std::ptrdiff_t>(b2()),
                     params_.begin() + static_cast<std::ptrdiff_t>(b2() + s.output));
    for (std::size_t j = 0; j < s.hidden; ++j) {
        const double a = std::max(0.0, hidden_pre[j]);
        if (a == 0.0) continue;
        const double* row = params_.data() + w2() + j * s.output;
        for (std::size_t k = 0; k < s.output; ++k) log_probs[k] += a * row[k];
    }

    const double peak = *std::max_element(log_probs.begin(), log_probs.end());
    double norm = 0.0;
    for (double z : log_probs) norm += std::exp(z - peak);
    const double log_norm = peak + std::log(norm);
    for (double& z : log_probs) z -= log_norm;
}

std::vector<double> Mlp::predict_proba(std::span<const double> x) const {
    if (x.size() != shape_.input) throw Error(ErrorCode::ShapeMismatch, "input width does not match the mlp");
    std::vector<double> hidden, out;
    forward(x.data(), hidden, out);
    for (double& v : out) v = std::exp(v);
    return out;
}

double Mlp::loss(const Dataset& data, std::span<const std::size_t> batch) const {
    std::vector<double> hidden, log_probs;
    double total = 0.0;
    for (auto idx : batch) {
        forward(data.row(idx), hidden, log_probs);
        total -= log_probs[data.labels[idx]];
    }
    return total / static_cast<double>(batch.size());
}

double Mlp::loss_and_gradient(const Dataset& data, std::span<const std::size_t> batch, std::vector<double>& grad) const {
    const auto& s = shape_;
    grad.assign(params_.size(), 0.0);
    std::vector<double> hidden, log_probs, delta_out(s.output), delta_hidden(s.hidden);
    double total = 0.0;

    for (auto idx : batch) {
        const double* x = data.row(idx);
        const auto label = data.labels[idx];
        forward(x, hidden, log_probs);
        total -= log_probs[label];

        for (std::size_t k = 0; k < s.output; ++k) delta_out[k] = std::exp(log_probs[k]) - (k == label ? 1.0 : 0.0);
        for (std::size_t k = 0; k < s.output; ++k) grad[b2() + k] += delta_out[k];

        for (std::size_t j = 0; j < s.hidden; ++j) {
            const double a = std::max(0.0, hidden[j]);
            const double* row = params_.data() + w2() + j * s.output;
            double back = 0.0;
            for (std::size_t k = 0; k < s.output; ++k) {
                grad[w2() + j * s.output + k] += a * delta_out[k];
                back += row[k] * delta_out[k];
            }
            delta_hidden[j] = hidden[j] > 0.0 ? back : 0.0;
            grad[b1() + j] += delta_hidden[j];
        }
        for (std::size_t i = 0; i < s.input; ++i) {
            double* row = grad.data() + w1() + i * s.hidden;
            for (std::size_t j = 0; j < s.hidden; ++j) row[j] += x[i] * delta_hidden[j];
        }
    }

    const double inv = 1.0 / static_cast<double>(batch.size());
    for (double& g : grad) g *= inv;
    return total * inv;
}

Evaluation Mlp::evaluate(const Dataset& data) const {
    if (data.size() == 0) return {};
    std::vector<double> hidden, log_probs;
    std::size_t correct = 0;
    double total = 0.0;
    for (std::size_t n = 0; n < data.size(); ++n) {
        forward(data.row(n), hidden, log_probs);
        total -= log_probs[data.labels[n]];
        auto predicted = static_cast<std::size_t>(std::max_element(log_probs.begin(), log_probs.end()) - log_probs.begin());
        if (predicted == data.labels[n]) ++correct;
    }
    return {static_cast<double>(correct) / static_cast<double>(data.size()), total / static_cast<double>(data.size())};
}

ClientUpdate local_update(const ModelWeights& global, const MlpShape& shape, const Dataset& train,
                          std::size_t client_id, const LocalTraining& cfg, Rng& rng) {
    if (train.size() == 0) throw Error(ErrorCode::InvalidArgument, "client has no training data");
    if (cfg.batch_size == 0) throw Error(ErrorCode::InvalidArgument, "batch size must be >= 1");
    Mlp model(shape, global);
    std::vector<std::size_t> order(train.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<double> grad;

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            auto count = std::min(cfg.batch_size, order.size() - start);
            model.loss_and_gradient(train, std::span(order).subspan(start, count), grad);
            auto p = model.params();
            for (std::size_t q = 0; q < p.size(); ++q) p[q] -= cfg.learning_rate * grad[q];
        }
    }
    return ClientUpdate(client_id, model.weights(), train.size());
}

double max_relative_error(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw Error(ErrorCode::ShapeMismatch, "gradient arrays differ in length");
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double denom = std::max({std::abs(a[i]), std::abs(b[i]), 1e-4});
        worst = std::max(worst, std::abs(a[i] - b[i]) / denom);
    }
    return worst;
}

double grad_check(const Mlp& model, const Dataset& data, double step) {
    std::vector<std::size_t> all(data.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    std::vector<double> analytic;
    model.loss_and_gradient(data, all, analytic);

    Mlp probe = model;
    std::vector<double> numeric(analytic.size());
    auto p = probe.params();
    for (std::size_t q = 0; q < p.size(); ++q) {
        const double saved = p[q];
        p[q] = saved + step;
        const double up = probe.loss(data, all);
        p[q] = saved - step;
        const double down = probe.loss(data, all);
        p[q] = saved;
        numeric[q] = (up - down) / (2.0 * step);
    }
    return max_relative_error(analytic, numeric);
}

}  // namespace fedfft
