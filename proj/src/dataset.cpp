#include "fedfft/dataset.hpp"

#include <algorithm>
#include <cmath>

#include "fedfft/error.hpp"
#include "fedfft/rng.hpp"

namespace fedfft {

void SyntheticTask::validate() const {
    if (dim == 0) throw Error(ErrorCode::InvalidArgument, "task dim must be >= 1");
    if (classes < 2) throw Error(ErrorCode::InvalidArgument, "task needs at least two classes");
    if (per_client < classes) throw Error(ErrorCode::InvalidArgument, "per_client must be >= classes");
    if (clients == 0) throw Error(ErrorCode::InvalidArgument, "task needs at least one client");
    if (!(dirichlet_alpha > 0.0)) throw Error(ErrorCode::InvalidArgument, "dirichlet_alpha must be positive");
    if (!(noise_sigma >= 0.0)) throw Error(ErrorCode::InvalidArgument, "noise_sigma must be >= 0");
}

namespace {

void append_sample(Dataset& ds, const std::vector<double>& center, double sigma, std::size_t label, Rng& rng) {
    std::normal_distribution<double> noise(0.0, 1.0);
    for (double c : center) ds.features.push_back(c + sigma * noise(rng));
    ds.labels.push_back(label);
}

std::vector<std::size_t> dirichlet_labels(std::size_t count, std::size_t classes, double alpha, Rng& rng) {
    std::gamma_distribution<double> gamma(alpha, 1.0);
    std::vector<double> mix(classes);
    double total = 0.0;
    for (double& m : mix) total += (m = gamma(rng));
    if (!(total > 0.0)) {
        // All gamma draws underflowed; fall back to a single random class.
        std::uniform_int_distribution<std::size_t> pick(0, classes - 1);
        std::fill(mix.begin(), mix.end(), 0.0);
        mix[pick(rng)] = 1.0;
    }
    std::discrete_distribution<std::size_t> draw(mix.begin(), mix.end());
    std::vector<std::size_t> labels(count);
    for (auto& l : labels) l = draw(rng);
    return labels;
}

}  // namespace

TaskData gen_task(const SyntheticTask& task) {
    task.validate();
    TaskData out;

    auto center_rng = make_rng(task.seed, {tag("centers")});
    std::normal_distribution<double> normal(0.0, 1.0);
    for (std::size_t c = 0; c < task.classes; ++c) {
        std::vector<double> v(task.dim);
        double norm = 0.0;
        do {
            norm = 0.0;
            for (double& x : v) {
                x = normal(center_rng);
                norm += x * x;
            }
        } while (norm == 0.0);
        norm = std::sqrt(norm);
        for (double& x : v) x *= kCenterRadius / norm;
        out.centers.push_back(std::move(v));
    }

    std::vector<std::vector<std::size_t>> client_labels(task.clients);
    auto label_rng = make_rng(task.seed, {tag("labels")});
    if (std::isinf(task.dirichlet_alpha)) {
        std::vector<std::size_t> pool(task.clients * task.per_client);
        for (std::size_t i = 0; i < pool.size(); ++i) pool[i] = i % task.classes;
        std::shuffle(pool.begin(), pool.end(), label_rng);
        for (std::size_t k = 0; k < task.clients; ++k) {
            client_labels[k].assign(pool.begin() + static_cast<std::ptrdiff_t>(k * task.per_client),
                                    pool.begin() + static_cast<std::ptrdiff_t>((k + 1) * task.per_client));
        }
    } else {
        for (auto& labels : client_labels) {
            labels = dirichlet_labels(task.per_client, task.classes, task.dirichlet_alpha, label_rng);
        }
    }

    const std::size_t train_count = task.per_client * 8 / 10;
    for (std::size_t k = 0; k < task.clients; ++k) {
        auto rng = make_rng(task.seed, {tag("client"), k});
        ClientData cd;
        cd.train.dim = cd.test.dim = task.dim;
        for (std::size_t s = 0; s < task.per_client; ++s) {
            auto label = client_labels[k][s];
            append_sample(s < train_count ? cd.train : cd.test, out.centers[label], task.noise_sigma, label, rng);
        }
        out.clients.push_back(std::move(cd));
    }

    auto test_rng = make_rng(task.seed, {tag("global-test")});
    out.global_test.dim = task.dim;
    for (std::size_t s = 0; s < kGlobalTestSize; ++s) {
        append_sample(out.global_test, out.centers[s % task.classes], task.noise_sigma, s % task.classes, test_rng);
    }
    return out;
}

}  // namespace fedfft
