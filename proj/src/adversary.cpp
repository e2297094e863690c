#include "fedfft/adversary.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <string>

namespace fedfft {

void AttackSpec::validate() const {
    if (!(fraction >= 0.0 && fraction < 0.5)) {
        throw Error(ErrorCode::InvalidArgument, "attacker fraction must lie in [0, 0.5)");
    }
}

std::size_t AttackSpec::attacker_count(std::size_t clients) const {
    if (kind == AttackKind::None) return 0;
    return static_cast<std::size_t>(std::floor(fraction * static_cast<double>(clients) + 1e-9));
}

double glorot_sigma(const TensorShape& shape) {
    const auto& d = shape.dims();
    double fan_in, fan_out;
    if (d.size() == 1) {
        fan_in = static_cast<double>(d[0]);
        fan_out = 1.0;
    } else {
        double receptive = 1.0;
        for (std::size_t k = 0; k + 2 < d.size(); ++k) receptive *= static_cast<double>(d[k]);
        fan_in = static_cast<double>(d[d.size() - 2]) * receptive;
        fan_out = static_cast<double>(d[d.size() - 1]) * receptive;
    }
    return std::sqrt(2.0 / (fan_in + fan_out));
}

ModelWeights random_weights(const ModelWeights& tmpl, Rng& rng) {
    std::vector<Layer> out;
    for (const auto& layer : tmpl.layers()) {
        std::normal_distribution<double> normal(0.0, glorot_sigma(layer.shape));
        Layer drawn{layer.shape, std::vector<double>(layer.data.size())};
        for (double& v : drawn.data) v = normal(rng);
        out.push_back(std::move(drawn));
    }
    return ModelWeights(std::move(out));
}

namespace {

ModelWeights mean_of(std::span<const ModelWeights> ws) {
    auto acc = ws.front().flatten();
    for (const auto& w : ws.subspan(1)) {
        if (!w.same_shape(ws.front())) throw Error(ErrorCode::ShapeMismatch, "malicious updates differ in shape");
        auto flat = w.flatten();
        for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += flat[i];
    }
    for (double& v : acc) v /= static_cast<double>(ws.size());
    return ws.front().unflatten(acc);
}

double max_distance_to(const std::vector<double>& point, const std::vector<std::vector<double>>& others) {
    double worst = 0.0;
    for (const auto& o : others) {
        double s = 0.0;
        for (std::size_t i = 0; i < point.size(); ++i) {
            double d = point[i] - o[i];
            s += d * d;
        }
        worst = std::max(worst, s);
    }
    return std::sqrt(worst);
}

}  // namespace

ModelWeights perturbation_vector(std::span<const ModelWeights> malicious, Perturbation kind) {
    if (malicious.empty()) throw Error(ErrorCode::EmptyUpdateSet, "no malicious updates");
    const auto mean = mean_of(malicious);
    auto theta = mean.flatten();
    std::vector<double> p(theta.size());

    switch (kind) {
        case Perturbation::InverseUnitVector: {
            double norm = l2_norm(mean);
            if (norm == 0.0) throw Error(ErrorCode::ZeroNorm, "mean of malicious updates has zero norm");
            for (std::size_t i = 0; i < p.size(); ++i) p[i] = -theta[i] / norm;
            break;
        }
        case Perturbation::InverseStd: {
            std::vector<double> ss(theta.size(), 0.0);
            for (const auto& w : malicious) {
                auto flat = w.flatten();
                for (std::size_t i = 0; i < ss.size(); ++i) ss[i] += (flat[i] - theta[i]) * (flat[i] - theta[i]);
            }
            for (std::size_t i = 0; i < p.size(); ++i) {
                p[i] = -std::sqrt(ss[i] / static_cast<double>(malicious.size()));
            }
            break;
        }
        case Perturbation::InverseSign:
            for (std::size_t i = 0; i < p.size(); ++i) p[i] = theta[i] > 0.0 ? -1.0 : (theta[i] < 0.0 ? 1.0 : 0.0);
            break;
    }
    return mean.unflatten(p);
}

MinMaxResult min_max_craft(std::span<const ModelWeights> malicious, Perturbation kind) {
    const auto perturbation = perturbation_vector(malicious, kind);
    const auto mean = mean_of(malicious);

    std::vector<std::vector<double>> points;
    for (const auto& w : malicious) points.push_back(w.flatten());
    double diameter = 0.0;
    for (const auto& a : points) diameter = std::max(diameter, max_distance_to(a, points));

    if (diameter == 0.0) return {mean, 0.0, perturbation, false};

    const auto base = mean.flatten();
    const auto dir = perturbation.flatten();
    std::vector<double> candidate(base.size());
    auto feasible = [&](double gamma) {
        for (std::size_t i = 0; i < base.size(); ++i) candidate[i] = base[i] + gamma * dir[i];
        return max_distance_to(candidate, points) <= diameter;
    };

    // γ = 0 is always feasible: the mean lies in the colluders' convex hull.
    double lo = 0.0, hi = 1.0;
    bool capped = false;
    while (feasible(hi)) {
        lo = hi;
        if (hi >= kGammaCap) {
            capped = true;
            break;
        }
        hi *= 2.0;
    }
    if (capped) {
        std::clog << "warning: min-max constraint never active up to gamma = 2^60\n";
    } else {
        for (int step = 0; step < 60; ++step) {
            double mid = lo + (hi - lo) / 2.0;
            if (feasible(mid)) lo = mid; else hi = mid;
        }
    }

    for (std::size_t i = 0; i < base.size(); ++i) candidate[i] = base[i] + lo * dir[i];
    return {mean.unflatten(candidate), lo, perturbation, capped};
}

std::vector<ClientUpdate> apply_attack(std::span<const ClientUpdate> updates, const AttackSpec& spec,
                                       const std::set<std::size_t>& attacker_ids, std::uint64_t seed) {
    spec.validate();
    for (auto id : attacker_ids) {
        bool known = std::any_of(updates.begin(), updates.end(), [&](const auto& u) { return u.client_id == id; });
        if (!known) throw Error(ErrorCode::UnknownClientId, "attacker id " + std::to_string(id) + " not among updates");
    }

    std::vector<ClientUpdate> out(updates.begin(), updates.end());
    if (spec.kind == AttackKind::None || attacker_ids.empty()) return out;

    if (spec.kind == AttackKind::RandomWeights) {
        for (auto& u : out) {
            if (!attacker_ids.contains(u.client_id)) continue;
            auto rng = make_rng(seed, {u.client_id});
            u.weights = random_weights(u.weights, rng);
        }
        return out;
    }

    std::vector<ModelWeights> pooled;
    for (const auto& u : out) {
        if (attacker_ids.contains(u.client_id)) pooled.push_back(u.weights);
    }
    const auto crafted = min_max_craft(pooled, spec.perturbation).crafted;
    for (auto& u : out) {
        if (attacker_ids.contains(u.client_id)) u.weights = crafted;
    }
    return out;
}

std::set<std::size_t> choose_attackers(std::span<const std::size_t> client_ids, std::size_t count, std::uint64_t seed) {
    if (count > client_ids.size()) throw Error(ErrorCode::InvalidArgument, "more attackers than clients");
    std::vector<std::size_t> ids(client_ids.begin(), client_ids.end());
    auto rng = make_rng(seed, {tag("attackers")});
    for (std::size_t k = 0; k < count; ++k) {
        std::uniform_int_distribution<std::size_t> pick(k, ids.size() - 1);
        std::swap(ids[k], ids[pick(rng)]);
    }
    return {ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(count)};
}

}  // namespace fedfft
