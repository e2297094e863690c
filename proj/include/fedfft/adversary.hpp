#pragma once

#include <cstddef>
#include <cstdint>
#include <set>
#include <span>
#include <vector>

#include "fedfft/rng.hpp"
#include "fedfft/tensor.hpp"

namespace fedfft {

enum class AttackKind { None, RandomWeights, MinMax };
enum class Perturbation { InverseUnitVector, InverseStd, InverseSign };

struct AttackSpec {
    AttackKind kind = AttackKind::None;
    Perturbation perturbation = Perturbation::InverseUnitVector;
    double fraction = 0.0;  // in [0, 0.5)

    void validate() const;
    /// floor(fraction * K)
    std::size_t attacker_count(std::size_t clients) const;
};

/// Glorot-normal draw per layer: sigma = sqrt(2 / (fan_in + fan_out)).
/// Vectors use fan_in = length, fan_out = 1; rank-2 shapes are (in, out);
/// higher ranks treat the leading extents as the receptive field.
ModelWeights random_weights(const ModelWeights& tmpl, Rng& rng);
double glorot_sigma(const TensorShape& shape);

/// Attack direction from the colluders' mean Θ: -Θ/||Θ||, -std (population,
/// per coordinate), or -sign(Θ).
ModelWeights perturbation_vector(std::span<const ModelWeights> malicious, Perturbation kind);

struct MinMaxResult {
    ModelWeights crafted;
    double gamma = 0.0;
    ModelWeights perturbation;
    bool gamma_capped = false;  // constraint never became active
};

inline constexpr double kGammaCap = 1152921504606846976.0;  // 2^60

/// Θ = mean(malicious) + γ Θ^p with the largest γ >= 0 such that
/// max_m ||Θ - W^m|| <= max_{m,l} ||W^m - W^l||; found by doubling from 1 and
/// then 60 bisection steps.
MinMaxResult min_max_craft(std::span<const ModelWeights> malicious, Perturbation kind);

/// Replaces attacker submissions. RandomWeights draws each attacker from its
/// own substream (seed, client_id); MinMax pools the attackers' trained
/// weights and every attacker submits the same crafted Θ. Others pass through.
std::vector<ClientUpdate> apply_attack(std::span<const ClientUpdate> updates, const AttackSpec& spec,
                                       const std::set<std::size_t>& attacker_ids, std::uint64_t seed);

/// Uniformly chooses `count` distinct client ids.
std::set<std::size_t> choose_attackers(std::span<const std::size_t> client_ids, std::size_t count,
                                       std::uint64_t seed);

}  // namespace fedfft
