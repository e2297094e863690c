#include "fedfft/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <thread>

#include "fedfft/rng.hpp"

namespace fedfft {

std::string AggregatorSpec::name() const {
    switch (kind) {
        case AggregatorKind::FedAvg: return "fedavg";
        case AggregatorKind::Median: return "median";
        case AggregatorKind::TrimmedMean: return "trimmed_mean";
        case AggregatorKind::Krum: return "krum";
        case AggregatorKind::FFT: return fft.kind == FftKind::KdeMode ? "fft" : "fft_literal";
        case AggregatorKind::Dynamic: return "dynamic";
    }
    return "unknown";
}

void TrainConfig::validate() const {
    if (rounds == 0 || epochs == 0) throw Error(ErrorCode::InvalidArgument, "rounds and epochs must be >= 1");
    if (batch_size == 0) throw Error(ErrorCode::InvalidArgument, "batch_size must be >= 1");
    if (!(learning_rate >= 0.0)) throw Error(ErrorCode::InvalidArgument, "learning_rate must be >= 0");
    if (hidden == 0) throw Error(ErrorCode::InvalidArgument, "hidden width must be >= 1");
    if (attack_start_round == 0) throw Error(ErrorCode::InvalidArgument, "attack_start_round is 1-based");
    attack.validate();
    if (aggregator.kind == AggregatorKind::Dynamic) aggregator.detector.validate();
}

AggregationOutcome aggregate(std::span<const ClientUpdate> updates, const AggregatorSpec& spec,
                             std::size_t attacker_count, std::uint64_t seed) {
    switch (spec.kind) {
        case AggregatorKind::FedAvg: return {fed_avg(updates), {}, {}, {}};
        case AggregatorKind::Median: return {coordinate_median(updates), {}, {}, {}};
        case AggregatorKind::TrimmedMean: {
            auto p = spec.trim;
            if (spec.match_attackers) p.n = attacker_count;
            return {trimmed_mean(updates, p), {}, {}, {}};
        }
        case AggregatorKind::Krum: {
            auto p = spec.krum;
            if (spec.match_attackers) p.f = attacker_count;
            auto sel = krum_select(updates, p);
            return {updates[sel.position].weights, {}, {}, updates[sel.position].client_id};
        }
        case AggregatorKind::FFT: return {fft_aggregate(updates, spec.fft), {}, {}, {}};
        case AggregatorKind::Dynamic: {
            auto r = dynamic_aggregate(updates, spec.detector, spec.fft, seed);
            return {std::move(r.weights), r.decision, r.score, {}};
        }
    }
    throw Error(ErrorCode::InvalidArgument, "unknown aggregator");
}

namespace {

std::vector<ClientUpdate> train_clients(const ModelWeights& global, const MlpShape& shape, const TaskData& data,
                                        const TrainConfig& cfg, std::size_t round, std::size_t threads) {
    const std::size_t k = data.clients.size();
    std::vector<std::optional<ClientUpdate>> slots(k);
    const LocalTraining local{cfg.epochs, cfg.batch_size, cfg.learning_rate};

    auto work = [&](std::size_t client) {
        auto rng = make_rng(cfg.seed, {tag("local"), round, client});
        slots[client] = local_update(global, shape, data.clients[client].train, client, local, rng);
    };

    std::size_t workers = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
    workers = std::min(workers, k);
    if (workers <= 1) {
        for (std::size_t c = 0; c < k; ++c) work(c);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::exception_ptr> errors(workers);
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                try {
                    for (std::size_t c = next++; c < k; c = next++) work(c);
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
        for (auto& t : pool) t.join();
        for (auto& e : errors) {
            if (e) std::rethrow_exception(e);
        }
    }

    std::vector<ClientUpdate> out;
    out.reserve(k);
    for (auto& s : slots) out.push_back(std::move(*s));
    return out;
}

}  // namespace

ExperimentResult run_experiment(const TrainConfig& cfg, const SyntheticTask& task, std::size_t threads) {
    cfg.validate();
    const auto data = gen_task(task);
    const MlpShape shape{task.dim, cfg.hidden, task.classes};

    auto init_rng = make_rng(cfg.seed, {tag("init")});
    Mlp global = Mlp::glorot(shape, init_rng);

    ExperimentResult result;
    std::vector<std::size_t> ids(task.clients);
    for (std::size_t c = 0; c < ids.size(); ++c) ids[c] = c;
    const std::size_t attacker_count = cfg.attack.attacker_count(task.clients);
    result.attackers = choose_attackers(ids, attacker_count, cfg.seed);

    for (std::size_t round = 1; round <= cfg.rounds; ++round) {
        const auto started = std::chrono::steady_clock::now();
        auto updates = train_clients(global.weights(), shape, data, cfg, round, threads);

        const bool attacked = round >= cfg.attack_start_round && !result.attackers.empty();
        if (attacked) {
            updates = apply_attack(updates, cfg.attack, result.attackers, derive_seed(cfg.seed, {tag("attack"), round}));
        }

        auto outcome = aggregate(updates, cfg.aggregator, attacked ? attacker_count : 0,
                                 derive_seed(cfg.seed, {tag("detector"), round}));
        global.set_weights(outcome.weights);
        const auto eval = global.evaluate(data.global_test);

        RoundRecord rec;
        rec.round = round;
        rec.decision = outcome.decision;
        rec.detector_score = outcome.score;
        rec.accuracy = eval.accuracy;
        rec.loss = eval.loss;
        rec.selected_client = outcome.selected_client;
        rec.selected_attacker = outcome.selected_client && result.attackers.contains(*outcome.selected_client);
        rec.wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - started)
                          .count();
        result.rounds.push_back(rec);
    }
    result.final_weights = global.weights();
    return result;
}

}  // namespace fedfft
