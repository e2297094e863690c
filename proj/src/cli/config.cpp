#include "fedfft/cli/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "json.hpp"

namespace fedfft::cli {

using nlohmann::json;

namespace {

// Reads typed fields out of one JSON object and rejects keys it was never
// asked about.
class Section {
public:
    Section(const json& node, std::string path) : node_(node), path_(std::move(path)) {
        if (!node_.is_object()) throw ConfigError(path_ + " must be an object");
    }

    ~Section() noexcept(false) {
        if (std::uncaught_exceptions() > 0) return;
        for (const auto& [key, _] : node_.items()) {
            if (!seen_.contains(key)) throw ConfigError("unknown field " + path_ + "." + key);
        }
    }

    template <typename T>
    void get(const char* key, T& out) {
        seen_.insert(key);
        if (!node_.contains(key)) return;
        try {
            out = node_.at(key).get<T>();
        } catch (const json::exception&) {
            throw ConfigError("field " + path_ + "." + key + " has the wrong type");
        }
    }

    void get_count(const char* key, std::size_t& out) {
        seen_.insert(key);
        if (!node_.contains(key)) return;
        const auto& v = node_.at(key);
        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
            throw ConfigError("field " + path_ + "." + key + " must be a non-negative integer");
        }
        out = v.get<std::size_t>();
    }

    void get_real(const char* key, double& out) {
        seen_.insert(key);
        if (!node_.contains(key)) return;
        const auto& v = node_.at(key);
        if (!v.is_number()) throw ConfigError("field " + path_ + "." + key + " must be a number");
        out = v.get<double>();
    }

    const json* child(const char* key) {
        seen_.insert(key);
        return node_.contains(key) ? &node_.at(key) : nullptr;
    }

    std::string path(const char* key) const { return path_ + "." + key; }

private:
    const json& node_;
    std::string path_;
    std::set<std::string> seen_;
};

template <typename Enum>
Enum parse_enum(const std::string& value, std::initializer_list<std::pair<const char*, Enum>> table,
                const std::string& field) {
    for (const auto& [name, e] : table) {
        if (value == name) return e;
    }
    throw ConfigError("field " + field + " has unknown value '" + value + "'");
}

void read_detector(Section s, DetectorConfig& d) {
    s.get_count("repetitions", d.repetitions);
    s.get_count("subset_size", d.subset_size);
    s.get_real("reject_level", d.reject_level);
    s.get_real("threshold", d.threshold);
    s.get_real("coordinate_fraction", d.coordinate_fraction);
    std::string mode = d.score_mode == ScoreMode::DeviationFrequency ? "deviation_frequency" : "mean_pvalue";
    s.get("score_mode", mode);
    d.score_mode = parse_enum<ScoreMode>(
        mode, {{"deviation_frequency", ScoreMode::DeviationFrequency}, {"mean_pvalue", ScoreMode::MeanPValue}},
        s.path("score_mode"));
}

void read_aggregator(Section s, AggregatorSpec& a) {
    std::string kind = "fedavg";
    s.get("kind", kind);
    a = aggregator_from_name(kind, a);

    // trim / krum_f: integer, or "auto" to follow the attacker count.
    for (const char* key : {"trim", "krum_f"}) {
        if (const auto* v = s.child(key)) {
            if (v->is_string() && v->get<std::string>() == "auto") {
                a.match_attackers = true;
            } else if (v->is_number_integer() && v->get<long long>() >= 0) {
                a.match_attackers = false;
                (std::string(key) == "trim" ? a.trim.n : a.krum.f) = v->get<std::size_t>();
            } else {
                throw ConfigError("field " + s.path(key) + " must be a non-negative integer or \"auto\"");
            }
        }
    }
    s.get("trim_weighted", a.trim.weight_by_dataset);

    std::string strategy = a.fft.kind == FftKind::KdeMode ? "kde" : "literal";
    s.get("fft_strategy", strategy);
    a.fft.kind = parse_enum<FftKind>(strategy, {{"kde", FftKind::KdeMode}, {"literal", FftKind::Literal}},
                                     s.path("fft_strategy"));
    s.get("include_dc", a.fft.include_dc);
    s.get_count("grid_size", a.fft.grid_size);

    if (const auto* d = s.child("detector")) read_detector(Section(*d, s.path("detector")), a.detector);
}

void read_attack(Section s, TrainConfig& t) {
    std::string kind = attack_name(t.attack.kind);
    s.get("kind", kind);
    t.attack.kind = parse_enum<AttackKind>(
        kind, {{"none", AttackKind::None}, {"random_weights", AttackKind::RandomWeights}, {"min_max", AttackKind::MinMax}},
        s.path("kind"));
    s.get_real("fraction", t.attack.fraction);
    std::string pert = "inverse_unit_vector";
    s.get("perturbation", pert);
    t.attack.perturbation = parse_enum<Perturbation>(pert,
                                                     {{"inverse_unit_vector", Perturbation::InverseUnitVector},
                                                      {"inverse_std", Perturbation::InverseStd},
                                                      {"inverse_sign", Perturbation::InverseSign}},
                                                     s.path("perturbation"));
    s.get_count("start_round", t.attack_start_round);
}

void read_task(Section s, SyntheticTask& t) {
    s.get_count("dim", t.dim);
    s.get_count("classes", t.classes);
    s.get_count("per_client", t.per_client);
    s.get_count("clients", t.clients);
    s.get_real("noise_sigma", t.noise_sigma);
    s.get("seed", t.seed);
    if (const auto* a = s.child("dirichlet_alpha")) {
        if (a->is_null() || (a->is_string() && a->get<std::string>() == "inf")) {
            t.dirichlet_alpha = std::numeric_limits<double>::infinity();
        } else if (a->is_number()) {
            t.dirichlet_alpha = a->get<double>();
        } else {
            throw ConfigError("field task.dirichlet_alpha must be a number, \"inf\" or null");
        }
    }
}

void read_train(Section s, TrainConfig& t) {
    s.get_count("rounds", t.rounds);
    s.get_count("epochs", t.epochs);
    s.get_count("batch_size", t.batch_size);
    s.get_real("learning_rate", t.learning_rate);
    s.get_count("hidden", t.hidden);
    s.get("seed", t.seed);
    if (const auto* a = s.child("aggregator")) read_aggregator(Section(*a, s.path("aggregator")), t.aggregator);
    if (const auto* a = s.child("attack")) read_attack(Section(*a, s.path("attack")), t);
}

json detector_json(const DetectorConfig& d) {
    return {{"repetitions", d.repetitions},
            {"subset_size", d.subset_size},
            {"reject_level", d.reject_level},
            {"threshold", d.threshold},
            {"score_mode", d.score_mode == ScoreMode::DeviationFrequency ? "deviation_frequency" : "mean_pvalue"},
            {"coordinate_fraction", d.coordinate_fraction}};
}

const char* perturbation_name(Perturbation p) {
    switch (p) {
        case Perturbation::InverseUnitVector: return "inverse_unit_vector";
        case Perturbation::InverseStd: return "inverse_std";
        case Perturbation::InverseSign: return "inverse_sign";
    }
    return "?";
}

}  // namespace

std::string attack_name(AttackKind kind) {
    switch (kind) {
        case AttackKind::None: return "none";
        case AttackKind::RandomWeights: return "random_weights";
        case AttackKind::MinMax: return "min_max";
    }
    return "?";
}

AggregatorSpec aggregator_from_name(const std::string& name, const AggregatorSpec& base) {
    AggregatorSpec a = base;
    if (name == "fedavg") {
        a.kind = AggregatorKind::FedAvg;
    } else if (name == "median") {
        a.kind = AggregatorKind::Median;
    } else if (name == "trimmed_mean") {
        a.kind = AggregatorKind::TrimmedMean;
        a.match_attackers = true;
    } else if (name == "krum") {
        a.kind = AggregatorKind::Krum;
        a.match_attackers = true;
    } else if (name == "fft") {
        a.kind = AggregatorKind::FFT;
        a.fft.kind = FftKind::KdeMode;
    } else if (name == "fft_literal") {
        a.kind = AggregatorKind::FFT;
        a.fft.kind = FftKind::Literal;
    } else if (name == "dynamic") {
        a.kind = AggregatorKind::Dynamic;
    } else {
        throw ConfigError("unknown aggregator '" + name + "'");
    }
    return a;
}

ExperimentConfig parse_experiment_config(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }

    ExperimentConfig cfg;
    {
        Section root(doc, "config");
        if (const auto* t = root.child("task")) read_task(Section(*t, "task"), cfg.task);
        if (const auto* t = root.child("train")) read_train(Section(*t, "train"), cfg.train);
        root.get_count("repeats", cfg.repeats);
        std::string dir = cfg.output_dir.string();
        root.get("output_dir", dir);
        cfg.output_dir = dir;
        root.get("record_wall_time", cfg.record_wall_time);
    }

    if (cfg.repeats == 0) throw ConfigError("repeats must be >= 1");
    try {
        cfg.task.validate();
        cfg.train.validate();
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
    return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_experiment_config(buf.str());
}

std::string resolved_config_json(const ExperimentConfig& cfg) {
    const auto& t = cfg.task;
    const auto& tr = cfg.train;
    const auto& a = tr.aggregator;
    json task = {{"dim", t.dim},
                 {"classes", t.classes},
                 {"per_client", t.per_client},
                 {"clients", t.clients},
                 {"noise_sigma", t.noise_sigma},
                 {"seed", t.seed}};
    task["dirichlet_alpha"] = std::isinf(t.dirichlet_alpha) ? json("inf") : json(t.dirichlet_alpha);

    json aggregator = {{"kind", a.name()},
                       {"trim_weighted", a.trim.weight_by_dataset},
                       {"fft_strategy", a.fft.kind == FftKind::KdeMode ? "kde" : "literal"},
                       {"include_dc", a.fft.include_dc},
                       {"grid_size", a.fft.grid_size},
                       {"detector", detector_json(a.detector)}};
    aggregator["trim"] = a.match_attackers ? json("auto") : json(a.trim.n);
    aggregator["krum_f"] = a.match_attackers ? json("auto") : json(a.krum.f);

    json doc = {{"task", task},
                {"train",
                 {{"rounds", tr.rounds},
                  {"epochs", tr.epochs},
                  {"batch_size", tr.batch_size},
                  {"learning_rate", tr.learning_rate},
                  {"hidden", tr.hidden},
                  {"seed", tr.seed},
                  {"aggregator", aggregator},
                  {"attack",
                   {{"kind", attack_name(tr.attack.kind)},
                    {"fraction", tr.attack.fraction},
                    {"perturbation", perturbation_name(tr.attack.perturbation)},
                    {"start_round", tr.attack_start_round}}}}},
                {"repeats", cfg.repeats},
                {"output_dir", cfg.output_dir.string()},
                {"record_wall_time", cfg.record_wall_time}};
    return doc.dump(2);
}

}  // namespace fedfft::cli
