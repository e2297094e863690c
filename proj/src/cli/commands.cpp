#include "fedfft/cli/commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "fedfft/oracles.hpp"
#include "fedfft/spectral.hpp"
#include "fedfft/weight_io.hpp"
#include "json.hpp"

namespace fedfft::cli {

namespace {

std::string fixed6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

std::string compact(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

void append_rows(std::ostream& csv, const ExperimentConfig& cfg, std::size_t repeat, const ExperimentResult& result) {
    const auto aggregator = cfg.train.aggregator.name();
    const auto attack = attack_name(cfg.train.attack.kind);
    const auto fraction = compact(cfg.train.attack.fraction);
    for (const auto& r : result.rounds) {
        csv << r.round << ',' << repeat << ',' << aggregator << ',' << attack << ',' << fraction << ','
            << (r.decision ? to_string(*r.decision) : "n/a") << ','
            << (r.detector_score ? fixed6(*r.detector_score) : std::string()) << ',' << fixed6(r.accuracy) << ','
            << fixed6(r.loss) << ',' << (cfg.record_wall_time ? r.wall_ms : 0) << '\n';
    }
}

std::vector<double> read_numbers(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Format, "cannot open " + path.string());
    std::vector<double> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::istringstream ls(line);
        double v;
        std::string rest;
        if (!(ls >> v) || (ls >> rest) || !std::isfinite(v)) {
            throw Error(ErrorCode::Format, path.string() + ":" + std::to_string(lineno) + ": not a number");
        }
        out.push_back(v);
    }
    return out;
}

int report_library_error(const Error& e, std::ostream& err) {
    err << "error: " << e.what() << '\n';
    switch (e.code()) {
        case ErrorCode::ShapeMismatch: return kExitShapeMismatch;
        case ErrorCode::Format: return kExitBadInput;
        default: return kExitRuntime;
    }
}

}  // namespace

std::size_t thread_budget() {
    const char* raw = std::getenv("FEDFFT_THREADS");
    if (raw == nullptr || *raw == '\0') return 0;
    char* end = nullptr;
    long v = std::strtol(raw, &end, 10);
    if (*end != '\0' || v < 0) throw ConfigError(std::string("FEDFFT_THREADS must be a non-negative integer, got ") + raw);
    return static_cast<std::size_t>(v);
}

RunSummary run_and_write(const ExperimentConfig& cfg, const std::filesystem::path& dir, std::size_t threads) {
    std::filesystem::create_directories(dir);
    std::ofstream csv(dir / "rounds.csv");
    if (!csv) throw Error(ErrorCode::Format, "cannot write " + (dir / "rounds.csv").string());
    csv << kRoundCsvHeader << '\n';

    RunSummary summary;
    nlohmann::json repeats = nlohmann::json::array();
    for (std::size_t r = 0; r < cfg.repeats; ++r) {
        SyntheticTask task = cfg.task;
        TrainConfig train = cfg.train;
        task.seed += r;
        train.seed += r;
        const auto result = run_experiment(train, task, threads);
        append_rows(csv, cfg, r, result);

        std::size_t krum_malicious = 0, fft_rounds = 0;
        for (const auto& rec : result.rounds) {
            krum_malicious += rec.selected_attacker;
            fft_rounds += rec.decision == Decision::FFT;
        }
        summary.final_accuracy.push_back(result.rounds.back().accuracy);
        repeats.push_back({{"repeat", r},
                           {"task_seed", task.seed},
                           {"train_seed", train.seed},
                           {"attackers", result.attackers},
                           {"final_accuracy", result.rounds.back().accuracy},
                           {"final_loss", result.rounds.back().loss},
                           {"rounds_selecting_attacker", krum_malicious},
                           {"rounds_using_fft", fft_rounds}});
    }

    const double n = static_cast<double>(summary.final_accuracy.size());
    for (double a : summary.final_accuracy) summary.mean += a / n;
    double ss = 0.0;
    for (double a : summary.final_accuracy) ss += (a - summary.mean) * (a - summary.mean);
    summary.stddev = summary.final_accuracy.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;

    nlohmann::json doc = {{"config", nlohmann::json::parse(resolved_config_json(cfg))},
                          {"final_accuracy", {{"mean", summary.mean}, {"std", summary.stddev}}},
                          {"repeats", repeats}};
    std::ofstream(dir / "summary.json") << doc.dump(2) << '\n';
    return summary;
}

int cmd_run(const std::filesystem::path& config_path, std::ostream& out, std::ostream& err) {
    ExperimentConfig cfg;
    std::size_t threads = 0;
    try {
        cfg = load_experiment_config(config_path);
        threads = thread_budget();
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitBadInput;
    }
    try {
        auto summary = run_and_write(cfg, cfg.output_dir, threads);
        out << "final accuracy " << fixed6(summary.mean) << " +/- " << fixed6(summary.stddev) << " over "
            << cfg.repeats << " repeats -> " << (cfg.output_dir / "rounds.csv").string() << '\n';
        return kExitOk;
    } catch (const std::exception& e) {
        err << "run failed: " << e.what() << '\n';
        return kExitRuntime;
    }
}

int cmd_sweep(const std::filesystem::path& config_path, const SweepOptions& opts, std::ostream& out, std::ostream& err) {
    ExperimentConfig base;
    std::size_t threads = 0;
    std::vector<AggregatorSpec> columns;
    try {
        base = load_experiment_config(config_path);
        threads = thread_budget();
        for (const auto& name : opts.aggregators) columns.push_back(aggregator_from_name(name, base.train.aggregator));
        for (double f : opts.fractions) {
            if (!(f >= 0.0 && f < 0.5)) throw ConfigError("fractions must lie in [0, 0.5)");
        }
        for (double t : opts.thresholds) {
            if (!(t >= 0.0 && t <= 1.0)) throw ConfigError("thresholds must lie in [0, 1]");
        }
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitBadInput;
    }
    if (columns.empty()) columns.push_back(base.train.aggregator);

    try {
        std::ofstream matrix;
        std::filesystem::create_directories(base.output_dir);
        const auto matrix_path = base.output_dir / "sweep.csv";
        matrix.open(matrix_path);

        if (!opts.thresholds.empty()) {
            auto fractions = opts.fractions.empty() ? std::vector<double>{base.train.attack.fraction} : opts.fractions;
            matrix << "threshold";
            for (double f : fractions) matrix << ",fraction_" << compact(f);
            matrix << '\n';
            for (double t : opts.thresholds) {
                matrix << compact(t);
                for (double f : fractions) {
                    auto cfg = base;
                    cfg.train.aggregator = aggregator_from_name("dynamic", base.train.aggregator);
                    cfg.train.aggregator.detector.threshold = t;
                    cfg.train.attack.fraction = f;
                    auto dir = base.output_dir / ("threshold_" + compact(t)) / ("fraction_" + compact(f));
                    matrix << ',' << fixed6(run_and_write(cfg, dir, threads).mean);
                }
                matrix << '\n';
            }
        } else {
            auto fractions = opts.fractions.empty() ? std::vector<double>{base.train.attack.fraction} : opts.fractions;
            matrix << "fraction";
            for (const auto& c : columns) matrix << ',' << c.name();
            matrix << '\n';
            for (double f : fractions) {
                matrix << compact(f);
                for (const auto& c : columns) {
                    auto cfg = base;
                    cfg.train.aggregator = c;
                    cfg.train.attack.fraction = f;
                    auto dir = base.output_dir / ("fraction_" + compact(f)) / c.name();
                    matrix << ',' << fixed6(run_and_write(cfg, dir, threads).mean);
                }
                matrix << '\n';
            }
        }
        out << "sweep matrix -> " << matrix_path.string() << '\n';
        return kExitOk;
    } catch (const std::exception& e) {
        err << "sweep failed: " << e.what() << '\n';
        return kExitRuntime;
    }
}

int cmd_aggregate(const AggregateOptions& opts, std::ostream& out, std::ostream& err) {
    if (opts.inputs.empty()) {
        err << "error: aggregate needs at least one --in file\n";
        return kExitBadInput;
    }
    std::vector<ClientUpdate> updates;
    try {
        for (std::size_t k = 0; k < opts.inputs.size(); ++k) {
            updates.emplace_back(k, read_weight_dump(opts.inputs[k]), 1);
        }
        validate_uniform(updates);
    } catch (const Error& e) {
        return report_library_error(e, err);
    }

    AggregatorSpec spec;
    try {
        spec = aggregator_from_name(opts.method);
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kExitBadInput;
    }
    spec.match_attackers = false;
    spec.trim.n = opts.trim;
    spec.krum.f = opts.krum_f;
    if (opts.fft_strategy == "literal") {
        spec.fft.kind = FftKind::Literal;
    } else if (opts.fft_strategy != "kde") {
        err << "error: --fft-strategy must be kde or literal\n";
        return kExitBadInput;
    }
    spec.fft.include_dc = opts.include_dc;
    spec.fft.grid_size = opts.grid_size;
    spec.detector.threshold = opts.threshold;

    try {
        if (updates.size() == 1) {
            write_weight_dump(opts.output, updates.front().weights);
            out << "single dump, copied unchanged -> " << opts.output.string() << '\n';
            return kExitOk;
        }
        auto outcome = aggregate(updates, spec, 0, opts.seed);
        write_weight_dump(opts.output, outcome.weights);
        out << "aggregated " << updates.size() << " dumps with " << spec.name();
        if (outcome.decision) out << " (decision " << to_string(*outcome.decision) << ", score " << fixed6(*outcome.score) << ")";
        out << " -> " << opts.output.string() << '\n';
        return kExitOk;
    } catch (const Error& e) {
        return report_library_error(e, err);
    }
}

int cmd_ks_test(const std::filesystem::path& a, const std::filesystem::path& b, std::ostream& out, std::ostream& err) {
    try {
        auto x = read_numbers(a);
        auto y = read_numbers(b);
        auto r = ks_test(x, y);
        out << "statistic " << fixed6(r.statistic) << '\n' << "p_value " << fixed6(r.p_value) << '\n';
        return kExitOk;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return e.code() == ErrorCode::Format || e.code() == ErrorCode::EmptySample ? kExitBadInput : kExitRuntime;
    }
}

namespace {

struct SuiteResult {
    bool pass = true;
    std::string detail;
};

SuiteResult suite_fft() {
    Rng rng(11);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double worst = 0.0;
    for (std::size_t n = 1; n <= 128; ++n) {
        for (int rep = 0; rep < 3; ++rep) {
            std::vector<double> x(n);
            for (double& v : x) v = u(rng);
            auto fast = fft(x);
            auto slow = dft_naive(x);
            for (std::size_t k = 0; k < n; ++k) {
                worst = std::max({worst, std::abs(fast.re[k] - slow.re[k]), std::abs(fast.im[k] - slow.im[k])});
            }
        }
    }
    return {worst < 1e-9, "max bin error " + compact(worst)};
}

SuiteResult suite_ks() {
    Rng rng(12);
    std::uniform_int_distribution<int> value(0, 4), size(1, 8);
    for (int t = 0; t < 2000; ++t) {
        std::vector<double> a(static_cast<std::size_t>(size(rng))), b(static_cast<std::size_t>(size(rng)));
        for (double& v : a) v = value(rng);
        for (double& v : b) v = value(rng);
        if (ks_statistic(a, b) != oracle::ks_brute_force(a, b)) return {false, "mismatch on trial " + std::to_string(t)};
    }
    double at_critical = kolmogorov_q(1.358);
    return {std::abs(at_critical - 0.05) <= 0.002, "2000 pairs exact; Q(1.358) = " + fixed6(at_critical)};
}

SuiteResult suite_krum() {
    Rng rng(13);
    std::uniform_int_distribution<std::size_t> clients(3, 7);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int t = 0; t < 300; ++t) {
        std::size_t k = clients(rng);
        std::uniform_int_distribution<std::size_t> fpick(0, k - 3);
        std::size_t f = fpick(rng);
        std::vector<ClientUpdate> ups;
        for (std::size_t c = 0; c < k; ++c) {
            std::vector<double> d(3);
            for (double& v : d) v = normal(rng);
            ups.emplace_back(c, ModelWeights({Layer{TensorShape{3}, d}}), 1);
        }
        if (krum_select(ups, {f}).position != oracle::krum_exhaustive(ups, f)) {
            return {false, "mismatch on trial " + std::to_string(t)};
        }
    }
    return {true, "300 instances"};
}

SuiteResult suite_gamma() {
    Rng rng(14);
    std::normal_distribution<double> normal(0.0, 1.0);
    double worst = 0.0;
    for (int t = 0; t < 20; ++t) {
        std::size_t dim = 1 + static_cast<std::size_t>(t % 2);
        std::vector<ModelWeights> mal;
        for (int m = 0; m < 3; ++m) {
            std::vector<double> d(dim);
            for (double& v : d) v = 1.0 + normal(rng);
            mal.emplace_back(std::vector<Layer>{Layer{TensorShape{dim}, d}});
        }
        double fast = min_max_craft(mal, Perturbation::InverseUnitVector).gamma;
        double grid = oracle::gamma_grid_search(mal, Perturbation::InverseUnitVector);
        worst = std::max(worst, std::abs(fast - grid) / std::max(grid, 1e-12));
    }
    return {worst <= 1e-4, "max relative gap " + compact(worst)};
}

SuiteResult suite_grad() {
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        auto rng = make_rng(seed, {tag("selftest-grad")});
        Mlp net = Mlp::glorot({4, 5, 3}, rng);
        Dataset batch;
        batch.dim = 4;
        std::normal_distribution<double> normal(0.0, 1.0);
        for (std::size_t s = 0; s < 8; ++s) {
            for (int i = 0; i < 4; ++i) batch.features.push_back(normal(rng));
            batch.labels.push_back(s % 3);
        }
        worst = std::max(worst, grad_check(net, batch));
    }
    return {worst < 1e-5, "max relative error " + compact(worst)};
}

SuiteResult suite_kde() {
    Rng rng(15);
    std::normal_distribution<double> normal(0.0, 1.0);
    double worst = 0.0;
    for (int t = 0; t < 20; ++t) {
        std::vector<double> sample(static_cast<std::size_t>(2 + t * 3));
        for (double& v : sample) v = normal(rng) + (t % 3 == 0 && v > 0 ? 5.0 : 0.0);
        auto est = kde_density(sample, 256);
        auto direct = oracle::kde_direct(sample, est.grid, est.bandwidth);
        double peak = *std::max_element(direct.begin(), direct.end());
        for (std::size_t j = 0; j < direct.size(); ++j) worst = std::max(worst, std::abs(est.density[j] - direct[j]) / peak);
    }
    return {worst < 1e-6, "max error / peak " + compact(worst)};
}

}  // namespace

int cmd_selftest(std::ostream& out, std::ostream& err) {
    const std::vector<std::pair<const char*, std::function<SuiteResult()>>> suites = {
        {"fft-vs-dft", suite_fft},          {"ks-brute-force", suite_ks},  {"krum-exhaustive", suite_krum},
        {"minmax-gamma-grid", suite_gamma}, {"mlp-grad-check", suite_grad}, {"kde-direct-sum", suite_kde},
    };
    const auto started = std::chrono::steady_clock::now();
    bool all = true;
    for (const auto& [name, run] : suites) {
        SuiteResult r;
        try {
            r = run();
        } catch (const std::exception& e) {
            r = {false, std::string("threw: ") + e.what()};
        }
        all = all && r.pass;
        out << (r.pass ? "[PASS] " : "[FAIL] ") << name << " (" << r.detail << ")\n";
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    out << suites.size() << " suites, " << (all ? "all passed" : "FAILURES") << ", " << compact(seconds) << " s\n";
    if (seconds > 60.0) err << "warning: selftest exceeded the 60 s budget\n";
    return all ? kExitOk : kExitSelftestFailed;
}

}  // namespace fedfft::cli
