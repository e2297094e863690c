#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "fedfft/cli/commands.hpp"
#include "fedfft/weight_io.hpp"
#include "helpers.hpp"
#include "json.hpp"

using namespace fedfft;
using namespace fedfft::cli;
using fedfft::testing::vec;

namespace {

namespace fs = std::filesystem;

fs::path scratch(const std::string& name) {
    auto dir = fs::temp_directory_path() / ("fedfft_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

void spit(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

std::string small_config(const fs::path& out, const std::string& aggregator = "fedavg", int repeats = 2) {
    return R"({"task": {"clients": 6, "per_client": 60},
               "train": {"rounds": 3, "aggregator": {"kind": ")" +
           aggregator + R"("}, "attack": {"kind": "random_weights", "fraction": 0.2}},
               "repeats": )" +
           std::to_string(repeats) + R"(, "output_dir": ")" + out.string() + "\"}";
}

std::size_t line_count(const std::string& text) { return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')); }

}  // namespace

TEST(Config, DefaultsForEmptyDocument) {
    auto cfg = parse_experiment_config("{}");
    EXPECT_EQ(cfg.repeats, 5u);
    EXPECT_EQ(cfg.train.rounds, 30u);
    EXPECT_EQ(cfg.task.clients, 20u);
    EXPECT_EQ(cfg.train.aggregator.kind, AggregatorKind::FedAvg);
}

TEST(Config, ReadsNestedFields) {
    auto cfg = parse_experiment_config(R"({
      "task": {"dim": 4, "dirichlet_alpha": 0.5, "seed": 9},
      "train": {"rounds": 7, "learning_rate": 0.1,
                "aggregator": {"kind": "dynamic", "fft_strategy": "literal", "include_dc": true,
                               "detector": {"threshold": 0.1, "score_mode": "mean_pvalue"}},
                "attack": {"kind": "min_max", "fraction": 0.3, "perturbation": "inverse_sign", "start_round": 4}},
      "repeats": 3})");
    EXPECT_EQ(cfg.task.dim, 4u);
    EXPECT_EQ(cfg.task.dirichlet_alpha, 0.5);
    EXPECT_EQ(cfg.train.rounds, 7u);
    EXPECT_EQ(cfg.train.aggregator.kind, AggregatorKind::Dynamic);
    EXPECT_EQ(cfg.train.aggregator.fft.kind, FftKind::Literal);
    EXPECT_TRUE(cfg.train.aggregator.fft.include_dc);
    EXPECT_EQ(cfg.train.aggregator.detector.threshold, 0.1);
    EXPECT_EQ(cfg.train.aggregator.detector.score_mode, ScoreMode::MeanPValue);
    EXPECT_EQ(cfg.train.attack.kind, AttackKind::MinMax);
    EXPECT_EQ(cfg.train.attack.perturbation, Perturbation::InverseSign);
    EXPECT_EQ(cfg.train.attack_start_round, 4u);
    EXPECT_EQ(cfg.repeats, 3u);
}

TEST(Config, KrumAutoAndExplicit) {
    auto a = parse_experiment_config(R"({"train": {"aggregator": {"kind": "krum"}}})");
    EXPECT_TRUE(a.train.aggregator.match_attackers);
    auto b = parse_experiment_config(R"({"train": {"aggregator": {"kind": "krum", "krum_f": 2}}})");
    EXPECT_FALSE(b.train.aggregator.match_attackers);
    EXPECT_EQ(b.train.aggregator.krum.f, 2u);
}

TEST(Config, Rejections) {
    for (const char* bad : {"{", "[]", R"({"repeats": 0})", R"({"extra": 1})", R"({"task": {"dimm": 3}})",
                            R"({"train": {"aggregator": {"kind": "mean"}}})", R"({"train": {"rounds": -1}})",
                            R"({"train": {"attack": {"fraction": 0.6}}})", R"({"task": {"classes": "four"}})",
                            R"({"train": {"aggregator": {"kind": "dynamic", "detector": {"threshold": 2}}}})"}) {
        EXPECT_THROW(parse_experiment_config(bad), ConfigError) << bad;
    }
}

TEST(Config, ResolvedJsonRoundTrips) {
    auto cfg = parse_experiment_config(R"({"train": {"aggregator": {"kind": "trimmed_mean"}}, "repeats": 2})");
    auto again = parse_experiment_config(resolved_config_json(cfg));
    EXPECT_EQ(resolved_config_json(again), resolved_config_json(cfg));
}

TEST(CmdRun, WritesCsvAndSummary) {
    auto dir = scratch("run");
    spit(dir / "cfg.json", small_config(dir / "out"));
    std::ostringstream out, err;
    ASSERT_EQ(cmd_run(dir / "cfg.json", out, err), kExitOk) << err.str();
    auto csv = slurp(dir / "out" / "rounds.csv");
    EXPECT_EQ(csv.substr(0, csv.find('\n')), kRoundCsvHeader);
    EXPECT_EQ(line_count(csv), 1u + 3u * 2u);
    auto summary = nlohmann::json::parse(slurp(dir / "out" / "summary.json"));
    EXPECT_EQ(summary["repeats"].size(), 2u);
    EXPECT_TRUE(summary["final_accuracy"].contains("mean"));
    EXPECT_EQ(summary["config"]["train"]["rounds"], 3);
}

TEST(CmdRun, SameConfigTwiceIsByteIdentical) {
    auto dir = scratch("twice");
    spit(dir / "cfg.json", small_config(dir / "out", "dynamic"));
    std::ostringstream out, err;
    ASSERT_EQ(cmd_run(dir / "cfg.json", out, err), kExitOk);
    auto first = slurp(dir / "out" / "rounds.csv");
    ASSERT_EQ(cmd_run(dir / "cfg.json", out, err), kExitOk);
    EXPECT_EQ(slurp(dir / "out" / "rounds.csv"), first);
}

TEST(CmdRun, BadConfigExitsTwo) {
    auto dir = scratch("bad");
    spit(dir / "cfg.json", "{ not json");
    std::ostringstream out, err;
    EXPECT_EQ(cmd_run(dir / "cfg.json", out, err), kExitBadInput);
    EXPECT_FALSE(err.str().empty());
    EXPECT_EQ(cmd_run(dir / "missing.json", out, err), kExitBadInput);
}

TEST(CmdRun, RuntimeFailureExitsThree) {
    auto dir = scratch("runtime");
    // Krum needs K >= f + 3; 4 clients with f = 2 cannot aggregate.
    spit(dir / "cfg.json", R"({"task": {"clients": 4, "per_client": 20},
        "train": {"rounds": 1, "aggregator": {"kind": "krum", "krum_f": 2}}, "repeats": 1,
        "output_dir": ")" + (dir / "out").string() + "\"}");
    std::ostringstream out, err;
    EXPECT_EQ(cmd_run(dir / "cfg.json", out, err), kExitRuntime);
}

TEST(CmdSweep, SingleFractionEqualsRun) {
    auto dir = scratch("sweep_single");
    spit(dir / "run.json", small_config(dir / "run"));
    spit(dir / "sweep.json", small_config(dir / "sweep"));
    std::ostringstream out, err;
    ASSERT_EQ(cmd_run(dir / "run.json", out, err), kExitOk);
    SweepOptions opts;
    opts.fractions = {0.2};
    ASSERT_EQ(cmd_sweep(dir / "sweep.json", opts, out, err), kExitOk) << err.str();
    EXPECT_EQ(slurp(dir / "sweep" / "fraction_0.2" / "fedavg" / "rounds.csv"), slurp(dir / "run" / "rounds.csv"));
    auto matrix = slurp(dir / "sweep" / "sweep.csv");
    EXPECT_EQ(matrix.substr(0, matrix.find('\n')), "fraction,fedavg");
}

TEST(CmdSweep, MatrixShape) {
    auto dir = scratch("sweep_matrix");
    spit(dir / "cfg.json", small_config(dir / "out", "fedavg", 1));
    SweepOptions opts;
    opts.fractions = {0.0, 0.2};
    opts.aggregators = {"fedavg", "median"};
    std::ostringstream out, err;
    ASSERT_EQ(cmd_sweep(dir / "cfg.json", opts, out, err), kExitOk) << err.str();
    auto matrix = slurp(dir / "out" / "sweep.csv");
    EXPECT_EQ(line_count(matrix), 3u);
    EXPECT_EQ(matrix.substr(0, matrix.find('\n')), "fraction,fedavg,median");

    SweepOptions thr;
    thr.thresholds = {0.02, 0.5};
    ASSERT_EQ(cmd_sweep(dir / "cfg.json", thr, out, err), kExitOk) << err.str();
    matrix = slurp(dir / "out" / "sweep.csv");
    EXPECT_EQ(matrix.substr(0, matrix.find('\n')), "threshold,fraction_0.2");
    EXPECT_EQ(line_count(matrix), 3u);
}

TEST(CmdSweep, BadGridExitsTwo) {
    auto dir = scratch("sweep_bad");
    spit(dir / "cfg.json", small_config(dir / "out"));
    SweepOptions opts;
    opts.fractions = {0.7};
    std::ostringstream out, err;
    EXPECT_EQ(cmd_sweep(dir / "cfg.json", opts, out, err), kExitBadInput);
    opts.fractions = {0.1};
    opts.aggregators = {"mystery"};
    EXPECT_EQ(cmd_sweep(dir / "cfg.json", opts, out, err), kExitBadInput);
}

TEST(CmdAggregate, SingleInputIsIdentity) {
    auto dir = scratch("agg_one");
    auto w = ModelWeights({Layer{TensorShape{2, 2}, {1, -2, 3.5, 4}}, Layer{TensorShape{1}, {0.25}}});
    write_weight_dump(dir / "a.json", w);
    for (const char* method : {"fedavg", "median", "trimmed_mean", "krum", "fft", "fft_literal", "dynamic"}) {
        AggregateOptions opts;
        opts.inputs = {dir / "a.json"};
        opts.output = dir / "out.json";
        opts.method = method;
        std::ostringstream out, err;
        ASSERT_EQ(cmd_aggregate(opts, out, err), kExitOk) << method << ": " << err.str();
        EXPECT_EQ(read_weight_dump(dir / "out.json"), w) << method;
    }
}

TEST(CmdAggregate, MedianOfThree) {
    auto dir = scratch("agg_median");
    AggregateOptions opts;
    for (double v : {1.0, 2.0, 100.0}) {
        auto p = dir / ("w" + std::to_string(static_cast<int>(v)) + ".json");
        write_weight_dump(p, vec({v}));
        opts.inputs.push_back(p);
    }
    opts.output = dir / "out.json";
    opts.method = "median";
    std::ostringstream out, err;
    ASSERT_EQ(cmd_aggregate(opts, out, err), kExitOk);
    EXPECT_EQ(read_weight_dump(dir / "out.json"), vec({2.0}));
}

TEST(CmdAggregate, ExitCodes) {
    auto dir = scratch("agg_codes");
    write_weight_dump(dir / "a.json", vec({1, 2}));
    write_weight_dump(dir / "b.json", vec({1, 2, 3}));
    spit(dir / "bad.json", R"({"version": 9, "layers": []})");
    std::ostringstream out, err;

    AggregateOptions mismatch;
    mismatch.inputs = {dir / "a.json", dir / "b.json"};
    mismatch.output = dir / "out.json";
    EXPECT_EQ(cmd_aggregate(mismatch, out, err), kExitShapeMismatch);

    AggregateOptions bad = mismatch;
    bad.inputs = {dir / "a.json", dir / "bad.json"};
    EXPECT_EQ(cmd_aggregate(bad, out, err), kExitBadInput);

    bad.inputs = {dir / "nope.json"};
    EXPECT_EQ(cmd_aggregate(bad, out, err), kExitBadInput);

    AggregateOptions method = mismatch;
    method.inputs = {dir / "a.json"};
    method.method = "average";
    EXPECT_EQ(cmd_aggregate(method, out, err), kExitBadInput);
}

TEST(CmdKsTest, PrintsSixDecimals) {
    auto dir = scratch("ks");
    spit(dir / "a.txt", "1\n2\n3\n4\n");
    spit(dir / "b.txt", "2\n3\n4\n5\n\n");
    std::ostringstream out, err;
    ASSERT_EQ(cmd_ks_test(dir / "a.txt", dir / "b.txt", out, err), kExitOk);
    EXPECT_EQ(out.str().substr(0, out.str().find('\n')), "statistic 0.250000");
    spit(dir / "c.txt", "1\nfoo\n");
    EXPECT_EQ(cmd_ks_test(dir / "a.txt", dir / "c.txt", out, err), kExitBadInput);
    spit(dir / "d.txt", "");
    EXPECT_EQ(cmd_ks_test(dir / "a.txt", dir / "d.txt", out, err), kExitBadInput);
}

TEST(CmdSelftest, AllSuitesPass) {
    std::ostringstream out, err;
    EXPECT_EQ(cmd_selftest(out, err), kExitOk) << out.str();
    const auto text = out.str();
    EXPECT_GE(static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')), 6u);
    EXPECT_EQ(text.find("[FAIL]"), std::string::npos);
}

TEST(ThreadBudget, ReadsEnvironment) {
    setenv("FEDFFT_THREADS", "3", 1);
    EXPECT_EQ(thread_budget(), 3u);
    setenv("FEDFFT_THREADS", "x", 1);
    EXPECT_THROW(thread_budget(), ConfigError);
    unsetenv("FEDFFT_THREADS");
    EXPECT_EQ(thread_budget(), 0u);
}
