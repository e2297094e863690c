#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "fedfft/cli/commands.hpp"

using namespace fedfft::cli;

namespace {

std::vector<double> split_reals(const std::string& csv) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        std::size_t used = 0;
        double v = std::stod(item, &used);
        if (used != item.size()) throw std::invalid_argument(item);
        out.push_back(v);
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fedfft: robust federated aggregation simulator"};
    app.require_subcommand(1);

    std::string config;
    auto* run = app.add_subcommand("run", "run an experiment config");
    run->add_option("config", config, "experiment JSON")->required();

    std::string sweep_config, fractions, thresholds;
    std::vector<std::string> aggregators;
    auto* sweep = app.add_subcommand("sweep", "sweep attacker fraction or detector threshold");
    sweep->add_option("config", sweep_config, "base experiment JSON")->required();
    sweep->add_option("--fractions", fractions, "comma separated, e.g. 0,0.1,0.2");
    sweep->add_option("--thresholds", thresholds, "comma separated detector thresholds");
    sweep->add_option("--aggregators", aggregators, "fedavg median trimmed_mean krum fft fft_literal dynamic")
        ->delimiter(',');

    AggregateOptions agg;
    std::vector<std::string> inputs;
    std::string out_path;
    auto* aggregate = app.add_subcommand("aggregate", "aggregate weight dumps offline");
    aggregate->add_option("--in", inputs, "weight dumps")->required()->expected(1, -1);
    aggregate->add_option("--out", out_path, "output dump")->required();
    aggregate->add_option("--method", agg.method, "fedavg median trimmed_mean krum fft fft_literal dynamic");
    aggregate->add_option("--trim", agg.trim, "values trimmed from each end");
    aggregate->add_option("--krum-f", agg.krum_f, "declared attacker count for krum");
    aggregate->add_option("--fft-strategy", agg.fft_strategy, "kde or literal");
    aggregate->add_flag("--include-dc", agg.include_dc, "let the literal strategy pick the DC bin");
    aggregate->add_option("--grid-size", agg.grid_size, "KDE evaluation grid");
    aggregate->add_option("--threshold", agg.threshold, "dynamic detector threshold");
    aggregate->add_option("--seed", agg.seed, "detector seed");

    std::string ks_a, ks_b;
    auto* ks = app.add_subcommand("ks-test", "two-sample KS test on newline separated numbers");
    ks->add_option("a", ks_a)->required();
    ks->add_option("b", ks_b)->required();

    auto* selftest = app.add_subcommand("selftest", "run the oracle suites");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitBadInput;
    }

    if (*run) return cmd_run(config, std::cout, std::cerr);
    if (*sweep) {
        SweepOptions opts;
        try {
            opts.fractions = split_reals(fractions);
            opts.thresholds = split_reals(thresholds);
        } catch (const std::exception&) {
            std::cerr << "error: --fractions and --thresholds take comma separated numbers\n";
            return kExitBadInput;
        }
        opts.aggregators = aggregators;
        return cmd_sweep(sweep_config, opts, std::cout, std::cerr);
    }
    if (*aggregate) {
        for (const auto& p : inputs) agg.inputs.emplace_back(p);
        agg.output = out_path;
        return cmd_aggregate(agg, std::cout, std::cerr);
    }
    if (*ks) return cmd_ks_test(ks_a, ks_b, std::cout, std::cerr);
    if (*selftest) return cmd_selftest(std::cout, std::cerr);
    return kExitBadInput;
}
