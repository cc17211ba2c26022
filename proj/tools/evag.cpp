#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "evag/experiment.hpp"

namespace {

struct CommonFlags {
    std::string model = "evag";
    std::string problem = "sphere";
    int dim = 0;
    int nodes = 1;
    int population = 512;
    std::uint64_t budget = 2'500'000;
    int runs = 30;
    std::uint64_t seed = 1;
    std::uint64_t instance_seed = 1;
    int migration_freq = 25;
    double latency_ms = 2.0;
    double bandwidth = 125e6;
    double eval_cost_ms = 2.0;
    double pc = 0.9;
    double pm = 0.01;
    int k = 2;
    CLI::Option* rotated_opt = nullptr;
    bool rotated = false;
    std::string out;
};

void add_common_flags(CLI::App& cmd, CommonFlags& f) {
    cmd.add_option("--model", f.model, "Model to run: evag or island")
        ->check(CLI::IsMember({"evag", "island"}));
    cmd.add_option("--problem", f.problem,
                   "Benchmark: sphere, rastrigin or schwefel")
        ->check(CLI::IsMember({"sphere", "rastrigin", "schwefel"}));
    cmd.add_option("--dim", f.dim, "Problem dimension (0 = problem default)");
    cmd.add_option("--nodes", f.nodes, "Simulated node count");
    cmd.add_option("--population", f.population, "Total population size");
    cmd.add_option("--budget", f.budget, "Total evaluation budget");
    cmd.add_option("--runs", f.runs, "Independent repetitions");
    cmd.add_option("--seed", f.seed, "Base seed for the run streams");
    cmd.add_option("--instance-seed", f.instance_seed,
                   "Seed fixing the benchmark landscape");
    cmd.add_option("--migration-freq", f.migration_freq,
                   "Island migration period in generations (25/50/75/100)");
    cmd.add_option("--latency-ms", f.latency_ms, "Link latency, milliseconds");
    cmd.add_option("--bandwidth", f.bandwidth, "Link bandwidth, bytes/second");
    cmd.add_option("--eval-cost-ms", f.eval_cost_ms,
                   "Simulated CPU cost per evaluation, milliseconds");
    cmd.add_option("--pc", f.pc, "Crossover probability");
    cmd.add_option("--pm", f.pm, "Per-gene mutation probability");
    cmd.add_option("--k", f.k, "Tournament sample size");
    f.rotated_opt = cmd.add_flag("--rotated,!--no-rotated", f.rotated,
                                 "Override the problem's default rotation");
    cmd.add_option("--out", f.out, "Write results CSV here (default stdout)");
    cmd.set_config("--config", "", "Read key=value defaults (flags win)");
}

evag::ExperimentConfig to_config(const CommonFlags& f) {
    evag::ExperimentConfig cfg;
    cfg.model = evag::parse_model(f.model);
    cfg.problem = evag::parse_kind(f.problem);
    cfg.dim = f.dim;
    cfg.instance_seed = f.instance_seed;
    if (f.rotated_opt->count() > 0) cfg.rotated = f.rotated;
    cfg.nodes = f.nodes;
    cfg.population = f.population;
    cfg.budget = f.budget;
    cfg.operators.pc = f.pc;
    cfg.operators.pm = f.pm;
    cfg.operators.k = f.k;
    cfg.migration_frequency = f.migration_freq;
    cfg.network.latency = f.latency_ms / 1e3;
    cfg.network.bandwidth = f.bandwidth;
    cfg.eval_cost = f.eval_cost_ms / 1e3;
    cfg.runs = f.runs;
    cfg.base_seed = f.seed;
    return cfg;
}

void write_results(const std::vector<evag::RunResult>& results,
                   const std::string& out) {
    if (out.empty())
        evag::export_csv(results, std::cout);
    else
        evag::export_csv_file(results, out);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Distributed evolutionary computation testbed"};
    app.require_subcommand(1);

    CommonFlags run_flags;
    CLI::App* run = app.add_subcommand("run", "Execute one experiment");
    add_common_flags(*run, run_flags);

    CommonFlags sweep_flags;
    int nodes_from = 1;
    int nodes_to = 8;
    CLI::App* sweep =
        app.add_subcommand("sweep", "Run the experiment across node counts");
    add_common_flags(*sweep, sweep_flags);
    sweep->add_option("--nodes-from", nodes_from, "First node count");
    sweep->add_option("--nodes-to", nodes_to, "Last node count, inclusive");

    std::string in_path, group_by = "model,problem,nodes", summary_out;
    CLI::App* summarize =
        app.add_subcommand("summarize", "Aggregate a results CSV");
    summarize->add_option("--in", in_path, "Results CSV to read")->required();
    summarize->add_option("--group-by", group_by,
                          "Comma-separated subset of model,problem,nodes");
    summarize->add_option("--out", summary_out,
                          "Write the summary here (default stdout)");

    std::string inst_problem = "sphere", inst_out;
    int inst_dim = 0;
    std::uint64_t inst_seed = 1;
    CLI::App* instance =
        app.add_subcommand("instance", "Benchmark instance utilities");
    instance->require_subcommand(1);
    CLI::App* inst_export =
        instance->add_subcommand("export", "Write a benchmark instance file");
    inst_export->add_option("--problem", inst_problem, "Benchmark kind")
        ->check(CLI::IsMember({"sphere", "rastrigin", "schwefel"}));
    inst_export->add_option("--dim", inst_dim, "Dimension (0 = default)");
    inst_export->add_option("--seed", inst_seed, "Landscape seed");
    inst_export->add_option("--out", inst_out,
                            "Instance file path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (run->parsed()) {
            write_results(evag::run_all(to_config(run_flags)), run_flags.out);
        } else if (sweep->parsed()) {
            if (nodes_from < 1 || nodes_to < nodes_from)
                throw std::invalid_argument(
                    "sweep: need 1 <= nodes-from <= nodes-to");
            auto cfg = to_config(sweep_flags);
            std::vector<evag::RunResult> results;
            for (int n = nodes_from; n <= nodes_to; ++n) {
                cfg.nodes = n;
                auto batch = evag::run_all(cfg);
                results.insert(results.end(), batch.begin(), batch.end());
            }
            write_results(results, sweep_flags.out);
        } else if (summarize->parsed()) {
            const auto results = evag::read_results_csv_file(in_path);
            if (summary_out.empty()) {
                evag::export_grouped_summary(results, group_by, std::cout);
            } else {
                std::ofstream out(summary_out, std::ios::binary);
                if (!out)
                    throw std::runtime_error("cannot open '" + summary_out +
                                             "' for writing");
                evag::export_grouped_summary(results, group_by, out);
            }
        } else if (instance->parsed()) {
            const auto kind = evag::parse_kind(inst_problem);
            const int dim =
                inst_dim == 0 ? evag::default_dimension(kind) : inst_dim;
            const auto inst = evag::make_instance(kind, dim, inst_seed);
            if (inst_out.empty())
                evag::write_instance(inst, std::cout);
            else
                evag::write_instance_file(inst, inst_out);
        }
    } catch (const std::exception& e) {
        std::cerr << "evag: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
