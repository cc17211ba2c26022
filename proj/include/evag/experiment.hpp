#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "evag/benchmarks.hpp"
#include "evag/ea.hpp"
#include "evag/netsim.hpp"

namespace evag {

enum class Model { EvolvableAgent, Island };

const char* model_name(Model m);
Model parse_model(const std::string& name);  // "evag" or "island"

struct ExperimentConfig {
    Model model = Model::EvolvableAgent;
    ProblemKind problem = ProblemKind::ShiftedSphere;
    int dim = 0;  // 0 -> problem default
    std::uint64_t instance_seed = 1;
    std::optional<bool> rotated;
    int nodes = 1;
    int population = 512;
    std::uint64_t budget = 2'500'000;
    OperatorConfig operators;
    int migration_frequency = 25;  // island only, generations
    LinkSpec network;
    double eval_cost = 0.002;  // simulated seconds per evaluation
    int runs = 30;
    std::uint64_t base_seed = 1;
};

// Throws std::invalid_argument naming the offending field.
void validate_config(const ExperimentConfig& cfg);

int effective_dim(const ExperimentConfig& cfg);

// Population split: floor(P/n) each, remainder going to the lowest ids.
std::vector<std::uint32_t> node_shares(std::uint32_t population,
                                       std::uint32_t nodes);

struct RunResult {
    Model model = Model::EvolvableAgent;
    ProblemKind problem = ProblemKind::ShiftedSphere;
    int nodes = 0;
    int run_index = 0;
    double best_fitness = 0.0;
    std::uint64_t evaluations_used = 0;
    double simulated_duration = 0.0;        // seconds
    double migrant_latency_mean = 0.0;      // seconds; 0 when no migrants
    double migrant_latency_sd = 0.0;
    std::uint64_t migrant_count = 0;
    std::vector<double> node_best;
    std::vector<std::uint64_t> node_evaluations;
    std::uint64_t total_steps = 0;  // agent steps, or sum of generations*size
    std::uint64_t budget = 0;
};

// One deterministic trial: run_seed = mix(base_seed, run_index), instance
// from instance_seed (shared across runs), simulate until every node's
// stopping rule has fired.
RunResult run_trial(const ExperimentConfig& cfg, int run_index);

std::vector<RunResult> run_all(const ExperimentConfig& cfg);

struct DistributionStats {
    double mean = 0.0;
    double sd = 0.0;
    double min = 0.0;
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
    double max = 0.0;
};

struct SummaryStats {
    std::size_t count = 0;
    DistributionStats fitness;
    DistributionStats latency_ms;  // of per-run migrant latency means
    std::optional<double> t_stat;  // vs reference set, unequal variances
    std::optional<double> t_df;
};

// Quartiles use inclusive linear interpolation on the sorted sample:
// q(p) sits at rank (n-1)p, fractionally interpolated between neighbours.
DistributionStats summarize_values(std::vector<double> values);

SummaryStats summarize(std::span<const RunResult> results);
SummaryStats summarize(std::span<const RunResult> results,
                       std::span<const RunResult> reference);

// Welch's unequal-variance t statistic and its degrees of freedom.
std::pair<double, double> welch_t(std::span<const double> a,
                                  std::span<const double> b);

// Per-run rows: header then one row per result, numbers at 17 significant
// digits, columns model, problem, nodes, run, best_fitness, evaluations,
// sim_time_s, migrant_latency_ms_mean, migrant_latency_ms_sd.
void export_csv(std::span<const RunResult> results, std::ostream& out);
void export_csv_file(std::span<const RunResult> results,
                     const std::string& path);

std::vector<RunResult> read_results_csv(std::istream& in);
std::vector<RunResult> read_results_csv_file(const std::string& path);

// Aggregated table for plotting: one row per group, where `group_by` is a
// comma-separated subset of model, problem, nodes. Ungrouped key columns
// show "*".
void export_grouped_summary(std::span<const RunResult> results,
                            const std::string& group_by, std::ostream& out);

}  // namespace evag
