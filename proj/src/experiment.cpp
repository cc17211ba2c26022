#include "evag/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <memory>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "evag/runners.hpp"

namespace evag {

namespace {

constexpr char kCsvHeader[] =
    "model,problem,nodes,run,best_fitness,evaluations,sim_time_s,"
    "migrant_latency_ms_mean,migrant_latency_ms_sd";

std::vector<std::uint64_t> budget_shares(std::uint64_t budget,
                                         std::uint32_t nodes) {
    std::vector<std::uint64_t> shares(nodes, budget / nodes);
    for (std::uint32_t i = 0; i < budget % nodes; ++i) shares[i] += 1;
    return shares;
}

double mean_of(std::span<const double> xs) {
    double sum = 0.0;
    for (double x : xs) sum += x;
    return sum / static_cast<double>(xs.size());
}

double sample_variance(std::span<const double> xs, double mean) {
    if (xs.size() < 2) return 0.0;
    double sum = 0.0;
    for (double x : xs) sum += (x - mean) * (x - mean);
    return sum / static_cast<double>(xs.size() - 1);
}

// Rank (n-1)p with linear interpolation between the neighbouring order
// statistics; `sorted` must be ascending.
double quantile_sorted(const std::vector<double>& sorted, double p) {
    const std::size_t n = sorted.size();
    const double h = static_cast<double>(n - 1) * p;
    const auto lo = static_cast<std::size_t>(h);
    if (lo + 1 >= n) return sorted[n - 1];
    const double frac = h - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.push_back("");
    return fields;
}

}  // namespace

const char* model_name(Model m) {
    return m == Model::EvolvableAgent ? "evag" : "island";
}

Model parse_model(const std::string& name) {
    if (name == "evag") return Model::EvolvableAgent;
    if (name == "island") return Model::Island;
    throw std::invalid_argument("unknown model '" + name +
                                "' (expected evag or island)");
}

int effective_dim(const ExperimentConfig& cfg) {
    return cfg.dim == 0 ? default_dimension(cfg.problem) : cfg.dim;
}

void validate_config(const ExperimentConfig& cfg) {
    if (cfg.nodes < 1 || cfg.nodes > 64)
        throw std::invalid_argument("config: nodes must lie in [1, 64]");
    if (cfg.population < 2)
        throw std::invalid_argument("config: population must be >= 2");
    if (cfg.population < cfg.nodes)
        throw std::invalid_argument("config: population must be >= nodes");
    if (cfg.budget == 0) throw std::invalid_argument("config: budget must be > 0");
    if (cfg.dim < 0) throw std::invalid_argument("config: dim must be >= 1");
    if (cfg.runs < 1) throw std::invalid_argument("config: runs must be >= 1");
    validate_operators(cfg.operators);
    if (cfg.operators.k < 2)
        throw std::invalid_argument("config: tournament size must be >= 2");
    if (cfg.model == Model::Island) {
        const int f = cfg.migration_frequency;
        if (f != 25 && f != 50 && f != 75 && f != 100)
            throw std::invalid_argument(
                "config: migration frequency must be one of 25, 50, 75, 100");
    }
    if (cfg.network.latency < 0.0)
        throw std::invalid_argument("config: latency must be >= 0");
    if (!(cfg.network.bandwidth > 0.0))
        throw std::invalid_argument("config: bandwidth must be > 0");
    if (cfg.eval_cost < 0.0)
        throw std::invalid_argument("config: eval cost must be >= 0");
}

std::vector<std::uint32_t> node_shares(std::uint32_t population,
                                       std::uint32_t nodes) {
    if (nodes == 0) throw std::invalid_argument("node_shares: zero nodes");
    std::vector<std::uint32_t> shares(nodes, population / nodes);
    for (std::uint32_t i = 0; i < population % nodes; ++i) shares[i] += 1;
    return shares;
}

RunResult run_trial(const ExperimentConfig& cfg, int run_index) {
    validate_config(cfg);

    const int dim = effective_dim(cfg);
    const ProblemInstance inst =
        make_instance(cfg.problem, dim, cfg.instance_seed, cfg.rotated);
    const std::uint64_t run_seed =
        derive_seed(cfg.base_seed, static_cast<std::uint64_t>(run_index));

    SimNetwork net = build_complete(static_cast<std::uint32_t>(cfg.nodes),
                                    cfg.network.latency, cfg.network.bandwidth);
    net.seed_faults(derive_seed(run_seed, 0xFA));

    const auto populations = node_shares(static_cast<std::uint32_t>(cfg.population),
                                         static_cast<std::uint32_t>(cfg.nodes));

    RunResult res;
    res.model = cfg.model;
    res.problem = cfg.problem;
    res.nodes = cfg.nodes;
    res.run_index = run_index;
    res.budget = cfg.budget;

    if (cfg.model == Model::EvolvableAgent) {
        std::vector<std::unique_ptr<EvAgNode>> nodes;
        nodes.reserve(cfg.nodes);
        for (std::uint32_t i = 0; i < static_cast<std::uint32_t>(cfg.nodes); ++i) {
            nodes.push_back(std::make_unique<EvAgNode>(
                i, cfg.nodes, inst, cfg.operators, cfg.budget, cfg.eval_cost,
                populations[i], run_seed));
            net.attach(i, nodes.back().get());
        }
        for (auto& node : nodes) node->start(net);

        const auto all_stopped = [&] {
            return std::all_of(nodes.begin(), nodes.end(),
                               [](const auto& n) { return n->stopped(); });
        };
        while (!all_stopped())
            if (!net.step())
                throw std::runtime_error(
                    "run_trial: simulation starved before the stopping rule fired");

        for (const auto& node : nodes) {
            res.node_best.push_back(node->best_fitness());
            res.node_evaluations.push_back(node->blackboard().local_evaluations);
            res.evaluations_used += node->blackboard().local_evaluations;
            res.total_steps += node->steps();
        }
    } else {
        const auto shares =
            budget_shares(cfg.budget, static_cast<std::uint32_t>(cfg.nodes));
        std::vector<std::unique_ptr<IslandNode>> nodes;
        nodes.reserve(cfg.nodes);
        for (std::uint32_t i = 0; i < static_cast<std::uint32_t>(cfg.nodes); ++i) {
            nodes.push_back(std::make_unique<IslandNode>(
                i, cfg.nodes, inst, cfg.operators, shares[i], cfg.eval_cost,
                populations[i], cfg.migration_frequency, run_seed));
            net.attach(i, nodes.back().get());
        }
        for (auto& node : nodes) node->start(net);

        const auto all_stopped = [&] {
            return std::all_of(nodes.begin(), nodes.end(),
                               [](const auto& n) { return n->stopped(); });
        };
        while (!all_stopped())
            if (!net.step())
                throw std::runtime_error(
                    "run_trial: simulation starved before the stopping rule fired");

        for (const auto& node : nodes) {
            res.node_best.push_back(node->best_fitness());
            res.node_evaluations.push_back(node->island().evaluations);
            res.evaluations_used += node->island().evaluations;
            res.total_steps += node->island().evaluations;
        }
    }

    res.best_fitness = *std::min_element(res.node_best.begin(), res.node_best.end());
    res.simulated_duration = net.now();

    if (net.sent_count(MessageClass::Migrant) >
        net.dropped_count(MessageClass::Migrant)) {
        const LatencyStats stats = net.latency_stats(MessageClass::Migrant);
        res.migrant_latency_mean = stats.mean;
        res.migrant_latency_sd = stats.sd;
        res.migrant_count = stats.count;
    }
    return res;
}

std::vector<RunResult> run_all(const ExperimentConfig& cfg) {
    validate_config(cfg);
    std::vector<RunResult> results;
    results.reserve(cfg.runs);
    for (int r = 0; r < cfg.runs; ++r) results.push_back(run_trial(cfg, r));
    return results;
}

DistributionStats summarize_values(std::vector<double> values) {
    if (values.empty())
        throw std::invalid_argument("summarize: empty sample");
    std::sort(values.begin(), values.end());
    DistributionStats s;
    s.mean = mean_of(values);
    s.sd = std::sqrt(sample_variance(values, s.mean));
    s.min = values.front();
    s.q1 = quantile_sorted(values, 0.25);
    s.median = quantile_sorted(values, 0.5);
    s.q3 = quantile_sorted(values, 0.75);
    s.max = values.back();
    return s;
}

std::pair<double, double> welch_t(std::span<const double> a,
                                  std::span<const double> b) {
    if (a.size() < 2 || b.size() < 2)
        throw std::invalid_argument("welch_t: need >= 2 samples per side");
    const double ma = mean_of(a);
    const double mb = mean_of(b);
    const double va = sample_variance(a, ma) / static_cast<double>(a.size());
    const double vb = sample_variance(b, mb) / static_cast<double>(b.size());
    const double t = (ma - mb) / std::sqrt(va + vb);
    const double df = (va + vb) * (va + vb) /
                      (va * va / static_cast<double>(a.size() - 1) +
                       vb * vb / static_cast<double>(b.size() - 1));
    return {t, df};
}

namespace {

SummaryStats summarize_impl(std::span<const RunResult> results) {
    if (results.empty()) throw std::invalid_argument("summarize: no results");
    std::vector<double> fitness, latency_ms;
    fitness.reserve(results.size());
    latency_ms.reserve(results.size());
    for (const RunResult& r : results) {
        fitness.push_back(r.best_fitness);
        latency_ms.push_back(r.migrant_latency_mean * 1e3);
    }
    SummaryStats s;
    s.count = results.size();
    s.fitness = summarize_values(std::move(fitness));
    s.latency_ms = summarize_values(std::move(latency_ms));
    return s;
}

}  // namespace

SummaryStats summarize(std::span<const RunResult> results) {
    return summarize_impl(results);
}

SummaryStats summarize(std::span<const RunResult> results,
                       std::span<const RunResult> reference) {
    SummaryStats s = summarize_impl(results);
    std::vector<double> a, b;
    for (const RunResult& r : results) a.push_back(r.best_fitness);
    for (const RunResult& r : reference) b.push_back(r.best_fitness);
    const auto [t, df] = welch_t(a, b);
    s.t_stat = t;
    s.t_df = df;
    return s;
}

void export_csv(std::span<const RunResult> results, std::ostream& out) {
    out << kCsvHeader << '\n';
    for (const RunResult& r : results) {
        out << model_name(r.model) << ',' << kind_name(r.problem) << ','
            << r.nodes << ',' << r.run_index << ','
            << format_g17(r.best_fitness) << ',' << r.evaluations_used << ','
            << format_g17(r.simulated_duration) << ','
            << format_g17(r.migrant_latency_mean * 1e3) << ','
            << format_g17(r.migrant_latency_sd * 1e3) << '\n';
    }
    if (!out) throw std::runtime_error("csv export failed");
}

void export_csv_file(std::span<const RunResult> results,
                     const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    export_csv(results, out);
    if (!out.flush()) throw std::runtime_error("write to '" + path + "' failed");
}

std::vector<RunResult> read_results_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != kCsvHeader)
        throw std::runtime_error("results csv: unrecognized header");

    std::vector<RunResult> results;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != 9)
            throw std::runtime_error("results csv: bad field count on line " +
                                     std::to_string(lineno));
        try {
            RunResult r;
            r.model = parse_model(fields[0]);
            r.problem = parse_kind(fields[1]);
            r.nodes = std::stoi(fields[2]);
            r.run_index = std::stoi(fields[3]);
            r.best_fitness = std::stod(fields[4]);
            r.evaluations_used = std::stoull(fields[5]);
            r.simulated_duration = std::stod(fields[6]);
            r.migrant_latency_mean = std::stod(fields[7]) / 1e3;
            r.migrant_latency_sd = std::stod(fields[8]) / 1e3;
            results.push_back(std::move(r));
        } catch (const std::invalid_argument& e) {
            throw std::runtime_error("results csv: line " + std::to_string(lineno) +
                                     ": " + e.what());
        }
    }
    return results;
}

std::vector<RunResult> read_results_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    return read_results_csv(in);
}

void export_grouped_summary(std::span<const RunResult> results,
                            const std::string& group_by, std::ostream& out) {
    bool by_model = false, by_problem = false, by_nodes = false;
    std::istringstream keys(group_by);
    std::string key;
    while (std::getline(keys, key, ',')) {
        if (key == "model") by_model = true;
        else if (key == "problem") by_problem = true;
        else if (key == "nodes") by_nodes = true;
        else if (!key.empty())
            throw std::invalid_argument("group-by: unknown key '" + key + "'");
    }

    std::map<std::tuple<std::string, std::string, int>, std::vector<RunResult>>
        groups;
    for (const RunResult& r : results) {
        groups[{by_model ? model_name(r.model) : "*",
                by_problem ? kind_name(r.problem) : "*",
                by_nodes ? r.nodes : -1}]
            .push_back(r);
    }

    out << "model,problem,nodes,count,"
           "fitness_mean,fitness_sd,fitness_min,fitness_q1,fitness_median,"
           "fitness_q3,fitness_max,"
           "latency_ms_mean,latency_ms_sd,latency_ms_min,latency_ms_q1,"
           "latency_ms_median,latency_ms_q3,latency_ms_max\n";
    for (const auto& [k, rs] : groups) {
        const SummaryStats s = summarize(rs);
        out << std::get<0>(k) << ',' << std::get<1>(k) << ',';
        if (std::get<2>(k) < 0) out << '*';
        else out << std::get<2>(k);
        out << ',' << s.count;
        for (const DistributionStats* d : {&s.fitness, &s.latency_ms})
            out << ',' << format_g17(d->mean) << ',' << format_g17(d->sd) << ','
                << format_g17(d->min) << ',' << format_g17(d->q1) << ','
                << format_g17(d->median) << ',' << format_g17(d->q3) << ','
                << format_g17(d->max);
        out << '\n';
    }
    if (!out) throw std::runtime_error("summary export failed");
}

}  // namespace evag
