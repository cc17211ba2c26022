#include "evag/ea.hpp"

#include <algorithm>

namespace evag {

void validate_operators(const OperatorConfig& cfg) {
    if (!(cfg.pc >= 0.0 && cfg.pc <= 1.0))
        throw std::invalid_argument("operators: pc must lie in [0, 1]");
    if (!(cfg.pm >= 0.0 && cfg.pm <= 1.0))
        throw std::invalid_argument("operators: pm must lie in [0, 1]");
    if (cfg.k < 2) throw std::invalid_argument("operators: k must be >= 2");
}

Vector uniform_crossover(const Individual& a, const Individual& b, double pc,
                         Rng& rng) {
    if (a.genome.size() != b.genome.size())
        throw std::invalid_argument("uniform_crossover: genome length mismatch");
    if (!rng.bernoulli(pc)) return a.genome;

    const auto n = a.genome.size();
    Vector child(n);
    std::uint64_t bank = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (i % 64 == 0) bank = rng.next_u64();
        const bool from_b = (bank >> (i % 64)) & 1u;
        child[i] = from_b ? b.genome[i] : a.genome[i];
    }
    return child;
}

Vector uniform_mutation(Vector genome, double pm, const Vector& lower,
                        const Vector& upper, Rng& rng) {
    if (lower.size() != genome.size() || upper.size() != genome.size())
        throw std::invalid_argument("uniform_mutation: bounds length mismatch");
    if ((lower.array() >= upper.array()).any())
        throw std::invalid_argument("uniform_mutation: lower must be < upper");
    if (pm <= 0.0) return genome;

    const auto n = static_cast<std::uint64_t>(genome.size());
    // Geometric gaps between mutated genes; one draw per reset instead of
    // one Bernoulli per gene.
    for (std::uint64_t i = rng.geometric_skip(pm); i < n;
         i += 1 + rng.geometric_skip(pm)) {
        genome[static_cast<Eigen::Index>(i)] =
            rng.uniform(lower[static_cast<Eigen::Index>(i)],
                        upper[static_cast<Eigen::Index>(i)]);
    }
    return genome;
}

Island make_island(std::uint32_t id, std::size_t population_size,
                   const ProblemInstance& inst, Rng& rng) {
    if (population_size == 0)
        throw std::invalid_argument("make_island: empty population");
    Island island;
    island.id = id;
    island.population.reserve(population_size);
    for (std::size_t i = 0; i < population_size; ++i) {
        Vector g(inst.dim);
        for (int d = 0; d < inst.dim; ++d)
            g[d] = rng.uniform(inst.lower[d], inst.upper[d]);
        const double f = evaluate(inst, g);
        island.population.push_back(Individual{std::move(g), f});
    }
    island.elite = *std::min_element(
        island.population.begin(), island.population.end(),
        [](const Individual& a, const Individual& b) { return is_better(a, b); });
    return island;
}

void absorb_migrants(Island& island, Rng& rng) {
    if (island.inbox.empty()) return;
    if (island.population.empty())
        throw std::invalid_argument("absorb_migrants: empty population");
    for (Individual& migrant : island.inbox) {
        const std::size_t slot = rng.uniform_index(island.population.size());
        island.population[slot] = std::move(migrant);
    }
    island.inbox.clear();
}

namespace {

void refresh_elite(Island& island) {
    const auto best = std::min_element(
        island.population.begin(), island.population.end(),
        [](const Individual& a, const Individual& b) { return is_better(a, b); });
    if (is_better(*best, island.elite)) island.elite = *best;
}

}  // namespace

void island_generation(Island& island, const ProblemInstance& inst,
                       const OperatorConfig& cfg, Rng& rng) {
    if (island.population.empty())
        throw std::invalid_argument("island_generation: empty population");

    absorb_migrants(island, rng);
    refresh_elite(island);  // a migrant may beat the historical best

    const std::size_t size = island.population.size();
    std::vector<Individual> next;
    next.reserve(size);
    for (std::size_t i = 0; i < size; ++i) {
        const auto [pa, pb] =
            select_parent_indices(island.population, cfg.k, rng, cfg.selection);
        Vector child = uniform_crossover(island.population[pa],
                                         island.population[pb], cfg.pc, rng);
        child = uniform_mutation(std::move(child), cfg.pm, inst.lower,
                                 inst.upper, rng);
        const double f = evaluate(inst, child);
        next.push_back(Individual{std::move(child), f});
    }
    island.population = std::move(next);
    island.evaluations += size;
    island.generation += 1;

    // Elitism: adopt a strictly better newcomer, or reinsert the elite over
    // a random slot when the new generation lost it.
    const auto best = std::min_element(
        island.population.begin(), island.population.end(),
        [](const Individual& a, const Individual& b) { return is_better(a, b); });
    if (is_better(*best, island.elite)) {
        island.elite = *best;
    } else if (is_better(island.elite, *best)) {
        island.population[rng.uniform_index(size)] = island.elite;
    }
}

Contribution migration_event(const Island& island) {
    if (island.population.empty())
        throw std::invalid_argument("migration_event: empty population");
    return Contribution{island.id, island.evaluations, island.elite};
}

}  // namespace evag
