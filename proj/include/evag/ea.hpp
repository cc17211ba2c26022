#pragma once

#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "evag/benchmarks.hpp"
#include "evag/contribution.hpp"
#include "evag/individual.hpp"
#include "evag/rng.hpp"

namespace evag {

// Parent selection behaviour. BestTwoOfSample draws one sample of k and
// keeps its two best members; TwoTournaments runs two independent k-way
// tournaments, one per parent.
enum class SelectionMode { BestTwoOfSample, TwoTournaments };

struct OperatorConfig {
    double pc = 0.9;
    double pm = 0.01;
    int k = 2;
    SelectionMode selection = SelectionMode::BestTwoOfSample;
};

void validate_operators(const OperatorConfig& cfg);

// One offspring. With probability pc each gene comes from a or b with a fair
// coin; otherwise the child is a copy of a's genome. Callers that want the
// no-crossover copy to favour the fitter parent pass it as a.
Vector uniform_crossover(const Individual& a, const Individual& b, double pc,
                         Rng& rng);

// Each gene independently reset, with probability pm, to a uniform value in
// [lower_i, upper_i]. Pass the genome by value; moving in mutates in place.
Vector uniform_mutation(Vector genome, double pm, const Vector& lower,
                        const Vector& upper, Rng& rng);

namespace detail {

template <typename Pool>
std::size_t tournament_winner(const Pool& pool, int k, Rng& rng) {
    std::size_t best = rng.uniform_index(pool.size());
    for (int i = 1; i < k; ++i) {
        const std::size_t challenger = rng.uniform_index(pool.size());
        if (*pool[challenger].fitness < *pool[best].fitness) best = challenger;
    }
    return best;
}

}  // namespace detail

// Indices of two parents drawn from a pool of evaluated individuals. The
// pool only needs size() and operator[] returning an Individual; sampling is
// uniform with replacement, so the two picks may coincide. The default mode
// draws one sample of k and returns its two fittest members in (best,
// second-best) order, ties resolved by sample order.
template <typename Pool>
std::pair<std::size_t, std::size_t> select_parent_indices(
    const Pool& pool, int k, Rng& rng,
    SelectionMode mode = SelectionMode::BestTwoOfSample) {
    if (pool.size() < 2)
        throw std::invalid_argument("select_parents: pool needs >= 2 entries");
    if (k < 2) throw std::invalid_argument("select_parents: k must be >= 2");

    if (mode == SelectionMode::TwoTournaments) {
        const std::size_t first = detail::tournament_winner(pool, k, rng);
        const std::size_t second = detail::tournament_winner(pool, k, rng);
        return {first, second};
    }

    std::size_t best = rng.uniform_index(pool.size());
    std::size_t runner_up = rng.uniform_index(pool.size());
    if (*pool[runner_up].fitness < *pool[best].fitness) std::swap(best, runner_up);
    for (int i = 2; i < k; ++i) {
        const std::size_t challenger = rng.uniform_index(pool.size());
        if (*pool[challenger].fitness < *pool[best].fitness) {
            runner_up = best;
            best = challenger;
        } else if (*pool[challenger].fitness < *pool[runner_up].fitness) {
            runner_up = challenger;
        }
    }
    return {best, runner_up};
}

template <typename Pool>
std::pair<Individual, Individual> select_parents(
    const Pool& pool, int k, Rng& rng,
    SelectionMode mode = SelectionMode::BestTwoOfSample) {
    const auto [a, b] = select_parent_indices(pool, k, rng, mode);
    return {pool[a], pool[b]};
}

// One island of the multi-population baseline. `inbox` holds migrants that
// arrived since the last generation boundary; they are absorbed at the next
// one. `evaluations` counts offspring evaluations only; the initial
// population sweep is not charged against the run budget.
struct Island {
    std::uint32_t id = 0;
    std::vector<Individual> population;
    Individual elite;
    std::vector<Individual> inbox;
    std::uint64_t generation = 0;
    std::uint64_t evaluations = 0;
};

Island make_island(std::uint32_t id, std::size_t population_size,
                   const ProblemInstance& inst, Rng& rng);

// Each queued migrant overwrites a uniformly random resident; the inbox is
// left empty. Exposed separately from island_generation for testability.
void absorb_migrants(Island& island, Rng& rng);

// One generational step: absorb migrants, breed a full replacement
// population, then copy the elite over a random slot if the new generation
// lost it. Adds population-size evaluations to the island's counter.
void island_generation(Island& island, const ProblemInstance& inst,
                       const OperatorConfig& cfg, Rng& rng);

// Contribution carrying a copy of the island's best individual and its
// evaluation counter. The island is left untouched; picking the migration
// target is the caller's business.
Contribution migration_event(const Island& island);

}  // namespace evag
