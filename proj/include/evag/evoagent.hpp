#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "evag/benchmarks.hpp"
#include "evag/ea.hpp"
#include "evag/gossip.hpp"
#include "evag/individual.hpp"
#include "evag/rng.hpp"

namespace evag {

// An agent owns one candidate solution and improves it greedily; everything
// else it sees goes through its node's blackboard.
struct EvolvableAgent {
    std::uint32_t id = 0;
    Individual current;
};

// Per-node shared state: the live solution of every local agent (indexed by
// agent id), the gossip cache, the best solution ever recorded on this node,
// and the node's evaluation counter.
struct Blackboard {
    std::uint32_t node_id = 0;
    std::vector<Individual> agents;
    Cache cache;
    std::optional<Individual> best_sol;
    std::uint64_t local_evaluations = 0;
};

Blackboard make_blackboard(std::uint32_t node_id);

// Publishes the agent's initial solution. Ids are dense: agent.id must equal
// the number of agents registered so far; duplicates (and gaps) throw and
// leave the registry unchanged. Seeds best_sol without touching the
// evaluation counter — the initial sweep is not charged against the budget.
void register_agent(Blackboard& bb, const EvolvableAgent& agent);

// All local agents' current solutions followed by all cache solutions, as
// copies, duplicates allowed. Throws on a blackboard with no agents.
std::vector<Individual> selection_pool(const Blackboard& bb);

struct StepOutcome {
    double previous_fitness = 0.0;
    double candidate_fitness = 0.0;
    bool replaced = false;
};

// One loop body of the agent's evolution: select two parents from the
// blackboard pool, recombine, mutate, evaluate (exactly one evaluation,
// recorded on the blackboard), then replace the agent's solution only on
// strict improvement. The agent's published registry entry tracks its
// current solution.
StepOutcome agent_step(EvolvableAgent& agent, Blackboard& bb,
                       const ProblemInstance& inst, const OperatorConfig& cfg,
                       Rng& rng);

// Bumps local_evaluations and keeps best_sol as the running strict minimum
// (ties retain the earlier holder). Throws on an unevaluated individual.
void record_evaluation(Blackboard& bb, const Individual& s);

// local_evaluations plus the sum of cache counters: a lower bound on the
// true global evaluation count, used by the distributed stopping rule.
std::uint64_t global_evaluations(const Blackboard& bb);

inline std::optional<OutboundPing> scheduler_tick(SchedulerState& st,
                                                  const Blackboard& bb,
                                                  Rng& rng, double now) {
    return scheduler_tick(st, std::span<const Individual>(bb.agents),
                          bb.local_evaluations, rng, now);
}

}  // namespace evag
