#include "evag/evoagent.hpp"

#include <stdexcept>
#include <utility>

namespace evag {

namespace {

// Parents are drawn over local agents followed by cache entries without
// materializing the pool; indexing matches selection_pool()'s order.
struct BlackboardPool {
    const std::vector<Individual>* agents;
    const std::vector<Contribution>* cache;

    std::size_t size() const { return agents->size() + cache->size(); }
    const Individual& operator[](std::size_t i) const {
        return i < agents->size() ? (*agents)[i]
                                  : (*cache)[i - agents->size()].solution;
    }
};

}  // namespace

Blackboard make_blackboard(std::uint32_t node_id) {
    Blackboard bb;
    bb.node_id = node_id;
    bb.cache.owner = node_id;
    return bb;
}

void register_agent(Blackboard& bb, const EvolvableAgent& agent) {
    if (!agent.current.fitness)
        throw std::invalid_argument("register_agent: unevaluated solution");
    if (agent.id < bb.agents.size())
        throw std::invalid_argument("register_agent: duplicate agent id");
    if (agent.id != bb.agents.size())
        throw std::invalid_argument("register_agent: ids must be dense");
    bb.agents.push_back(agent.current);
    if (!bb.best_sol || is_better(agent.current, *bb.best_sol))
        bb.best_sol = agent.current;
}

std::vector<Individual> selection_pool(const Blackboard& bb) {
    if (bb.agents.empty())
        throw std::invalid_argument("selection_pool: no registered agents");
    std::vector<Individual> pool;
    pool.reserve(bb.agents.size() + bb.cache.entries.size());
    pool.insert(pool.end(), bb.agents.begin(), bb.agents.end());
    for (const Contribution& c : bb.cache.entries) pool.push_back(c.solution);
    return pool;
}

StepOutcome agent_step(EvolvableAgent& agent, Blackboard& bb,
                       const ProblemInstance& inst, const OperatorConfig& cfg,
                       Rng& rng) {
    if (agent.id >= bb.agents.size())
        throw std::invalid_argument("agent_step: agent not registered");

    const BlackboardPool pool{&bb.agents, &bb.cache.entries};
    if (pool.size() < 2)
        throw std::invalid_argument("agent_step: selection pool underflow");

    const auto [pa, pb] = select_parent_indices(pool, cfg.k, rng, cfg.selection);
    Vector child = uniform_crossover(pool[pa], pool[pb], cfg.pc, rng);
    child = uniform_mutation(std::move(child), cfg.pm, inst.lower, inst.upper, rng);
    const double fitness = evaluate(inst, child);

    Individual candidate{std::move(child), fitness};
    record_evaluation(bb, candidate);

    StepOutcome outcome;
    outcome.previous_fitness = *agent.current.fitness;
    outcome.candidate_fitness = fitness;
    outcome.replaced = fitness < outcome.previous_fitness;
    if (outcome.replaced) {
        agent.current = std::move(candidate);
        bb.agents[agent.id] = agent.current;
    }
    return outcome;
}

void record_evaluation(Blackboard& bb, const Individual& s) {
    if (!s.fitness)
        throw std::invalid_argument("record_evaluation: unevaluated individual");
    ++bb.local_evaluations;
    if (!bb.best_sol || is_better(s, *bb.best_sol)) bb.best_sol = s;
}

std::uint64_t global_evaluations(const Blackboard& bb) {
    return bb.local_evaluations + bb.cache.eval_sum;
}

}  // namespace evag
