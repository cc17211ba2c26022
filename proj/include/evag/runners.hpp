#pragma once

#include <cstdint>
#include <vector>

#include "evag/benchmarks.hpp"
#include "evag/ea.hpp"
#include "evag/evoagent.hpp"
#include "evag/gossip.hpp"
#include "evag/netsim.hpp"

namespace evag {

// Timer tags shared by both node runners.
inline constexpr std::uint64_t kAgentTurnTimer = 1;
inline constexpr std::uint64_t kGossipTimer = 2;
inline constexpr std::uint64_t kGenerationTimer = 3;

// Per-evaluation simulated CPU cost (seconds). Agent turns are spaced by
// one evaluation's worth; an island generation occupies population-size
// evaluations' worth.

// One node of the agent model: round-robin agent turns driven by timers,
// plus the gossip scheduler. The node stops stepping agents once its
// global-evaluation estimate reaches the budget, but keeps gossiping so
// frozen counters still spread.
class EvAgNode : public NodeHandler {
  public:
    EvAgNode(std::uint32_t id, std::uint32_t node_count,
             const ProblemInstance& inst, const OperatorConfig& cfg,
             std::uint64_t budget, double eval_cost, std::uint32_t agent_count,
             std::uint64_t run_seed);

    void start(SimNetwork& net);
    void on_message(SimNetwork& net, std::uint32_t from,
                    std::span<const std::uint8_t> payload, double now) override;
    void on_timer(SimNetwork& net, std::uint64_t tag, double now) override;

    bool stopped() const { return stopped_; }
    std::uint64_t steps() const { return steps_; }
    const Blackboard& blackboard() const { return bb_; }
    const SchedulerState& scheduler() const { return sched_; }
    SchedulerState& scheduler() { return sched_; }
    double best_fitness() const;

  private:
    std::uint32_t id_;
    const ProblemInstance* inst_;
    OperatorConfig cfg_;
    std::uint64_t budget_;
    double eval_cost_;
    Blackboard bb_;
    std::vector<EvolvableAgent> agents_;
    SchedulerState sched_;
    Rng ops_rng_;
    Rng gossip_rng_;
    std::size_t next_agent_ = 0;
    std::uint64_t steps_ = 0;
    bool stopped_ = false;
    std::uint64_t malformed_messages_ = 0;
};

// One island: a timer fires at each generation boundary (population-size
// evaluations after the previous one), migrations ride the same simulated
// network as gossip pings. Each island owns a fixed share of the run budget
// and stops at the first boundary where its counter reaches that share.
class IslandNode : public NodeHandler {
  public:
    IslandNode(std::uint32_t id, std::uint32_t node_count,
               const ProblemInstance& inst, const OperatorConfig& cfg,
               std::uint64_t budget_share, double eval_cost,
               std::uint32_t population_size, int migration_frequency,
               std::uint64_t run_seed);

    void start(SimNetwork& net);
    void on_message(SimNetwork& net, std::uint32_t from,
                    std::span<const std::uint8_t> payload, double now) override;
    void on_timer(SimNetwork& net, std::uint64_t tag, double now) override;

    bool stopped() const { return stopped_; }
    const Island& island() const { return island_; }
    double best_fitness() const;

  private:
    std::uint32_t id_;
    const ProblemInstance* inst_;
    OperatorConfig cfg_;
    std::uint64_t budget_share_;
    double eval_cost_;
    int migration_frequency_;
    std::vector<std::uint32_t> peers_;
    Island island_;
    Rng rng_;
    std::uint64_t next_token_ = 0;
    bool stopped_ = false;
    std::uint64_t malformed_messages_ = 0;
};

}  // namespace evag
