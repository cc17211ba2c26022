#include "evag/runners.hpp"

namespace evag {

namespace {

std::vector<std::uint32_t> peer_list(std::uint32_t id, std::uint32_t node_count) {
    std::vector<std::uint32_t> peers;
    peers.reserve(node_count > 0 ? node_count - 1 : 0);
    for (std::uint32_t p = 0; p < node_count; ++p)
        if (p != id) peers.push_back(p);
    return peers;
}

// Seed salts keep the ops, gossip, and init streams of every node disjoint.
constexpr std::uint64_t kOpsSalt = 0xA000;
constexpr std::uint64_t kGossipSalt = 0xB000;
constexpr std::uint64_t kInitSalt = 0xC000;

}  // namespace

EvAgNode::EvAgNode(std::uint32_t id, std::uint32_t node_count,
                   const ProblemInstance& inst, const OperatorConfig& cfg,
                   std::uint64_t budget, double eval_cost,
                   std::uint32_t agent_count, std::uint64_t run_seed)
    : id_(id),
      inst_(&inst),
      cfg_(cfg),
      budget_(budget),
      eval_cost_(eval_cost),
      bb_(make_blackboard(id)),
      ops_rng_(derive_seed(run_seed, kOpsSalt + id)),
      gossip_rng_(derive_seed(run_seed, kGossipSalt + id)) {
    if (agent_count == 0)
        throw std::invalid_argument("EvAgNode: need at least one agent");

    sched_.node_id = id;
    sched_.directory = peer_list(id, node_count);

    Rng init_rng(derive_seed(run_seed, kInitSalt + id));
    agents_.reserve(agent_count);
    for (std::uint32_t a = 0; a < agent_count; ++a) {
        Vector g(inst.dim);
        for (int d = 0; d < inst.dim; ++d)
            g[d] = init_rng.uniform(inst.lower[d], inst.upper[d]);
        const double f = evaluate(inst, g);
        agents_.push_back(EvolvableAgent{a, Individual{std::move(g), f}});
        register_agent(bb_, agents_.back());
    }
}

void EvAgNode::start(SimNetwork& net) {
    net.schedule_timer(id_, kAgentTurnTimer, net.now());
    if (!sched_.directory.empty())
        net.schedule_timer(id_, kGossipTimer, net.now() + sched_.delta_t);
}

double EvAgNode::best_fitness() const {
    if (!bb_.best_sol || !bb_.best_sol->fitness)
        throw std::logic_error("EvAgNode: no best solution yet");
    return *bb_.best_sol->fitness;
}

void EvAgNode::on_timer(SimNetwork& net, std::uint64_t tag, double now) {
    if (tag == kAgentTurnTimer) {
        if (stopped_) return;
        if (global_evaluations(bb_) >= budget_) {
            stopped_ = true;
            return;
        }
        // A lone agent has no mate until gossip delivers one; idle the turn
        // instead of selecting from a single-entry pool.
        if (bb_.agents.size() + bb_.cache.entries.size() < 2) {
            net.schedule_timer(id_, kAgentTurnTimer, now + eval_cost_);
            return;
        }
        agent_step(agents_[next_agent_], bb_, *inst_, cfg_, ops_rng_);
        ++steps_;
        next_agent_ = (next_agent_ + 1) % agents_.size();
        net.schedule_timer(id_, kAgentTurnTimer, now + eval_cost_);
        return;
    }
    if (tag == kGossipTimer) {
        // Gossip outlives the local stop so frozen evaluation counters keep
        // spreading until every node has heard enough to stop too.
        if (auto out = scheduler_tick(sched_, bb_, gossip_rng_, now))
            net.send(id_, out->target, encode_message(out->ping), now);
        net.schedule_timer(id_, kGossipTimer, now + sched_.delta_t);
    }
}

void EvAgNode::on_message(SimNetwork& net, std::uint32_t /*from*/,
                          std::span<const std::uint8_t> payload, double now) {
    GossipMessage msg;
    try {
        msg = decode_message(payload);
    } catch (const CodecError&) {
        ++malformed_messages_;
        return;
    }
    if (const auto* ping = std::get_if<PingMessage>(&msg)) {
        if (auto pong = handle_ping(sched_, bb_.cache, *ping, now))
            net.send(id_, ping->contribution.address, encode_message(*pong), now);
        return;
    }
    const auto& pong = std::get<PongMessage>(msg);
    handle_pong(sched_, pong.token, now);
}

IslandNode::IslandNode(std::uint32_t id, std::uint32_t node_count,
                       const ProblemInstance& inst, const OperatorConfig& cfg,
                       std::uint64_t budget_share, double eval_cost,
                       std::uint32_t population_size, int migration_frequency,
                       std::uint64_t run_seed)
    : id_(id),
      inst_(&inst),
      cfg_(cfg),
      budget_share_(budget_share),
      eval_cost_(eval_cost),
      migration_frequency_(migration_frequency),
      peers_(peer_list(id, node_count)),
      rng_(derive_seed(run_seed, kOpsSalt + id)) {
    Rng init_rng(derive_seed(run_seed, kInitSalt + id));
    island_ = make_island(id, population_size, inst, init_rng);
}

void IslandNode::start(SimNetwork& net) {
    if (budget_share_ == 0) {  // possible when budget < nodes
        stopped_ = true;
        return;
    }
    const double gen_cost =
        eval_cost_ * static_cast<double>(island_.population.size());
    net.schedule_timer(id_, kGenerationTimer, net.now() + gen_cost);
}

double IslandNode::best_fitness() const {
    if (!island_.elite.fitness)
        throw std::logic_error("IslandNode: unevaluated elite");
    return *island_.elite.fitness;
}

void IslandNode::on_timer(SimNetwork& net, std::uint64_t tag, double now) {
    if (tag != kGenerationTimer || stopped_) return;

    island_generation(island_, *inst_, cfg_, rng_);

    if (migration_frequency_ > 0 && !peers_.empty() &&
        island_.generation % static_cast<std::uint64_t>(migration_frequency_) == 0) {
        const std::uint32_t target = peers_[rng_.uniform_index(peers_.size())];
        const PingMessage msg{next_token_++, migration_event(island_)};
        net.send(id_, target, encode_message(msg), now);
    }

    if (island_.evaluations >= budget_share_) {
        stopped_ = true;
        return;
    }
    const double gen_cost =
        eval_cost_ * static_cast<double>(island_.population.size());
    net.schedule_timer(id_, kGenerationTimer, now + gen_cost);
}

void IslandNode::on_message(SimNetwork& /*net*/, std::uint32_t /*from*/,
                            std::span<const std::uint8_t> payload,
                            double /*now*/) {
    GossipMessage msg;
    try {
        msg = decode_message(payload);
    } catch (const CodecError&) {
        ++malformed_messages_;
        return;
    }
    // Islands neither pong nor track tokens; a migrant just joins the inbox.
    if (const auto* ping = std::get_if<PingMessage>(&msg))
        island_.inbox.push_back(ping->contribution.solution);
}

}  // namespace evag
