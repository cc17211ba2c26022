#include <catch2/catch_amalgamated.hpp>

#include <limits>
#include <vector>

#include "evag/evoagent.hpp"

using namespace evag;

namespace {

Individual point_individual(const ProblemInstance& inst, double coordinate) {
    Vector g = Vector::Constant(inst.dim, coordinate);
    return Individual{g, evaluate(inst, g)};
}

EvolvableAgent make_agent(std::uint32_t id, Individual sol) {
    return EvolvableAgent{id, std::move(sol)};
}

}  // namespace

TEST_CASE("registration publishes solutions to the pool", "[evoagent]") {
    const auto inst = make_instance(ProblemKind::ShiftedSphere, 3, 1);
    auto bb = make_blackboard(0);

    for (std::uint32_t id = 0; id < 64; ++id)
        register_agent(bb, make_agent(id, point_individual(inst, 0.5 * id)));

    const auto pool = selection_pool(bb);
    REQUIRE(pool.size() == 64);
    for (std::uint32_t id = 0; id < 64; ++id)
        REQUIRE(pool[id].genome[0] == 0.5 * id);
    REQUIRE(bb.local_evaluations == 0);  // the initial sweep is free
    REQUIRE(bb.best_sol.has_value());
}

TEST_CASE("registration preconditions", "[evoagent]") {
    const auto inst = make_instance(ProblemKind::ShiftedSphere, 3, 1);
    auto bb = make_blackboard(0);
    register_agent(bb, make_agent(0, point_individual(inst, 1.0)));

    SECTION("duplicate id leaves the registry unchanged") {
        REQUIRE_THROWS_AS(register_agent(bb, make_agent(0, point_individual(inst, 2.0))),
                          std::invalid_argument);
        REQUIRE(bb.agents.size() == 1);
        REQUIRE(bb.agents[0].genome[0] == 1.0);
    }
    SECTION("gap in ids") {
        REQUIRE_THROWS_AS(register_agent(bb, make_agent(5, point_individual(inst, 2.0))),
                          std::invalid_argument);
        REQUIRE(bb.agents.size() == 1);
    }
    SECTION("unevaluated solution") {
        EvolvableAgent blank{1, Individual{Vector::Zero(3), std::nullopt}};
        REQUIRE_THROWS_AS(register_agent(bb, blank), std::invalid_argument);
    }
}

TEST_CASE("selection pool is agents then cache, newest entries visible",
          "[evoagent]") {
    const auto inst = make_instance(ProblemKind::ShiftedSphere, 3, 2);
    auto bb = make_blackboard(0);
    for (std::uint32_t id = 0; id < 4; ++id)
        register_agent(bb, make_agent(id, point_individual(inst, 1.0 + id)));
    REQUIRE(selection_pool(bb).size() == 4);

    cache_insert(bb.cache, Contribution{3, 10, point_individual(inst, -1.0)});
    cache_insert(bb.cache, Contribution{1, 12, point_individual(inst, -2.0)});
    cache_insert(bb.cache, Contribution{7, 9, point_individual(inst, -3.0)});

    auto pool = selection_pool(bb);
    REQUIRE(pool.size() == 7);
    REQUIRE(pool[4].genome[0] == -2.0);  // address 1
    REQUIRE(pool[5].genome[0] == -1.0);  // address 3
    REQUIRE(pool[6].genome[0] == -3.0);  // address 7

    // A fresher contribution from peer 3 replaces its slot in the next pool.
    cache_insert(bb.cache, Contribution{3, 20, point_individual(inst, 4.0)});
    pool = selection_pool(bb);
    REQUIRE(pool.size() == 7);
    REQUIRE(pool[5].genome[0] == 4.0);
    for (const auto& entry : pool) REQUIRE(entry.genome[0] != -1.0);

    const auto empty_bb = make_blackboard(1);
    REQUIRE_THROWS_AS(selection_pool(empty_bb), std::invalid_argument);
}

TEST_CASE("a uniform pool with pm = 0 is a fixed point", "[evoagent]") {
    const auto inst = make_instance(ProblemKind::ShiftedSphere, 3, 3);
    auto bb = make_blackboard(0);
    const auto sol = point_individual(inst, 2.0);
    register_agent(bb, make_agent(0, sol));
    register_agent(bb, make_agent(1, sol));

    EvolvableAgent agent = make_agent(0, sol);
    OperatorConfig cfg;
    cfg.pm = 0.0;
    Rng rng(9);
    for (int i = 0; i < 20; ++i) {
        const auto outcome = agent_step(agent, bb, inst, cfg, rng);
        REQUIRE(outcome.previous_fitness == *sol.fitness);
        REQUIRE(outcome.candidate_fitness == *sol.fitness);
        REQUIRE_FALSE(outcome.replaced);
        REQUIRE((agent.current.genome.array() == sol.genome.array()).all());
    }
    REQUIRE(bb.local_evaluations == 20);  // exactly one evaluation per step
    REQUIRE(*bb.best_sol->fitness == *sol.fitness);
}

TEST_CASE("agents adopt strictly better candidates and publish them",
          "[evoagent]") {
    const auto inst = make_instance(ProblemKind::ShiftedSphere, 3, 4);
    auto bb = make_blackboard(0);
    const auto far = point_individual(inst, 90.0);
    const auto good = Individual{optimum_of(inst), inst.f_bias};
    register_agent(bb, make_agent(0, far));
    register_agent(bb, make_agent(1, good));
    REQUIRE(*bb.best_sol->fitness == inst.f_bias);

    EvolvableAgent agent = make_agent(0, far);
    OperatorConfig cfg;
    cfg.pm = 0.0;
    cfg.pc = 0.0;  // the child copies the sample's better parent verbatim
    Rng rng(11);

    int steps = 0;
    StepOutcome outcome;
    do {
        outcome = agent_step(agent, bb, inst, cfg, rng);
        steps += 1;
        if (!outcome.replaced) {
            REQUIRE(*agent.current.fitness == *far.fitness);
            REQUIRE(bb.agents[0].genome[0] == 90.0);
        }
        REQUIRE(steps < 100);
    } while (!outcome.replaced);

    REQUIRE(outcome.candidate_fitness == inst.f_bias);
    REQUIRE(*agent.current.fitness == inst.f_bias);
    REQUIRE((bb.agents[0].genome.array() == good.genome.array()).all());
    REQUIRE(bb.local_evaluations == static_cast<std::uint64_t>(steps));
}

TEST_CASE("worse candidates never displace the current solution",
          "[evoagent]") {
    const auto inst = make_instance(ProblemKind::ShiftedSphere, 3, 5);
    auto bb = make_blackboard(0);
    const auto good = Individual{optimum_of(inst), inst.f_bias};
    const auto far = point_individual(inst, 90.0);
    register_agent(bb, make_agent(0, good));
    register_agent(bb, make_agent(1, far));

    EvolvableAgent agent = make_agent(0, good);
    OperatorConfig cfg;
    cfg.pm = 0.0;
    cfg.pc = 0.0;
    Rng rng(12);
    int strictly_worse = 0;
    for (int i = 0; i < 30; ++i) {
        const auto outcome = agent_step(agent, bb, inst, cfg, rng);
        REQUIRE_FALSE(outcome.replaced);
        REQUIRE(outcome.candidate_fitness >= outcome.previous_fitness);
        if (outcome.candidate_fitness > outcome.previous_fitness)
            strictly_worse += 1;
        REQUIRE(*agent.current.fitness == inst.f_bias);
    }
    REQUIRE(strictly_worse > 0);
    REQUIRE(*bb.best_sol->fitness == inst.f_bias);
}

TEST_CASE("agent_step preconditions", "[evoagent]") {
    const auto inst = make_instance(ProblemKind::ShiftedSphere, 3, 6);
    auto bb = make_blackboard(0);
    OperatorConfig cfg;
    Rng rng(1);

    EvolvableAgent unregistered = make_agent(0, point_individual(inst, 1.0));
    REQUIRE_THROWS_AS(agent_step(unregistered, bb, inst, cfg, rng),
                      std::invalid_argument);

    register_agent(bb, make_agent(0, point_individual(inst, 1.0)));
    EvolvableAgent lonely = make_agent(0, point_individual(inst, 1.0));
    REQUIRE_THROWS_AS(agent_step(lonely, bb, inst, cfg, rng),
                      std::invalid_argument);
}

TEST_CASE("evaluation bookkeeping", "[evoagent]") {
    auto bb = make_blackboard(0);
    auto ind = [](double marker, double f) {
        return Individual{Vector::Constant(1, marker), f};
    };

    SECTION("counts every call") {
        for (int i = 1; i <= 5; ++i) {
            record_evaluation(bb, ind(0.0, 10.0 + i));
            REQUIRE(bb.local_evaluations == static_cast<std::uint64_t>(i));
        }
    }
    SECTION("keeps the running minimum") {
        record_evaluation(bb, ind(1.0, 5.0));
        record_evaluation(bb, ind(2.0, 3.0));
        record_evaluation(bb, ind(3.0, 4.0));
        REQUIRE(*bb.best_sol->fitness == 3.0);
        REQUIRE(bb.best_sol->genome[0] == 2.0);
    }
    SECTION("ties retain the earlier holder") {
        record_evaluation(bb, ind(1.0, 3.0));
        record_evaluation(bb, ind(2.0, 3.0));
        REQUIRE(bb.best_sol->genome[0] == 1.0);
    }
    SECTION("rejects unevaluated individuals") {
        REQUIRE_THROWS_AS(record_evaluation(bb, Individual{Vector::Zero(1), {}}),
                          std::invalid_argument);
        REQUIRE(bb.local_evaluations == 0);
    }
}

TEST_CASE("global evaluations sum local work and cache reports", "[evoagent]") {
    auto bb = make_blackboard(0);
    auto ind = [](double f) { return Individual{Vector::Constant(1, 0.0), f}; };

    SECTION("degenerate network") {
        bb.local_evaluations = 100;
        REQUIRE(global_evaluations(bb) == 100);
    }
    SECTION("summation across the cache") {
        bb.local_evaluations = 50;
        cache_insert(bb.cache, Contribution{1, 30, ind(1.0)});
        cache_insert(bb.cache, Contribution{2, 20, ind(2.0)});
        REQUIRE(global_evaluations(bb) == 100);
    }
    SECTION("monotone under any mix of updates") {
        std::uint64_t last = global_evaluations(bb);
        const auto check = [&] {
            const auto now = global_evaluations(bb);
            REQUIRE(now >= last);
            last = now;
        };
        record_evaluation(bb, ind(9.0));
        check();
        cache_insert(bb.cache, Contribution{1, 5, ind(1.0)});
        check();
        cache_insert(bb.cache, Contribution{1, 3, ind(0.5)});  // stale, ignored
        check();
        cache_insert(bb.cache, Contribution{1, 8, ind(0.2)});
        check();
        cache_insert(bb.cache, Contribution{4, 2, ind(0.1)});
        check();
        record_evaluation(bb, ind(8.0));
        check();
        REQUIRE(last == 12);  // 2 local + 8 from peer 1 + 2 from peer 4
    }
}

TEST_CASE("a node full of agents descends greedily with global elitism",
          "[evoagent]") {
    const auto inst = make_instance(ProblemKind::ShiftedRotatedRastrigin, 4, 7);
    auto bb = make_blackboard(0);
    Rng init(21);
    std::vector<EvolvableAgent> agents;
    for (std::uint32_t id = 0; id < 8; ++id) {
        Vector g(inst.dim);
        for (int d = 0; d < inst.dim; ++d)
            g[d] = init.uniform(inst.lower[d], inst.upper[d]);
        EvolvableAgent agent{id, Individual{g, evaluate(inst, g)}};
        register_agent(bb, agent);
        agents.push_back(std::move(agent));
    }

    OperatorConfig cfg;
    cfg.pm = 0.05;
    Rng rng(22);
    double seen_min = *bb.best_sol->fitness;
    for (int step = 0; step < 300; ++step) {
        auto& agent = agents[step % agents.size()];
        const double before = *agent.current.fitness;
        const auto outcome = agent_step(agent, bb, inst, cfg, rng);
        REQUIRE(*agent.current.fitness <= before);  // greedy descent
        seen_min = std::min(seen_min, outcome.candidate_fitness);
        REQUIRE(*bb.best_sol->fitness <= seen_min);
        for (const auto& published : bb.agents)
            REQUIRE(*bb.best_sol->fitness <= *published.fitness);
    }
    REQUIRE(bb.local_evaluations == 300);
}

TEST_CASE("scheduler ticks draw pings straight off the blackboard",
          "[evoagent]") {
    const auto inst = make_instance(ProblemKind::ShiftedSphere, 3, 8);
    auto bb = make_blackboard(4);
    register_agent(bb, make_agent(0, point_individual(inst, 1.0)));
    register_agent(bb, make_agent(1, point_individual(inst, 2.0)));
    bb.local_evaluations = 17;

    SchedulerState st;
    st.node_id = 4;
    st.directory = {0, 1, 2, 3, 5};
    Rng rng(31);
    const auto out = scheduler_tick(st, bb, rng, 0.5);
    REQUIRE(out.has_value());
    REQUIRE(out->ping.contribution.address == 4);
    REQUIRE(out->ping.contribution.num_evaluations == 17);
    const double gene = out->ping.contribution.solution.genome[0];
    REQUIRE((gene == 1.0 || gene == 2.0));
    REQUIRE(st.pending.count(out->ping.token) == 1);
}
