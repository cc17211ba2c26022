#include <catch2/catch_amalgamated.hpp>

#include <unistd.h>

#include <array>
#include <cstring>
#include <vector>

#include "evag/gossip.hpp"

using namespace evag;

namespace {

Individual make_ind(std::initializer_list<double> genes, double fitness) {
    Vector g(static_cast<Eigen::Index>(genes.size()));
    Eigen::Index i = 0;
    for (const double v : genes) g[i++] = v;
    return Individual{std::move(g), fitness};
}

PingMessage sample_ping() {
    PingMessage ping;
    ping.token = 0x0102030405060708ull;
    ping.contribution.address = 0x0A0B0C0Du;
    ping.contribution.num_evaluations = 0x1112131415161718ull;
    ping.contribution.solution = make_ind({1.5, -2.25}, -450.0);
    return ping;
}

}  // namespace

TEST_CASE("ping encoding is bit-exact", "[gossip]") {
    const auto bytes = encode_message(sample_ping());
    const std::array<std::uint8_t, 47> expected = {
        0x01,                                            // tag
        0x08, 0x07, 0x06, 0x05, 0x04, 0x03, 0x02, 0x01,  // token
        0x0D, 0x0C, 0x0B, 0x0A,                          // sender
        0x18, 0x17, 0x16, 0x15, 0x14, 0x13, 0x12, 0x11,  // evaluations
        0x02, 0x00,                                      // genome length
        0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0xF8, 0x3F,  // 1.5
        0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x02, 0xC0,  // -2.25
        0x00, 0x00, 0x00, 0x00, 0x00, 0x20, 0x7C, 0xC0,  // -450.0
    };
    REQUIRE(bytes.size() == expected.size());
    for (std::size_t i = 0; i < expected.size(); ++i) {
        INFO("byte " << i);
        REQUIRE(bytes[i] == expected[i]);
    }
}

TEST_CASE("pong encoding is bit-exact", "[gossip]") {
    const auto bytes = encode_message(PongMessage{0xDEADBEEFCAFEF00Dull, 7});
    const std::array<std::uint8_t, 13> expected = {
        0x02,                                            // tag
        0x0D, 0xF0, 0xFE, 0xCA, 0xEF, 0xBE, 0xAD, 0xDE,  // token
        0x07, 0x00, 0x00, 0x00,                          // sender
    };
    REQUIRE(bytes.size() == expected.size());
    for (std::size_t i = 0; i < expected.size(); ++i) {
        INFO("byte " << i);
        REQUIRE(bytes[i] == expected[i]);
    }
}

TEST_CASE("messages survive an encode/decode round trip", "[gossip]") {
    SECTION("ping") {
        const auto original = sample_ping();
        const auto decoded = decode_message(encode_message(original));
        const auto* ping = std::get_if<PingMessage>(&decoded);
        REQUIRE(ping != nullptr);
        REQUIRE(ping->token == original.token);
        REQUIRE(ping->contribution.address == original.contribution.address);
        REQUIRE(ping->contribution.num_evaluations ==
                original.contribution.num_evaluations);
        REQUIRE((ping->contribution.solution.genome.array() ==
                 original.contribution.solution.genome.array()).all());
        REQUIRE(*ping->contribution.solution.fitness == -450.0);
    }
    SECTION("pong") {
        const auto decoded =
            decode_message(encode_message(PongMessage{42, 3}));
        const auto* pong = std::get_if<PongMessage>(&decoded);
        REQUIRE(pong != nullptr);
        REQUIRE(pong->token == 42);
        REQUIRE(pong->sender == 3);
    }
    SECTION("variant dispatch") {
        const GossipMessage m = PongMessage{1, 2};
        REQUIRE(encode_message(m) == encode_message(PongMessage{1, 2}));
    }
    SECTION("empty genome is wire-legal") {
        PingMessage ping;
        ping.contribution.solution.fitness = 0.0;
        ping.contribution.solution.genome = Vector(0);
        const auto bytes = encode_message(ping);
        REQUIRE(bytes.size() == 31);
        REQUIRE(std::holds_alternative<PingMessage>(decode_message(bytes)));
    }
}

TEST_CASE("encoding rejects unencodable pings", "[gossip]") {
    PingMessage ping = sample_ping();
    ping.contribution.solution.fitness.reset();
    REQUIRE_THROWS_AS(encode_message(ping), CodecError);

    ping = sample_ping();
    ping.contribution.solution.genome = Vector::Zero(0x10000);
    ping.contribution.solution.fitness = 0.0;
    REQUIRE_THROWS_AS(encode_message(ping), CodecError);
}

TEST_CASE("decoding rejects malformed buffers", "[gossip]") {
    const auto ping = encode_message(sample_ping());
    const auto pong = encode_message(PongMessage{1, 2});

    SECTION("empty") {
        REQUIRE_THROWS_AS(decode_message({}), CodecError);
    }
    SECTION("unknown tag") {
        std::vector<std::uint8_t> bad = pong;
        bad[0] = 3;
        REQUIRE_THROWS_AS(decode_message(bad), CodecError);
    }
    SECTION("truncated pong") {
        std::vector<std::uint8_t> bad(pong.begin(), pong.end() - 1);
        REQUIRE_THROWS_AS(decode_message(bad), CodecError);
    }
    SECTION("trailing byte after pong") {
        std::vector<std::uint8_t> bad = pong;
        bad.push_back(0);
        REQUIRE_THROWS_AS(decode_message(bad), CodecError);
    }
    SECTION("ping truncated inside the genome") {
        std::vector<std::uint8_t> bad(ping.begin(), ping.begin() + 30);
        REQUIRE_THROWS_AS(decode_message(bad), CodecError);
    }
    SECTION("declared genome length exceeds the payload") {
        std::vector<std::uint8_t> bad = ping;
        bad[21] = 0xFF;  // genome length low byte
        REQUIRE_THROWS_AS(decode_message(bad), CodecError);
    }
    SECTION("trailing bytes after ping") {
        std::vector<std::uint8_t> bad = ping;
        bad.push_back(0xAA);
        REQUIRE_THROWS_AS(decode_message(bad), CodecError);
    }
}

TEST_CASE("frames reassemble from arbitrary chunking", "[gossip]") {
    const auto ping = encode_message(sample_ping());
    const auto pong = encode_message(PongMessage{9, 1});
    std::vector<std::uint8_t> stream;
    append_frame(stream, ping);
    append_frame(stream, pong);
    REQUIRE(stream.size() == ping.size() + pong.size() + 8);

    SECTION("single feed") {
        FrameReader reader;
        reader.feed(stream);
        REQUIRE(reader.next().value() == ping);
        REQUIRE(reader.next().value() == pong);
        REQUIRE_FALSE(reader.next().has_value());
    }
    SECTION("byte-by-byte feed") {
        FrameReader reader;
        std::vector<std::vector<std::uint8_t>> got;
        for (const std::uint8_t byte : stream) {
            reader.feed({&byte, 1});
            while (auto payload = reader.next()) got.push_back(*payload);
        }
        REQUIRE(got.size() == 2);
        REQUIRE(got[0] == ping);
        REQUIRE(got[1] == pong);
    }
    SECTION("incomplete frame stays buffered") {
        FrameReader reader;
        reader.feed({stream.data(), stream.size() - 1});
        REQUIRE(reader.next().value() == ping);
        REQUIRE_FALSE(reader.next().has_value());
        reader.feed({stream.data() + stream.size() - 1, 1});
        REQUIRE(reader.next().value() == pong);
    }
    SECTION("absurd declared length") {
        FrameReader reader;
        const std::vector<std::uint8_t> bad = {0xFF, 0xFF, 0xFF, 0xFF};
        reader.feed(bad);
        REQUIRE_THROWS_AS(reader.next(), CodecError);
    }
    SECTION("oversized payload refuses to frame") {
        std::vector<std::uint8_t> sink;
        const std::vector<std::uint8_t> huge((1u << 20) + 1, 0);
        REQUIRE_THROWS_AS(append_frame(sink, huge), CodecError);
    }
}

TEST_CASE("framed messages cross a pipe intact", "[gossip]") {
    const auto ping = encode_message(sample_ping());
    const auto pong = encode_message(PongMessage{77, 4});
    std::vector<std::uint8_t> stream;
    append_frame(stream, ping);
    append_frame(stream, pong);

    int fds[2];
    REQUIRE(pipe(fds) == 0);
    REQUIRE(write(fds[1], stream.data(), stream.size()) ==
            static_cast<ssize_t>(stream.size()));
    close(fds[1]);

    FrameReader reader;
    std::vector<GossipMessage> received;
    std::uint8_t chunk[11];  // deliberately misaligned with frame boundaries
    ssize_t n = 0;
    while ((n = read(fds[0], chunk, sizeof chunk)) > 0) {
        reader.feed({chunk, static_cast<std::size_t>(n)});
        while (auto payload = reader.next())
            received.push_back(decode_message(*payload));
    }
    close(fds[0]);

    REQUIRE(received.size() == 2);
    REQUIRE(std::get<PingMessage>(received[0]).token == sample_ping().token);
    REQUIRE(std::get<PongMessage>(received[1]).token == 77);
}

TEST_CASE("cache keeps the freshest contribution per peer", "[gossip]") {
    Cache cache;
    cache.owner = 0;

    const Contribution first{2, 10, make_ind({1.0}, 5.0)};
    REQUIRE(cache_insert(cache, first));
    REQUIRE(cache.entries.size() == 1);
    REQUIRE(cache.eval_sum == 10);

    SECTION("stale updates are ignored") {
        REQUIRE_FALSE(cache_insert(cache, Contribution{2, 9, make_ind({9.0}, 0.0)}));
        REQUIRE(*cache_find(cache, 2)->solution.fitness == 5.0);
        REQUIRE(cache.eval_sum == 10);
    }
    SECTION("equal counters replace (newest wins)") {
        REQUIRE(cache_insert(cache, Contribution{2, 10, make_ind({9.0}, 1.0)}));
        REQUIRE(*cache_find(cache, 2)->solution.fitness == 1.0);
        REQUIRE(cache.eval_sum == 10);
    }
    SECTION("fresher counters replace and update the sum") {
        REQUIRE(cache_insert(cache, Contribution{2, 25, make_ind({9.0}, 1.0)}));
        REQUIRE(cache.entries.size() == 1);
        REQUIRE(cache.eval_sum == 25);
    }
    SECTION("one slot per peer, sorted by address") {
        REQUIRE(cache_insert(cache, Contribution{7, 3, make_ind({1.0}, 2.0)}));
        REQUIRE(cache_insert(cache, Contribution{1, 4, make_ind({1.0}, 3.0)}));
        REQUIRE(cache.entries.size() == 3);
        REQUIRE(cache.entries[0].address == 1);
        REQUIRE(cache.entries[1].address == 2);
        REQUIRE(cache.entries[2].address == 7);
        REQUIRE(cache.eval_sum == 17);
    }
    SECTION("lookups") {
        REQUIRE(cache_find(cache, 2) != nullptr);
        REQUIRE(cache_find(cache, 3) == nullptr);
    }
    SECTION("the owner never caches itself") {
        REQUIRE_THROWS_AS(cache_insert(cache, Contribution{0, 1, first.solution}),
                          std::invalid_argument);
    }
}

TEST_CASE("scheduler ticks ping uniformly random peers", "[gossip]") {
    SchedulerState st;
    st.node_id = 0;
    st.directory = {1, 2, 3, 4, 5, 6, 7};
    std::vector<Individual> agents;
    for (int i = 0; i < 4; ++i)
        agents.push_back(make_ind({static_cast<double>(i)}, i));
    Rng rng(404);

    std::map<std::uint32_t, int> target_counts;
    std::map<double, int> solution_counts;
    const int ticks = 14000;
    for (int i = 0; i < ticks; ++i) {
        const auto out = scheduler_tick(st, agents, 50, rng, 0.0);
        REQUIRE(out.has_value());
        REQUIRE(out->ping.token == static_cast<std::uint64_t>(i));
        REQUIRE(out->ping.contribution.address == 0);
        REQUIRE(out->ping.contribution.num_evaluations == 50);
        target_counts[out->target] += 1;
        solution_counts[out->ping.contribution.solution.genome[0]] += 1;
    }
    REQUIRE(st.pending.size() == static_cast<std::size_t>(ticks));
    REQUIRE(target_counts.size() == 7);
    for (const auto& [target, count] : target_counts) {
        REQUIRE(count > 1900);  // 14000 / 7 = 2000 expected
        REQUIRE(count < 2100);
    }
    REQUIRE(solution_counts.size() == 4);
    for (const auto& [gene, count] : solution_counts) {
        REQUIRE(count > 3300);  // 14000 / 4 = 3500 expected
        REQUIRE(count < 3700);
    }
}

TEST_CASE("scheduler edge cases", "[gossip]") {
    SchedulerState st;
    st.node_id = 0;
    std::vector<Individual> agents = {make_ind({0.0}, 0.0)};
    Rng rng(1);

    SECTION("no peers, no ping") {
        REQUIRE_FALSE(scheduler_tick(st, agents, 0, rng, 0.0).has_value());
        REQUIRE(st.next_token == 0);
    }
    SECTION("peers but no agents") {
        st.directory = {1};
        const std::vector<Individual> none;
        REQUIRE_THROWS_AS(scheduler_tick(st, none, 0, rng, 0.0),
                          std::invalid_argument);
    }
    SECTION("unanswered pings expire after 10x the ceiling") {
        st.directory = {1};
        scheduler_tick(st, agents, 0, rng, 0.0);
        REQUIRE(st.pending.size() == 1);
        scheduler_tick(st, agents, 0, rng, 100.0 + 1e-9);
        REQUIRE(st.expired_pings == 1);
        REQUIRE(st.pending.size() == 1);  // only the fresh ping remains
        REQUIRE(st.pending.count(1) == 1);
    }
}

TEST_CASE("ping handling caches and answers", "[gossip]") {
    SchedulerState st;
    st.node_id = 5;
    Cache cache;
    cache.owner = 5;

    PingMessage ping;
    ping.token = 99;
    ping.contribution = Contribution{2, 40, make_ind({1.0, 2.0}, 3.0)};

    SECTION("well-formed contributions are cached and answered") {
        const auto pong = handle_ping(st, cache, ping, 1.0);
        REQUIRE(pong.has_value());
        REQUIRE(pong->token == 99);
        REQUIRE(pong->sender == 5);
        REQUIRE(cache_find(cache, 2) != nullptr);
        REQUIRE(cache.eval_sum == 40);
        REQUIRE(st.dropped_contributions == 0);
    }
    SECTION("self-addressed contributions are dropped") {
        ping.contribution.address = 5;
        REQUIRE_FALSE(handle_ping(st, cache, ping, 1.0).has_value());
        REQUIRE(st.dropped_contributions == 1);
        REQUIRE(cache.entries.empty());
    }
    SECTION("unevaluated solutions are dropped") {
        ping.contribution.solution.fitness.reset();
        REQUIRE_FALSE(handle_ping(st, cache, ping, 1.0).has_value());
        REQUIRE(st.dropped_contributions == 1);
    }
    SECTION("empty genomes are dropped") {
        ping.contribution.solution.genome = Vector(0);
        REQUIRE_FALSE(handle_ping(st, cache, ping, 1.0).has_value());
        REQUIRE(st.dropped_contributions == 1);
    }
}

TEST_CASE("pong handling adapts the refresh rate to the RTT", "[gossip]") {
    SchedulerState st;
    st.node_id = 0;
    st.directory = {1};
    std::vector<double> adaptations;
    st.adapt_log = &adaptations;
    std::vector<Individual> agents = {make_ind({0.0}, 0.0)};
    Rng rng(2);

    const auto out = scheduler_tick(st, agents, 0, rng, 1.0);
    REQUIRE(out.has_value());

    SECTION("delta_t tracks the round trip") {
        handle_pong(st, out->ping.token, 1.5);
        REQUIRE(st.delta_t == 0.5);
        REQUIRE(st.pending.empty());
        REQUIRE(adaptations == std::vector<double>{0.5});
    }
    SECTION("clamped below") {
        handle_pong(st, out->ping.token, 1.0 + 1e-7);
        REQUIRE(st.delta_t == 0.001);
    }
    SECTION("clamped above") {
        handle_pong(st, out->ping.token, 21.0);
        REQUIRE(st.delta_t == 10.0);
    }
    SECTION("unknown tokens are counted, not applied") {
        handle_pong(st, 777, 2.0);
        REQUIRE(st.unknown_pongs == 1);
        REQUIRE(st.delta_t == 1.0);
        REQUIRE(adaptations.empty());
    }
    SECTION("a token is consumed by its first pong") {
        handle_pong(st, out->ping.token, 1.5);
        handle_pong(st, out->ping.token, 1.6);
        REQUIRE(st.unknown_pongs == 1);
        REQUIRE(st.delta_t == 0.5);
    }
}
