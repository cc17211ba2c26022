#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <variant>
#include <vector>

#include "evag/contribution.hpp"
#include "evag/individual.hpp"
#include "evag/rng.hpp"

namespace evag {

// --- Wire messages -------------------------------------------------------

struct PingMessage {
    std::uint64_t token = 0;
    Contribution contribution;  // contribution.address doubles as the sender id
};

struct PongMessage {
    std::uint64_t token = 0;
    std::uint32_t sender = 0;
};

using GossipMessage = std::variant<PingMessage, PongMessage>;

struct CodecError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Layout, all little-endian:
//   tag u8 (1=Ping, 2=Pong) | token u64 | sender u32
//   Ping only: num_evaluations u64 | genome length u16 | genome f64[] | fitness f64
// A Ping is 31 + 8*len bytes, a Pong exactly 13.
std::vector<std::uint8_t> encode_message(const PingMessage& m);
std::vector<std::uint8_t> encode_message(const PongMessage& m);
std::vector<std::uint8_t> encode_message(const GossipMessage& m);

// Throws CodecError on truncation, unknown tag, a declared genome length
// that exceeds the remaining bytes, or trailing bytes.
GossipMessage decode_message(std::span<const std::uint8_t> bytes);

// Stream framing for real transports: 4-byte little-endian payload length,
// then the payload.
void append_frame(std::vector<std::uint8_t>& stream,
                  std::span<const std::uint8_t> payload);

// Incremental defragmenter for length-prefixed streams. Feed arbitrary
// chunks; next() yields complete payloads in order.
class FrameReader {
  public:
    void feed(std::span<const std::uint8_t> bytes);
    std::optional<std::vector<std::uint8_t>> next();

  private:
    std::vector<std::uint8_t> buffer_;
    std::size_t consumed_ = 0;
};

// --- Cache ---------------------------------------------------------------

// Per-node table of the freshest contribution seen from each peer. Entries
// are kept sorted by address (deterministic iteration); eval_sum carries
// the running total of entry counters for global_evaluations.
struct Cache {
    std::uint32_t owner = 0;
    std::vector<Contribution> entries;
    std::uint64_t eval_sum = 0;
};

// Newest-wins by num_evaluations: inserts when the slot is empty, replaces
// when c is at least as fresh, otherwise leaves the slot alone. Returns
// whether the slot changed. Self-inserts throw std::invalid_argument.
bool cache_insert(Cache& cache, const Contribution& c);

const Contribution* cache_find(const Cache& cache, std::uint32_t address);

// --- Scheduler -----------------------------------------------------------

struct SchedulerState {
    std::uint32_t node_id = 0;
    std::vector<std::uint32_t> directory;  // peer ids, never contains node_id
    double delta_t = 1.0;                  // seconds between pings
    double delta_t_min = 0.001;
    double delta_t_max = 10.0;
    std::map<std::uint64_t, double> pending;  // ping token -> send timestamp
    std::uint64_t next_token = 0;
    std::uint64_t dropped_contributions = 0;
    std::uint64_t unknown_pongs = 0;
    std::uint64_t expired_pings = 0;
    std::vector<double>* adapt_log = nullptr;  // optional: delta_t after each pong
};

struct OutboundPing {
    std::uint32_t target = 0;
    PingMessage ping;
};

// One refresh-timer firing: prunes pings that never got a pong (older than
// 10 * delta_t_max), then targets a uniformly random peer with a uniformly
// random local solution. Returns nothing on a peerless node.
std::optional<OutboundPing> scheduler_tick(SchedulerState& st,
                                           std::span<const Individual> agents,
                                           std::uint64_t local_evaluations,
                                           Rng& rng, double now);

// Caches the ping's contribution and answers with a pong echoing its token.
// Malformed contributions (self-addressed, unevaluated or empty solution)
// are dropped, counted, and get no reply.
std::optional<PongMessage> handle_ping(SchedulerState& st, Cache& cache,
                                       const PingMessage& ping, double now);

// Adapts delta_t to the measured round-trip time of the echoed token,
// clamped to [delta_t_min, delta_t_max]. Unknown tokens are counted and
// otherwise ignored.
void handle_pong(SchedulerState& st, std::uint64_t token, double now);

}  // namespace evag
