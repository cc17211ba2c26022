#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "evag/rng.hpp"

namespace evag {

class SimNetwork;

// Message classes for metrics. The class of a payload is read off its
// leading wire-format tag: 1 (ping / migrant material) -> Migrant,
// 2 (pong) -> Ack, anything else -> Other.
enum class MessageClass : std::uint8_t { Migrant = 0, Ack = 1, Other = 2 };

const char* message_class_name(MessageClass cls);
MessageClass classify_payload(std::span<const std::uint8_t> payload);

struct LinkSpec {
    double latency = 0.002;     // seconds
    double bandwidth = 125e6;   // bytes/second
};

enum class SimEventKind { Delivery, Timer };

struct ProcessedEvent {
    double time = 0.0;
    SimEventKind kind = SimEventKind::Delivery;
    std::uint32_t source = 0;
    std::uint32_t target = 0;
    MessageClass cls = MessageClass::Other;  // Delivery only
    std::size_t size = 0;                    // Delivery only
    std::uint64_t timer_tag = 0;             // Timer only
};

struct LatencyStats {
    double mean = 0.0;
    double sd = 0.0;
    std::uint64_t count = 0;
};

// A node's receive surface. Handlers run inside step(), strictly one at a
// time, so they may freely call back into the network (send, timers).
class NodeHandler {
  public:
    virtual ~NodeHandler() = default;
    virtual void on_message(SimNetwork& net, std::uint32_t from,
                            std::span<const std::uint8_t> payload, double now) = 0;
    virtual void on_timer(SimNetwork& net, std::uint64_t tag, double now) = 0;
};

// Deterministic discrete-event network: point-to-point links with latency
// and bandwidth, a logical clock, timers, per-class latency metrics, and
// optional fault injection plus a line-delimited event log.
class SimNetwork {
  public:
    explicit SimNetwork(std::uint32_t node_count);

    std::uint32_t node_count() const { return static_cast<std::uint32_t>(handlers_.size()); }
    std::size_t link_count() const;
    double now() const { return clock_; }

    void attach(std::uint32_t node, NodeHandler* handler);

    bool has_link(std::uint32_t a, std::uint32_t b) const;
    const LinkSpec& link(std::uint32_t a, std::uint32_t b) const;
    void set_link(std::uint32_t a, std::uint32_t b, LinkSpec spec);

    // Messages dropped by fault injection are counted and logged but never
    // delivered; the decision is made at send time with the fault stream.
    void set_drop_probability(std::uint32_t a, std::uint32_t b, double p);
    void seed_faults(std::uint64_t seed);

    // Schedules delivery at now + latency + size/bandwidth and records the
    // transit duration under the payload's message class. `now` must equal
    // the current clock; self-sends and missing links throw.
    void send(std::uint32_t from, std::uint32_t to,
              std::vector<std::uint8_t> payload, double now);

    // One-shot timer; `at` must not lie in the past.
    void schedule_timer(std::uint32_t node, std::uint64_t tag, double at);

    // Pops the earliest pending event (ties in insertion order), advances
    // the clock, dispatches to the target's handler. Empty queue -> nullopt.
    std::optional<ProcessedEvent> step();

    LatencyStats latency_stats(MessageClass cls) const;  // throws when empty

    std::uint64_t sent_count(MessageClass cls) const;
    std::uint64_t delivered_count(MessageClass cls) const;
    std::uint64_t dropped_count(MessageClass cls) const;

    // Line format: time kind source target class size. Timer lines carry
    // "-" for the class and the tag in the size column.
    void set_event_log(std::ostream* log) { log_ = log; }

  private:
    struct Pending {
        double time = 0.0;
        std::uint64_t seq = 0;
        SimEventKind kind = SimEventKind::Delivery;
        std::uint32_t source = 0;
        std::uint32_t target = 0;
        MessageClass cls = MessageClass::Other;
        std::uint64_t timer_tag = 0;
        std::vector<std::uint8_t> payload;
    };

    struct Welford {
        std::uint64_t count = 0;
        double mean = 0.0;
        double m2 = 0.0;
        void add(double x);
    };

    std::size_t link_index(std::uint32_t a, std::uint32_t b) const;
    void push_event(Pending ev);
    Pending pop_event();
    void log_line(double t, const char* kind, std::uint32_t src,
                  std::uint32_t dst, const char* cls, std::uint64_t size);

    std::vector<NodeHandler*> handlers_;
    std::vector<char> link_exists_;
    std::vector<LinkSpec> links_;
    std::vector<double> drop_prob_;
    std::vector<Pending> queue_;  // min-heap on (time, seq)
    std::uint64_t next_seq_ = 0;
    double clock_ = 0.0;
    Welford transit_[3];
    std::uint64_t sent_[3] = {0, 0, 0};
    std::uint64_t delivered_[3] = {0, 0, 0};
    std::uint64_t dropped_[3] = {0, 0, 0};
    Rng fault_rng_{0};
    std::ostream* log_ = nullptr;
};

// Complete graph: n(n-1)/2 undirected links, all with the given spec.
// Heterogeneous per-link overrides go through set_link afterwards.
SimNetwork build_complete(std::uint32_t n, double latency, double bandwidth);

}  // namespace evag
