#include "evag/netsim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace evag {

const char* message_class_name(MessageClass cls) {
    switch (cls) {
        case MessageClass::Migrant: return "migrant";
        case MessageClass::Ack: return "ack";
        case MessageClass::Other: return "other";
    }
    return "other";
}

MessageClass classify_payload(std::span<const std::uint8_t> payload) {
    if (payload.empty()) return MessageClass::Other;
    if (payload[0] == 1) return MessageClass::Migrant;
    if (payload[0] == 2) return MessageClass::Ack;
    return MessageClass::Other;
}

void SimNetwork::Welford::add(double x) {
    ++count;
    const double d = x - mean;
    mean += d / static_cast<double>(count);
    m2 += d * (x - mean);
}

SimNetwork::SimNetwork(std::uint32_t node_count)
    : handlers_(node_count, nullptr),
      link_exists_(static_cast<std::size_t>(node_count) * node_count, 0),
      links_(static_cast<std::size_t>(node_count) * node_count),
      drop_prob_(static_cast<std::size_t>(node_count) * node_count, 0.0) {
    if (node_count == 0)
        throw std::invalid_argument("SimNetwork: need at least one node");
}

std::size_t SimNetwork::link_index(std::uint32_t a, std::uint32_t b) const {
    if (a >= node_count() || b >= node_count())
        throw std::invalid_argument("SimNetwork: node id out of range");
    if (a == b) throw std::invalid_argument("SimNetwork: no self links");
    const auto lo = std::min(a, b);
    const auto hi = std::max(a, b);
    return static_cast<std::size_t>(lo) * node_count() + hi;
}

std::size_t SimNetwork::link_count() const {
    return static_cast<std::size_t>(
        std::count(link_exists_.begin(), link_exists_.end(), 1));
}

void SimNetwork::attach(std::uint32_t node, NodeHandler* handler) {
    if (node >= node_count())
        throw std::invalid_argument("attach: node id out of range");
    handlers_[node] = handler;
}

bool SimNetwork::has_link(std::uint32_t a, std::uint32_t b) const {
    return link_exists_[link_index(a, b)] != 0;
}

const LinkSpec& SimNetwork::link(std::uint32_t a, std::uint32_t b) const {
    const auto idx = link_index(a, b);
    if (!link_exists_[idx]) throw std::invalid_argument("link: no such link");
    return links_[idx];
}

void SimNetwork::set_link(std::uint32_t a, std::uint32_t b, LinkSpec spec) {
    if (spec.latency < 0.0 || !(spec.bandwidth > 0.0))
        throw std::invalid_argument("set_link: need latency >= 0, bandwidth > 0");
    const auto idx = link_index(a, b);
    link_exists_[idx] = 1;
    links_[idx] = spec;
}

void SimNetwork::set_drop_probability(std::uint32_t a, std::uint32_t b, double p) {
    if (!(p >= 0.0 && p <= 1.0))
        throw std::invalid_argument("set_drop_probability: p outside [0, 1]");
    drop_prob_[link_index(a, b)] = p;
}

void SimNetwork::seed_faults(std::uint64_t seed) { fault_rng_ = Rng(seed); }

void SimNetwork::push_event(Pending ev) {
    ev.seq = next_seq_++;
    queue_.push_back(std::move(ev));
    std::push_heap(queue_.begin(), queue_.end(),
                   [](const Pending& a, const Pending& b) {
                       if (a.time != b.time) return a.time > b.time;
                       return a.seq > b.seq;
                   });
}

SimNetwork::Pending SimNetwork::pop_event() {
    std::pop_heap(queue_.begin(), queue_.end(),
                  [](const Pending& a, const Pending& b) {
                      if (a.time != b.time) return a.time > b.time;
                      return a.seq > b.seq;
                  });
    Pending ev = std::move(queue_.back());
    queue_.pop_back();
    return ev;
}

void SimNetwork::log_line(double t, const char* kind, std::uint32_t src,
                          std::uint32_t dst, const char* cls, std::uint64_t size) {
    if (!log_) return;
    char buf[128];
    std::snprintf(buf, sizeof buf, "%.9f %s %u %u %s %llu\n", t, kind, src, dst,
                  cls, static_cast<unsigned long long>(size));
    *log_ << buf;
}

void SimNetwork::send(std::uint32_t from, std::uint32_t to,
                      std::vector<std::uint8_t> payload, double now) {
    const auto idx = link_index(from, to);
    if (!link_exists_[idx]) throw std::invalid_argument("send: no such link");
    if (now != clock_) throw std::logic_error("send: `now` is not the current clock");

    const MessageClass cls = classify_payload(payload);
    const auto ci = static_cast<std::size_t>(cls);
    ++sent_[ci];
    log_line(now, "send", from, to, message_class_name(cls), payload.size());

    if (drop_prob_[idx] > 0.0 && fault_rng_.uniform01() < drop_prob_[idx]) {
        ++dropped_[ci];
        log_line(now, "drop", from, to, message_class_name(cls), payload.size());
        return;
    }

    const LinkSpec& spec = links_[idx];
    const double transit =
        spec.latency + static_cast<double>(payload.size()) / spec.bandwidth;
    transit_[ci].add(transit);

    Pending ev;
    ev.time = now + transit;
    ev.kind = SimEventKind::Delivery;
    ev.source = from;
    ev.target = to;
    ev.cls = cls;
    ev.payload = std::move(payload);
    push_event(std::move(ev));
}

void SimNetwork::schedule_timer(std::uint32_t node, std::uint64_t tag, double at) {
    if (node >= node_count())
        throw std::invalid_argument("schedule_timer: node id out of range");
    if (at < clock_) throw std::logic_error("schedule_timer: timer in the past");

    Pending ev;
    ev.time = at;
    ev.kind = SimEventKind::Timer;
    ev.source = node;
    ev.target = node;
    ev.timer_tag = tag;
    push_event(std::move(ev));
}

std::optional<ProcessedEvent> SimNetwork::step() {
    if (queue_.empty()) return std::nullopt;
    Pending ev = pop_event();
    clock_ = ev.time;

    ProcessedEvent out;
    out.time = ev.time;
    out.kind = ev.kind;
    out.source = ev.source;
    out.target = ev.target;

    NodeHandler* handler = handlers_[ev.target];
    if (ev.kind == SimEventKind::Delivery) {
        out.cls = ev.cls;
        out.size = ev.payload.size();
        ++delivered_[static_cast<std::size_t>(ev.cls)];
        log_line(ev.time, "deliver", ev.source, ev.target,
                 message_class_name(ev.cls), ev.payload.size());
        if (handler) handler->on_message(*this, ev.source, ev.payload, ev.time);
    } else {
        out.timer_tag = ev.timer_tag;
        log_line(ev.time, "timer", ev.source, ev.target, "-", ev.timer_tag);
        if (handler) handler->on_timer(*this, ev.timer_tag, ev.time);
    }
    return out;
}

LatencyStats SimNetwork::latency_stats(MessageClass cls) const {
    const Welford& w = transit_[static_cast<std::size_t>(cls)];
    if (w.count == 0)
        throw std::invalid_argument("latency_stats: no messages of that class");
    LatencyStats stats;
    stats.count = w.count;
    stats.mean = w.mean;
    stats.sd = w.count > 1
                   ? std::sqrt(w.m2 / static_cast<double>(w.count - 1))
                   : 0.0;
    return stats;
}

std::uint64_t SimNetwork::sent_count(MessageClass cls) const {
    return sent_[static_cast<std::size_t>(cls)];
}
std::uint64_t SimNetwork::delivered_count(MessageClass cls) const {
    return delivered_[static_cast<std::size_t>(cls)];
}
std::uint64_t SimNetwork::dropped_count(MessageClass cls) const {
    return dropped_[static_cast<std::size_t>(cls)];
}

SimNetwork build_complete(std::uint32_t n, double latency, double bandwidth) {
    SimNetwork net(n);
    for (std::uint32_t a = 0; a < n; ++a)
        for (std::uint32_t b = a + 1; b < n; ++b)
            net.set_link(a, b, LinkSpec{latency, bandwidth});
    return net;
}

}  // namespace evag
