#include "evag/gossip.hpp"

#include <algorithm>
#include <bit>
#include <cstring>

namespace evag {

namespace {

constexpr std::uint8_t kPingTag = 1;
constexpr std::uint8_t kPongTag = 2;
constexpr std::size_t kPongSize = 13;
constexpr std::size_t kPingHeaderSize = 23;  // tag..genome length
constexpr std::size_t kMaxFrameSize = 1u << 20;

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_f64(std::vector<std::uint8_t>& out, double v) {
    put_u64(out, std::bit_cast<std::uint64_t>(v));
}

class ByteCursor {
  public:
    explicit ByteCursor(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    std::size_t remaining() const { return bytes_.size() - pos_; }

    std::uint8_t u8() {
        need(1);
        return bytes_[pos_++];
    }
    std::uint16_t u16() {
        need(2);
        std::uint16_t v = 0;
        for (int i = 0; i < 2; ++i)
            v |= static_cast<std::uint16_t>(bytes_[pos_++]) << (8 * i);
        return v;
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i)
            v |= static_cast<std::uint32_t>(bytes_[pos_++]) << (8 * i);
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i)
            v |= static_cast<std::uint64_t>(bytes_[pos_++]) << (8 * i);
        return v;
    }
    double f64() { return std::bit_cast<double>(u64()); }

  private:
    void need(std::size_t n) const {
        if (remaining() < n) throw CodecError("decode: truncated message");
    }

    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> encode_message(const PingMessage& m) {
    const Individual& sol = m.contribution.solution;
    if (!sol.fitness) throw CodecError("encode: unevaluated solution");
    if (sol.genome.size() > 0xffff)
        throw CodecError("encode: genome too long for the wire format");

    std::vector<std::uint8_t> out;
    out.reserve(kPingHeaderSize + 8 * sol.genome.size() + 8);
    out.push_back(kPingTag);
    put_u64(out, m.token);
    put_u32(out, m.contribution.address);
    put_u64(out, m.contribution.num_evaluations);
    put_u16(out, static_cast<std::uint16_t>(sol.genome.size()));
    for (Eigen::Index i = 0; i < sol.genome.size(); ++i) put_f64(out, sol.genome[i]);
    put_f64(out, *sol.fitness);
    return out;
}

std::vector<std::uint8_t> encode_message(const PongMessage& m) {
    std::vector<std::uint8_t> out;
    out.reserve(kPongSize);
    out.push_back(kPongTag);
    put_u64(out, m.token);
    put_u32(out, m.sender);
    return out;
}

std::vector<std::uint8_t> encode_message(const GossipMessage& m) {
    return std::visit([](const auto& msg) { return encode_message(msg); }, m);
}

GossipMessage decode_message(std::span<const std::uint8_t> bytes) {
    ByteCursor cur(bytes);
    const std::uint8_t tag = cur.u8();
    if (tag == kPongTag) {
        PongMessage m;
        m.token = cur.u64();
        m.sender = cur.u32();
        if (cur.remaining() != 0) throw CodecError("decode: trailing bytes");
        return m;
    }
    if (tag != kPingTag) throw CodecError("decode: unknown type tag");

    PingMessage m;
    m.token = cur.u64();
    m.contribution.address = cur.u32();
    m.contribution.num_evaluations = cur.u64();
    const std::uint16_t len = cur.u16();
    if (cur.remaining() < 8u * len + 8u)
        throw CodecError("decode: declared genome length exceeds payload");
    Vector genome(len);
    for (std::uint16_t i = 0; i < len; ++i) genome[i] = cur.f64();
    m.contribution.solution.genome = std::move(genome);
    m.contribution.solution.fitness = cur.f64();
    if (cur.remaining() != 0) throw CodecError("decode: trailing bytes");
    return m;
}

void append_frame(std::vector<std::uint8_t>& stream,
                  std::span<const std::uint8_t> payload) {
    if (payload.size() > kMaxFrameSize) throw CodecError("frame: payload too large");
    put_u32(stream, static_cast<std::uint32_t>(payload.size()));
    stream.insert(stream.end(), payload.begin(), payload.end());
}

void FrameReader::feed(std::span<const std::uint8_t> bytes) {
    buffer_.insert(buffer_.end(), bytes.begin(), bytes.end());
}

std::optional<std::vector<std::uint8_t>> FrameReader::next() {
    const std::size_t avail = buffer_.size() - consumed_;
    if (avail < 4) return std::nullopt;
    std::uint32_t len = 0;
    for (int i = 0; i < 4; ++i)
        len |= static_cast<std::uint32_t>(buffer_[consumed_ + i]) << (8 * i);
    if (len > kMaxFrameSize) throw CodecError("frame: declared length too large");
    if (avail < 4u + len) return std::nullopt;

    std::vector<std::uint8_t> payload(buffer_.begin() + consumed_ + 4,
                                      buffer_.begin() + consumed_ + 4 + len);
    consumed_ += 4u + len;
    if (consumed_ > (kMaxFrameSize << 1)) {  // keep the buffer from growing forever
        buffer_.erase(buffer_.begin(), buffer_.begin() + consumed_);
        consumed_ = 0;
    }
    return payload;
}

bool cache_insert(Cache& cache, const Contribution& c) {
    if (c.address == cache.owner)
        throw std::invalid_argument("cache_insert: contribution from the owner");

    const auto pos = std::lower_bound(
        cache.entries.begin(), cache.entries.end(), c.address,
        [](const Contribution& e, std::uint32_t addr) { return e.address < addr; });
    if (pos == cache.entries.end() || pos->address != c.address) {
        cache.entries.insert(pos, c);
        cache.eval_sum += c.num_evaluations;
        return true;
    }
    if (c.num_evaluations >= pos->num_evaluations) {
        cache.eval_sum += c.num_evaluations - pos->num_evaluations;
        *pos = c;
        return true;
    }
    return false;
}

const Contribution* cache_find(const Cache& cache, std::uint32_t address) {
    const auto pos = std::lower_bound(
        cache.entries.begin(), cache.entries.end(), address,
        [](const Contribution& e, std::uint32_t addr) { return e.address < addr; });
    if (pos == cache.entries.end() || pos->address != address) return nullptr;
    return &*pos;
}

std::optional<OutboundPing> scheduler_tick(SchedulerState& st,
                                           std::span<const Individual> agents,
                                           std::uint64_t local_evaluations,
                                           Rng& rng, double now) {
    // Pings whose pong never arrived must not pin delta_t adaptation
    // forever; anything older than 10 * delta_t_max is written off.
    for (auto it = st.pending.begin(); it != st.pending.end();) {
        if (now - it->second > 10.0 * st.delta_t_max) {
            it = st.pending.erase(it);
            ++st.expired_pings;
        } else {
            ++it;
        }
    }

    if (st.directory.empty()) return std::nullopt;
    if (agents.empty())
        throw std::invalid_argument("scheduler_tick: no registered agents");

    const std::uint32_t target =
        st.directory[rng.uniform_index(st.directory.size())];
    const Individual& sol = agents[rng.uniform_index(agents.size())];

    const std::uint64_t token = st.next_token++;
    st.pending.emplace(token, now);
    return OutboundPing{
        target, PingMessage{token, Contribution{st.node_id, local_evaluations, sol}}};
}

std::optional<PongMessage> handle_ping(SchedulerState& st, Cache& cache,
                                       const PingMessage& ping, double /*now*/) {
    const Contribution& c = ping.contribution;
    const bool malformed = c.address == st.node_id || !c.solution.fitness ||
                           c.solution.genome.size() == 0;
    if (malformed) {
        ++st.dropped_contributions;
        return std::nullopt;
    }
    cache_insert(cache, c);
    return PongMessage{ping.token, st.node_id};
}

void handle_pong(SchedulerState& st, std::uint64_t token, double now) {
    const auto it = st.pending.find(token);
    if (it == st.pending.end()) {
        ++st.unknown_pongs;
        return;
    }
    const double rtt = now - it->second;
    st.pending.erase(it);
    st.delta_t = std::clamp(rtt, st.delta_t_min, st.delta_t_max);
    if (st.adapt_log) st.adapt_log->push_back(st.delta_t);
}

}  // namespace evag
