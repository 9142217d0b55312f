#pragma once

#include <cstdint>
#include <string>
#include <tuple>

namespace vrtc {

enum class Protocol : uint8_t { Udp = 0, Tcp = 1 };
enum class Direction : uint8_t { Dl = 0, Ul = 1 };

const char* to_string(Protocol p);
const char* to_string(Direction d);

// Parses a dotted-quad IPv4 address ("10.0.0.2") into host byte order.
// Throws ParseError on anything that is not four decimal octets in 0..255.
uint32_t parse_ipv4(const std::string& text);
std::string format_ipv4(uint32_t addr);

// Directed 5-tuple. A key and its reversed() counterpart are distinct
// values that identify the two directions of one bidirectional flow;
// normalized() maps both to a single canonical orientation.
struct FlowKey {
  uint32_t src_ip = 0;
  uint16_t src_port = 0;
  uint32_t dst_ip = 0;
  uint16_t dst_port = 0;
  Protocol protocol = Protocol::Udp;

  friend bool operator==(const FlowKey&, const FlowKey&) = default;

  FlowKey reversed() const {
    return FlowKey{dst_ip, dst_port, src_ip, src_port, protocol};
  }

  // Canonical orientation: the lexicographically smaller of the two
  // directed keys, so both directions normalize to the same value.
  FlowKey normalized() const {
    FlowKey rev = reversed();
    auto tup = [](const FlowKey& k) {
      return std::make_tuple(k.src_ip, k.src_port, k.dst_ip, k.dst_port,
                             static_cast<uint8_t>(k.protocol));
    };
    return tup(*this) <= tup(rev) ? *this : rev;
  }
};

// One packet of a direction-labeled trace. timestamp_us is relative to
// the trace start (first captured packet), so it is always >= 0 for
// well-formed traces.
struct PacketRecord {
  int64_t timestamp_us = 0;
  Direction direction = Direction::Dl;
  int32_t size_bytes = 0;
  FlowKey flow;
};

struct TraceMetadata {
  uint32_t client_ip = 0;
  int64_t t0_us = 0;  // absolute epoch microseconds of the capture start
  int64_t packet_count = 0;
  int64_t duration_us = 0;
};

}  // namespace vrtc
