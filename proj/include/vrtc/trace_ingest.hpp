#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vrtc/packet.hpp"

namespace vrtc {

// One decoded capture record: absolute epoch-microsecond timestamp, the
// on-the-wire frame length (orig_len), and the IPv4 UDP/TCP flow key when
// the frame carries one. Frames without a decodable key (ARP, non-UDP/TCP
// IPv4, snaplen-truncated headers) keep flow == nullopt.
struct PcapEntry {
  int64_t timestamp_us = 0;
  int32_t size_bytes = 0;
  std::optional<FlowKey> flow;
};

// Parses a classic pcap capture. Accepts microsecond and nanosecond magics
// in either byte order (nanosecond stamps are truncated to microseconds).
// Only Ethernet link type 1 is supported; anything else, IPv6 frames, and
// structurally truncated files raise ParseError.
std::vector<PcapEntry> parse_pcap(std::span<const uint8_t> bytes);
std::vector<PcapEntry> parse_pcap_file(const std::string& path);

struct DirectedTrace {
  std::vector<PacketRecord> records;
  TraceMetadata meta;
  int64_t dropped = 0;  // entries with no flow key or not touching the client
};

// Labels each entry DL (destination ip == client) or UL (source ip ==
// client), drops entries matching neither side, and rebases timestamps so
// the earliest input entry sits at t = 0.
DirectedTrace assign_direction(const std::vector<PcapEntry>& entries, uint32_t client_ip);

std::vector<PacketRecord> filter_flow(std::span<const PacketRecord> records,
                                      const FlowKey& key, bool bidirectional);

inline constexpr const char* kTraceCsvHeader =
    "timestamp_us,direction,size_bytes,src_ip,src_port,dst_ip,dst_port,protocol";

struct ParsedTrace {
  std::vector<PacketRecord> records;  // file order, timestamps rebased by the minimum
  std::vector<std::string> warnings;  // one per non-monotone timestamp row
};

// Reads the canonical trace CSV: '#' comment lines, then the exact header,
// then strictly validated rows. Any malformed row raises ParseError naming
// the physical line number.
ParsedTrace parse_trace_csv(std::istream& in);
ParsedTrace parse_trace_csv_file(const std::string& path);

// Writes the canonical trace CSV. comment_lines are emitted first, each
// prefixed with "# ".
void emit_trace_csv(std::ostream& out, std::span<const PacketRecord> records,
                    std::span<const std::string> comment_lines = {});
void emit_trace_csv_file(const std::string& path, std::span<const PacketRecord> records,
                         std::span<const std::string> comment_lines = {});

}  // namespace vrtc
