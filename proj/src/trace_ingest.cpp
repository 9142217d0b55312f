#include "vrtc/trace_ingest.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <limits>
#include <sstream>

#include "vrtc/errors.hpp"

namespace vrtc {

const char* to_string(Protocol p) { return p == Protocol::Udp ? "UDP" : "TCP"; }
const char* to_string(Direction d) { return d == Direction::Dl ? "DL" : "UL"; }

uint32_t parse_ipv4(const std::string& text) {
  uint32_t addr = 0;
  size_t pos = 0;
  for (int octet = 0; octet < 4; ++octet) {
    if (octet > 0) {
      if (pos >= text.size() || text[pos] != '.')
        throw ParseError("bad IPv4 address \"" + text + "\"");
      ++pos;
    }
    size_t start = pos;
    uint32_t value = 0;
    while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') {
      value = value * 10 + static_cast<uint32_t>(text[pos] - '0');
      if (value > 255) throw ParseError("bad IPv4 address \"" + text + "\"");
      ++pos;
    }
    if (pos == start || pos - start > 3)
      throw ParseError("bad IPv4 address \"" + text + "\"");
    addr = (addr << 8) | value;
  }
  if (pos != text.size()) throw ParseError("bad IPv4 address \"" + text + "\"");
  return addr;
}

std::string format_ipv4(uint32_t addr) {
  std::string out;
  for (int shift = 24; shift >= 0; shift -= 8) {
    if (shift != 24) out += '.';
    out += std::to_string((addr >> shift) & 0xFF);
  }
  return out;
}

namespace {

uint16_t read_be16(const uint8_t* p) {
  return static_cast<uint16_t>((p[0] << 8) | p[1]);
}

uint32_t read_be32(const uint8_t* p) {
  return (static_cast<uint32_t>(p[0]) << 24) | (static_cast<uint32_t>(p[1]) << 16) |
         (static_cast<uint32_t>(p[2]) << 8) | static_cast<uint32_t>(p[3]);
}

// pcap header fields are stored in the file's own byte order; `swap` is
// true when that order is the reverse of the magic's canonical form.
uint32_t read_file_u32(const uint8_t* p, bool swap) {
  uint32_t le = static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
                (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
  return swap ? __builtin_bswap32(le) : le;
}

std::string hex32(uint32_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s = "0x";
  for (int shift = 28; shift >= 0; shift -= 4) s += digits[(v >> shift) & 0xF];
  return s;
}

std::optional<FlowKey> decode_flow(const uint8_t* frame, size_t len, size_t index) {
  if (len < 14) return std::nullopt;
  uint16_t ethertype = read_be16(frame + 12);
  if (ethertype == 0x86DD)
    throw ParseError("pcap: IPv6 frame at packet index " + std::to_string(index) +
                     " is not supported");
  if (ethertype != 0x0800) return std::nullopt;
  const uint8_t* ip = frame + 14;
  size_t ip_len = len - 14;
  if (ip_len < 20) return std::nullopt;
  if ((ip[0] >> 4) != 4) return std::nullopt;
  size_t ihl = static_cast<size_t>(ip[0] & 0x0F) * 4;
  if (ihl < 20 || ip_len < ihl + 4) return std::nullopt;  // need transport ports
  Protocol protocol;
  if (ip[9] == 17)
    protocol = Protocol::Udp;
  else if (ip[9] == 6)
    protocol = Protocol::Tcp;
  else
    return std::nullopt;
  FlowKey key;
  key.src_ip = read_be32(ip + 12);
  key.dst_ip = read_be32(ip + 16);
  key.src_port = read_be16(ip + ihl);
  key.dst_port = read_be16(ip + ihl + 2);
  key.protocol = protocol;
  return key;
}

}  // namespace

std::vector<PcapEntry> parse_pcap(std::span<const uint8_t> bytes) {
  if (bytes.size() < 24)
    throw ParseError("pcap: truncated global header (" + std::to_string(bytes.size()) +
                     " bytes)");
  uint32_t magic = read_file_u32(bytes.data(), false);
  bool swap = false;
  bool nanos = false;
  switch (magic) {
    case 0xA1B2C3D4u: break;
    case 0xD4C3B2A1u: swap = true; break;
    case 0xA1B23C4Du: nanos = true; break;
    case 0x4D3CB2A1u: swap = true; nanos = true; break;
    default: throw ParseError("pcap: unrecognized magic number " + hex32(magic));
  }
  uint32_t link_type = read_file_u32(bytes.data() + 20, swap);
  if (link_type != 1)
    throw ParseError("pcap: unsupported link type " + std::to_string(link_type) +
                     " (only Ethernet, type 1)");

  std::vector<PcapEntry> entries;
  size_t off = 24;
  size_t index = 0;
  while (off < bytes.size()) {
    if (bytes.size() - off < 16)
      throw ParseError("pcap: truncated record header at packet index " +
                       std::to_string(index));
    uint32_t ts_sec = read_file_u32(bytes.data() + off, swap);
    uint32_t ts_frac = read_file_u32(bytes.data() + off + 4, swap);
    uint32_t incl_len = read_file_u32(bytes.data() + off + 8, swap);
    uint32_t orig_len = read_file_u32(bytes.data() + off + 12, swap);
    off += 16;
    if (bytes.size() - off < incl_len)
      throw ParseError("pcap: truncated packet body at packet index " +
                       std::to_string(index));
    PcapEntry entry;
    int64_t micros = nanos ? ts_frac / 1000 : ts_frac;
    entry.timestamp_us = static_cast<int64_t>(ts_sec) * 1000000 + micros;
    entry.size_bytes = static_cast<int32_t>(orig_len);
    entry.flow = decode_flow(bytes.data() + off, incl_len, index);
    entries.push_back(entry);
    off += incl_len;
    ++index;
  }
  return entries;
}

std::vector<PcapEntry> parse_pcap_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
  return parse_pcap(bytes);
}

DirectedTrace assign_direction(const std::vector<PcapEntry>& entries, uint32_t client_ip) {
  DirectedTrace out;
  out.meta.client_ip = client_ip;
  if (entries.empty()) return out;
  int64_t t0 = entries.front().timestamp_us;
  for (const auto& e : entries) t0 = std::min(t0, e.timestamp_us);
  out.meta.t0_us = t0;
  for (const auto& e : entries) {
    if (!e.flow) {
      ++out.dropped;
      continue;
    }
    Direction dir;
    if (e.flow->dst_ip == client_ip)
      dir = Direction::Dl;
    else if (e.flow->src_ip == client_ip)
      dir = Direction::Ul;
    else {
      ++out.dropped;
      continue;
    }
    out.records.push_back(PacketRecord{e.timestamp_us - t0, dir, e.size_bytes, *e.flow});
  }
  out.meta.packet_count = static_cast<int64_t>(out.records.size());
  if (!out.records.empty()) {
    auto [lo, hi] = std::minmax_element(
        out.records.begin(), out.records.end(),
        [](const PacketRecord& a, const PacketRecord& b) { return a.timestamp_us < b.timestamp_us; });
    out.meta.duration_us = hi->timestamp_us - lo->timestamp_us;
  }
  return out;
}

std::vector<PacketRecord> filter_flow(std::span<const PacketRecord> records,
                                      const FlowKey& key, bool bidirectional) {
  std::vector<PacketRecord> out;
  FlowKey rev = key.reversed();
  for (const auto& r : records) {
    if (r.flow == key || (bidirectional && r.flow == rev)) out.push_back(r);
  }
  return out;
}

namespace {

int64_t parse_int_field(const std::string& field, size_t lineno, const char* what,
                        int64_t lo, int64_t hi) {
  int64_t value = 0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size())
    throw ParseError("trace csv: line " + std::to_string(lineno) + ": bad " + what +
                     " \"" + field + "\"");
  if (value < lo || value > hi)
    throw ParseError("trace csv: line " + std::to_string(lineno) + ": " + what + " " +
                     field + " out of range");
  return value;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  size_t start = 0;
  for (;;) {
    size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

}  // namespace

ParsedTrace parse_trace_csv(std::istream& in) {
  ParsedTrace out;
  std::string line;
  size_t lineno = 0;
  bool header_seen = false;
  int64_t prev_ts = std::numeric_limits<int64_t>::min();
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      if (line != kTraceCsvHeader)
        throw ParseError("trace csv: line " + std::to_string(lineno) +
                         ": header mismatch, expected \"" + std::string(kTraceCsvHeader) +
                         "\"");
      header_seen = true;
      continue;
    }
    std::vector<std::string> f = split_fields(line);
    if (f.size() != 8)
      throw ParseError("trace csv: line " + std::to_string(lineno) + ": expected 8 fields, got " +
                       std::to_string(f.size()));
    PacketRecord rec;
    rec.timestamp_us = parse_int_field(f[0], lineno, "timestamp_us",
                                       std::numeric_limits<int64_t>::min(),
                                       std::numeric_limits<int64_t>::max());
    if (f[1] == "DL")
      rec.direction = Direction::Dl;
    else if (f[1] == "UL")
      rec.direction = Direction::Ul;
    else
      throw ParseError("trace csv: line " + std::to_string(lineno) + ": bad direction \"" +
                       f[1] + "\"");
    rec.size_bytes = static_cast<int32_t>(
        parse_int_field(f[2], lineno, "size_bytes", 1, std::numeric_limits<int32_t>::max()));
    try {
      rec.flow.src_ip = parse_ipv4(f[3]);
      rec.flow.dst_ip = parse_ipv4(f[5]);
    } catch (const ParseError& e) {
      throw ParseError("trace csv: line " + std::to_string(lineno) + ": " + e.what());
    }
    rec.flow.src_port = static_cast<uint16_t>(parse_int_field(f[4], lineno, "src_port", 0, 65535));
    rec.flow.dst_port = static_cast<uint16_t>(parse_int_field(f[6], lineno, "dst_port", 0, 65535));
    if (f[7] == "UDP")
      rec.flow.protocol = Protocol::Udp;
    else if (f[7] == "TCP")
      rec.flow.protocol = Protocol::Tcp;
    else
      throw ParseError("trace csv: line " + std::to_string(lineno) + ": bad protocol \"" +
                       f[7] + "\"");
    if (rec.timestamp_us < prev_ts)
      out.warnings.push_back("line " + std::to_string(lineno) + ": timestamp " +
                             std::to_string(rec.timestamp_us) + " earlier than previous " +
                             std::to_string(prev_ts));
    prev_ts = rec.timestamp_us;
    out.records.push_back(rec);
  }
  if (!header_seen) throw ParseError("trace csv: missing header line");
  if (!out.records.empty()) {
    int64_t t0 = out.records.front().timestamp_us;
    for (const auto& r : out.records) t0 = std::min(t0, r.timestamp_us);
    if (t0 != 0)
      for (auto& r : out.records) r.timestamp_us -= t0;
  }
  return out;
}

ParsedTrace parse_trace_csv_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  return parse_trace_csv(in);
}

void emit_trace_csv(std::ostream& out, std::span<const PacketRecord> records,
                    std::span<const std::string> comment_lines) {
  for (const auto& c : comment_lines) out << "# " << c << "\n";
  out << kTraceCsvHeader << "\n";
  for (const auto& r : records) {
    out << r.timestamp_us << ',' << to_string(r.direction) << ',' << r.size_bytes << ','
        << format_ipv4(r.flow.src_ip) << ',' << r.flow.src_port << ','
        << format_ipv4(r.flow.dst_ip) << ',' << r.flow.dst_port << ','
        << to_string(r.flow.protocol) << "\n";
  }
}

void emit_trace_csv_file(const std::string& path, std::span<const PacketRecord> records,
                         std::span<const std::string> comment_lines) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  emit_trace_csv(out, records, comment_lines);
  out.flush();
  if (!out) throw IoError("write failed for " + path);
}

}  // namespace vrtc
