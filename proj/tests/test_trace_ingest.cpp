#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "vrtc/errors.hpp"
#include "vrtc/synth_traffic.hpp"
#include "vrtc/trace_ingest.hpp"

using namespace vrtc;

namespace {

// Little byte-level pcap builder so the parser is checked against an
// independent hex-level construction, not against itself.
struct PcapBuilder {
  std::vector<uint8_t> bytes;
  bool big_endian = false;

  void u8(uint8_t v) { bytes.push_back(v); }
  void u16f(uint16_t v) {  // file byte order
    if (big_endian) { u8(v >> 8); u8(v & 0xFF); }
    else { u8(v & 0xFF); u8(v >> 8); }
  }
  void u32f(uint32_t v) {
    if (big_endian) { u8(v >> 24); u8((v >> 16) & 0xFF); u8((v >> 8) & 0xFF); u8(v & 0xFF); }
    else { u8(v & 0xFF); u8((v >> 8) & 0xFF); u8((v >> 16) & 0xFF); u8(v >> 24); }
  }
  void u16n(uint16_t v) { u8(v >> 8); u8(v & 0xFF); }  // network order
  void u32n(uint32_t v) { u8(v >> 24); u8((v >> 16) & 0xFF); u8((v >> 8) & 0xFF); u8(v & 0xFF); }

  void global_header(uint32_t magic, uint32_t link_type = 1) {
    u32f(magic);
    u16f(2); u16f(4);      // version
    u32f(0); u32f(0);      // thiszone, sigfigs
    u32f(65535);           // snaplen
    u32f(link_type);
  }
  void record_header(uint32_t sec, uint32_t frac, uint32_t incl, uint32_t orig) {
    u32f(sec); u32f(frac); u32f(incl); u32f(orig);
  }
  // Ethernet + IPv4 + first 4 transport bytes; header_extra pads the IP
  // header with options (ihl grows accordingly).
  void frame(uint8_t ip_proto, uint32_t src_ip, uint16_t src_port, uint32_t dst_ip,
             uint16_t dst_port, int ip_option_words = 0, uint16_t ethertype = 0x0800) {
    for (int i = 0; i < 12; ++i) u8(0xAA);  // MACs
    u16n(ethertype);
    if (ethertype != 0x0800) return;
    uint8_t ihl = static_cast<uint8_t>(5 + ip_option_words);
    u8(static_cast<uint8_t>(0x40 | ihl));
    u8(0);                   // dscp
    u16n(static_cast<uint16_t>(20 + ip_option_words * 4 + 8));
    u16n(0); u16n(0);        // id, flags
    u8(64);                  // ttl
    u8(ip_proto);
    u16n(0);                 // checksum (unvalidated)
    u32n(src_ip); u32n(dst_ip);
    for (int i = 0; i < ip_option_words; ++i) u32n(0);
    u16n(src_port); u16n(dst_port);
  }
};

constexpr uint32_t kClient = 0x0A000002;  // 10.0.0.2
constexpr uint32_t kServer = 0x0A000001;  // 10.0.0.1

// The magic is a fixed constant stored in the file's own byte order; a
// big-endian capture therefore reads back byte-swapped on this host.
std::vector<uint8_t> one_udp_packet_capture(bool big_endian, bool nanos) {
  PcapBuilder b;
  b.big_endian = big_endian;
  b.global_header(nanos ? 0xA1B23C4Du : 0xA1B2C3D4u);
  size_t frame_start = b.bytes.size() + 16;
  b.record_header(1, nanos ? 500000 : 500, 0, 254);
  b.frame(17, kServer, 9944, kClient, 9944);
  uint32_t incl = static_cast<uint32_t>(b.bytes.size() - frame_start);
  // patch incl_len in file byte order
  size_t pos = frame_start - 8;
  if (big_endian) {
    b.bytes[pos] = incl >> 24; b.bytes[pos + 1] = (incl >> 16) & 0xFF;
    b.bytes[pos + 2] = (incl >> 8) & 0xFF; b.bytes[pos + 3] = incl & 0xFF;
  } else {
    b.bytes[pos] = incl & 0xFF; b.bytes[pos + 1] = (incl >> 8) & 0xFF;
    b.bytes[pos + 2] = (incl >> 16) & 0xFF; b.bytes[pos + 3] = incl >> 24;
  }
  return b.bytes;
}

}  // namespace

TEST_CASE("ipv4 text parsing") {
  CHECK(parse_ipv4("10.0.0.2") == kClient);
  CHECK(format_ipv4(kClient) == "10.0.0.2");
  CHECK(parse_ipv4("255.255.255.255") == 0xFFFFFFFFu);
  CHECK(format_ipv4(parse_ipv4("192.168.1.17")) == "192.168.1.17");
  CHECK_THROWS_AS(parse_ipv4("10.0.0"), ParseError);
  CHECK_THROWS_AS(parse_ipv4("10.0.0.256"), ParseError);
  CHECK_THROWS_AS(parse_ipv4("10.0.0.2.1"), ParseError);
  CHECK_THROWS_AS(parse_ipv4("a.b.c.d"), ParseError);
  CHECK_THROWS_AS(parse_ipv4(""), ParseError);
}

TEST_CASE("flow key reversal and normalization") {
  FlowKey k{kServer, 9944, kClient, 51000, Protocol::Udp};
  CHECK(k.reversed().src_ip == kClient);
  CHECK(k.reversed().reversed() == k);
  CHECK(k.normalized() == k.reversed().normalized());
  CHECK((k.normalized() == k || k.normalized() == k.reversed()));
}

TEST_CASE("pcap: hand-built single UDP packet") {
  auto bytes = one_udp_packet_capture(false, false);
  auto entries = parse_pcap(bytes);
  REQUIRE(entries.size() == 1);
  CHECK(entries[0].timestamp_us == 1000500);
  CHECK(entries[0].size_bytes == 254);  // orig_len, not captured length
  REQUIRE(entries[0].flow.has_value());
  CHECK(entries[0].flow->src_ip == kServer);
  CHECK(entries[0].flow->dst_ip == kClient);
  CHECK(entries[0].flow->src_port == 9944);
  CHECK(entries[0].flow->dst_port == 9944);
  CHECK(entries[0].flow->protocol == Protocol::Udp);
}

TEST_CASE("pcap: byte-swapped and nanosecond magics parse identically") {
  auto le = parse_pcap(one_udp_packet_capture(false, false));
  auto be = parse_pcap(one_udp_packet_capture(true, false));
  auto ns = parse_pcap(one_udp_packet_capture(false, true));
  auto ns_be = parse_pcap(one_udp_packet_capture(true, true));
  REQUIRE(le.size() == 1);
  for (const auto& other : {be, ns, ns_be}) {
    REQUIRE(other.size() == 1);
    CHECK(other[0].timestamp_us == le[0].timestamp_us);
    CHECK(other[0].size_bytes == le[0].size_bytes);
    CHECK(other[0].flow == le[0].flow);
  }
}

TEST_CASE("pcap: zero packets, non-IP frames, IP options, TCP") {
  PcapBuilder b;
  b.global_header(0xA1B2C3D4u);
  CHECK(parse_pcap(b.bytes).empty());

  // ARP frame -> no flow key; TCP with IP options -> ports still found
  size_t rh = b.bytes.size();
  b.record_header(0, 0, 0, 60);
  b.frame(0, 0, 0, 0, 0, 0, 0x0806);
  uint32_t incl = static_cast<uint32_t>(b.bytes.size() - rh - 16);
  b.bytes[rh + 8] = incl & 0xFF;
  rh = b.bytes.size();
  b.record_header(2, 0, 0, 1500);
  b.frame(6, kClient, 51000, kServer, 443, 2);
  incl = static_cast<uint32_t>(b.bytes.size() - rh - 16);
  b.bytes[rh + 8] = incl & 0xFF;

  auto entries = parse_pcap(b.bytes);
  REQUIRE(entries.size() == 2);
  CHECK(!entries[0].flow.has_value());
  REQUIRE(entries[1].flow.has_value());
  CHECK(entries[1].flow->protocol == Protocol::Tcp);
  CHECK(entries[1].flow->src_port == 51000);
  CHECK(entries[1].flow->dst_port == 443);
}

TEST_CASE("pcap: structural errors") {
  std::vector<uint8_t> tiny(10, 0);
  CHECK_THROWS_AS(parse_pcap(tiny), ParseError);

  PcapBuilder bad_magic;
  bad_magic.global_header(0xDEADBEEFu);
  CHECK_THROWS_AS(parse_pcap(bad_magic.bytes), ParseError);

  PcapBuilder bad_link;
  bad_link.global_header(0xA1B2C3D4u, 105);
  CHECK_THROWS_WITH_AS(parse_pcap(bad_link.bytes),
                       doctest::Contains("link type 105"), ParseError);

  PcapBuilder trunc;
  trunc.global_header(0xA1B2C3D4u);
  trunc.record_header(0, 0, 100, 100);  // no body follows
  CHECK_THROWS_WITH_AS(parse_pcap(trunc.bytes),
                       doctest::Contains("packet index 0"), ParseError);

  PcapBuilder v6;
  v6.global_header(0xA1B2C3D4u);
  size_t rh = v6.bytes.size();
  v6.record_header(0, 0, 0, 80);
  v6.frame(0, 0, 0, 0, 0, 0, 0x86DD);
  uint32_t incl = static_cast<uint32_t>(v6.bytes.size() - rh - 16);
  v6.bytes[rh + 8] = incl & 0xFF;
  CHECK_THROWS_WITH_AS(parse_pcap(v6.bytes), doctest::Contains("IPv6"), ParseError);
}

TEST_CASE("assign_direction partitions and rebases") {
  std::vector<PcapEntry> entries;
  FlowKey dl{kServer, 9944, kClient, 9944, Protocol::Udp};
  entries.push_back({5000000, 1490, dl});
  entries.push_back({5002000, 254, dl.reversed()});
  entries.push_back({5004000, 60, FlowKey{kServer, 1, 0x0A000003u, 2, Protocol::Udp}});
  entries.push_back({5001000, 100, std::nullopt});

  auto out = assign_direction(entries, kClient);
  CHECK(out.dropped == 2);
  REQUIRE(out.records.size() == 2);
  CHECK(static_cast<int64_t>(out.records.size()) + out.dropped ==
        static_cast<int64_t>(entries.size()));
  CHECK(out.records[0].timestamp_us == 0);
  CHECK(out.records[0].direction == Direction::Dl);
  CHECK(out.records[1].timestamp_us == 2000);
  CHECK(out.records[1].direction == Direction::Ul);
  CHECK(out.meta.t0_us == 5000000);
  CHECK(out.meta.packet_count == 2);
  CHECK(out.meta.duration_us == 2000);
  CHECK(out.meta.client_ip == kClient);
}

TEST_CASE("filter_flow directional and bidirectional") {
  FlowKey dl{kServer, 9944, kClient, 9944, Protocol::Udp};
  std::vector<PacketRecord> recs = {
      {0, Direction::Dl, 100, dl},
      {1, Direction::Ul, 50, dl.reversed()},
      {2, Direction::Dl, 70, FlowKey{kServer, 80, kClient, 81, Protocol::Tcp}},
  };
  CHECK(filter_flow(recs, dl, false).size() == 1);
  CHECK(filter_flow(recs, dl, true).size() == 2);
  CHECK(filter_flow(recs, FlowKey{1, 2, 3, 4, Protocol::Udp}, true).empty());
}

TEST_CASE("trace csv: parse, emit, round trip") {
  std::string text =
      "timestamp_us,direction,size_bytes,src_ip,src_port,dst_ip,dst_port,protocol\n"
      "0,DL,1490,10.0.0.1,9944,10.0.0.2,9944,UDP\n"
      "400,UL,254,10.0.0.2,9944,10.0.0.1,9944,UDP\n";
  std::istringstream in(text);
  auto parsed = parse_trace_csv(in);
  CHECK(parsed.warnings.empty());
  REQUIRE(parsed.records.size() == 2);
  CHECK(parsed.records[1].timestamp_us - parsed.records[0].timestamp_us == 400);

  std::ostringstream out;
  emit_trace_csv(out, parsed.records);
  CHECK(out.str() == text);
}

TEST_CASE("trace csv: synthetic trace round trips field-for-field") {
  auto trace = gen_vr_trace(VrProfile{}, 200.0, 77);
  std::ostringstream first;
  emit_trace_csv(first, trace);
  std::istringstream back(first.str());
  auto parsed = parse_trace_csv(back);
  std::ostringstream second;
  emit_trace_csv(second, parsed.records);
  CHECK(first.str() == second.str());
}

TEST_CASE("trace csv: strict row validation") {
  auto expect_parse_error = [](const std::string& row, const std::string& needle) {
    std::string text =
        "timestamp_us,direction,size_bytes,src_ip,src_port,dst_ip,dst_port,protocol\n" +
        row + "\n";
    std::istringstream in(text);
    CHECK_THROWS_WITH_AS(parse_trace_csv(in), doctest::Contains(needle.c_str()), ParseError);
  };
  expect_parse_error("0,dl,100,10.0.0.1,1,10.0.0.2,2,UDP", "line 2");
  expect_parse_error("0,dl,100,10.0.0.1,1,10.0.0.2,2,UDP", "direction");
  expect_parse_error("0,DL,100,10.0.0.1,1,10.0.0.2,2", "8 fields");
  expect_parse_error("0,DL,100,10.0.0.1,70000,10.0.0.2,2,UDP", "src_port");
  expect_parse_error("0,DL,100,10.0.0.1,1,10.0.0.2,2,icmp", "protocol");
  expect_parse_error("0,DL,0,10.0.0.1,1,10.0.0.2,2,UDP", "size_bytes");
  expect_parse_error("0,DL,100,10.0.0.299,1,10.0.0.2,2,UDP", "IPv4");

  std::istringstream wrong_header("ts,dir\n");
  CHECK_THROWS_WITH_AS(parse_trace_csv(wrong_header), doctest::Contains("header"), ParseError);
  std::istringstream empty("");
  CHECK_THROWS_AS(parse_trace_csv(empty), ParseError);
}

TEST_CASE("trace csv: absolute timestamps rebased, disorder warned") {
  std::string text =
      "# provenance comment\n"
      "timestamp_us,direction,size_bytes,src_ip,src_port,dst_ip,dst_port,protocol\n"
      "1700000000000000,DL,100,10.0.0.1,1,10.0.0.2,2,UDP\n"
      "1699999999999900,UL,50,10.0.0.2,2,10.0.0.1,1,UDP\n";
  std::istringstream in(text);
  auto parsed = parse_trace_csv(in);
  REQUIRE(parsed.records.size() == 2);
  CHECK(parsed.records[0].timestamp_us == 100);
  CHECK(parsed.records[1].timestamp_us == 0);
  REQUIRE(parsed.warnings.size() == 1);
  CHECK(parsed.warnings[0].find("line 4") != std::string::npos);
}
