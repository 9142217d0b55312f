#include "vrtc/synth_traffic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "vrtc/errors.hpp"
#include "vrtc/rng.hpp"
#include "vrtc/textutil.hpp"

namespace vrtc {

namespace {

constexpr uint32_t kClientIp = 0x0A000002;   // 10.0.0.2
constexpr uint32_t kVrServerIp = 0x0A000001; // 10.0.0.1
constexpr uint32_t kCdnIp = 0x0A000101;      // 10.0.1.1
constexpr uint32_t kMeetIp = 0x0A000201;     // 10.0.2.1

FlowKey dl_key(uint32_t server, uint16_t sport, uint16_t cport, Protocol proto) {
  return FlowKey{server, sport, kClientIp, cport, proto};
}

void sort_records(std::vector<PacketRecord>& recs) {
  std::stable_sort(recs.begin(), recs.end(), [](const PacketRecord& a, const PacketRecord& b) {
    if (a.timestamp_us != b.timestamp_us) return a.timestamp_us < b.timestamp_us;
    return a.direction < b.direction;  // DL ahead of UL on ties
  });
}

}  // namespace

std::vector<PacketRecord> gen_vr_trace(const VrProfile& profile, double duration_ms,
                                       uint64_t seed) {
  if (duration_ms <= 0) return {};
  if (profile.fps <= 0 || profile.bitrate_mbps <= 0)
    throw ContractError("gen_vr_trace: fps and bitrate must be positive");
  if (profile.dl_fragment_bytes < 2)
    throw ContractError("gen_vr_trace: dl_fragment_bytes must be >= 2");
  const int64_t duration_us = std::llround(duration_ms * 1000.0);
  Rng rng(seed);
  FlowKey dl = dl_key(kVrServerIp, 9944, 9944, Protocol::Udp);
  FlowKey ul = dl.reversed();
  std::vector<PacketRecord> recs;

  const double nominal_frame_bytes =
      profile.bitrate_mbps * 1e6 / 8.0 / static_cast<double>(profile.fps);
  for (int64_t k = 0;; ++k) {
    int64_t t = k * 1000000 / profile.fps;  // drift-free integer frame ticks
    if (t >= duration_us) break;
    double factor = 1.0 + profile.frame_size_jitter * (2.0 * rng.next_unit() - 1.0);
    int64_t frame_bytes = std::max<int64_t>(1, std::llround(nominal_frame_bytes * factor));
    int64_t n_frag = frame_bytes / profile.dl_fragment_bytes;
    int64_t residual = frame_bytes % profile.dl_fragment_bytes;
    for (int64_t i = 0; i < n_frag; ++i)
      recs.push_back(PacketRecord{t + i * profile.intra_batch_gap_us, Direction::Dl,
                                  profile.dl_fragment_bytes, dl});
    if (residual > 0)
      recs.push_back(PacketRecord{t + n_frag * profile.intra_batch_gap_us, Direction::Dl,
                                  static_cast<int32_t>(residual), dl});
  }

  const double ul_interval_us = profile.ul_interval_ms * 1000.0;
  for (int64_t j = 0;; ++j) {
    int64_t t = std::llround(static_cast<double>(j) * ul_interval_us);
    if (t >= duration_us) break;
    recs.push_back(PacketRecord{t, Direction::Ul, profile.ul_tracking_bytes, ul});
  }

  sort_records(recs);
  return recs;
}

std::vector<PacketRecord> gen_nonvr_trace(const NonVrProfile& profile, double duration_ms,
                                          uint64_t seed) {
  if (duration_ms <= 0) return {};
  const int64_t duration_us = std::llround(duration_ms * 1000.0);
  Rng rng(seed);
  std::vector<PacketRecord> recs;

  if (profile.kind == NonVrKind::Streaming) {
    if (profile.burst_ms <= 0 || profile.idle_ms <= 0 || profile.burst_rate_mbps <= 0)
      throw ContractError("gen_nonvr_trace: streaming durations and rate must be positive");
    FlowKey dl = dl_key(kCdnIp, 443, 51000, Protocol::Tcp);
    FlowKey ul = dl.reversed();
    const double pkt_interval_us =
        static_cast<double>(profile.dl_packet_bytes) * 8.0 / profile.burst_rate_mbps;
    double t = 0;
    while (t < static_cast<double>(duration_us)) {
      double burst_len =
          profile.burst_ms * 1000.0 *
          (1.0 + profile.duration_jitter * (2.0 * rng.next_unit() - 1.0));
      double idle_len =
          profile.idle_ms * 1000.0 *
          (1.0 + profile.duration_jitter * (2.0 * rng.next_unit() - 1.0));
      for (int64_t i = 0;; ++i) {
        double tb = t + static_cast<double>(i) * pkt_interval_us;
        if (tb >= t + burst_len || tb >= static_cast<double>(duration_us)) break;
        recs.push_back(PacketRecord{std::llround(tb), Direction::Dl,
                                    profile.dl_packet_bytes, dl});
      }
      // chunk requests from the client, spread across the following idle gap
      for (int i = 0; i < profile.ul_requests_per_idle; ++i) {
        double tu = t + burst_len + rng.next_unit() * idle_len;
        if (tu < static_cast<double>(duration_us))
          recs.push_back(PacketRecord{std::llround(tu), Direction::Ul,
                                      profile.ul_packet_bytes, ul});
      }
      t += burst_len + idle_len;
    }
  } else {
    if (profile.meeting_dl_mbps <= 0 || profile.meeting_ul_mbps <= 0)
      throw ContractError("gen_nonvr_trace: meeting rates must be positive");
    FlowKey dl = dl_key(kMeetIp, 3478, 52000, Protocol::Udp);
    FlowKey ul = dl.reversed();
    auto steady = [&](double rate_mbps, int bytes, Direction dir, const FlowKey& key) {
      double period_us = static_cast<double>(bytes) * 8.0 / rate_mbps;
      for (int64_t i = 0;; ++i) {
        double t = (static_cast<double>(i) + 0.5 * (2.0 * rng.next_unit() - 1.0)) * period_us;
        if (static_cast<double>(i) * period_us >= static_cast<double>(duration_us)) break;
        int64_t ts = std::llround(std::max(0.0, t));
        if (ts >= duration_us) continue;
        recs.push_back(PacketRecord{ts, dir, bytes, key});
      }
    };
    steady(profile.meeting_dl_mbps, profile.dl_packet_bytes, Direction::Dl, dl);
    steady(profile.meeting_ul_mbps, profile.ul_packet_bytes, Direction::Ul, ul);
  }

  sort_records(recs);
  return recs;
}

std::vector<VrProfile> default_vr_profiles() {
  std::vector<VrProfile> out;
  for (int fps : {60, 90, 120}) {
    for (double mbps : {40.0, 50.0, 100.0}) {
      VrProfile p;
      p.fps = fps;
      p.bitrate_mbps = mbps;
      out.push_back(p);
    }
  }
  return out;
}

std::vector<NonVrProfile> default_nonvr_profiles() {
  NonVrProfile streaming;
  streaming.kind = NonVrKind::Streaming;
  streaming.burst_ms = 180.0;
  streaming.idle_ms = 620.0;
  streaming.duration_jitter = 0.25;  // decouple burst phase from window grids
  NonVrProfile meeting;
  meeting.kind = NonVrKind::Meeting;
  return {streaming, meeting};
}

std::vector<CorpusEntry> gen_labeled_corpus(std::span<const VrProfile> vr_profiles,
                                            std::span<const NonVrProfile> nonvr_profiles,
                                            double duration_ms, uint64_t seed) {
  std::vector<CorpusEntry> out;
  for (size_t i = 0; i < vr_profiles.size(); ++i) {
    const VrProfile& p = vr_profiles[i];
    CorpusEntry e;
    std::ostringstream name;
    name << "vr_" << p.fps << "fps_" << p.bitrate_mbps << "mbps";
    e.name = name.str();
    e.label = 1;
    e.seed = derive_seed(seed, {1, i});
    e.trace = gen_vr_trace(p, duration_ms, e.seed);
    out.push_back(std::move(e));
  }
  for (size_t j = 0; j < nonvr_profiles.size(); ++j) {
    const NonVrProfile& p = nonvr_profiles[j];
    CorpusEntry e;
    e.name = p.kind == NonVrKind::Streaming ? "nonvr_streaming" : "nonvr_meeting";
    if (nonvr_profiles.size() > 2) e.name += "_" + std::to_string(j);
    e.label = 0;
    e.seed = derive_seed(seed, {0, j});
    e.trace = gen_nonvr_trace(p, duration_ms, e.seed);
    out.push_back(std::move(e));
  }
  return out;
}

void write_manifest(const std::string& path, std::span<const ManifestEntry> entries,
                    std::span<const std::string> comment_lines) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  for (const auto& c : comment_lines) out << "# " << c << "\n";
  for (const auto& e : entries)
    out << "name=" << e.name << " label=" << e.label << " seed=" << e.seed
        << " path=" << e.path << "\n";
  out.flush();
  if (!out) throw IoError("write failed for " + path);
}

std::vector<ManifestEntry> read_manifest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::vector<ManifestEntry> entries;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    ManifestEntry e;
    std::istringstream ss(line);
    std::string tok;
    bool has_name = false, has_label = false, has_seed = false, has_path = false;
    while (ss >> tok) {
      size_t eq = tok.find('=');
      if (eq == std::string::npos)
        throw ParseError("manifest: line " + std::to_string(lineno) + ": bad token \"" +
                         tok + "\"");
      std::string key = tok.substr(0, eq);
      std::string value = tok.substr(eq + 1);
      std::string ctx = "manifest: line " + std::to_string(lineno);
      if (key == "name") { e.name = value; has_name = true; }
      else if (key == "label") {
        int64_t v = parse_int(value, ctx);
        if (v != 0 && v != 1) throw ParseError(ctx + ": label outside {0,1}");
        e.label = static_cast<int>(v);
        has_label = true;
      }
      else if (key == "seed") { e.seed = parse_u64(value, ctx); has_seed = true; }
      else if (key == "path") { e.path = value; has_path = true; }
      else throw ParseError(ctx + ": unknown key \"" + key + "\"");
    }
    if (!has_name || !has_label || !has_seed || !has_path)
      throw ParseError("manifest: line " + std::to_string(lineno) +
                       ": needs name, label, seed, path");
    entries.push_back(std::move(e));
  }
  return entries;
}

}  // namespace vrtc
