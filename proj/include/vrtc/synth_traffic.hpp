#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "vrtc/packet.hpp"

namespace vrtc {

// VR stream structure: per-frame DL fragment batches plus a fixed-cadence
// UL tracking stream.
struct VrProfile {
  int fps = 90;
  double bitrate_mbps = 100.0;
  int dl_fragment_bytes = 1490;
  int ul_tracking_bytes = 254;
  double ul_interval_ms = 2.0;
  double frame_size_jitter = 0.10;  // uniform +/- fraction on frame bytes
  int intra_batch_gap_us = 50;
};

enum class NonVrKind { Streaming, Meeting };

struct NonVrProfile {
  NonVrKind kind = NonVrKind::Streaming;
  int dl_packet_bytes = 1290;
  int ul_packet_bytes = 80;
  // streaming: alternating DL chunk bursts and idle gaps; UL requests are
  // spread across the idle period that precedes each burst.
  double burst_ms = 200.0;
  double idle_ms = 800.0;
  double burst_rate_mbps = 25.0;     // DL rate while a burst is active
  double duration_jitter = 0.0;      // uniform +/- fraction on burst/idle lengths
  int ul_requests_per_idle = 4;
  // meeting: steady bidirectional flows.
  double meeting_dl_mbps = 2.0;
  double meeting_ul_mbps = 0.15;
};

std::vector<PacketRecord> gen_vr_trace(const VrProfile& profile, double duration_ms,
                                       uint64_t seed);
std::vector<PacketRecord> gen_nonvr_trace(const NonVrProfile& profile, double duration_ms,
                                          uint64_t seed);

struct CorpusEntry {
  std::string name;
  int label = 0;  // 1 = VR, 0 = Non-VR
  uint64_t seed = 0;
  std::vector<PacketRecord> trace;
};

// The desk-scale corpus: fps {60,90,120} x bitrate {40,50,100} Mbps.
std::vector<VrProfile> default_vr_profiles();
// One streaming profile (jittered burst/idle so bursts drift across window
// grids) and one meeting profile.
std::vector<NonVrProfile> default_nonvr_profiles();

std::vector<CorpusEntry> gen_labeled_corpus(std::span<const VrProfile> vr_profiles,
                                            std::span<const NonVrProfile> nonvr_profiles,
                                            double duration_ms, uint64_t seed);

// Manifest: one `name=... label=... seed=... path=...` line per trace.
struct ManifestEntry {
  std::string name;
  int label = 0;
  uint64_t seed = 0;
  std::string path;
};

void write_manifest(const std::string& path, std::span<const ManifestEntry> entries,
                    std::span<const std::string> comment_lines = {});
std::vector<ManifestEntry> read_manifest(const std::string& path);

}  // namespace vrtc
