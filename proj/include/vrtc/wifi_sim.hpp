#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "vrtc/packet.hpp"
#include "vrtc/synth_traffic.hpp"

namespace vrtc {

struct TrainedModel;

enum class Scheduler { Fifo, VrPriority };

const char* to_string(Scheduler s);
Scheduler scheduler_from_string(const std::string& text);  // fifo / priority

// Access-point downlink scenario: one VR station plus one background station
// behind a single non-preemptive server.
struct SimConfig {
  VrProfile vr_profile;            // defaults: 100 Mbps at 90 fps
  double bg_load_mbps = 300;       // long-run average offered background load
  double bg_on_mean_ms = 70;
  double bg_off_mean_ms = 30;
  int bg_packet_bytes = 1500;
  double phy_rate_vr_mbps = 600.5;
  double phy_rate_bg_mbps = 480.4;
  int per_frame_overhead_us = 100;
  int aggregation_limit_packets = 64;
  Scheduler scheduler = Scheduler::Fifo;
  double classify_after_ms = 500;
  int classify_subsamples = 20;
  double duration_s = 60;
  double warmup_s = 2;
  uint64_t seed = 1;
  bool record_events = false;  // keep the per-opportunity log for audits
};

struct ClassDelayStats {
  int64_t count = 0;
  double mean_ms = 0;
  double median_ms = 0;
  double p99_ms = 0;
  double max_ms = 0;
  int64_t served_bytes = 0;
};

// One transmission opportunity; queue counts are taken at service start,
// after admitting every packet that arrived by then and before removing the
// batch itself.
struct ServiceEvent {
  double start_us = 0;
  double end_us = 0;
  int cls = 0;  // 0 = VR, 1 = BG
  int batch_packets = 0;
  int64_t head_arrival_us = 0;
  int64_t queued_vr_at_start = 0;
  int64_t queued_bg_at_start = 0;
};

struct SimResult {
  ClassDelayStats vr;
  ClassDelayStats bg;
  bool unstable = false;
  bool priority_active = false;  // strict priority engaged at the flip point
  std::string classify_note;
  int64_t arrivals_vr = 0, arrivals_bg = 0;
  int64_t served_vr = 0, served_bg = 0;
  int64_t queued_end_vr = 0, queued_end_bg = 0;
  double mean_queue_len = 0;  // time-averaged system occupancy, packets
  std::vector<double> vr_delays_ms;  // post-warmup per-packet delays
  std::vector<double> bg_delays_ms;
  std::vector<ServiceEvent> events;  // populated when record_events
};

struct SimPacket {
  int64_t arrival_us = 0;
  int32_t size_bytes = 0;
};

void validate_sim_config(const SimConfig& cfg);

// Exponential ON/OFF source; Poisson arrivals during ON bursts at a rate
// compensated so the long-run average equals load_mbps.
std::vector<SimPacket> gen_onoff_arrivals(double load_mbps, double on_mean_ms,
                                          double off_mean_ms, int packet_bytes,
                                          double duration_ms, uint64_t seed);

// Core queueing loop over explicit arrival streams (each sorted by arrival).
// priority_after_flip only matters for the VrPriority scheduler: it is the
// classification outcome gating the switch away from FIFO.
SimResult simulate_queue(const SimConfig& cfg, std::span<const SimPacket> vr_packets,
                         std::span<const SimPacket> bg_packets, bool priority_after_flip);

struct ClassifyDecision {
  bool vr = false;
  std::string note;
};

// Label the VR station from its first classify_after_ms of traffic. Without a
// model the oracle label (VR) is used and noted.
ClassifyDecision classify_trigger(std::span<const PacketRecord> station_trace,
                                  double classify_after_ms, int n_subsamples,
                                  const TrainedModel* model);

SimResult run_sim(const SimConfig& cfg, const TrainedModel* model = nullptr);

struct SweepRow {
  double bg_load_mbps = 0;
  Scheduler scheduler = Scheduler::Fifo;
  SimResult result;
};

// Both schedulers per load over a shared per-load derived seed, so the two
// rows of one load see identical arrival streams.
std::vector<SweepRow> sweep(const SimConfig& base, std::span<const double> bg_loads,
                            const TrainedModel* model = nullptr);

void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows,
                     std::span<const std::string> comment_lines = {});
void write_sweep_summary(std::ostream& out, std::span<const SweepRow> rows);

}  // namespace vrtc
