#include "vrtc/wifi_sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "vrtc/classifiers.hpp"
#include "vrtc/errors.hpp"
#include "vrtc/feature_extract.hpp"
#include "vrtc/rng.hpp"
#include "vrtc/textutil.hpp"

namespace vrtc {

const char* to_string(Scheduler s) { return s == Scheduler::Fifo ? "fifo" : "priority"; }

Scheduler scheduler_from_string(const std::string& text) {
  if (text == "fifo") return Scheduler::Fifo;
  if (text == "priority") return Scheduler::VrPriority;
  throw ParseError("unknown scheduler \"" + text + "\" (fifo, priority)");
}

void validate_sim_config(const SimConfig& cfg) {
  if (!(cfg.bg_load_mbps >= 0)) throw ContractError("bg_load_mbps must be >= 0");
  if (!(cfg.bg_on_mean_ms > 0 && cfg.bg_off_mean_ms > 0))
    throw ContractError("bg on/off means must be > 0");
  if (cfg.bg_packet_bytes < 1) throw ContractError("bg_packet_bytes must be >= 1");
  if (!(cfg.phy_rate_vr_mbps > 0 && cfg.phy_rate_bg_mbps > 0))
    throw ContractError("phy rates must be > 0");
  if (cfg.per_frame_overhead_us < 0) throw ContractError("per_frame_overhead_us must be >= 0");
  if (cfg.aggregation_limit_packets < 1)
    throw ContractError("aggregation_limit_packets must be >= 1");
  if (!(cfg.classify_after_ms > 0)) throw ContractError("classify_after_ms must be > 0");
  if (cfg.classify_subsamples < 2) throw ContractError("classify_subsamples must be >= 2");
  if (!(cfg.duration_s > 0)) throw ContractError("duration_s must be > 0");
  if (!(cfg.warmup_s >= 0 && cfg.warmup_s < cfg.duration_s))
    throw ContractError("warmup_s must lie in [0, duration_s)");
}

std::vector<SimPacket> gen_onoff_arrivals(double load_mbps, double on_mean_ms,
                                          double off_mean_ms, int packet_bytes,
                                          double duration_ms, uint64_t seed) {
  if (!(load_mbps >= 0)) throw ContractError("load_mbps must be >= 0");
  if (!(on_mean_ms > 0 && off_mean_ms > 0)) throw ContractError("on/off means must be > 0");
  if (packet_bytes < 1) throw ContractError("packet_bytes must be >= 1");
  if (!(duration_ms >= 0)) throw ContractError("duration_ms must be >= 0");

  std::vector<SimPacket> out;
  if (load_mbps == 0 || duration_ms == 0) return out;

  // Rate during ON bursts compensates the OFF share so the long-run average
  // offered load equals load_mbps. Mbit/s equals bit/us, so packets/us falls
  // out directly.
  const double on_rate_mbps = load_mbps * (on_mean_ms + off_mean_ms) / on_mean_ms;
  const double gap_mean_us = 8.0 * packet_bytes / on_rate_mbps;
  const double duration_us = duration_ms * 1000.0;

  Rng rng(seed);
  double t = 0;  // state boundary clock; the source starts ON
  while (t < duration_us) {
    const double on_end = t + rng.next_exponential(on_mean_ms * 1000.0);
    double ta = t + rng.next_exponential(gap_mean_us);
    while (ta < on_end && ta < duration_us) {
      out.push_back({static_cast<int64_t>(std::llround(ta)), packet_bytes});
      ta += rng.next_exponential(gap_mean_us);
    }
    t = on_end + rng.next_exponential(off_mean_ms * 1000.0);
  }
  return out;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_sorted(std::span<const SimPacket> packets, const char* name) {
  for (size_t i = 0; i + 1 < packets.size(); ++i)
    if (packets[i + 1].arrival_us < packets[i].arrival_us)
      throw ContractError(std::string(name) + " arrivals not time-ordered");
  for (const SimPacket& p : packets)
    if (p.size_bytes < 1) throw ContractError(std::string(name) + " packet size must be >= 1");
}

double percentile_sorted(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) return 0;
  const auto n = static_cast<double>(sorted.size());
  auto rank = static_cast<size_t>(std::ceil(p / 100.0 * n));
  rank = std::clamp<size_t>(rank, 1, sorted.size());
  return sorted[rank - 1];
}

ClassDelayStats finish_stats(std::vector<double>& delays_ms, int64_t served_bytes) {
  ClassDelayStats s;
  s.count = static_cast<int64_t>(delays_ms.size());
  s.served_bytes = served_bytes;
  if (delays_ms.empty()) return s;
  double sum = 0;
  for (double d : delays_ms) sum += d;
  s.mean_ms = sum / static_cast<double>(delays_ms.size());
  std::vector<double> sorted = delays_ms;
  std::sort(sorted.begin(), sorted.end());
  s.median_ms = percentile_sorted(sorted, 50);
  s.p99_ms = percentile_sorted(sorted, 99);
  s.max_ms = sorted.back();
  return s;
}

}  // namespace

SimResult simulate_queue(const SimConfig& cfg, std::span<const SimPacket> vr_packets,
                         std::span<const SimPacket> bg_packets, bool priority_after_flip) {
  validate_sim_config(cfg);
  check_sorted(vr_packets, "vr");
  check_sorted(bg_packets, "bg");

  const double duration_us = cfg.duration_s * 1e6;
  const double warmup_us = cfg.warmup_s * 1e6;
  const double flip_us = cfg.classify_after_ms * 1000.0;
  const bool can_flip = cfg.scheduler == Scheduler::VrPriority && priority_after_flip;
  const size_t limit = static_cast<size_t>(cfg.aggregation_limit_packets);

  const size_t nv = vr_packets.size(), nb = bg_packets.size();
  size_t iv = 0, ib = 0;        // next unserved packet per class
  size_t seen_v = 0, seen_b = 0;  // packets whose arrival <= current decision time
  double t_free = 0;

  SimResult res;
  res.arrivals_vr = static_cast<int64_t>(nv);
  res.arrivals_bg = static_cast<int64_t>(nb);
  int64_t bytes_v = 0, bytes_b = 0;
  std::vector<std::pair<double, int64_t>> occupancy_deltas;  // (time, +-packets)
  occupancy_deltas.reserve(nv + nb + 1024);
  for (const SimPacket& p : vr_packets)
    occupancy_deltas.push_back({static_cast<double>(p.arrival_us), 1});
  for (const SimPacket& p : bg_packets)
    occupancy_deltas.push_back({static_cast<double>(p.arrival_us), 1});

  while (iv < nv || ib < nb) {
    const double av = iv < nv ? static_cast<double>(vr_packets[iv].arrival_us) : kInf;
    const double ab = ib < nb ? static_cast<double>(bg_packets[ib].arrival_us) : kInf;
    const double start = std::max(t_free, std::min(av, ab));
    if (start >= duration_us) break;

    while (seen_v < nv && static_cast<double>(vr_packets[seen_v].arrival_us) <= start) ++seen_v;
    while (seen_b < nb && static_cast<double>(bg_packets[seen_b].arrival_us) <= start) ++seen_b;
    const auto queued_v = static_cast<int64_t>(seen_v - iv);
    const auto queued_b = static_cast<int64_t>(seen_b - ib);

    const bool priority = can_flip && start >= flip_us;
    int cls;
    if (priority)
      cls = queued_v > 0 ? 0 : 1;
    else
      cls = av <= ab ? 0 : 1;  // FIFO head; simultaneous arrivals favor VR

    // The opportunity aggregates the chosen station's oldest queued packets,
    // regardless of other-class packets interleaved in global arrival order
    // (per-destination frame aggregation). Packets of the same class arriving
    // before the opportunity finishes join it up to the aggregation limit, so
    // a trickle of sub-service-time arrivals consolidates instead of paying
    // one overhead each.
    std::span<const SimPacket> mine = cls == 0 ? vr_packets : bg_packets;
    size_t& i_mine = cls == 0 ? iv : ib;
    const size_t seen_mine = cls == 0 ? seen_v : seen_b;
    const size_t batch_begin = i_mine;
    const int64_t head_arrival = mine[i_mine].arrival_us;
    const double phy = cls == 0 ? cfg.phy_rate_vr_mbps : cfg.phy_rate_bg_mbps;
    const size_t n_mine = cls == 0 ? nv : nb;

    double end = start + cfg.per_frame_overhead_us;
    size_t taken = 0;
    while (taken < limit && i_mine < n_mine &&
           (i_mine < seen_mine || static_cast<double>(mine[i_mine].arrival_us) <= end)) {
      end += 8.0 * mine[i_mine].size_bytes / phy;
      ++i_mine;
      ++taken;
    }

    for (size_t i = batch_begin; i < batch_begin + taken; ++i) {
      const SimPacket& p = mine[i];
      (cls == 0 ? bytes_v : bytes_b) += p.size_bytes;
      if (static_cast<double>(p.arrival_us) >= warmup_us) {
        const double delay_ms = (end - static_cast<double>(p.arrival_us)) / 1000.0;
        (cls == 0 ? res.vr_delays_ms : res.bg_delays_ms).push_back(delay_ms);
      }
    }
    occupancy_deltas.push_back({end, -static_cast<int64_t>(taken)});
    if (cfg.record_events)
      res.events.push_back({start, end, cls, static_cast<int>(taken), head_arrival, queued_v,
                            queued_b});
    t_free = end;
  }

  res.served_vr = static_cast<int64_t>(iv);
  res.served_bg = static_cast<int64_t>(ib);
  res.queued_end_vr = static_cast<int64_t>(nv - iv);
  res.queued_end_bg = static_cast<int64_t>(nb - ib);
  res.vr = finish_stats(res.vr_delays_ms, bytes_v);
  res.bg = finish_stats(res.bg_delays_ms, bytes_b);

  // Time-averaged system occupancy feeds the instability heuristic: a run
  // whose final backlog dwarfs its average was still growing when time ran
  // out.
  std::sort(occupancy_deltas.begin(), occupancy_deltas.end(),
            [](const auto& a, const auto& b) {
              return a.first != b.first ? a.first < b.first : a.second > b.second;
            });
  double horizon = std::max(duration_us, t_free);
  double integral = 0, prev = 0;
  int64_t occupancy = 0;
  for (const auto& [at, delta] : occupancy_deltas) {
    integral += static_cast<double>(occupancy) * (std::min(at, horizon) - prev);
    prev = std::min(at, horizon);
    occupancy += delta;
  }
  integral += static_cast<double>(occupancy) * (horizon - prev);
  res.mean_queue_len = horizon > 0 ? integral / horizon : 0;
  const int64_t backlog = res.queued_end_vr + res.queued_end_bg;
  // Second clause: a queue growing linearly from t=0 ends near 2x its time
  // average, so the ratio test alone cannot see steady overload; a stable
  // queue drains to a negligible share of arrivals by the end of the run.
  const auto total = static_cast<double>(nv + nb);
  res.unstable = static_cast<double>(backlog) > 100.0 * res.mean_queue_len ||
                 (backlog >= 1000 && static_cast<double>(backlog) > 0.02 * total);
  return res;
}

ClassifyDecision classify_trigger(std::span<const PacketRecord> station_trace,
                                  double classify_after_ms, int n_subsamples,
                                  const TrainedModel* model) {
  if (model == nullptr) return {true, "oracle label: no model supplied"};

  ExtractionConfig ec;
  ec.omega_ms = static_cast<int>(std::llround(classify_after_ms));
  ec.n_subsamples = n_subsamples;
  const std::vector<Sample> samples = window_packets(station_trace, ec);
  if (samples.empty() || samples.front().index != 0)
    return {false, "model skipped: no traffic in the first window"};

  const FeatureVector fv = extract_features(samples.front(), ec, std::nullopt);
  const int label = predict(*model, fv.values);
  return {label == 1, label == 1 ? "model predicted vr" : "model predicted nonvr"};
}

SimResult run_sim(const SimConfig& cfg, const TrainedModel* model) {
  validate_sim_config(cfg);
  const double duration_ms = cfg.duration_s * 1000.0;

  const std::vector<PacketRecord> station =
      gen_vr_trace(cfg.vr_profile, duration_ms, derive_seed(cfg.seed, {0}));
  std::vector<SimPacket> vr;
  vr.reserve(station.size());
  for (const PacketRecord& r : station)
    if (r.direction == Direction::Dl)
      vr.push_back({r.timestamp_us, static_cast<int32_t>(r.size_bytes)});

  const std::vector<SimPacket> bg =
      gen_onoff_arrivals(cfg.bg_load_mbps, cfg.bg_on_mean_ms, cfg.bg_off_mean_ms,
                         cfg.bg_packet_bytes, duration_ms, derive_seed(cfg.seed, {1}));

  ClassifyDecision decision{false, ""};
  if (cfg.scheduler == Scheduler::VrPriority)
    decision = classify_trigger(station, cfg.classify_after_ms, cfg.classify_subsamples, model);

  SimResult res = simulate_queue(cfg, vr, bg, decision.vr);
  res.priority_active = cfg.scheduler == Scheduler::VrPriority && decision.vr;
  res.classify_note = decision.note;
  return res;
}

std::vector<SweepRow> sweep(const SimConfig& base, std::span<const double> bg_loads,
                            const TrainedModel* model) {
  std::vector<SweepRow> rows;
  rows.reserve(bg_loads.size() * 2);
  for (size_t li = 0; li < bg_loads.size(); ++li) {
    SimConfig cfg = base;
    cfg.bg_load_mbps = bg_loads[li];
    cfg.seed = derive_seed(base.seed, {li});  // shared by both schedulers
    for (Scheduler s : {Scheduler::Fifo, Scheduler::VrPriority}) {
      cfg.scheduler = s;
      rows.push_back({bg_loads[li], s, run_sim(cfg, model)});
    }
  }
  return rows;
}

void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows,
                     std::span<const std::string> comment_lines) {
  for (const auto& c : comment_lines) out << "# " << c << '\n';
  out << "bg_load_mbps,scheduler,class,count,mean_ms,median_ms,p99_ms,max_ms\n";
  for (const SweepRow& row : rows) {
    const auto line = [&](const char* cls, const ClassDelayStats& s) {
      out << format_double(row.bg_load_mbps) << ',' << to_string(row.scheduler) << ',' << cls
          << ',' << s.count << ',' << format_double(s.mean_ms) << ','
          << format_double(s.median_ms) << ',' << format_double(s.p99_ms) << ','
          << format_double(s.max_ms) << '\n';
    };
    line("vr", row.result.vr);
    line("bg", row.result.bg);
  }
}

void write_sweep_summary(std::ostream& out, std::span<const SweepRow> rows) {
  for (size_t i = 0; i + 1 < rows.size(); i += 2) {
    const SweepRow& fifo = rows[i];
    const SweepRow& prio = rows[i + 1];
    if (fifo.scheduler != Scheduler::Fifo || prio.scheduler != Scheduler::VrPriority) continue;
    out << "load " << format_double(fifo.bg_load_mbps) << " Mbps: vr p99 "
        << format_double(fifo.result.vr.p99_ms) << " -> " << format_double(prio.result.vr.p99_ms)
        << " ms";
    if (prio.result.vr.p99_ms > 0)
      out << " (x" << format_double(fifo.result.vr.p99_ms / prio.result.vr.p99_ms)
          << " improvement)";
    out << ", bg p99 " << format_double(fifo.result.bg.p99_ms) << " -> "
        << format_double(prio.result.bg.p99_ms) << " ms";
    if (fifo.result.bg.p99_ms > 0)
      out << " (x" << format_double(prio.result.bg.p99_ms / fifo.result.bg.p99_ms)
          << " degradation)";
    if (fifo.result.unstable || prio.result.unstable) out << " [unstable]";
    out << '\n';
  }
}

}  // namespace vrtc
