#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vrtc/packet.hpp"

namespace vrtc {

inline constexpr int kFeatureCount = 23;

// Sample duration omega (ms) and sub-sample count N. tau = omega/N need not
// be an integral number of ms; sub-sample boundaries are exact in micro-
// second arithmetic.
struct ExtractionConfig {
  int64_t omega_ms = 500;
  int n_subsamples = 20;
};

struct TimedSize {
  int64_t timestamp_us = 0;
  int32_t size_bytes = 0;
};

// All packets of one trace inside window [k*omega, (k+1)*omega); index is
// the window ordinal k. Zero-packet windows are never materialized.
struct Sample {
  int64_t index = 0;
  int64_t window_start_us = 0;
  int64_t window_end_us = 0;
  std::vector<TimedSize> dl_packets;
  std::vector<TimedSize> ul_packets;
};

std::vector<Sample> window_packets(std::span<const PacketRecord> records,
                                   const ExtractionConfig& cfg);

// Per-direction statistics. Sizes in bytes, inter-arrival times in ms, std
// is the population standard deviation. Degenerate cases: 0 packets -> all
// stats 0; 1 packet -> size stats collapse to that size, IAT stats 0.
struct DirStats {
  int64_t count = 0;
  double total_bytes = 0;
  double min_size = 0, max_size = 0, mean_size = 0, std_size = 0;
  double min_iat_ms = 0, max_iat_ms = 0, mean_iat_ms = 0, std_iat_ms = 0;
};

DirStats direction_stats(std::span<const TimedSize> packets);

// Per-sub-sample byte totals: component n (0-based) sums packets whose
// timestamp falls in [start + n*tau, start + (n+1)*tau), tau = omega/N.
struct SubsampleVectors {
  std::vector<double> dl;
  std::vector<double> ul;
};

SubsampleVectors subsample_bytes(const Sample& sample, const ExtractionConfig& cfg);

// Pearson correlation of two equal-length vectors (N >= 2). Returns 0 when
// either vector has zero variance; otherwise the result is clamped to
// [-1, 1] against floating-point overshoot.
double pearson_cc(std::span<const double> d, std::span<const double> u);

// Feature order matches feature_names(): per-direction counts, byte totals,
// packet-size stats, inter-arrival stats, DL/UL ratios, cross-correlation.
enum FeatureIndex : int {
  kNoPDL = 0, kNoPUL, kTBDL, kTBUL,
  kMinPSDL, kMinPSUL, kMaxPSDL, kMaxPSUL,
  kMeanPSDL, kMeanPSUL, kStdPSDL, kStdPSUL,
  kMinPIATDL, kMinPIATUL, kMaxPIATDL, kMaxPIATUL,
  kMeanPIATDL, kMeanPIATUL, kStdPIATDL, kStdPIATUL,
  kRoNoP, kRoTB, kCC,
};

const std::array<std::string, kFeatureCount>& feature_names();

struct FeatureVector {
  std::array<double, kFeatureCount> values{};
  std::optional<int> label;  // 1 = VR, 0 = Non-VR, nullopt = unlabeled
};

FeatureVector extract_features(const Sample& sample, const ExtractionConfig& cfg,
                               std::optional<int> label = std::nullopt);

std::vector<FeatureVector> extract_dataset(std::span<const PacketRecord> records,
                                           const ExtractionConfig& cfg,
                                           std::optional<int> label = std::nullopt);

// Truncates the longer class from its tail so counts match, then
// concatenates (vr rows first). Relative order inside each class is kept.
std::vector<FeatureVector> balance_dataset(std::span<const FeatureVector> vr,
                                           std::span<const FeatureVector> nonvr);

// Dataset CSV: feature_names() columns plus `label`; empty label field for
// unlabeled rows. Values round-trip losslessly (shortest exact decimal).
void emit_dataset_csv(std::ostream& out, std::span<const FeatureVector> rows,
                      std::span<const std::string> comment_lines = {});
void emit_dataset_csv_file(const std::string& path, std::span<const FeatureVector> rows,
                           std::span<const std::string> comment_lines = {});
std::vector<FeatureVector> parse_dataset_csv(std::istream& in);
std::vector<FeatureVector> parse_dataset_csv_file(const std::string& path);

}  // namespace vrtc
