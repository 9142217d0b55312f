#include "vrtc/feature_extract.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "vrtc/errors.hpp"
#include "vrtc/textutil.hpp"

namespace vrtc {

namespace {

void validate_config(const ExtractionConfig& cfg) {
  if (cfg.omega_ms < 1) throw ContractError("extraction: omega_ms must be >= 1");
  if (cfg.n_subsamples < 2) throw ContractError("extraction: n_subsamples must be >= 2");
}

}  // namespace

std::vector<Sample> window_packets(std::span<const PacketRecord> records,
                                   const ExtractionConfig& cfg) {
  validate_config(cfg);
  std::vector<Sample> samples;
  const int64_t omega_us = cfg.omega_ms * 1000;
  int64_t prev_ts = -1;
  for (const auto& r : records) {
    if (r.timestamp_us < prev_ts)
      throw ContractError("window_packets: records not time-ordered");
    prev_ts = r.timestamp_us;
    int64_t k = r.timestamp_us / omega_us;
    if (samples.empty() || samples.back().index != k) {
      Sample s;
      s.index = k;
      s.window_start_us = k * omega_us;
      s.window_end_us = (k + 1) * omega_us;
      samples.push_back(std::move(s));
    }
    TimedSize ts{r.timestamp_us, r.size_bytes};
    if (r.direction == Direction::Dl)
      samples.back().dl_packets.push_back(ts);
    else
      samples.back().ul_packets.push_back(ts);
  }
  return samples;
}

DirStats direction_stats(std::span<const TimedSize> packets) {
  DirStats st;
  st.count = static_cast<int64_t>(packets.size());
  if (packets.empty()) return st;

  double minsz = packets[0].size_bytes, maxsz = packets[0].size_bytes, total = 0;
  for (const auto& p : packets) {
    double sz = p.size_bytes;
    total += sz;
    minsz = std::min(minsz, sz);
    maxsz = std::max(maxsz, sz);
  }
  double mean = total / static_cast<double>(packets.size());
  double var = 0;
  for (const auto& p : packets) {
    double d = p.size_bytes - mean;
    var += d * d;
  }
  var /= static_cast<double>(packets.size());
  st.total_bytes = total;
  st.min_size = minsz;
  st.max_size = maxsz;
  st.mean_size = mean;
  st.std_size = std::sqrt(var);

  if (packets.size() >= 2) {
    size_t n_iat = packets.size() - 1;
    double mn = 0, mx = 0, sum = 0;
    for (size_t i = 0; i + 1 < packets.size(); ++i) {
      double iat = static_cast<double>(packets[i + 1].timestamp_us - packets[i].timestamp_us) / 1000.0;
      if (i == 0) { mn = iat; mx = iat; }
      mn = std::min(mn, iat);
      mx = std::max(mx, iat);
      sum += iat;
    }
    double mean_iat = sum / static_cast<double>(n_iat);
    double var_iat = 0;
    for (size_t i = 0; i + 1 < packets.size(); ++i) {
      double iat = static_cast<double>(packets[i + 1].timestamp_us - packets[i].timestamp_us) / 1000.0;
      double d = iat - mean_iat;
      var_iat += d * d;
    }
    var_iat /= static_cast<double>(n_iat);
    st.min_iat_ms = mn;
    st.max_iat_ms = mx;
    st.mean_iat_ms = mean_iat;
    st.std_iat_ms = std::sqrt(var_iat);
  }
  return st;
}

SubsampleVectors subsample_bytes(const Sample& sample, const ExtractionConfig& cfg) {
  validate_config(cfg);
  const int64_t omega_us = cfg.omega_ms * 1000;
  const int64_t n = cfg.n_subsamples;
  SubsampleVectors sv;
  sv.dl.assign(static_cast<size_t>(n), 0.0);
  sv.ul.assign(static_cast<size_t>(n), 0.0);
  auto accumulate = [&](std::span<const TimedSize> packets, std::vector<double>& vec) {
    for (const auto& p : packets) {
      int64_t offset = p.timestamp_us - sample.window_start_us;
      if (offset < 0 || offset >= omega_us)
        throw ContractError("subsample_bytes: packet outside its window");
      // floor(offset * n / omega) selects the sub-sample whose exact
      // rational interval [j*omega/n, (j+1)*omega/n) contains offset.
      int64_t j = offset * n / omega_us;
      vec[static_cast<size_t>(j)] += p.size_bytes;
    }
  };
  accumulate(sample.dl_packets, sv.dl);
  accumulate(sample.ul_packets, sv.ul);
  return sv;
}

double pearson_cc(std::span<const double> d, std::span<const double> u) {
  if (d.size() != u.size()) throw ContractError("pearson_cc: vector length mismatch");
  if (d.size() < 2) throw ContractError("pearson_cc: need at least 2 components");
  const double n = static_cast<double>(d.size());
  double md = 0, mu = 0;
  for (size_t i = 0; i < d.size(); ++i) {
    md += d[i];
    mu += u[i];
  }
  md /= n;
  mu /= n;
  double sxx = 0, syy = 0, sxy = 0;
  for (size_t i = 0; i < d.size(); ++i) {
    double a = d[i] - md;
    double b = u[i] - mu;
    sxx += a * a;
    syy += b * b;
    sxy += a * b;
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  double r = sxy / std::sqrt(sxx * syy);
  return std::clamp(r, -1.0, 1.0);
}

const std::array<std::string, kFeatureCount>& feature_names() {
  static const std::array<std::string, kFeatureCount> names = {
      "NoPDL",     "NoPUL",     "TBDL",      "TBUL",
      "MinPSDL",   "MinPSUL",   "MaxPSDL",   "MaxPSUL",
      "MeanPSDL",  "MeanPSUL",  "StdPSDL",   "StdPSUL",
      "MinPIATDL", "MinPIATUL", "MaxPIATDL", "MaxPIATUL",
      "MeanPIATDL", "MeanPIATUL", "StdPIATDL", "StdPIATUL",
      "RoNoP",     "RoTB",      "CC",
  };
  return names;
}

FeatureVector extract_features(const Sample& sample, const ExtractionConfig& cfg,
                               std::optional<int> label) {
  if (sample.dl_packets.empty() && sample.ul_packets.empty())
    throw ContractError("extract_features: sample has no packets");
  DirStats dl = direction_stats(sample.dl_packets);
  DirStats ul = direction_stats(sample.ul_packets);
  FeatureVector fv;
  auto& v = fv.values;
  v[kNoPDL] = static_cast<double>(dl.count);
  v[kNoPUL] = static_cast<double>(ul.count);
  v[kTBDL] = dl.total_bytes;
  v[kTBUL] = ul.total_bytes;
  v[kMinPSDL] = dl.min_size;
  v[kMinPSUL] = ul.min_size;
  v[kMaxPSDL] = dl.max_size;
  v[kMaxPSUL] = ul.max_size;
  v[kMeanPSDL] = dl.mean_size;
  v[kMeanPSUL] = ul.mean_size;
  v[kStdPSDL] = dl.std_size;
  v[kStdPSUL] = ul.std_size;
  v[kMinPIATDL] = dl.min_iat_ms;
  v[kMinPIATUL] = ul.min_iat_ms;
  v[kMaxPIATDL] = dl.max_iat_ms;
  v[kMaxPIATUL] = ul.max_iat_ms;
  v[kMeanPIATDL] = dl.mean_iat_ms;
  v[kMeanPIATUL] = ul.mean_iat_ms;
  v[kStdPIATDL] = dl.std_iat_ms;
  v[kStdPIATUL] = ul.std_iat_ms;
  // Zero UL degrades each ratio to the DL magnitude (denominator 1), so
  // heavy one-sided traffic stays an extreme signal instead of a NaN.
  v[kRoNoP] = ul.count == 0 ? static_cast<double>(dl.count)
                            : static_cast<double>(dl.count) / static_cast<double>(ul.count);
  v[kRoTB] = ul.total_bytes == 0.0 ? dl.total_bytes : dl.total_bytes / ul.total_bytes;
  SubsampleVectors sv = subsample_bytes(sample, cfg);
  v[kCC] = pearson_cc(sv.dl, sv.ul);
  fv.label = label;
  return fv;
}

std::vector<FeatureVector> extract_dataset(std::span<const PacketRecord> records,
                                           const ExtractionConfig& cfg,
                                           std::optional<int> label) {
  std::vector<Sample> samples = window_packets(records, cfg);
  std::vector<FeatureVector> rows;
  rows.reserve(samples.size());
  for (const auto& s : samples) rows.push_back(extract_features(s, cfg, label));
  return rows;
}

std::vector<FeatureVector> balance_dataset(std::span<const FeatureVector> vr,
                                           std::span<const FeatureVector> nonvr) {
  if (vr.empty() || nonvr.empty())
    throw ContractError("balance_dataset: both classes must be non-empty");
  size_t m = std::min(vr.size(), nonvr.size());
  std::vector<FeatureVector> out;
  out.reserve(2 * m);
  out.insert(out.end(), vr.begin(), vr.begin() + static_cast<ptrdiff_t>(m));
  out.insert(out.end(), nonvr.begin(), nonvr.begin() + static_cast<ptrdiff_t>(m));
  return out;
}

void emit_dataset_csv(std::ostream& out, std::span<const FeatureVector> rows,
                      std::span<const std::string> comment_lines) {
  for (const auto& c : comment_lines) out << "# " << c << "\n";
  const auto& names = feature_names();
  for (int i = 0; i < kFeatureCount; ++i) out << names[static_cast<size_t>(i)] << ',';
  out << "label\n";
  for (const auto& row : rows) {
    for (int i = 0; i < kFeatureCount; ++i)
      out << format_double(row.values[static_cast<size_t>(i)]) << ',';
    if (row.label) out << *row.label;
    out << "\n";
  }
}

void emit_dataset_csv_file(const std::string& path, std::span<const FeatureVector> rows,
                           std::span<const std::string> comment_lines) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  emit_dataset_csv(out, rows, comment_lines);
  out.flush();
  if (!out) throw IoError("write failed for " + path);
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
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

void check_dataset_header(const std::vector<std::string>& got, size_t lineno) {
  std::vector<std::string> expected(feature_names().begin(), feature_names().end());
  expected.push_back("label");
  if (got == expected) return;
  std::string msg = "dataset csv: line " + std::to_string(lineno) + ": header mismatch";
  std::vector<std::string> missing, extra;
  for (const auto& e : expected)
    if (std::find(got.begin(), got.end(), e) == got.end()) missing.push_back(e);
  for (const auto& g : got)
    if (std::find(expected.begin(), expected.end(), g) == expected.end()) extra.push_back(g);
  if (!missing.empty()) {
    msg += "; missing:";
    for (const auto& m : missing) msg += " " + m;
  }
  if (!extra.empty()) {
    msg += "; extra:";
    for (const auto& e : extra) msg += " " + e;
  }
  if (missing.empty() && extra.empty()) msg += "; column order differs";
  throw ParseError(msg);
}

}  // namespace

std::vector<FeatureVector> parse_dataset_csv(std::istream& in) {
  std::vector<FeatureVector> rows;
  std::string line;
  size_t lineno = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> f = split_csv(line);
    if (!header_seen) {
      check_dataset_header(f, lineno);
      header_seen = true;
      continue;
    }
    if (f.size() != kFeatureCount + 1)
      throw ParseError("dataset csv: line " + std::to_string(lineno) + ": expected " +
                       std::to_string(kFeatureCount + 1) + " fields, got " +
                       std::to_string(f.size()));
    FeatureVector row;
    for (int i = 0; i < kFeatureCount; ++i)
      row.values[static_cast<size_t>(i)] =
          parse_double(f[static_cast<size_t>(i)],
                       "dataset csv: line " + std::to_string(lineno) + ", column " +
                           feature_names()[static_cast<size_t>(i)]);
    const std::string& lab = f[kFeatureCount];
    if (lab.empty())
      row.label = std::nullopt;
    else if (lab == "0")
      row.label = 0;
    else if (lab == "1")
      row.label = 1;
    else
      throw ParseError("dataset csv: line " + std::to_string(lineno) + ": label \"" + lab +
                       "\" outside {0,1}");
    rows.push_back(row);
  }
  if (!header_seen) throw ParseError("dataset csv: missing header line");
  return rows;
}

std::vector<FeatureVector> parse_dataset_csv_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  return parse_dataset_csv(in);
}

}  // namespace vrtc
