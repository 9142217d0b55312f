#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "vrtc/classifiers.hpp"
#include "vrtc/config.hpp"
#include "vrtc/errors.hpp"
#include "vrtc/feature_extract.hpp"
#include "vrtc/model_select.hpp"
#include "vrtc/rng.hpp"
#include "vrtc/synth_traffic.hpp"
#include "vrtc/textutil.hpp"
#include "vrtc/trace_ingest.hpp"
#include "vrtc/wifi_sim.hpp"

namespace fs = std::filesystem;
using namespace vrtc;

namespace {

constexpr const char* kVersion = "1.0.0";

using KeyValues = std::vector<std::pair<std::string, std::string>>;

// Provenance header stamped into every artifact: tool version, the resolved
// settings, and a timestamp line that byte-identity comparisons must skip.
std::vector<std::string> provenance(const std::string& command, const KeyValues& resolved) {
  std::vector<std::string> lines;
  lines.push_back("vrtc " + std::string(kVersion) + " " + command);
  lines.push_back("generated: " + current_timestamp_utc());
  for (const auto& [k, v] : resolved) lines.push_back(k + " = " + v);
  return lines;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  return out;
}

// Flag beats config key beats default, and every consulted key counts as
// consumed so leftover config keys are rejected.
double resolve_double(const CLI::Option* opt, double flag_value, const Config& cfg,
                      const std::string& key, double fallback) {
  const double from_cfg = cfg.get_double(key, fallback);
  return opt != nullptr && opt->count() > 0 ? flag_value : from_cfg;
}

int64_t resolve_int(const CLI::Option* opt, int64_t flag_value, const Config& cfg,
                    const std::string& key, int64_t fallback) {
  const int64_t from_cfg = cfg.get_int(key, fallback);
  return opt != nullptr && opt->count() > 0 ? flag_value : from_cfg;
}

uint64_t resolve_u64(const CLI::Option* opt, uint64_t flag_value, const Config& cfg,
                     const std::string& key, uint64_t fallback) {
  const uint64_t from_cfg = cfg.get_u64(key, fallback);
  return opt != nullptr && opt->count() > 0 ? flag_value : from_cfg;
}

std::string resolve_string(const CLI::Option* opt, const std::string& flag_value,
                           const Config& cfg, const std::string& key,
                           const std::string& fallback) {
  const std::string from_cfg = cfg.get_string(key, fallback);
  return opt != nullptr && opt->count() > 0 ? flag_value : from_cfg;
}

bool resolve_bool(const CLI::Option* opt, bool flag_value, const Config& cfg,
                  const std::string& key, bool fallback) {
  const bool from_cfg = cfg.get_bool(key, fallback);
  return opt != nullptr && opt->count() > 0 ? flag_value : from_cfg;
}

Config load_config(const std::string& path) {
  if (path.empty()) return Config{};
  return Config::parse_file(path);
}

KnnWeights weights_from_string(const std::string& text) {
  if (text == "uniform") return KnnWeights::Uniform;
  if (text == "distance") return KnnWeights::Distance;
  throw ParseError("unknown knn weights \"" + text + "\" (uniform, distance)");
}

bool looks_like_pcap(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  unsigned char magic[4] = {0, 0, 0, 0};
  in.read(reinterpret_cast<char*>(magic), 4);
  const uint32_t be = (uint32_t{magic[0]} << 24) | (uint32_t{magic[1]} << 16) |
                      (uint32_t{magic[2]} << 8) | uint32_t{magic[3]};
  return be == 0xa1b2c3d4u || be == 0xd4c3b2a1u || be == 0xa1b23c4du || be == 0x4d3cb2a1u;
}

void print_summary(const std::vector<PacketRecord>& records, int64_t dropped) {
  int64_t dl = 0, ul = 0, dl_bytes = 0, ul_bytes = 0;
  for (const PacketRecord& r : records) {
    if (r.direction == Direction::Dl) {
      ++dl;
      dl_bytes += r.size_bytes;
    } else {
      ++ul;
      ul_bytes += r.size_bytes;
    }
  }
  const double duration_s =
      records.empty() ? 0 : static_cast<double>(records.back().timestamp_us) / 1e6;
  std::cout << "packets " << records.size() << " (dl " << dl << " / ul " << ul << "), bytes dl "
            << dl_bytes << " / ul " << ul_bytes << ", span " << format_double(duration_s)
            << " s, dropped " << dropped << "\n";
}

// ---------------------------------------------------------------- ingest --

struct IngestArgs {
  std::string input;
  std::string client_ip;
  std::string out;
};

int cmd_ingest(const IngestArgs& a) {
  std::vector<PacketRecord> records;
  int64_t dropped = 0;
  KeyValues kv = {{"input", a.input}};

  if (looks_like_pcap(a.input)) {
    if (a.client_ip.empty())
      throw ContractError("--client-ip is required to assign directions in a pcap capture");
    const auto entries = parse_pcap_file(a.input);
    DirectedTrace directed = assign_direction(entries, parse_ipv4(a.client_ip));
    records = std::move(directed.records);
    dropped = directed.dropped;
    kv.push_back({"client_ip", a.client_ip});
    if (records.empty() && !entries.empty())
      std::cerr << "warning: no packets matched client ip " << a.client_ip
                << "; writing an empty trace\n";
  } else {
    ParsedTrace parsed = parse_trace_csv_file(a.input);
    for (const std::string& w : parsed.warnings) std::cerr << "warning: " << w << "\n";
    records = std::move(parsed.records);
  }

  kv.push_back({"packets", std::to_string(records.size())});
  kv.push_back({"dropped", std::to_string(dropped)});
  emit_trace_csv_file(a.out, records, provenance("ingest", kv));
  print_summary(records, dropped);
  std::cout << "wrote " << a.out << "\n";
  return 0;
}

// --------------------------------------------------------------- extract --

struct ExtractArgs {
  std::vector<std::string> vr;
  std::vector<std::string> nonvr;
  std::vector<std::string> unlabeled;
  std::string manifest;
  std::string config;
  int64_t omega_ms = 500;
  int64_t subsamples = 20;
  bool no_balance = false;
  std::string out;
  const CLI::Option* omega_opt = nullptr;
  const CLI::Option* sub_opt = nullptr;
};

int cmd_extract(const ExtractArgs& a) {
  Config cfg = load_config(a.config);
  ExtractionConfig ec;
  ec.omega_ms = resolve_int(a.omega_opt, a.omega_ms, cfg, "omega_ms", 500);
  ec.n_subsamples = static_cast<int>(resolve_int(a.sub_opt, a.subsamples, cfg, "subsamples", 20));
  cfg.check_all_consumed();

  std::vector<std::pair<std::string, std::optional<int>>> inputs;
  for (const std::string& p : a.vr) inputs.push_back({p, 1});
  for (const std::string& p : a.nonvr) inputs.push_back({p, 0});
  if (!a.manifest.empty()) {
    const fs::path base = fs::path(a.manifest).parent_path();
    for (const ManifestEntry& e : read_manifest(a.manifest))
      inputs.push_back({(base / e.path).string(), e.label});
  }
  const bool labeled = !inputs.empty();
  if (labeled && !a.unlabeled.empty())
    throw ContractError("mix of labeled flags and unlabeled positional traces");
  for (const std::string& p : a.unlabeled) inputs.push_back({p, std::nullopt});
  if (inputs.empty()) throw ContractError("no input traces given");

  std::vector<FeatureVector> vr_rows, nonvr_rows, plain_rows;
  KeyValues kv = {{"omega_ms", std::to_string(ec.omega_ms)},
                  {"subsamples", std::to_string(ec.n_subsamples)}};
  for (const auto& [path, label] : inputs) {
    const ParsedTrace parsed = parse_trace_csv_file(path);
    auto rows = extract_dataset(parsed.records, ec, label);
    auto& sink = !label.has_value() ? plain_rows : (*label == 1 ? vr_rows : nonvr_rows);
    sink.insert(sink.end(), rows.begin(), rows.end());
    kv.push_back({"input", path + (label ? (*label == 1 ? " label=1" : " label=0") : "")});
  }

  std::vector<FeatureVector> dataset;
  if (labeled) {
    std::cout << "vr samples: " << vr_rows.size() << "\n";
    std::cout << "nonvr samples: " << nonvr_rows.size() << "\n";
    dataset = a.no_balance
                  ? [&] {
                      std::vector<FeatureVector> all = vr_rows;
                      all.insert(all.end(), nonvr_rows.begin(), nonvr_rows.end());
                      return all;
                    }()
                  : balance_dataset(vr_rows, nonvr_rows);
  } else {
    dataset = std::move(plain_rows);
  }
  kv.push_back({"balanced", labeled && !a.no_balance ? "true" : "false"});
  kv.push_back({"rows", std::to_string(dataset.size())});

  emit_dataset_csv_file(a.out, dataset, provenance("extract", kv));
  std::cout << "dataset rows: " << dataset.size()
            << (labeled && !a.no_balance ? " (balanced)" : "") << "\n";
  std::cout << "wrote " << a.out << "\n";
  return 0;
}

// ----------------------------------------------------------------- synth --

struct SynthArgs {
  std::string out_dir;
  std::string config;
  double duration_ms = 60000;
  uint64_t seed = 1;
  const CLI::Option* duration_opt = nullptr;
  const CLI::Option* seed_opt = nullptr;
};

int cmd_synth(const SynthArgs& a) {
  Config cfg = load_config(a.config);
  const double duration_ms = resolve_double(a.duration_opt, a.duration_ms, cfg, "duration_ms", 60000);
  const uint64_t seed = resolve_u64(a.seed_opt, a.seed, cfg, "seed", 1);
  cfg.check_all_consumed();

  const auto corpus = gen_labeled_corpus(default_vr_profiles(), default_nonvr_profiles(),
                                         duration_ms, seed);
  fs::create_directories(a.out_dir);

  std::vector<ManifestEntry> manifest;
  int vr_count = 0;
  for (const CorpusEntry& entry : corpus) {
    const std::string file = entry.name + ".csv";
    KeyValues kv = {{"name", entry.name},
                    {"label", std::to_string(entry.label)},
                    {"seed", std::to_string(entry.seed)},
                    {"duration_ms", format_double(duration_ms)}};
    emit_trace_csv_file((fs::path(a.out_dir) / file).string(), entry.trace,
                        provenance("synth", kv));
    manifest.push_back({entry.name, entry.label, entry.seed, file});
    vr_count += entry.label;
  }
  KeyValues kv = {{"duration_ms", format_double(duration_ms)},
                  {"seed", std::to_string(seed)},
                  {"traces", std::to_string(corpus.size())}};
  write_manifest((fs::path(a.out_dir) / "manifest.txt").string(), manifest,
                 provenance("synth", kv));
  std::cout << "wrote " << corpus.size() << " traces (" << vr_count << " vr, "
            << corpus.size() - vr_count << " nonvr) to " << a.out_dir << "\n";
  return 0;
}

// ------------------------------------------------------- train and friends --

Matrix load_xy(const std::string& dataset_path, std::vector<int>& y) {
  const auto rows = parse_dataset_csv_file(dataset_path);
  Matrix x;
  dataset_to_matrix(rows, x, y);
  return x;
}

void print_confusion(std::ostream& out, const Confusion& c) {
  out << "confusion matrix (rows = true, columns = predicted):\n";
  out << "             nonvr       vr\n";
  char buf[96];
  std::snprintf(buf, sizeof(buf), "  nonvr %10lld %8lld\n", static_cast<long long>(c.tn),
                static_cast<long long>(c.fp));
  out << buf;
  std::snprintf(buf, sizeof(buf), "  vr    %10lld %8lld\n", static_cast<long long>(c.fn),
                static_cast<long long>(c.tp));
  out << buf;
}

void write_importance_csv(const std::string& path, std::span<const ImportanceEntry> imp,
                          const std::vector<std::string>& comments) {
  std::ofstream out = open_out(path);
  for (const std::string& c : comments) out << "# " << c << "\n";
  out << "feature,name,importance\n";
  for (const ImportanceEntry& e : imp)
    out << e.feature << ',' << e.name << ',' << format_double(e.importance) << "\n";
}

void print_importance(std::ostream& out, std::span<const ImportanceEntry> imp) {
  out << "feature importance (mean accuracy drop, descending):\n";
  for (const ImportanceEntry& e : imp) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "  %-12s %s\n", e.name.c_str(),
                  format_double(e.importance).c_str());
    out << buf;
  }
}

struct TrainArgs {
  std::string dataset;
  std::string family = "rf";
  std::string config;
  std::string out;
  std::string report_path;
  uint64_t seed = 0;
  double c = 1.0;
  std::string solver = "liblinear";
  int64_t neighbors = 5;
  std::string weights = "uniform";
  int64_t max_depth = 10;
  int64_t min_samples_split = 5;
  int64_t n_estimators = 50;
  bool no_bootstrap = false;
  double var_smoothing = 1e-9;
  const CLI::Option* family_opt = nullptr;
  const CLI::Option* seed_opt = nullptr;
  const CLI::Option* c_opt = nullptr;
  const CLI::Option* solver_opt = nullptr;
  const CLI::Option* neighbors_opt = nullptr;
  const CLI::Option* weights_opt = nullptr;
  const CLI::Option* depth_opt = nullptr;
  const CLI::Option* mss_opt = nullptr;
  const CLI::Option* estimators_opt = nullptr;
  const CLI::Option* bootstrap_opt = nullptr;
  const CLI::Option* smoothing_opt = nullptr;
};

int cmd_train(const TrainArgs& a) {
  Config cfg = load_config(a.config);
  HyperParams p;
  p.family = family_from_string(resolve_string(a.family_opt, a.family, cfg, "family", "rf"));
  p.c = resolve_double(a.c_opt, a.c, cfg, "c", 1.0);
  p.solver_tag = resolve_string(a.solver_opt, a.solver, cfg, "solver", "liblinear");
  p.n_neighbors = static_cast<int>(resolve_int(a.neighbors_opt, a.neighbors, cfg, "neighbors", 5));
  p.weights = weights_from_string(resolve_string(a.weights_opt, a.weights, cfg, "weights", "uniform"));
  p.max_depth = static_cast<int>(resolve_int(a.depth_opt, a.max_depth, cfg, "max_depth", 10));
  p.min_samples_split =
      static_cast<int>(resolve_int(a.mss_opt, a.min_samples_split, cfg, "min_samples_split", 5));
  p.n_estimators =
      static_cast<int>(resolve_int(a.estimators_opt, a.n_estimators, cfg, "n_estimators", 50));
  p.bootstrap = !resolve_bool(a.bootstrap_opt, a.no_bootstrap, cfg, "no_bootstrap", false);
  p.var_smoothing = resolve_double(a.smoothing_opt, a.var_smoothing, cfg, "var_smoothing", 1e-9);
  const uint64_t seed = resolve_u64(a.seed_opt, a.seed, cfg, "seed", 0);
  cfg.check_all_consumed();

  std::vector<int> y;
  const Matrix x = load_xy(a.dataset, y);
  const TrainedModel model = train_model(x, y, p, seed);

  KeyValues kv = {{"dataset", a.dataset},
                  {"params", p.describe()},
                  {"seed", std::to_string(seed)},
                  {"rows", std::to_string(x.size())}};
  {
    std::ofstream out = open_out(a.out);
    save_model(out, model, provenance("train", kv));
  }
  EvalReport report = evaluate(model, x, y);
  std::cout << "trained " << p.describe() << " on " << x.size() << " rows\n";
  std::cout << "training accuracy " << format_double(report.accuracy) << "\n";
  std::cout << "wrote " << a.out << "\n";
  if (!a.report_path.empty()) {
    std::ofstream rep = open_out(a.report_path);
    for (const std::string& line : provenance("train", kv)) rep << "# " << line << "\n";
    write_report_text(rep, report);
  }
  return 0;
}

struct GridArgs {
  std::string dataset;
  std::string family = "rf";
  std::string config;
  std::string out;
  std::string report_path;
  std::string cv_table_path;
  std::string importance_path;
  uint64_t seed = 0;
  int64_t repeats = 10;
  double train_fraction = 0.7;
  const CLI::Option* family_opt = nullptr;
  const CLI::Option* seed_opt = nullptr;
  const CLI::Option* repeats_opt = nullptr;
  const CLI::Option* fraction_opt = nullptr;
};

int cmd_gridsearch(const GridArgs& a) {
  Config cfg = load_config(a.config);
  const Family family =
      family_from_string(resolve_string(a.family_opt, a.family, cfg, "family", "rf"));
  const uint64_t seed = resolve_u64(a.seed_opt, a.seed, cfg, "seed", 0);
  const int repeats = static_cast<int>(resolve_int(a.repeats_opt, a.repeats, cfg, "repeats", 10));
  const double fraction =
      resolve_double(a.fraction_opt, a.train_fraction, cfg, "train_fraction", 0.7);
  cfg.check_all_consumed();

  std::vector<int> y;
  const Matrix x = load_xy(a.dataset, y);
  const PipelineResult r = run_pipeline(x, y, family, seed, repeats, fraction);

  std::cout << "grid searched " << r.grid.table.size() << " candidates, best "
            << r.grid.best.describe() << " (cv accuracy " << format_double(r.grid.best_score)
            << ")\n";
  std::cout << "kept " << r.kept.size() << " of " << x[0].size() << " features\n";
  std::ostringstream report_text;
  write_report_text(report_text, r.report);
  std::cout << report_text.str();
  print_confusion(std::cout, r.report.confusion);

  KeyValues kv = {{"dataset", a.dataset},
                  {"family", to_string(family)},
                  {"seed", std::to_string(seed)},
                  {"repeats", std::to_string(repeats)},
                  {"train_fraction", format_double(fraction)},
                  {"best", r.grid.best.describe()},
                  {"cv_accuracy", format_double(r.grid.best_score)}};
  {
    std::ofstream out = open_out(a.out);
    save_model(out, r.model, provenance("gridsearch", kv));
  }
  std::cout << "wrote " << a.out << "\n";

  if (!a.report_path.empty()) {
    std::ofstream rep = open_out(a.report_path);
    for (const std::string& line : provenance("gridsearch", kv)) rep << "# " << line << "\n";
    write_report_text(rep, r.report);
  }
  if (!a.cv_table_path.empty()) {
    std::ofstream tbl = open_out(a.cv_table_path);
    for (const std::string& line : provenance("gridsearch", kv)) tbl << "# " << line << "\n";
    tbl << "candidate,fold_scores,mean\n";
    for (const CvRow& row : r.grid.table) {
      tbl << row.params.describe() << ',';
      for (size_t i = 0; i < row.fold_scores.size(); ++i)
        tbl << (i ? " " : "") << format_double(row.fold_scores[i]);
      tbl << ',' << format_double(row.mean_score) << "\n";
    }
  }
  if (!a.importance_path.empty())
    write_importance_csv(a.importance_path, r.importances, provenance("gridsearch", kv));
  return 0;
}

struct EvalArgs {
  std::string dataset;
  std::string model;
  std::string report_path;
  std::string csv_path;
  int64_t omega_ms = 500;
  int64_t subsamples = 20;
};

int cmd_eval(const EvalArgs& a) {
  const TrainedModel model = load_model_file(a.model);
  std::vector<int> y;
  const Matrix x = load_xy(a.dataset, y);

  using clk = std::chrono::steady_clock;
  const auto t0 = clk::now();
  const EvalReport report = evaluate(model, x, y);
  const auto t1 = clk::now();
  const double batch_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();

  std::ostringstream text;
  write_report_text(text, report);
  std::cout << text.str();
  print_confusion(std::cout, report.confusion);
  std::cout << "dataset prediction: " << x.size() << " rows in " << format_double(batch_ms)
            << " ms\n";

  // End-to-end per-sample budget: build one omega-length sample from a fresh
  // synthetic trace, extract its features, classify it, and time both steps.
  if (model.input_width == kFeatureCount) {
    ExtractionConfig ec;
    ec.omega_ms = a.omega_ms;
    ec.n_subsamples = static_cast<int>(a.subsamples);
    const auto station = gen_vr_trace(VrProfile{}, static_cast<double>(ec.omega_ms), 7);
    const auto e0 = clk::now();
    const auto samples = window_packets(station, ec);
    if (samples.empty()) throw ContractError("latency probe produced an empty sample window");
    const FeatureVector fv = extract_features(samples.front(), ec);
    const auto e1 = clk::now();
    const int label = predict(model, fv.values);
    const auto e2 = clk::now();
    const double extract_ms = std::chrono::duration<double, std::milli>(e1 - e0).count();
    const double predict_ms = std::chrono::duration<double, std::milli>(e2 - e1).count();
    std::cout << "per-sample latency: extraction " << format_double(extract_ms)
              << " ms + prediction " << format_double(predict_ms) << " ms = "
              << format_double(extract_ms + predict_ms) << " ms (budget 1000 ms, sample "
              << ec.omega_ms << " ms, predicted " << (label == 1 ? "vr" : "nonvr") << ")\n";
  }

  KeyValues kv = {{"dataset", a.dataset}, {"model", a.model}};
  if (!a.report_path.empty()) {
    std::ofstream rep = open_out(a.report_path);
    for (const std::string& line : provenance("eval", kv)) rep << "# " << line << "\n";
    write_report_text(rep, report);
  }
  if (!a.csv_path.empty()) {
    std::ofstream csv = open_out(a.csv_path);
    write_report_csv(csv, report, provenance("eval", kv));
  }
  return 0;
}

struct ImportanceArgs {
  std::string dataset;
  std::string model;
  std::string out;
  uint64_t seed = 0;
  int64_t repeats = 10;
};

int cmd_importance(const ImportanceArgs& a) {
  const TrainedModel model = load_model_file(a.model);
  std::vector<int> y;
  const Matrix x = load_xy(a.dataset, y);
  const auto imp = permutation_importance(model, x, y, static_cast<int>(a.repeats), a.seed);
  print_importance(std::cout, imp);
  if (!a.out.empty()) {
    KeyValues kv = {{"dataset", a.dataset},
                    {"model", a.model},
                    {"repeats", std::to_string(a.repeats)},
                    {"seed", std::to_string(a.seed)}};
    write_importance_csv(a.out, imp, provenance("importance", kv));
    std::cout << "wrote " << a.out << "\n";
  }
  return 0;
}

// -------------------------------------------------------------- simulate --

struct SimulateArgs {
  std::string config;
  std::string model_path;
  std::string out;
  std::string summary_path;
  std::string scheduler;
  std::vector<double> loads;
  double bg_load = 0;
  uint64_t seed = 1;
  bool oracle = false;
  const CLI::Option* loads_opt = nullptr;
  const CLI::Option* bg_load_opt = nullptr;
  const CLI::Option* seed_opt = nullptr;
  const CLI::Option* scheduler_opt = nullptr;
  const CLI::Option* model_opt = nullptr;
};

int cmd_simulate(const SimulateArgs& a) {
  Config cfg = load_config(a.config);
  SimConfig base;
  base.vr_profile.fps = static_cast<int>(cfg.get_int("vr_fps", base.vr_profile.fps));
  base.vr_profile.bitrate_mbps = cfg.get_double("vr_bitrate_mbps", base.vr_profile.bitrate_mbps);
  base.bg_on_mean_ms = cfg.get_double("bg_on_ms", base.bg_on_mean_ms);
  base.bg_off_mean_ms = cfg.get_double("bg_off_ms", base.bg_off_mean_ms);
  base.bg_packet_bytes = static_cast<int>(cfg.get_int("bg_packet_bytes", base.bg_packet_bytes));
  base.phy_rate_vr_mbps = cfg.get_double("phy_vr_mbps", base.phy_rate_vr_mbps);
  base.phy_rate_bg_mbps = cfg.get_double("phy_bg_mbps", base.phy_rate_bg_mbps);
  base.per_frame_overhead_us =
      static_cast<int>(cfg.get_int("overhead_us", base.per_frame_overhead_us));
  base.aggregation_limit_packets =
      static_cast<int>(cfg.get_int("aggregation", base.aggregation_limit_packets));
  base.classify_after_ms = cfg.get_double("classify_ms", base.classify_after_ms);
  base.classify_subsamples =
      static_cast<int>(cfg.get_int("classify_subsamples", base.classify_subsamples));
  base.duration_s = cfg.get_double("duration_s", base.duration_s);
  base.warmup_s = cfg.get_double("warmup_s", base.warmup_s);
  base.seed = resolve_u64(a.seed_opt, a.seed, cfg, "seed", 1);

  std::vector<double> loads = {200, 300, 400};
  if (cfg.has("loads")) {
    loads.clear();
    std::istringstream ls(cfg.get_string("loads", ""));
    for (std::string tok; std::getline(ls, tok, ',');)
      loads.push_back(parse_double(tok, "config key loads"));
  }
  if (a.loads_opt != nullptr && a.loads_opt->count() > 0) loads = a.loads;
  if (a.bg_load_opt != nullptr && a.bg_load_opt->count() > 0) loads = {a.bg_load};

  const bool oracle = resolve_bool(nullptr, false, cfg, "oracle", false) || a.oracle;
  const std::string model_path = resolve_string(a.model_opt, a.model_path, cfg, "model", "");
  const std::string scheduler_only =
      resolve_string(a.scheduler_opt, a.scheduler, cfg, "scheduler", "");
  cfg.check_all_consumed();
  if (oracle && !model_path.empty())
    throw ContractError("--oracle and --model are mutually exclusive");

  TrainedModel model;
  const TrainedModel* model_ptr = nullptr;
  if (!model_path.empty()) {
    model = load_model_file(model_path);
    model_ptr = &model;
  }

  std::vector<SweepRow> rows;
  if (scheduler_only.empty()) {
    rows = sweep(base, loads, model_ptr);
  } else {
    const Scheduler s = scheduler_from_string(scheduler_only);
    for (size_t li = 0; li < loads.size(); ++li) {
      SimConfig one = base;
      one.bg_load_mbps = loads[li];
      one.seed = derive_seed(base.seed, {li});
      one.scheduler = s;
      rows.push_back({loads[li], s, run_sim(one, model_ptr)});
    }
  }

  KeyValues kv = {{"seed", std::to_string(base.seed)},
                  {"duration_s", format_double(base.duration_s)},
                  {"warmup_s", format_double(base.warmup_s)},
                  {"phy_vr_mbps", format_double(base.phy_rate_vr_mbps)},
                  {"phy_bg_mbps", format_double(base.phy_rate_bg_mbps)},
                  {"overhead_us", std::to_string(base.per_frame_overhead_us)},
                  {"aggregation", std::to_string(base.aggregation_limit_packets)},
                  {"classify_ms", format_double(base.classify_after_ms)},
                  {"trigger", model_ptr ? "model " + model_path : "oracle"}};
  {
    std::string l;
    for (double v : loads) l += (l.empty() ? "" : ",") + format_double(v);
    kv.push_back({"loads", l});
  }

  {
    std::ofstream out = open_out(a.out);
    write_sweep_csv(out, rows, provenance("simulate", kv));
  }
  std::cout << "wrote " << rows.size() << " sweep rows to " << a.out << "\n";

  std::ostringstream summary;
  write_sweep_summary(summary, rows);
  std::cout << summary.str();
  int64_t unstable = 0;
  for (const SweepRow& r : rows) unstable += r.result.unstable;
  for (const SweepRow& r : rows) {
    if (!r.result.classify_note.empty())
      std::cout << "load " << format_double(r.bg_load_mbps) << " " << to_string(r.scheduler)
                << ": " << r.result.classify_note
                << (r.result.priority_active ? " (priority active)" : " (fifo behavior)") << "\n";
  }
  if (unstable > 0)
    std::cerr << "warning: " << unstable << " of " << rows.size()
              << " runs were flagged unstable (offered load exceeds service capacity)\n";
  if (!a.summary_path.empty()) {
    std::ofstream sum = open_out(a.summary_path);
    for (const std::string& line : provenance("simulate", kv)) sum << "# " << line << "\n";
    sum << summary.str();
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"VR traffic classification and Wi-Fi priority scheduling toolkit"};
  app.set_version_flag("--version", std::string("vrtc ") + kVersion);
  app.require_subcommand(1);

  IngestArgs ingest;
  auto* s_ingest = app.add_subcommand("ingest", "Convert a pcap capture or trace CSV into the "
                                                "canonical directed trace CSV");
  s_ingest->add_option("input", ingest.input, "pcap or trace CSV path")->required();
  s_ingest->add_option("--client-ip", ingest.client_ip,
                       "station IPv4 address; packets to it are DL, from it UL");
  s_ingest->add_option("-o,--out", ingest.out, "output trace CSV path")->required();

  ExtractArgs extract;
  auto* s_extract = app.add_subcommand("extract", "Window traces and emit the feature dataset CSV");
  s_extract->add_option("--vr", extract.vr, "trace CSV with VR label (repeatable)");
  s_extract->add_option("--nonvr", extract.nonvr, "trace CSV with Non-VR label (repeatable)");
  s_extract->add_option("--manifest", extract.manifest, "corpus manifest with per-trace labels");
  s_extract->add_option("traces", extract.unlabeled, "unlabeled trace CSVs (prediction mode)");
  extract.omega_opt = s_extract->add_option("--omega-ms", extract.omega_ms,
                                            "sample window duration in ms");
  extract.sub_opt = s_extract->add_option("--subsamples", extract.subsamples,
                                          "sub-samples per window for the correlation");
  s_extract->add_flag("--no-balance", extract.no_balance, "keep class counts unbalanced");
  s_extract->add_option("--config", extract.config, "flat key=value config file");
  s_extract->add_option("-o,--out", extract.out, "output dataset CSV path")->required();

  SynthArgs synth;
  auto* s_synth = app.add_subcommand("synth", "Generate the synthetic labeled trace corpus");
  synth.duration_opt = s_synth->add_option("--duration-ms", synth.duration_ms,
                                           "per-trace duration in ms");
  synth.seed_opt = s_synth->add_option("--seed", synth.seed, "master corpus seed");
  s_synth->add_option("--config", synth.config, "flat key=value config file");
  s_synth->add_option("-o,--out", synth.out_dir, "output directory")->required();

  TrainArgs train;
  auto* s_train = app.add_subcommand("train", "Fit one model with fixed hyperparameters");
  s_train->add_option("--dataset", train.dataset, "labeled dataset CSV")->required();
  train.family_opt = s_train->add_option("--family", train.family, "lr, knn, dt, rf, nb");
  train.seed_opt = s_train->add_option("--seed", train.seed, "training seed (forest draws)");
  train.c_opt = s_train->add_option("--c", train.c, "lr inverse regularization strength");
  train.solver_opt = s_train->add_option("--solver", train.solver, "lr solver tag");
  train.neighbors_opt = s_train->add_option("--neighbors", train.neighbors, "knn k");
  train.weights_opt = s_train->add_option("--weights", train.weights, "knn uniform or distance");
  train.depth_opt = s_train->add_option("--max-depth", train.max_depth, "tree depth limit");
  train.mss_opt = s_train->add_option("--min-samples-split", train.min_samples_split,
                                      "minimum rows to split a node");
  train.estimators_opt = s_train->add_option("--n-estimators", train.n_estimators, "forest size");
  train.bootstrap_opt = s_train->add_flag("--no-bootstrap", train.no_bootstrap,
                                          "train each tree on all rows and features");
  train.smoothing_opt = s_train->add_option("--var-smoothing", train.var_smoothing,
                                            "nb variance smoothing fraction");
  s_train->add_option("--report", train.report_path, "also write the training-set report here");
  s_train->add_option("--config", train.config, "flat key=value config file");
  s_train->add_option("-o,--out", train.out, "output model path")->required();

  GridArgs grid;
  auto* s_grid = app.add_subcommand("gridsearch", "Cross-validated grid search, permutation-"
                                                  "importance feature selection, and final refit");
  s_grid->add_option("--dataset", grid.dataset, "labeled dataset CSV")->required();
  grid.family_opt = s_grid->add_option("--family", grid.family, "lr, knn, dt, rf, nb");
  grid.seed_opt = s_grid->add_option("--seed", grid.seed, "pipeline seed");
  grid.repeats_opt = s_grid->add_option("--repeats", grid.repeats, "importance shuffle repeats");
  grid.fraction_opt = s_grid->add_option("--train-fraction", grid.train_fraction,
                                         "stratified train share");
  s_grid->add_option("--report", grid.report_path, "write the validation report here");
  s_grid->add_option("--cv-table", grid.cv_table_path, "write the per-candidate CV table here");
  s_grid->add_option("--importance-table", grid.importance_path,
                     "write the permutation importance table here");
  s_grid->add_option("--config", grid.config, "flat key=value config file");
  s_grid->add_option("-o,--out", grid.out, "output model path")->required();

  EvalArgs eval;
  auto* s_eval = app.add_subcommand("eval", "Evaluate a saved model against a labeled dataset");
  s_eval->add_option("--dataset", eval.dataset, "labeled dataset CSV")->required();
  s_eval->add_option("--model", eval.model, "saved model path")->required();
  s_eval->add_option("--report", eval.report_path, "write the text report here");
  s_eval->add_option("--csv", eval.csv_path, "write the CSV report here");
  s_eval->add_option("--omega-ms", eval.omega_ms, "latency probe sample duration");
  s_eval->add_option("--subsamples", eval.subsamples, "latency probe sub-sample count");

  ImportanceArgs importance;
  auto* s_imp = app.add_subcommand("importance", "Permutation feature importance of a saved model");
  s_imp->add_option("--dataset", importance.dataset, "labeled dataset CSV")->required();
  s_imp->add_option("--model", importance.model, "saved model path")->required();
  s_imp->add_option("--repeats", importance.repeats, "shuffle repeats per feature");
  s_imp->add_option("--seed", importance.seed, "shuffle seed");
  s_imp->add_option("-o,--out", importance.out, "output importance CSV path");

  SimulateArgs sim;
  auto* s_sim = app.add_subcommand("simulate", "Downlink scheduling sweep over background loads");
  sim.loads_opt = s_sim->add_option("--loads", sim.loads, "background loads in Mbps")
                      ->delimiter(',');
  sim.bg_load_opt = s_sim->add_option("--bg-load", sim.bg_load, "single background load in Mbps");
  sim.seed_opt = s_sim->add_option("--seed", sim.seed, "master simulation seed");
  sim.scheduler_opt = s_sim->add_option("--scheduler", sim.scheduler,
                                        "run only one scheduler (fifo or priority)");
  sim.model_opt = s_sim->add_option("--model", sim.model_path,
                                    "classify the VR station with this saved model");
  s_sim->add_flag("--oracle", sim.oracle, "skip classification and trust the VR label");
  s_sim->add_option("--config", sim.config, "flat key=value config file");
  s_sim->add_option("--summary", sim.summary_path, "write the scheduler comparison here");
  s_sim->add_option("-o,--out", sim.out, "output sweep CSV path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*s_ingest) return cmd_ingest(ingest);
    if (*s_extract) return cmd_extract(extract);
    if (*s_synth) return cmd_synth(synth);
    if (*s_train) return cmd_train(train);
    if (*s_grid) return cmd_gridsearch(grid);
    if (*s_eval) return cmd_eval(eval);
    if (*s_imp) return cmd_importance(importance);
    if (*s_sim) return cmd_simulate(sim);
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 2;
  } catch (const ContractError& e) {
    std::cerr << "contract error: " << e.what() << "\n";
    return 3;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
