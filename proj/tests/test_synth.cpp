#include <cstdio>
#include <filesystem>
#include <vector>

#include "doctest.h"
#include "vrtc/errors.hpp"
#include "vrtc/feature_extract.hpp"
#include "vrtc/synth_traffic.hpp"

using namespace vrtc;

namespace {

bool time_sorted(const std::vector<PacketRecord>& recs) {
  for (size_t i = 1; i < recs.size(); ++i)
    if (recs[i].timestamp_us < recs[i - 1].timestamp_us) return false;
  return true;
}

}  // namespace

TEST_CASE("vr trace: frame batching arithmetic at zero jitter") {
  VrProfile p;  // 100 Mbps @ 90 fps
  p.frame_size_jitter = 0.0;
  auto trace = gen_vr_trace(p, 1000.0, 1);
  CHECK(time_sorted(trace));

  // 100e6/8/90 = 138888.9 -> 138889 B = 93 fragments of 1490 + residual 319
  int ul_count = 0;
  std::vector<PacketRecord> dl;
  for (const auto& r : trace) {
    CHECK(r.size_bytes >= 1);
    if (r.direction == Direction::Ul) {
      ++ul_count;
      CHECK(r.size_bytes == 254);
    } else {
      dl.push_back(r);
    }
  }
  // group DL packets by frame: frame k starts at k*1000000/90
  size_t di = 0;
  for (int64_t k = 0; k < 90; ++k) {
    int64_t t0 = k * 1000000 / 90;
    int frags = 0;
    int64_t bytes = 0;
    while (di < dl.size() && dl[di].timestamp_us < t0 + 11111) {
      bytes += dl[di].size_bytes;
      if (dl[di].size_bytes == 1490) ++frags;
      ++di;
    }
    CHECK(bytes == 138889);
    CHECK(frags == 93);
  }
  CHECK(di == dl.size());  // exactly 90 batches in 1 s
  CHECK(ul_count == 500);  // every 2 ms over 1000 ms
}

TEST_CASE("vr trace: throughput within 2% at zero jitter") {
  VrProfile p;
  p.fps = 60;
  p.bitrate_mbps = 40.0;
  p.frame_size_jitter = 0.0;
  double duration_ms = 5000.0;
  auto trace = gen_vr_trace(p, duration_ms, 5);
  double dl_bytes = 0;
  for (const auto& r : trace)
    if (r.direction == Direction::Dl) dl_bytes += r.size_bytes;
  double mbps = dl_bytes * 8.0 / (duration_ms * 1000.0);
  CHECK(mbps == doctest::Approx(40.0).epsilon(0.02));
}

TEST_CASE("vr trace: determinism and jitter conservation") {
  VrProfile p;
  auto a = gen_vr_trace(p, 500.0, 42);
  auto b = gen_vr_trace(p, 500.0, 42);
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].timestamp_us == b[i].timestamp_us);
    CHECK(a[i].size_bytes == b[i].size_bytes);
    CHECK(a[i].direction == b[i].direction);
  }
  CHECK(!gen_vr_trace(p, 500.0, 43).empty());
  CHECK(gen_vr_trace(p, 0.0, 1).empty());

  // with jitter on, every batch still sums to fragments + one residual
  size_t i = 0;
  std::vector<PacketRecord> dl;
  for (const auto& r : a)
    if (r.direction == Direction::Dl) dl.push_back(r);
  while (i < dl.size()) {
    size_t j = i;
    while (j < dl.size() && dl[j].size_bytes == 1490) ++j;
    bool has_residual = j < dl.size() && dl[j].size_bytes < 1490;
    int64_t frame_bytes = static_cast<int64_t>(j - i) * 1490 + (has_residual ? dl[j].size_bytes : 0);
    // nominal 138889 +- 10%
    CHECK(frame_bytes >= 125000);
    CHECK(frame_bytes <= 152778);
    i = j + (has_residual ? 1 : 0);
  }
}

TEST_CASE("streaming trace: burst count and idle-side uplink") {
  NonVrProfile p;  // defaults: burst 200 / idle 800, jitter 0
  auto trace = gen_nonvr_trace(p, 5000.0, 7);
  CHECK(time_sorted(trace));

  int bursts = 0;
  int64_t prev_dl = -1;
  for (const auto& r : trace) {
    if (r.direction != Direction::Dl) continue;
    if (prev_dl < 0 || r.timestamp_us - prev_dl > 100000) ++bursts;
    prev_dl = r.timestamp_us;
  }
  CHECK(bursts == 5);

  // UL requests live in the idle gaps: [burst_end, cycle_end)
  for (const auto& r : trace) {
    if (r.direction != Direction::Ul) continue;
    CHECK(r.size_bytes == 80);
    int64_t cycle_pos = r.timestamp_us % 1000000;
    CHECK(cycle_pos >= 200000);
  }
}

TEST_CASE("meeting trace: bidirectional count symmetry") {
  NonVrProfile p;
  p.kind = NonVrKind::Meeting;
  auto trace = gen_nonvr_trace(p, 10000.0, 11);
  CHECK(time_sorted(trace));
  double dl = 0, ul = 0;
  for (const auto& r : trace) {
    if (r.direction == Direction::Dl) ++dl;
    else ++ul;
  }
  CHECK(dl > 0);
  CHECK(ul > 0);
  CHECK(dl / ul < 2.0);
  CHECK(ul / dl < 2.0);
}

TEST_CASE("labeled corpus layout and determinism") {
  auto vr = default_vr_profiles();
  auto nonvr = default_nonvr_profiles();
  REQUIRE(vr.size() == 9);
  REQUIRE(nonvr.size() == 2);
  auto corpus = gen_labeled_corpus(vr, nonvr, 2000.0, 99);
  REQUIRE(corpus.size() == 11);
  int n_vr = 0;
  for (const auto& e : corpus) {
    CHECK(!e.trace.empty());
    CHECK(time_sorted(e.trace));
    n_vr += e.label;
  }
  CHECK(n_vr == 9);
  CHECK(corpus[0].name == "vr_60fps_40mbps");
  CHECK(corpus[9].name == "nonvr_streaming");
  CHECK(corpus[10].name == "nonvr_meeting");

  // a stored per-entry seed regenerates that exact trace
  auto again = gen_vr_trace(vr[3], 2000.0, corpus[3].seed);
  REQUIRE(again.size() == corpus[3].trace.size());
  for (size_t i = 0; i < again.size(); ++i)
    CHECK(again[i].timestamp_us == corpus[3].trace[i].timestamp_us);
}

TEST_CASE("manifest write/read round trip") {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "vrtc_manifest_test";
  fs::create_directories(dir);
  std::string path = (dir / "manifest.txt").string();

  std::vector<ManifestEntry> entries = {
      {"vr_90fps_100mbps", 1, 12345, "vr_90fps_100mbps.csv"},
      {"nonvr_streaming", 0, 678, "nonvr_streaming.csv"},
      // derived seeds routinely exceed int64 range
      {"vr_60fps_50mbps", 1, 11078445319420252503ull, "vr_60fps_50mbps.csv"},
  };
  std::vector<std::string> comments = {"corpus manifest"};
  write_manifest(path, entries, comments);
  auto back = read_manifest(path);
  REQUIRE(back.size() == 3);
  CHECK(back[0].name == entries[0].name);
  CHECK(back[0].label == 1);
  CHECK(back[0].seed == 12345);
  CHECK(back[0].path == entries[0].path);
  CHECK(back[1].label == 0);
  CHECK(back[2].seed == 11078445319420252503ull);

  std::string bad = (dir / "bad.txt").string();
  FILE* f = fopen(bad.c_str(), "w");
  fputs("name=x label=7 seed=1 path=p\n", f);
  fclose(f);
  CHECK_THROWS_AS(read_manifest(bad), ParseError);
  CHECK_THROWS_AS(read_manifest((dir / "missing.txt").string()), IoError);
  fs::remove_all(dir);
}
