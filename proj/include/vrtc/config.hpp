#pragma once

#include <cstdint>
#include <iosfwd>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace vrtc {

// Flat key = value configuration text: one pair per line, '#' comments and
// blank lines ignored, duplicate keys rejected. Consumers read keys through
// the typed getters; check_all_consumed() then rejects anything left over, so
// misspelled keys fail loudly instead of silently using defaults.
class Config {
 public:
  static Config parse(std::istream& in);
  static Config parse_file(const std::string& path);

  bool has(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  int64_t get_int(const std::string& key, int64_t fallback) const;
  uint64_t get_u64(const std::string& key, uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

  void check_all_consumed() const;  // unread keys -> error naming them
  bool empty() const { return entries_.empty(); }

 private:
  const std::string* find(const std::string& key) const;
  std::vector<std::pair<std::string, std::string>> entries_;
  mutable std::set<std::string> read_;
};

// UTC wall-clock tag for provenance headers. Artifact comparisons must skip
// lines carrying it.
std::string current_timestamp_utc();

}  // namespace vrtc
