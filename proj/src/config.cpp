#include "vrtc/config.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <istream>

#include "vrtc/errors.hpp"
#include "vrtc/textutil.hpp"

namespace vrtc {

namespace {

std::string trim(const std::string& s) {
  const auto from = s.find_first_not_of(" \t\r");
  if (from == std::string::npos) return "";
  const auto to = s.find_last_not_of(" \t\r");
  return s.substr(from, to - from + 1);
}

bool valid_key(const std::string& key) {
  if (key.empty()) return false;
  return std::all_of(key.begin(), key.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
           c == '_' || c == '.';
  });
}

}  // namespace

Config Config::parse(std::istream& in) {
  Config cfg;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string text = trim(line);
    if (text.empty() || text[0] == '#') continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos)
      throw ParseError("config line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(text.substr(0, eq));
    const std::string value = trim(text.substr(eq + 1));
    if (!valid_key(key))
      throw ParseError("config line " + std::to_string(line_no) + ": bad key \"" + key + "\"");
    for (const auto& [k, v] : cfg.entries_)
      if (k == key)
        throw ParseError("config line " + std::to_string(line_no) + ": duplicate key \"" + key +
                         "\"");
    cfg.entries_.emplace_back(key, value);
  }
  return cfg;
}

Config Config::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  return parse(in);
}

const std::string* Config::find(const std::string& key) const {
  for (const auto& [k, v] : entries_)
    if (k == key) {
      read_.insert(key);
      return &v;
    }
  read_.insert(key);  // a known key stays known even when absent
  return nullptr;
}

bool Config::has(const std::string& key) const { return find(key) != nullptr; }

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
  const std::string* v = find(key);
  return v ? *v : fallback;
}

double Config::get_double(const std::string& key, double fallback) const {
  const std::string* v = find(key);
  return v ? parse_double(*v, "config key " + key) : fallback;
}

int64_t Config::get_int(const std::string& key, int64_t fallback) const {
  const std::string* v = find(key);
  return v ? parse_int(*v, "config key " + key) : fallback;
}

uint64_t Config::get_u64(const std::string& key, uint64_t fallback) const {
  const std::string* v = find(key);
  return v ? parse_u64(*v, "config key " + key) : fallback;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  const std::string* v = find(key);
  if (!v) return fallback;
  if (*v == "true" || *v == "1") return true;
  if (*v == "false" || *v == "0") return false;
  throw ParseError("config key " + key + ": bad boolean \"" + *v + "\"");
}

void Config::check_all_consumed() const {
  std::string unknown;
  for (const auto& [k, v] : entries_)
    if (!read_.count(k)) unknown += unknown.empty() ? k : ", " + k;
  if (!unknown.empty()) throw ParseError("unknown config keys: " + unknown);
}

std::string current_timestamp_utc() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace vrtc
