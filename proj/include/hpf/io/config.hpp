#pragma once

// Scenario files: a flat, sectioned key = value format with the unit spelled
// out in each key name.
//
//   [safety]
//   d_ps_m = 0.25
//   fixed_d_ha_m = none
//   [robot]
//   waypoints_m = 0 0.7 0.3; 0.6 0.12 0.05
//   [hand]
//   kind = reactive
//   [run]
//   dt_s = 0.001
//
// '#' starts a comment. Unknown sections and keys are rejected.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "hpf/errors.hpp"
#include "hpf/scenario.hpp"

namespace hpf::io {

/// Syntax or semantic error in a scenario file, with a 1-based location.
class ConfigError : public InvalidInput {
 public:
  ConfigError(int line, int column, const std::string& what)
      : InvalidInput("line " + std::to_string(line) + ", column " + std::to_string(column) +
                     ": " + what),
        line_(line),
        column_(column) {}

  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  int line_;
  int column_;
};

/// Shortest text that parses back to exactly `v`.
inline std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[i] = digits[v & 0xF];
    v >>= 4;
  }
  return s;
}

namespace detail {

inline std::string format_point(const Point3& p) {
  return format_double(p.x) + " " + format_double(p.y) + " " + format_double(p.z);
}

inline std::string format_points(const std::vector<Point3>& pts) {
  std::string out;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (i) out += "; ";
    out += format_point(pts[i]);
  }
  return out;
}

inline const char* format_bool(bool b) { return b ? "true" : "false"; }

struct Entry {
  std::string value;
  int line = 0;
  int column = 0;
  bool used = false;
};

using Section = std::map<std::string, Entry, std::less<>>;

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

class Reader {
 public:
  Reader(Section& section, std::string name, int header_line)
      : section_(section), name_(std::move(name)), header_line_(header_line) {}

  bool has(std::string_view key) const { return section_.find(key) != section_.end(); }

  double number(std::string_view key, double fallback) {
    auto* e = find(key);
    return e ? parse_number(*e, e->value, e->column) : fallback;
  }

  bool boolean(std::string_view key, bool fallback) {
    auto* e = find(key);
    if (!e) return fallback;
    if (e->value == "true") return true;
    if (e->value == "false") return false;
    throw ConfigError(e->line, e->column, "expected true or false for '" + std::string(key) + "'");
  }

  std::optional<double> optional_number(std::string_view key, std::optional<double> fallback) {
    auto* e = find(key);
    if (!e) return fallback;
    if (e->value == "none") return std::nullopt;
    return parse_number(*e, e->value, e->column);
  }

  std::string word(std::string_view key, std::string fallback) {
    auto* e = find(key);
    return e ? e->value : fallback;
  }

  std::uint64_t unsigned_integer(std::string_view key, std::uint64_t fallback) {
    auto* e = find(key);
    if (!e) return fallback;
    std::uint64_t v = 0;
    const char* first = e->value.data();
    const char* last = first + e->value.size();
    auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc{} || res.ptr != last) {
      throw ConfigError(e->line, e->column + static_cast<int>(res.ptr - first),
                        "expected an unsigned integer for '" + std::string(key) + "'");
    }
    return v;
  }

  Point3 point(std::string_view key, Point3 fallback) {
    auto* e = find(key);
    if (!e) return fallback;
    return parse_point(*e, e->value, e->column);
  }

  std::vector<Point3> points(std::string_view key, std::vector<Point3> fallback) {
    auto* e = find(key);
    if (!e) return fallback;
    std::vector<Point3> out;
    std::size_t start = 0;
    const std::string& v = e->value;
    while (start <= v.size()) {
      auto end = v.find(';', start);
      if (end == std::string::npos) end = v.size();
      out.push_back(parse_point(*e, v.substr(start, end - start),
                                e->column + static_cast<int>(start)));
      start = end + 1;
    }
    return out;
  }

  /// Location used for semantic errors that are not tied to a single key.
  std::pair<int, int> location(std::string_view key) const {
    auto it = section_.find(key);
    if (it != section_.end()) return {it->second.line, it->second.column};
    return {header_line_, 1};
  }

  void reject_unused() const {
    for (const auto& [key, e] : section_) {
      if (!e.used) {
        throw ConfigError(e.line, 1, "unknown key '" + key + "' in section [" + name_ + "]");
      }
    }
  }

 private:
  Entry* find(std::string_view key) {
    auto it = section_.find(key);
    if (it == section_.end()) return nullptr;
    it->second.used = true;
    return &it->second;
  }

  static double parse_number(const Entry& e, std::string_view text, int column) {
    const auto lead = text.find_first_not_of(" \t");
    text = trim(text);
    if (lead != std::string_view::npos) column += static_cast<int>(lead);
    double v = 0.0;
    const char* first = text.data();
    const char* last = first + text.size();
    if (!text.empty() && *first == '+') ++first;
    auto res = std::from_chars(first, last, v);
    if (text.empty() || res.ec != std::errc{} || res.ptr != last || std::isnan(v)) {
      throw ConfigError(e.line, column + static_cast<int>(res.ptr - text.data()),
                        "expected a number, got '" + std::string(text) + "'");
    }
    return v;
  }

  static Point3 parse_point(const Entry& e, std::string_view text, int column) {
    double c[3];
    int n = 0;
    std::size_t pos = 0;
    while (true) {
      const auto b = text.find_first_not_of(" \t", pos);
      if (b == std::string_view::npos) break;
      auto end = text.find_first_of(" \t", b);
      if (end == std::string_view::npos) end = text.size();
      if (n == 3) {
        throw ConfigError(e.line, column + static_cast<int>(b),
                          "a point has exactly three coordinates");
      }
      c[n++] = parse_number(e, text.substr(b, end - b), column + static_cast<int>(b));
      pos = end;
    }
    if (n != 3) {
      throw ConfigError(e.line, column, "a point has exactly three coordinates");
    }
    return {c[0], c[1], c[2]};
  }

  Section& section_;
  std::string name_;
  int header_line_;
};

}  // namespace detail

/// Canonical text form; load(save(sc)) == sc.
inline std::string to_config_text(const Scenario& sc) {
  using namespace detail;
  std::ostringstream os;
  const auto& p = sc.params;
  os << "# hpf scenario v1\n";
  os << "[safety]\n";
  os << "d_ps_m = " << format_double(p.d_ps) << "\n";
  os << "d_hmax_m = " << format_double(p.d_hmax) << "\n";
  os << "k_r = " << format_double(p.k_r) << "\n";
  os << "k_h = " << format_double(p.k_h) << "\n";
  os << "t_r_s = " << format_double(p.t_r) << "\n";
  os << "d_pdd_m = " << format_double(p.d_pdd) << "\n";
  os << "v_intent_mps = " << format_double(p.v_intent) << "\n";
  os << "hysteresis_m = " << format_double(p.hysteresis) << "\n";
  os << "resume = " << format_bool(p.resume.enabled) << "\n";
  os << "resume_margin_m = " << format_double(p.resume.margin) << "\n";
  os << "fixed_d_ha_m = " << (p.fixed_d_ha ? format_double(*p.fixed_d_ha) : "none") << "\n";
  os << "\n[robot]\n";
  os << "waypoints_m = " << format_points(sc.robot.waypoints) << "\n";
  os << "speed_mps = " << format_double(sc.robot.speed) << "\n";
  os << "obeys_stop = " << format_bool(sc.robot.obeys_stop) << "\n";
  os << "loop = " << format_bool(sc.robot.loop) << "\n";
  os << "dwell_s = " << format_double(sc.robot.dwell) << "\n";
  os << "\n[hand]\n";
  if (const auto* h = std::get_if<StaticHand>(&sc.hand)) {
    os << "kind = static\n";
    os << "position_m = " << format_point(h->position) << "\n";
  } else if (const auto* h = std::get_if<ScriptedHand>(&sc.hand)) {
    os << "kind = scripted\n";
    os << "waypoints_m = " << format_points(h->waypoints) << "\n";
    os << "speed_mps = " << format_double(h->speed) << "\n";
    os << "loop = " << format_bool(h->loop) << "\n";
  } else {
    const auto& r = std::get<ReactiveHand>(sc.hand);
    os << "kind = reactive\n";
    os << "home_m = " << format_point(r.home) << "\n";
    os << "trigger = " << (r.trigger == TriggerKind::HapticEvent ? "haptic" : "visual") << "\n";
    os << "latency_mean_s = " << format_double(r.latency_mean) << "\n";
    os << "latency_std_s = " << format_double(r.latency_std) << "\n";
    os << "visual_threshold_m = " << format_double(r.visual_threshold) << "\n";
    os << "miss_probability = " << format_double(r.miss_probability) << "\n";
    os << "retreat_speed_mps = " << format_double(r.retreat_speed) << "\n";
    os << "retreat_accel_mps2 = " << format_double(r.retreat_accel) << "\n";
    os << "retreat_clearance_m = " << format_double(r.retreat_clearance) << "\n";
    os << "returns = " << format_bool(r.returns) << "\n";
    os << "return_clearance_m = " << format_double(r.return_clearance) << "\n";
    os << "return_speed_mps = " << format_double(r.return_speed) << "\n";
    os << "jitter_mps = " << format_double(r.jitter_amplitude) << "\n";
  }
  os << "\n[run]\n";
  os << "dt_s = " << format_double(sc.dt) << "\n";
  os << "duration_s = " << format_double(sc.duration) << "\n";
  os << "seed = " << sc.seed << "\n";
  return os.str();
}

/// Hash of the canonical config text (which includes the seed).
inline std::uint64_t fingerprint(const Scenario& sc) { return fnv1a64(to_config_text(sc)); }

/// Parses scenario text. Missing keys take the library defaults; the result
/// is validated and semantic failures are reported at the offending key.
inline Scenario parse_scenario(std::string_view text) {
  using namespace detail;
  std::map<std::string, Section, std::less<>> sections;
  std::map<std::string, int, std::less<>> section_lines;
  static const std::set<std::string, std::less<>> known = {"safety", "robot", "hand", "run"};

  Section* current = nullptr;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view raw = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    const auto first = raw.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) continue;
    const int col0 = static_cast<int>(first) + 1;
    std::string_view line = trim(raw);
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(line_no, col0, "unterminated section header");
      std::string name(trim(line.substr(1, line.size() - 2)));
      if (!known.contains(name)) {
        throw ConfigError(line_no, col0 + 1, "unknown section [" + name + "]");
      }
      if (sections.contains(name)) {
        throw ConfigError(line_no, col0, "duplicate section [" + name + "]");
      }
      current = &sections[name];
      section_lines[name] = line_no;
      continue;
    }
    const auto eq = raw.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(line_no, col0, "expected 'key = value'");
    }
    if (!current) throw ConfigError(line_no, col0, "key outside of any section");
    std::string key(trim(raw.substr(0, eq)));
    if (key.empty()) throw ConfigError(line_no, col0, "empty key");
    std::string_view value_raw = raw.substr(eq + 1);
    const auto vfirst = value_raw.find_first_not_of(" \t");
    const int vcol = static_cast<int>(eq + 1 + (vfirst == std::string_view::npos ? 0 : vfirst)) + 1;
    std::string value(trim(value_raw));
    if (value.empty()) throw ConfigError(line_no, vcol, "missing value for '" + key + "'");
    if (current->contains(key)) throw ConfigError(line_no, col0, "duplicate key '" + key + "'");
    (*current)[key] = Entry{value, line_no, vcol, false};
  }

  Section empty;
  auto section = [&](const std::string& name) -> Reader {
    auto it = sections.find(name);
    if (it == sections.end()) return Reader(empty, name, 1);
    return Reader(it->second, name, section_lines[name]);
  };

  Scenario sc;
  auto s = section("safety");
  auto& p = sc.params;
  p.d_ps = s.number("d_ps_m", p.d_ps);
  p.d_hmax = s.number("d_hmax_m", p.d_hmax);
  p.k_r = s.number("k_r", p.k_r);
  p.k_h = s.number("k_h", p.k_h);
  p.t_r = s.number("t_r_s", p.t_r);
  p.d_pdd = s.number("d_pdd_m", p.d_pdd);
  p.v_intent = s.number("v_intent_mps", p.v_intent);
  p.hysteresis = s.number("hysteresis_m", p.hysteresis);
  p.resume.enabled = s.boolean("resume", p.resume.enabled);
  p.resume.margin = s.number("resume_margin_m", p.resume.margin);
  p.fixed_d_ha = s.optional_number("fixed_d_ha_m", p.fixed_d_ha);
  s.reject_unused();
  try {
    validate(p);
  } catch (const InvalidInput& e) {
    auto [l, c] = s.location("d_ps_m");
    throw ConfigError(l, c, e.what());
  }

  auto r = section("robot");
  sc.robot.waypoints = r.points("waypoints_m", {});
  sc.robot.speed = r.number("speed_mps", sc.robot.speed);
  sc.robot.obeys_stop = r.boolean("obeys_stop", sc.robot.obeys_stop);
  sc.robot.loop = r.boolean("loop", sc.robot.loop);
  sc.robot.dwell = r.number("dwell_s", sc.robot.dwell);
  r.reject_unused();

  auto h = section("hand");
  const std::string kind = h.word("kind", "static");
  if (kind == "static") {
    sc.hand = StaticHand{h.point("position_m", {})};
  } else if (kind == "scripted") {
    ScriptedHand sh;
    sh.waypoints = h.points("waypoints_m", {});
    sh.speed = h.number("speed_mps", sh.speed);
    sh.loop = h.boolean("loop", sh.loop);
    sc.hand = sh;
  } else if (kind == "reactive") {
    ReactiveHand rh;
    rh.home = h.point("home_m", rh.home);
    const std::string trig = h.word("trigger", "haptic");
    if (trig == "haptic") {
      rh.trigger = TriggerKind::HapticEvent;
    } else if (trig == "visual") {
      rh.trigger = TriggerKind::VisualDistance;
    } else {
      auto [l, c] = h.location("trigger");
      throw ConfigError(l, c, "trigger must be 'haptic' or 'visual'");
    }
    rh.latency_mean = h.number("latency_mean_s", rh.latency_mean);
    rh.latency_std = h.number("latency_std_s", rh.latency_std);
    rh.visual_threshold = h.number("visual_threshold_m", rh.visual_threshold);
    rh.miss_probability = h.number("miss_probability", rh.miss_probability);
    rh.retreat_speed = h.number("retreat_speed_mps", rh.retreat_speed);
    rh.retreat_accel = h.number("retreat_accel_mps2", rh.retreat_accel);
    rh.retreat_clearance = h.number("retreat_clearance_m", rh.retreat_clearance);
    rh.returns = h.boolean("returns", rh.returns);
    rh.return_clearance = h.number("return_clearance_m", rh.return_clearance);
    rh.return_speed = h.number("return_speed_mps", rh.return_speed);
    rh.jitter_amplitude = h.number("jitter_mps", rh.jitter_amplitude);
    sc.hand = rh;
  } else {
    auto [l, c] = h.location("kind");
    throw ConfigError(l, c, "hand kind must be static, scripted or reactive");
  }
  h.reject_unused();

  auto run = section("run");
  sc.dt = run.number("dt_s", sc.dt);
  sc.duration = run.number("duration_s", sc.duration);
  sc.seed = run.unsigned_integer("seed", sc.seed);
  run.reject_unused();

  try {
    validate(sc);
  } catch (const ConfigError&) {
    throw;
  } catch (const InvalidInput& e) {
    // Point at the first section whose content is implicated.
    const std::string msg = e.what();
    auto [l, c] = msg.find("hand") != std::string::npos || msg.find("retreat") != std::string::npos ||
                          msg.find("latency") != std::string::npos ||
                          msg.find("jitter") != std::string::npos
                      ? h.location("kind")
                  : msg.find("robot") != std::string::npos ? r.location("waypoints_m")
                                                           : run.location("dt_s");
    throw ConfigError(l, c, msg);
  }
  return sc;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("cannot read '" + path.string() + "'");
  return ss.str();
}

inline void write_file(const std::filesystem::path& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw IoError("cannot write '" + path.string() + "'");
}

/// Loads a scenario file, or one of the built-in presets `exp1` / `exp2`.
inline Scenario load_scenario(const std::string& path_or_preset) {
  if (path_or_preset == "exp1") return exp1_preset();
  if (path_or_preset == "exp2") return exp2_preset();
  return parse_scenario(read_file(path_or_preset));
}

inline void save_scenario(const std::filesystem::path& path, const Scenario& sc) {
  write_file(path, to_config_text(sc));
}

}  // namespace hpf::io
