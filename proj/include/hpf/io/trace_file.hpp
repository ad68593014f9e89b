#pragma once

// Trace files are line-delimited JSON. The first record is a header, every
// following record is one simulation step:
//
//   {"type":"header","format":"hpf-trace","version":1,"fingerprint":"…","dt":0.001,
//    "label":"VH","params":{…}}
//   {"type":"step","i":0,"t":0,"tcp":[…],"tcp_v":[…],"hand":[…],"hand_v":[…],
//    "d":0.6,"d_ha":0.4,"zone":"SAFE","events":[]}
//
// Readers need no lookahead beyond the current line.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "hpf/errors.hpp"
#include "hpf/io/config.hpp"
#include "hpf/trace.hpp"

namespace hpf::io {

inline constexpr int kTraceVersion = 1;
inline constexpr const char* kTraceFormat = "hpf-trace";

using nlohmann::json;

namespace detail {

inline json to_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

inline Vec3 vec_from_json(const json& j) {
  if (!j.is_array() || j.size() != 3) throw std::invalid_argument("expected a 3-element array");
  return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()};
}

}  // namespace detail

inline json params_to_json(const SafetyParams& p) {
  json j;
  j["d_ps_m"] = p.d_ps;
  j["d_hmax_m"] = p.d_hmax;
  j["k_r"] = p.k_r;
  j["k_h"] = p.k_h;
  j["t_r_s"] = p.t_r;
  j["d_pdd_m"] = p.d_pdd;
  j["v_intent_mps"] = p.v_intent;
  j["hysteresis_m"] = p.hysteresis;
  j["resume"] = p.resume.enabled;
  j["resume_margin_m"] = p.resume.margin;
  j["fixed_d_ha_m"] = p.fixed_d_ha ? json(*p.fixed_d_ha) : json(nullptr);
  return j;
}

inline SafetyParams params_from_json(const json& j) {
  SafetyParams p;
  p.d_ps = j.at("d_ps_m").get<double>();
  p.d_hmax = j.at("d_hmax_m").get<double>();
  p.k_r = j.at("k_r").get<double>();
  p.k_h = j.at("k_h").get<double>();
  p.t_r = j.at("t_r_s").get<double>();
  p.d_pdd = j.at("d_pdd_m").get<double>();
  p.v_intent = j.at("v_intent_mps").get<double>();
  p.hysteresis = j.at("hysteresis_m").get<double>();
  p.resume.enabled = j.at("resume").get<bool>();
  p.resume.margin = j.at("resume_margin_m").get<double>();
  const auto& f = j.at("fixed_d_ha_m");
  if (!f.is_null()) p.fixed_d_ha = f.get<double>();
  return p;
}

/// Streams trace records; each call emits exactly one line.
class TraceWriter {
 public:
  explicit TraceWriter(std::ostream& out) : out_(out) {}

  void header(const Trace& trace) {
    json h;
    h["type"] = "header";
    h["format"] = kTraceFormat;
    h["version"] = kTraceVersion;
    h["fingerprint"] = hex64(trace.fingerprint);
    h["dt"] = trace.dt;
    h["label"] = trace.label;
    h["params"] = params_to_json(trace.params);
    out_ << h.dump() << '\n';
  }

  void step(std::size_t index, const TraceStep& s) {
    json r;
    r["type"] = "step";
    r["i"] = index;
    r["t"] = s.sample.t;
    r["tcp"] = detail::to_json(s.sample.tcp);
    r["tcp_v"] = detail::to_json(s.sample.tcp_v);
    r["hand"] = detail::to_json(s.sample.hand);
    r["hand_v"] = detail::to_json(s.sample.hand_v);
    r["d"] = s.eval.d;
    r["d_ha"] = s.eval.d_ha;
    r["zone"] = std::string(to_string(s.zone));
    json ev = json::array();
    for (const auto& e : s.events) ev.push_back(std::string(to_string(e.kind)));
    r["events"] = std::move(ev);
    out_ << r.dump() << '\n';
  }

 private:
  std::ostream& out_;
};

inline void write_trace(std::ostream& out, const Trace& trace) {
  TraceWriter w(out);
  w.header(trace);
  for (std::size_t i = 0; i < trace.steps.size(); ++i) w.step(i, trace.steps[i]);
}

inline void save_trace(const std::filesystem::path& path, const Trace& trace) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  write_trace(out, trace);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
}

/// A step as stored on disk. Only d and d_ha of the field evaluation are
/// persisted.
struct StoredStep {
  PoseSample sample;
  double d = 0.0;
  double d_ha = 0.0;
  Zone zone = Zone::Safe;
  std::vector<EventKind> events;
};

struct TraceHeader {
  std::uint64_t fingerprint = 0;
  double dt = 0.0;
  std::string label;
  SafetyParams params;
};

/// Pull reader. Record 0 is the header; record i (i >= 1) is step i - 1.
/// Any malformed, mis-numbered or out-of-order record raises StreamError
/// carrying the record index.
class TraceReader {
 public:
  explicit TraceReader(std::istream& in) : in_(in) { read_header(); }

  const TraceHeader& header() const { return header_; }

  std::optional<StoredStep> next() {
    std::string line;
    if (!std::getline(in_, line)) {
      if (in_.bad()) throw IoError("read failure in trace stream");
      return std::nullopt;
    }
    const std::size_t index = ++record_;
    if (in_.eof()) throw StreamError(index, "truncated record (missing newline)");
    StoredStep s;
    try {
      const json r = json::parse(line);
      if (r.at("type").get<std::string>() != "step") throw std::invalid_argument("expected a step record");
      const auto i = r.at("i").get<std::size_t>();
      if (i != index - 1) {
        throw std::invalid_argument("step index " + std::to_string(i) + ", expected " +
                                    std::to_string(index - 1));
      }
      s.sample.t = r.at("t").get<double>();
      s.sample.tcp = detail::vec_from_json(r.at("tcp"));
      s.sample.tcp_v = detail::vec_from_json(r.at("tcp_v"));
      s.sample.hand = detail::vec_from_json(r.at("hand"));
      s.sample.hand_v = detail::vec_from_json(r.at("hand_v"));
      s.d = r.at("d").get<double>();
      s.d_ha = r.at("d_ha").get<double>();
      const auto zone = zone_from_string(r.at("zone").get<std::string>());
      if (!zone) throw std::invalid_argument("unknown zone");
      s.zone = *zone;
      for (const auto& e : r.at("events")) {
        const auto k = event_kind_from_string(e.get<std::string>());
        if (!k) throw std::invalid_argument("unknown event kind");
        s.events.push_back(*k);
      }
    } catch (const std::exception& e) {
      throw StreamError(index, e.what());
    }
    if (last_t_ && !(s.sample.t > *last_t_)) throw StreamError(index, "timestamps not increasing");
    last_t_ = s.sample.t;
    return s;
  }

 private:
  void read_header() {
    std::string line;
    if (!std::getline(in_, line) || in_.eof()) throw StreamError(0, "missing or truncated header");
    try {
      const json h = json::parse(line);
      if (h.at("type").get<std::string>() != "header" ||
          h.at("format").get<std::string>() != kTraceFormat) {
        throw std::invalid_argument("not an hpf trace header");
      }
      if (h.at("version").get<int>() != kTraceVersion) {
        throw std::invalid_argument("unsupported trace version");
      }
      header_.fingerprint = std::stoull(h.at("fingerprint").get<std::string>(), nullptr, 16);
      header_.dt = h.at("dt").get<double>();
      header_.label = h.at("label").get<std::string>();
      header_.params = params_from_json(h.at("params"));
      validate(header_.params);
      if (!(header_.dt > 0.0)) throw std::invalid_argument("dt must be > 0");
    } catch (const std::exception& e) {
      throw StreamError(0, e.what());
    }
  }

  std::istream& in_;
  TraceHeader header_;
  std::size_t record_ = 0;
  std::optional<double> last_t_;
};

/// Reads a whole trace. Only d and d_ha of each field evaluation are restored.
inline Trace read_trace(std::istream& in) {
  TraceReader reader(in);
  Trace t;
  t.fingerprint = reader.header().fingerprint;
  t.dt = reader.header().dt;
  t.label = reader.header().label;
  t.params = reader.header().params;
  while (auto s = reader.next()) {
    TraceStep step;
    step.sample = s->sample;
    step.zone = s->zone;
    step.eval.d = s->d;
    step.eval.d_ha = s->d_ha;
    for (auto k : s->events) step.events.push_back({s->sample.t, k});
    t.steps.push_back(std::move(step));
  }
  return t;
}

inline Trace load_trace(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  return read_trace(in);
}

}  // namespace hpf::io
