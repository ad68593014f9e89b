#pragma once

// Static SVG figures: a two-panel distance / hand-speed plot per trace, a
// distance overlay for a set of traces, and bar charts for a report.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "hpf/errors.hpp"
#include "hpf/io/config.hpp"
#include "hpf/io/report.hpp"
#include "hpf/trace.hpp"

namespace hpf::io {

namespace svg {

struct Series {
  std::vector<double> x;
  std::vector<double> y;
  std::string color;
  double width = 1.5;
  std::string label;
};

struct HRule {
  double y;
  std::string color;
  bool dashed = false;
  std::string label;
};

struct VRule {
  double x;
  std::string color;
};

struct Panel {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
  std::vector<HRule> rules;
  std::vector<VRule> markers;
};

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

inline std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

/// Roughly five "nice" tick positions covering [lo, hi].
inline std::vector<double> ticks(double lo, double hi) {
  const double span = hi - lo;
  if (!(span > 0.0)) return {lo};
  const double raw = span / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double norm = raw / mag;
  const double step = (norm < 1.5 ? 1.0 : norm < 3.0 ? 2.0 : norm < 7.0 ? 5.0 : 10.0) * mag;
  std::vector<double> out;
  for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * span; v += step) {
    out.push_back(std::abs(v) < 1e-12 * step ? 0.0 : v);
  }
  return out;
}

inline std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

/// Min/max decimation into at most 2 * buckets points per series.
inline Series decimate(const Series& s, std::size_t buckets = 1000) {
  if (s.x.size() <= 2 * buckets) return s;
  Series out{{}, {}, s.color, s.width, s.label};
  const std::size_t n = s.x.size();
  for (std::size_t b = 0; b < buckets; ++b) {
    const std::size_t lo = b * n / buckets;
    const std::size_t hi = std::max(lo + 1, (b + 1) * n / buckets);
    std::size_t imin = lo;
    std::size_t imax = lo;
    for (std::size_t i = lo; i < hi; ++i) {
      if (s.y[i] < s.y[imin]) imin = i;
      if (s.y[i] > s.y[imax]) imax = i;
    }
    const auto first = std::min(imin, imax);
    const auto second = std::max(imin, imax);
    out.x.push_back(s.x[first]);
    out.y.push_back(s.y[first]);
    if (second != first) {
      out.x.push_back(s.x[second]);
      out.y.push_back(s.y[second]);
    }
  }
  return out;
}

class Figure {
 public:
  Figure(double width, double panel_height) : width_(width), panel_height_(panel_height) {}

  void add(Panel p) { panels_.push_back(std::move(p)); }

  std::string render() const {
    const double height = panel_height_ * static_cast<double>(panels_.size());
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width_) << "\" height=\""
       << num(height) << "\" viewBox=\"0 0 " << num(width_) << " " << num(height)
       << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    for (std::size_t i = 0; i < panels_.size(); ++i) {
      render_panel(os, panels_[i], panel_height_ * static_cast<double>(i));
    }
    os << "</svg>\n";
    return os.str();
  }

 private:
  void render_panel(std::ostringstream& os, const Panel& p, double top) const {
    const double left = 70.0, right = 20.0, head = 30.0, foot = 45.0;
    const double pw = width_ - left - right;
    const double ph = panel_height_ - head - foot;
    const double x0 = left, y0 = top + head;

    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    double ymin = xmin, ymax = -xmin;
    for (const auto& s : p.series) {
      for (double v : s.x) xmin = std::min(xmin, v), xmax = std::max(xmax, v);
      for (double v : s.y) ymin = std::min(ymin, v), ymax = std::max(ymax, v);
    }
    for (const auto& r : p.rules) ymin = std::min(ymin, r.y), ymax = std::max(ymax, r.y);
    ymin = std::min(ymin, 0.0);
    if (!(xmax > xmin)) xmax = xmin + 1.0;
    if (!(ymax > ymin)) ymax = ymin + 1.0;
    ymax += 0.05 * (ymax - ymin);

    auto sx = [&](double x) { return x0 + (x - xmin) / (xmax - xmin) * pw; };
    auto sy = [&](double y) { return y0 + ph - (y - ymin) / (ymax - ymin) * ph; };

    os << "<g>\n";
    os << "<text x=\"" << num(x0 + pw / 2) << "\" y=\"" << num(top + 18)
       << "\" text-anchor=\"middle\" font-size=\"13\">" << escape(p.title) << "</text>\n";
    for (double t : ticks(xmin, xmax)) {
      os << "<line x1=\"" << num(sx(t)) << "\" y1=\"" << num(y0) << "\" x2=\"" << num(sx(t))
         << "\" y2=\"" << num(y0 + ph) << "\" stroke=\"#e5e5e5\"/>\n";
      os << "<text x=\"" << num(sx(t)) << "\" y=\"" << num(y0 + ph + 15)
         << "\" text-anchor=\"middle\">" << tick_label(t) << "</text>\n";
    }
    for (double t : ticks(ymin, ymax)) {
      os << "<line x1=\"" << num(x0) << "\" y1=\"" << num(sy(t)) << "\" x2=\"" << num(x0 + pw)
         << "\" y2=\"" << num(sy(t)) << "\" stroke=\"#e5e5e5\"/>\n";
      os << "<text x=\"" << num(x0 - 6) << "\" y=\"" << num(sy(t) + 4)
         << "\" text-anchor=\"end\">" << tick_label(t) << "</text>\n";
    }
    os << "<rect x=\"" << num(x0) << "\" y=\"" << num(y0) << "\" width=\"" << num(pw)
       << "\" height=\"" << num(ph) << "\" fill=\"none\" stroke=\"black\"/>\n";
    os << "<text x=\"" << num(x0 + pw / 2) << "\" y=\"" << num(y0 + ph + 35)
       << "\" text-anchor=\"middle\">" << escape(p.x_label) << "</text>\n";
    os << "<text transform=\"translate(" << num(left - 50) << "," << num(y0 + ph / 2)
       << ") rotate(-90)\" text-anchor=\"middle\">" << escape(p.y_label) << "</text>\n";

    for (const auto& m : p.markers) {
      os << "<line class=\"marker\" x1=\"" << num(sx(m.x)) << "\" y1=\"" << num(y0) << "\" x2=\""
         << num(sx(m.x)) << "\" y2=\"" << num(y0 + ph) << "\" stroke=\"" << m.color
         << "\" stroke-dasharray=\"2,3\"/>\n";
    }
    for (const auto& s : p.series) {
      const Series d = decimate(s);
      os << "<polyline class=\"series\" fill=\"none\" stroke=\"" << d.color << "\" stroke-width=\""
         << num(d.width) << "\" points=\"";
      for (std::size_t i = 0; i < d.x.size(); ++i) {
        if (i) os << ' ';
        os << num(sx(d.x[i])) << ',' << num(sy(d.y[i]));
      }
      os << "\"/>\n";
    }
    double legend_y = y0 + 14;
    for (const auto& r : p.rules) {
      os << "<line class=\"rule\" x1=\"" << num(x0) << "\" y1=\"" << num(sy(r.y)) << "\" x2=\""
         << num(x0 + pw) << "\" y2=\"" << num(sy(r.y)) << "\" stroke=\"" << r.color
         << "\" stroke-width=\"1.2\"" << (r.dashed ? " stroke-dasharray=\"6,4\"" : "") << "/>\n";
      if (!r.label.empty()) {
        os << "<text x=\"" << num(x0 + pw - 4) << "\" y=\"" << num(sy(r.y) - 3)
           << "\" text-anchor=\"end\" fill=\"" << r.color << "\">" << escape(r.label)
           << "</text>\n";
      }
    }
    for (const auto& s : p.series) {
      if (s.label.empty()) continue;
      os << "<text x=\"" << num(x0 + 8) << "\" y=\"" << num(legend_y) << "\" fill=\"" << s.color
         << "\">" << escape(s.label) << "</text>\n";
      legend_y += 13;
    }
    os << "</g>\n";
  }

  double width_;
  double panel_height_;
  std::vector<Panel> panels_;
};

/// Vertical bars, one per category, with optional error whiskers.
inline std::string bar_panel(const std::string& title, const std::string& y_label,
                             const std::vector<std::string>& names,
                             const std::vector<double>& values,
                             const std::vector<std::optional<double>>& errors,
                             std::optional<HRule> rule, double x_offset, double width,
                             double height) {
  const double left = 70.0, right = 20.0, head = 30.0, foot = 40.0;
  const double pw = width - left - right, ph = height - head - foot;
  const double x0 = x_offset + left, y0 = head;
  double ymax = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    ymax = std::max(ymax, values[i] + errors[i].value_or(0.0));
  }
  if (rule) ymax = std::max(ymax, rule->y);
  if (!(ymax > 0.0)) ymax = 1.0;
  ymax *= 1.1;
  auto sy = [&](double y) { return y0 + ph - y / ymax * ph; };
  static const char* palette[] = {"#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#8c564b"};

  std::ostringstream os;
  os << "<g>\n";
  os << "<text x=\"" << num(x0 + pw / 2) << "\" y=\"18\" text-anchor=\"middle\" font-size=\"13\">"
     << escape(title) << "</text>\n";
  for (double t : ticks(0.0, ymax)) {
    os << "<line x1=\"" << num(x0) << "\" y1=\"" << num(sy(t)) << "\" x2=\"" << num(x0 + pw)
       << "\" y2=\"" << num(sy(t)) << "\" stroke=\"#e5e5e5\"/>\n";
    os << "<text x=\"" << num(x0 - 6) << "\" y=\"" << num(sy(t) + 4) << "\" text-anchor=\"end\">"
       << tick_label(t) << "</text>\n";
  }
  const double slot = pw / static_cast<double>(std::max<std::size_t>(1, values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double bx = x0 + slot * (static_cast<double>(i) + 0.2);
    const double bw = slot * 0.6;
    os << "<rect class=\"bar\" x=\"" << num(bx) << "\" y=\"" << num(sy(values[i])) << "\" width=\""
       << num(bw) << "\" height=\"" << num(sy(0.0) - sy(values[i])) << "\" fill=\""
       << palette[i % 5] << "\"/>\n";
    if (errors[i]) {
      const double cx = bx + bw / 2;
      os << "<line x1=\"" << num(cx) << "\" y1=\"" << num(sy(values[i] - *errors[i]))
         << "\" x2=\"" << num(cx) << "\" y2=\"" << num(sy(values[i] + *errors[i]))
         << "\" stroke=\"black\"/>\n";
    }
    os << "<text x=\"" << num(bx + bw / 2) << "\" y=\"" << num(y0 + ph + 15)
       << "\" text-anchor=\"middle\">" << escape(names[i]) << "</text>\n";
  }
  if (rule) {
    os << "<line class=\"rule\" x1=\"" << num(x0) << "\" y1=\"" << num(sy(rule->y)) << "\" x2=\""
       << num(x0 + pw) << "\" y2=\"" << num(sy(rule->y)) << "\" stroke=\"" << rule->color
       << "\"" << (rule->dashed ? " stroke-dasharray=\"6,4\"" : "") << "/>\n";
  }
  os << "<rect x=\"" << num(x0) << "\" y=\"" << num(y0) << "\" width=\"" << num(pw)
     << "\" height=\"" << num(ph) << "\" fill=\"none\" stroke=\"black\"/>\n";
  os << "<text transform=\"translate(" << num(x_offset + left - 50) << "," << num(y0 + ph / 2)
     << ") rotate(-90)\" text-anchor=\"middle\">" << escape(y_label) << "</text>\n";
  os << "</g>\n";
  return os.str();
}

}  // namespace svg

/// Distance (top) and hand speed (bottom) over time, with the protective and
/// activation distances as horizontal rules and haptic/stop events marked.
inline std::string trace_plot_svg(const Trace& trace, const std::string& title = "") {
  if (trace.empty()) throw InvalidInput("cannot plot an empty trace");
  svg::Series dist{{}, {}, "#1f77b4", 1.5, "distance"};
  svg::Series had{{}, {}, "#7fbfff", 1.0, "activation distance"};
  svg::Series speed{{}, {}, "#ff7f0e", 1.5, "hand speed"};
  std::vector<svg::VRule> markers;
  for (const auto& s : trace.steps) {
    dist.x.push_back(s.sample.t);
    dist.y.push_back(s.eval.d);
    had.x.push_back(s.sample.t);
    had.y.push_back(s.eval.d_ha);
    speed.x.push_back(s.sample.t);
    speed.y.push_back(norm(s.sample.hand_v));
    for (const auto& e : s.events) {
      if (e.kind == EventKind::HapticOn) markers.push_back({s.sample.t, "#2ca02c"});
      if (e.kind == EventKind::RobotStop) markers.push_back({s.sample.t, "#d62728"});
    }
  }
  const auto& p = trace.params;
  svg::Panel top{title.empty() ? "Hand to TCP distance" : title, "time [s]", "distance [m]",
                 {dist}, {}, markers};
  top.rules.push_back({p.d_ps, "#d62728", false, "PSD " + svg::tick_label(p.d_ps) + " m"});
  if (p.fixed_d_ha) {
    top.rules.push_back({*p.fixed_d_ha, "#2ca02c", false,
                         "HAD " + svg::tick_label(*p.fixed_d_ha) + " m"});
  } else {
    top.series.push_back(had);
    top.rules.push_back({p.d_pdd, "#d62728", true, "PDD " + svg::tick_label(p.d_pdd) + " m"});
  }
  svg::Panel bottom{"Hand speed", "time [s]", "speed [m/s]", {speed}, {}, markers};
  bottom.rules.push_back({p.v_intent, "#7f7f7f", true,
                          "intent " + svg::tick_label(p.v_intent) + " m/s"});
  svg::Figure fig(900, 300);
  fig.add(std::move(top));
  fig.add(std::move(bottom));
  return fig.render();
}

/// Distance curves of several traces with the PSD and a dashed PDD rule.
inline std::string distance_overlay_svg(std::span<const Trace> traces, const std::string& title) {
  if (traces.empty()) throw InvalidInput("no traces to plot");
  static const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#9467bd", "#8c564b",
                                  "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  svg::Panel panel{title, "time [s]", "distance [m]", {}, {}, {}};
  for (std::size_t i = 0; i < traces.size(); ++i) {
    const auto& t = traces[i];
    if (t.empty()) throw InvalidInput("cannot plot an empty trace");
    svg::Series s{{}, {}, palette[i % 9], 1.0, ""};
    for (const auto& st : t.steps) {
      s.x.push_back(st.sample.t);
      s.y.push_back(st.eval.d);
    }
    panel.series.push_back(std::move(s));
  }
  const auto& p = traces.front().params;
  panel.rules.push_back({p.d_ps, "#d62728", false, "PSD " + svg::tick_label(p.d_ps) + " m"});
  panel.rules.push_back({p.d_pdd, "#d62728", true, "PDD " + svg::tick_label(p.d_pdd) + " m"});
  svg::Figure fig(900, 360);
  fig.add(std::move(panel));
  return fig.render();
}

/// Per-condition mean minimum distance and mean time inside the PDD.
inline std::string report_plot_svg(const Report& rep) {
  if (rep.conditions.empty()) throw InvalidInput("report has no conditions to plot");
  std::vector<std::string> names;
  std::vector<double> mins, times;
  std::vector<std::optional<double>> min_err, time_err;
  for (const auto& c : rep.conditions) {
    names.push_back(c.label);
    mins.push_back(c.mean_min_distance);
    min_err.push_back(c.std_min_distance);
    times.push_back(c.mean_time_in_pdd);
    time_err.push_back(c.std_time_in_pdd);
  }
  const double w = 450, h = 320;
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << svg::num(2 * w) << "\" height=\""
     << svg::num(h) << "\" viewBox=\"0 0 " << svg::num(2 * w) << " " << svg::num(h)
     << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << svg::bar_panel("Minimum distance", "distance [m]", names, mins, min_err, std::nullopt, 0.0, w, h);
  os << svg::bar_panel("Time inside PDD", "time [s]", names, times, time_err, std::nullopt, w, w, h);
  os << "</svg>\n";
  return os.str();
}

inline std::filesystem::path emit_svg(const std::filesystem::path& out_dir,
                                      const std::string& file_name, const std::string& svg_text) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create '" + out_dir.string() + "': " + ec.message());
  const auto path = out_dir / file_name;
  write_file(path, svg_text);
  return path;
}

inline std::filesystem::path emit_plots(const Trace& trace, const std::filesystem::path& out_dir,
                                        const std::string& stem) {
  return emit_svg(out_dir, stem + "_distance_speed.svg", trace_plot_svg(trace, stem));
}

inline std::filesystem::path emit_plots(const Report& rep, const std::filesystem::path& out_dir,
                                        const std::string& stem) {
  return emit_svg(out_dir, stem + "_conditions.svg", report_plot_svg(rep));
}

}  // namespace hpf::io
