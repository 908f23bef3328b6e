// Copyright (c) 2026 The usbl_homing Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "homing/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

namespace homing {
namespace {

constexpr double kMarginLeft = 70.0;
constexpr double kMarginRight = 20.0;
constexpr double kMarginTop = 30.0;
constexpr double kMarginBottom = 45.0;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", std::abs(v) < 1e-12 ? 0.0 : v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

/// Step of roughly `target` ticks across `span`, rounded to 1, 2 or 5 times a power of ten.
double nice_step(double span, int target = 5) {
  if (!(span > 0.0)) return 1.0;
  const double raw = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double r = raw / mag;
  return (r < 1.5 ? 1.0 : r < 3.0 ? 2.0 : r < 7.0 ? 5.0 : 10.0) * mag;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void finalize() {
    if (!std::isfinite(lo)) lo = 0.0, hi = 1.0;
    if (hi - lo < 1e-12) lo -= 0.5, hi += 0.5;
  }
  void widen(double factor) {
    const double c = 0.5 * (lo + hi), h = 0.5 * (hi - lo) * factor;
    lo = c - h;
    hi = c + h;
  }
};

void header(std::ostream& os, double w, double h) {
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(w) << "\" height=\"" << num(h)
     << "\" viewBox=\"0 0 " << num(w) << ' ' << num(h) << "\" font-family=\"sans-serif\" font-size=\"11\">\n"
     << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

void text(std::ostream& os, double x, double y, const std::string& s, const char* anchor = "middle",
          double rotate = 0.0) {
  os << "<text x=\"" << num(x) << "\" y=\"" << num(y) << "\" text-anchor=\"" << anchor << '"';
  if (rotate != 0.0) os << " transform=\"rotate(" << num(rotate) << ' ' << num(x) << ' ' << num(y) << ")\"";
  os << '>' << escape(s) << "</text>\n";
}

void line(std::ostream& os, double x0, double y0, double x1, double y1, const char* stroke, double w = 1.0) {
  os << "<line x1=\"" << num(x0) << "\" y1=\"" << num(y0) << "\" x2=\"" << num(x1) << "\" y2=\"" << num(y1)
     << "\" stroke=\"" << stroke << "\" stroke-width=\"" << num(w) << "\"/>\n";
}

/// Maps data to pixels inside one panel box.
struct Frame {
  double left, top, width, height;
  Range x, y;

  double px(double v) const { return left + (v - x.lo) / (x.hi - x.lo) * width; }
  double py(double v) const { return top + height - (v - y.lo) / (y.hi - y.lo) * height; }
};

void axes(std::ostream& os, const Frame& f, const std::string& x_label, const std::string& y_label,
          const std::string& title, bool x_ticks = true) {
  os << "<rect x=\"" << num(f.left) << "\" y=\"" << num(f.top) << "\" width=\"" << num(f.width)
     << "\" height=\"" << num(f.height) << "\" fill=\"none\" stroke=\"#444\"/>\n";
  const double sy = nice_step(f.y.hi - f.y.lo);
  for (double v = std::ceil(f.y.lo / sy) * sy; v <= f.y.hi + 1e-9 * sy; v += sy) {
    line(os, f.left, f.py(v), f.left + f.width, f.py(v), "#e4e4e4");
    text(os, f.left - 6, f.py(v) + 4, tick_label(v), "end");
  }
  if (x_ticks) {
    const double sx = nice_step(f.x.hi - f.x.lo);
    for (double v = std::ceil(f.x.lo / sx) * sx; v <= f.x.hi + 1e-9 * sx; v += sx) {
      line(os, f.px(v), f.top, f.px(v), f.top + f.height, "#e4e4e4");
      text(os, f.px(v), f.top + f.height + 15, tick_label(v));
    }
  }
  text(os, f.left + f.width / 2, f.top + f.height + 34, x_label);
  text(os, f.left - 52, f.top + f.height / 2, y_label, "middle", -90.0);
  text(os, f.left + f.width / 2, f.top - 10, title);
}

}  // namespace

void write_line_chart(std::ostream& os, const std::vector<SvgPanel>& panels, double width, double panel_height) {
  header(os, width, panel_height * static_cast<double>(std::max<std::size_t>(panels.size(), 1)));
  for (std::size_t p = 0; p < panels.size(); ++p) {
    const SvgPanel& panel = panels[p];
    Frame f{kMarginLeft, panel_height * static_cast<double>(p) + kMarginTop,
            width - kMarginLeft - kMarginRight, panel_height - kMarginTop - kMarginBottom, {}, {}};
    for (const auto& s : panel.series) {
      for (double v : s.x) f.x.add(v);
      for (double v : s.y) f.y.add(v);
    }
    f.x.finalize();
    f.y.finalize();
    f.y.widen(1.08);
    if (panel.equal_aspect) {
      const double scale = std::max((f.x.hi - f.x.lo) / f.width, (f.y.hi - f.y.lo) / f.height);
      const double cx = 0.5 * (f.x.lo + f.x.hi), cy = 0.5 * (f.y.lo + f.y.hi);
      f.x = {cx - 0.5 * scale * f.width, cx + 0.5 * scale * f.width};
      f.y = {cy - 0.5 * scale * f.height, cy + 0.5 * scale * f.height};
    }
    axes(os, f, panel.x_label, panel.y_label, panel.title);

    double legend_y = f.top + 14;
    for (const auto& s : panel.series) {
      os << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\"";
      if (s.dashed) os << " stroke-dasharray=\"6 4\"";
      os << " points=\"";
      const std::size_t n = std::min(s.x.size(), s.y.size());
      for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
        os << num(f.px(s.x[i])) << ',' << num(f.py(s.y[i])) << (i + 1 < n ? " " : "");
      }
      os << "\"/>\n";
      line(os, f.left + f.width - 130, legend_y - 4, f.left + f.width - 110, legend_y - 4, s.color.c_str(), 2.0);
      text(os, f.left + f.width - 104, legend_y, s.label, "start");
      legend_y += 15;
    }
  }
  os << "</svg>\n";
}

void write_bar_chart(std::ostream& os, const std::vector<SvgBarGroup>& groups, double width, double height) {
  const double panel_w = width / static_cast<double>(std::max<std::size_t>(groups.size(), 1));
  header(os, width, height);
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const SvgBarGroup& group = groups[g];
    Frame f{panel_w * static_cast<double>(g) + kMarginLeft, kMarginTop, panel_w - kMarginLeft - kMarginRight,
            height - kMarginTop - kMarginBottom, {0.0, 1.0}, {}};
    f.y.add(0.0);
    for (const auto& b : group.bars) f.y.add(b.value + b.error);
    f.y.finalize();
    f.y.hi *= 1.1;
    axes(os, f, "", "", group.title, false);
    const double slot = f.width / static_cast<double>(std::max<std::size_t>(group.bars.size(), 1));
    for (std::size_t i = 0; i < group.bars.size(); ++i) {
      const SvgBar& b = group.bars[i];
      const double x0 = f.left + slot * (static_cast<double>(i) + 0.2);
      const double bw = slot * 0.6;
      os << "<rect x=\"" << num(x0) << "\" y=\"" << num(f.py(b.value)) << "\" width=\"" << num(bw)
         << "\" height=\"" << num(f.py(0.0) - f.py(b.value)) << "\" fill=\"" << b.color << "\"/>\n";
      const double cx = x0 + bw / 2;
      line(os, cx, f.py(b.value - b.error), cx, f.py(b.value + b.error), "#222", 1.2);
      line(os, cx - 5, f.py(b.value + b.error), cx + 5, f.py(b.value + b.error), "#222", 1.2);
      line(os, cx - 5, f.py(b.value - b.error), cx + 5, f.py(b.value - b.error), "#222", 1.2);
      text(os, cx, f.top + f.height + 15, b.label);
    }
  }
  os << "</svg>\n";
}

std::string kind_color(EstimateKind kind) {
  switch (kind) {
    case EstimateKind::RealTime: return "#d62728";
    case EstimateKind::Smoothed: return "#1f77b4";
    case EstimateKind::DeadReckoned: return "#7f7f7f";
  }
  return "#000000";
}

void write_trajectory_svg(std::ostream& os, const std::vector<std::pair<std::string, TargetTrack>>& tracks) {
  static const char* kPalette[] = {"#2ca02c", "#1f77b4", "#d62728", "#7f7f7f", "#9467bd", "#ff7f0e"};
  SvgPanel panel{"target and chaser tracks (top view)", "east [m]", "north [m]", {}, true};
  std::size_t c = 0;
  for (const auto& [label, tr] : tracks) {
    SvgSeries s{label, kPalette[c++ % 6], {}, {}, label != "truth"};
    for (const auto& p : tr.position) {
      s.x.push_back(p.x());
      s.y.push_back(p.y());
    }
    panel.series.push_back(std::move(s));
  }
  if (!tracks.empty() && !tracks.front().second.chaser.empty()) {
    SvgSeries s{"chaser", "#ff7f0e", {}, {}, false};
    for (const auto& p : tracks.front().second.chaser) {
      s.x.push_back(p.x());
      s.y.push_back(p.y());
    }
    panel.series.push_back(std::move(s));
  }
  write_line_chart(os, {panel});
}

void write_error_curves_svg(std::ostream& os, const ErrorReport& report) {
  SvgPanel pos{"absolute target position error", "time [s]", "error [m]", {}, false};
  SvgPanel spd{"target speed error", "time [s]", "error [m/s]", {}, false};
  SvgPanel hdg{"target heading error", "time [s]", "error [deg]", {}, false};
  for (const auto& s : report.series) {
    const std::string color = kind_color(s.kind), label = to_string(s.kind);
    pos.series.push_back({label, color, s.time, s.position, false});
    spd.series.push_back({label, color, s.time, s.speed, false});
    hdg.series.push_back({label, color, s.time, s.heading_deg, false});
  }
  write_line_chart(os, {pos, spd, hdg});
}

void write_error_bars_svg(std::ostream& os, const ErrorReport& report) {
  SvgBarGroup pos{"position [m]", {}}, spd{"speed [m/s]", {}}, hdg{"heading [deg]", {}};
  for (const auto& s : report.series) {
    const std::string color = kind_color(s.kind), label = to_string(s.kind);
    const auto p = s.position_stats(), v = s.speed_stats(), h = s.heading_stats();
    pos.bars.push_back({label, color, p.mean, p.stddev});
    spd.bars.push_back({label, color, v.mean, v.stddev});
    hdg.bars.push_back({label, color, h.mean, h.stddev});
  }
  write_bar_chart(os, {pos, spd, hdg}, 960.0);
}

}  // namespace homing
