#include "retarget/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "retarget/types.hpp"

namespace retarget {

namespace {

constexpr double kWidth = 900.0;
constexpr double kHeight = 480.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 24.0;
constexpr double kTop = 48.0;
constexpr double kBottom = 56.0;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
constexpr int kPaletteSize = 8;

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string escape_xml(const std::string& s) {
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

struct Range {
  double lo = 0.0;
  double hi = 1.0;
};

Range pad_range(double lo, double hi) {
  if (!(std::isfinite(lo) && std::isfinite(hi))) return {0.0, 1.0};
  if (lo == hi) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double pad = 0.05 * (hi - lo);
  return {lo - pad, hi + pad};
}

/// Round tick step to 1/2/5 times a power of ten.
double nice_step(const Range& r, int target_ticks) {
  const double raw = (r.hi - r.lo) / std::max(1, target_ticks);
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0})
    if (raw <= m * mag) return m * mag;
  return 10.0 * mag;
}

void append_ticks(std::ostringstream& svg, const Range& rx, const Range& ry) {
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  const double sx = nice_step(rx, 8);
  for (double v = std::ceil(rx.lo / sx) * sx; v <= rx.hi + 1e-12 * sx; v += sx) {
    if (std::abs(v) < 1e-9 * sx) v = 0.0;
    const double px = kLeft + (v - rx.lo) / (rx.hi - rx.lo) * plot_w;
    svg << "<line x1='" << fmt(px) << "' y1='" << fmt(kTop) << "' x2='" << fmt(px)
        << "' y2='" << fmt(kTop + plot_h) << "' stroke='#e0e0e0'/>\n";
    svg << "<text x='" << fmt(px) << "' y='" << fmt(kTop + plot_h + 18)
        << "' font-size='11' text-anchor='middle'>" << fmt(v) << "</text>\n";
  }
  const double sy = nice_step(ry, 6);
  for (double v = std::ceil(ry.lo / sy) * sy; v <= ry.hi + 1e-12 * sy; v += sy) {
    if (std::abs(v) < 1e-9 * sy) v = 0.0;
    const double py = kTop + (ry.hi - v) / (ry.hi - ry.lo) * plot_h;
    svg << "<line x1='" << fmt(kLeft) << "' y1='" << fmt(py) << "' x2='"
        << fmt(kLeft + plot_w) << "' y2='" << fmt(py) << "' stroke='#e0e0e0'/>\n";
    svg << "<text x='" << fmt(kLeft - 6) << "' y='" << fmt(py + 4)
        << "' font-size='11' text-anchor='end'>" << fmt(v) << "</text>\n";
  }
}

void append_frame(std::ostringstream& svg, const std::string& title,
                  const std::string& x_label, const std::string& y_label) {
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  svg << "<rect x='" << fmt(kLeft) << "' y='" << fmt(kTop) << "' width='"
      << fmt(plot_w) << "' height='" << fmt(plot_h)
      << "' fill='none' stroke='#444'/>\n";
  svg << "<text x='" << fmt(kWidth / 2) << "' y='24' font-size='15' "
      << "text-anchor='middle' font-weight='bold'>" << escape_xml(title)
      << "</text>\n";
  svg << "<text x='" << fmt(kLeft + plot_w / 2) << "' y='" << fmt(kHeight - 14)
      << "' font-size='12' text-anchor='middle'>" << escape_xml(x_label)
      << "</text>\n";
  svg << "<text x='16' y='" << fmt(kTop + plot_h / 2)
      << "' font-size='12' text-anchor='middle' transform='rotate(-90 16 "
      << fmt(kTop + plot_h / 2) << ")'>" << escape_xml(y_label) << "</text>\n";
}

std::string svg_open() {
  std::ostringstream svg;
  svg << "<svg xmlns='http://www.w3.org/2000/svg' width='" << fmt(kWidth)
      << "' height='" << fmt(kHeight) << "' viewBox='0 0 " << fmt(kWidth) << " "
      << fmt(kHeight) << "'>\n"
      << "<rect width='100%' height='100%' fill='white'/>\n";
  return svg.str();
}

}  // namespace

std::string svg_line_chart(const std::string& title, const std::string& x_label,
                           const std::string& y_label,
                           const std::vector<SvgSeries>& series) {
  if (series.empty()) throw InvariantError("line chart needs at least one series");
  constexpr double inf = std::numeric_limits<double>::infinity();
  double xlo = inf, xhi = -inf, ylo = inf, yhi = -inf;
  for (const SvgSeries& s : series) {
    if (s.x.size() != s.y.size())
      throw InvariantError("series '" + s.label + "' has " +
                           std::to_string(s.x.size()) + " x values and " +
                           std::to_string(s.y.size()) + " y values");
    if (s.x.empty()) throw InvariantError("series '" + s.label + "' is empty");
    for (size_t i = 0; i < s.x.size(); ++i) {
      xlo = std::min(xlo, s.x[i]);
      xhi = std::max(xhi, s.x[i]);
      if (std::isfinite(s.y[i])) {
        ylo = std::min(ylo, s.y[i]);
        yhi = std::max(yhi, s.y[i]);
      }
    }
  }
  const Range rx = pad_range(xlo, xhi);
  const Range ry = pad_range(ylo, yhi);
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;

  std::ostringstream svg;
  svg << svg_open();
  append_ticks(svg, rx, ry);
  append_frame(svg, title, x_label, y_label);
  for (size_t i = 0; i < series.size(); ++i) {
    const char* color = kPalette[i % kPaletteSize];
    svg << "<polyline fill='none' stroke='" << color << "' stroke-width='1.6' points='";
    for (size_t j = 0; j < series[i].x.size(); ++j) {
      const double px = kLeft + (series[i].x[j] - rx.lo) / (rx.hi - rx.lo) * plot_w;
      double y = series[i].y[j];
      if (!std::isfinite(y)) y = ry.hi;
      const double py = kTop + (ry.hi - y) / (ry.hi - ry.lo) * plot_h;
      svg << fmt(px) << "," << fmt(py) << " ";
    }
    svg << "'/>\n";
    const double lx = kLeft + plot_w - 150;
    const double ly = kTop + 16 + 18 * static_cast<double>(i);
    svg << "<line x1='" << fmt(lx) << "' y1='" << fmt(ly - 4) << "' x2='"
        << fmt(lx + 22) << "' y2='" << fmt(ly - 4) << "' stroke='" << color
        << "' stroke-width='2'/>\n";
    svg << "<text x='" << fmt(lx + 28) << "' y='" << fmt(ly)
        << "' font-size='12'>" << escape_xml(series[i].label) << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

std::string svg_contact_timeline(const std::string& title,
                                 const std::vector<TimelineLane>& lanes) {
  if (lanes.empty()) throw InvariantError("timeline needs at least one lane");
  const int n_groups = lanes.front().contacts.n_groups();
  double t_end = 0.0;
  for (const TimelineLane& lane : lanes) {
    if (lane.contacts.n_groups() != n_groups)
      throw InvariantError("lane '" + lane.label + "' has " +
                           std::to_string(lane.contacts.n_groups()) +
                           " groups, expected " + std::to_string(n_groups));
    if (lane.contacts.T() == 0)
      throw InvariantError("lane '" + lane.label + "' is empty");
    t_end = std::max(t_end, lane.contacts.T() * lane.contacts.dt);
  }

  const double row_h = 16.0;
  const double lane_gap = 14.0;
  const double lane_h = n_groups * row_h;
  const double height =
      kTop + lanes.size() * (lane_h + lane_gap) + kBottom;
  const double plot_w = kWidth - kLeft - kRight;

  std::ostringstream svg;
  svg << "<svg xmlns='http://www.w3.org/2000/svg' width='" << fmt(kWidth)
      << "' height='" << fmt(height) << "' viewBox='0 0 " << fmt(kWidth) << " "
      << fmt(height) << "'>\n"
      << "<rect width='100%' height='100%' fill='white'/>\n";
  svg << "<text x='" << fmt(kWidth / 2) << "' y='24' font-size='15' "
      << "text-anchor='middle' font-weight='bold'>" << escape_xml(title)
      << "</text>\n";

  for (size_t l = 0; l < lanes.size(); ++l) {
    const ContactSequence& c = lanes[l].contacts;
    const double y0 = kTop + static_cast<double>(l) * (lane_h + lane_gap);
    svg << "<text x='" << fmt(kLeft - 8) << "' y='" << fmt(y0 + lane_h / 2 + 4)
        << "' font-size='12' text-anchor='end' font-weight='bold'>"
        << escape_xml(lanes[l].label) << "</text>\n";
    for (int g = 0; g < n_groups; ++g) {
      const double ry = y0 + g * row_h;
      svg << "<rect x='" << fmt(kLeft) << "' y='" << fmt(ry) << "' width='"
          << fmt(plot_w) << "' height='" << fmt(row_h - 3)
          << "' fill='#f2f2f2' stroke='#ccc' stroke-width='0.5'/>\n";
      const char* color = kPalette[g % kPaletteSize];
      int t = 0;
      while (t < c.T()) {
        if (!c.flags(t, g)) {
          ++t;
          continue;
        }
        int start = t;
        while (t < c.T() && c.flags(t, g)) ++t;
        const double x0 = kLeft + (start * c.dt) / t_end * plot_w;
        const double x1 = kLeft + (t * c.dt) / t_end * plot_w;
        svg << "<rect x='" << fmt(x0) << "' y='" << fmt(ry) << "' width='"
            << fmt(x1 - x0) << "' height='" << fmt(row_h - 3) << "' fill='"
            << color << "'/>\n";
      }
      if (l == 0) {
        const std::string group_name =
            g < static_cast<int>(c.groups.size()) ? c.groups[g]
                                                  : "group " + std::to_string(g);
        svg << "<text x='" << fmt(kLeft + plot_w + 4) << "' y='"
            << fmt(ry + row_h - 6) << "' font-size='9'>" << escape_xml(group_name)
            << "</text>\n";
      }
    }
  }
  const double axis_y = kTop + lanes.size() * (lane_h + lane_gap) + 4;
  for (double v = 0.0; v <= t_end + 1e-12; v += nice_step({0.0, t_end}, 8)) {
    const double px = kLeft + v / t_end * plot_w;
    svg << "<text x='" << fmt(px) << "' y='" << fmt(axis_y + 12)
        << "' font-size='11' text-anchor='middle'>" << fmt(v) << "</text>\n";
  }
  svg << "<text x='" << fmt(kLeft + plot_w / 2) << "' y='" << fmt(axis_y + 32)
      << "' font-size='12' text-anchor='middle'>time [s]</text>\n";
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace retarget
