#pragma once

#include <string>
#include <vector>

#include "retarget/feasibility.hpp"

namespace retarget {

/// One labeled curve; x and y must have equal size.
struct SvgSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

/// Standalone SVG line chart: axes with tick labels, legend, one polyline
/// per series. Throws InvariantError on empty or ragged series.
std::string svg_line_chart(const std::string& title, const std::string& x_label,
                           const std::string& y_label,
                           const std::vector<SvgSeries>& series);

/// One timeline lane: a label plus a contact sequence whose groups render as
/// stacked on/off bars against time.
struct TimelineLane {
  std::string label;
  ContactSequence contacts;
};

/// Standalone SVG contact timeline, one lane per sequence. All lanes must
/// share the group count; throws InvariantError otherwise.
std::string svg_contact_timeline(const std::string& title,
                                 const std::vector<TimelineLane>& lanes);

}  // namespace retarget
