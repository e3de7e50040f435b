#pragma once

#include <optional>
#include <string>
#include <vector>

#include "riskkit/metrics.hpp"

namespace riskkit {

struct AxisRange {
  double lo = 0.0, hi = 1.0;
};

// A complete chart description; rendering is a pure function of this struct,
// so identical specs yield byte-identical SVG.
struct PlotSpec {
  std::string title, x_label, y_label;
  std::vector<CurvePoints> series;            // one polyline per entry
  std::optional<AxisRange> x_range, y_range;  // nullopt -> from the data
  bool diagonal = false;                      // dashed reference diagonal
  std::string annotation;                     // e.g. "AUC 0.82 (0.78, 0.85)"
};

std::string render_plot_svg(const PlotSpec& spec);

void write_plot_svg(const PlotSpec& spec, const std::string& path);

}  // namespace riskkit
