#include "riskkit/svg.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include "riskkit/errors.hpp"

namespace riskkit {

namespace {

constexpr double kWidth = 640, kHeight = 480;
constexpr double kLeft = 70, kRight = 20, kTop = 40, kBottom = 55;
constexpr double kPlotW = kWidth - kLeft - kRight;
constexpr double kPlotH = kHeight - kTop - kBottom;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c",
                          "#9467bd", "#ff7f0e", "#8c564b"};

std::string px(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string xml_escape(const std::string& s) {
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

AxisRange data_range(const PlotSpec& spec, bool y_axis) {
  bool any = false;
  double lo = 0, hi = 1;
  for (const auto& s : spec.series)
    for (const auto& [x, y] : s.pts) {
      double v = y_axis ? y : x;
      if (!any) {
        lo = hi = v;
        any = true;
      } else {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    }
  if (!any) return {0, 1};
  if (lo == hi) {
    lo -= 0.5;
    hi += 0.5;
  }
  return {lo, hi};
}

}  // namespace

std::string render_plot_svg(const PlotSpec& spec) {
  if (spec.series.empty()) throw ReportError("nothing to plot");
  AxisRange xr = spec.x_range ? *spec.x_range : data_range(spec, false);
  AxisRange yr = spec.y_range ? *spec.y_range : data_range(spec, true);
  if (!(xr.hi > xr.lo) || !(yr.hi > yr.lo))
    throw ReportError("degenerate axis range");
  auto map_x = [&](double x) { return kLeft + (x - xr.lo) / (xr.hi - xr.lo) * kPlotW; };
  auto map_y = [&](double y) {
    return kTop + kPlotH - (y - yr.lo) / (yr.hi - yr.lo) * kPlotH;
  };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"480\" "
         "viewBox=\"0 0 640 480\">\n";
  svg += "<rect width=\"640\" height=\"480\" fill=\"#ffffff\"/>\n";
  if (!spec.title.empty())
    svg += "<text x=\"" + px(kWidth / 2) +
           "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"15\" fill=\"#222\">" +
           xml_escape(spec.title) + "</text>\n";

  // gridlines and tick labels, six per axis
  for (int i = 0; i <= 5; ++i) {
    double fx = xr.lo + (xr.hi - xr.lo) * i / 5.0;
    double fy = yr.lo + (yr.hi - yr.lo) * i / 5.0;
    std::string gx = px(map_x(fx)), gy = px(map_y(fy));
    svg += "<line x1=\"" + gx + "\" y1=\"" + px(kTop) + "\" x2=\"" + gx + "\" y2=\"" +
           px(kTop + kPlotH) + "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    svg += "<line x1=\"" + px(kLeft) + "\" y1=\"" + gy + "\" x2=\"" +
           px(kLeft + kPlotW) + "\" y2=\"" + gy +
           "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    svg += "<text x=\"" + gx + "\" y=\"" + px(kTop + kPlotH + 18) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\" "
           "fill=\"#444\">" +
           tick_label(fx) + "</text>\n";
    svg += "<text x=\"" + px(kLeft - 8) + "\" y=\"" + px(map_y(fy) + 4) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\" "
           "fill=\"#444\">" +
           tick_label(fy) + "</text>\n";
  }

  if (spec.diagonal)
    svg += "<line x1=\"" + px(kLeft) + "\" y1=\"" + px(kTop + kPlotH) + "\" x2=\"" +
           px(kLeft + kPlotW) + "\" y2=\"" + px(kTop) +
           "\" stroke=\"#999999\" stroke-width=\"1\" stroke-dasharray=\"5,4\"/>\n";

  svg += "<rect x=\"" + px(kLeft) + "\" y=\"" + px(kTop) + "\" width=\"" + px(kPlotW) +
         "\" height=\"" + px(kPlotH) +
         "\" fill=\"none\" stroke=\"#333333\" stroke-width=\"1\"/>\n";

  for (std::size_t si = 0; si < spec.series.size(); ++si) {
    const auto& s = spec.series[si];
    if (s.pts.empty()) continue;
    const char* color = kPalette[si % (sizeof kPalette / sizeof *kPalette)];
    std::string pts;
    for (const auto& [x, y] : s.pts) {
      if (!pts.empty()) pts += ' ';
      pts += px(map_x(x)) + "," + px(map_y(y));
    }
    svg += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
           "\" stroke-width=\"1.6\" points=\"" + pts + "\"/>\n";
  }

  // axis labels
  if (!spec.x_label.empty())
    svg += "<text x=\"" + px(kLeft + kPlotW / 2) + "\" y=\"" + px(kHeight - 12) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
           "fill=\"#222\">" +
           xml_escape(spec.x_label) + "</text>\n";
  if (!spec.y_label.empty())
    svg += "<text x=\"18\" y=\"" + px(kTop + kPlotH / 2) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
           "fill=\"#222\" transform=\"rotate(-90 18 " +
           px(kTop + kPlotH / 2) + ")\">" + xml_escape(spec.y_label) + "</text>\n";

  bool legend = std::any_of(spec.series.begin(), spec.series.end(),
                            [](const CurvePoints& s) { return !s.label.empty(); });
  if (legend) {
    double lx = kLeft + kPlotW - 170, ly = kTop + 14;
    for (std::size_t si = 0; si < spec.series.size(); ++si) {
      const char* color = kPalette[si % (sizeof kPalette / sizeof *kPalette)];
      double y = ly + 18 * static_cast<double>(si);
      svg += "<line x1=\"" + px(lx) + "\" y1=\"" + px(y - 4) + "\" x2=\"" + px(lx + 26) +
             "\" y2=\"" + px(y - 4) + "\" stroke=\"" + std::string(color) +
             "\" stroke-width=\"2\"/>\n";
      svg += "<text x=\"" + px(lx + 32) + "\" y=\"" + px(y) +
             "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"#222\">" +
             xml_escape(spec.series[si].label) + "</text>\n";
    }
  }

  if (!spec.annotation.empty())
    svg += "<text x=\"" + px(kLeft + kPlotW - 10) + "\" y=\"" + px(kTop + kPlotH - 10) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"13\" "
           "fill=\"#222\">" +
           xml_escape(spec.annotation) + "</text>\n";

  svg += "</svg>\n";
  return svg;
}

void write_plot_svg(const PlotSpec& spec, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << render_plot_svg(spec);
}

}  // namespace riskkit
