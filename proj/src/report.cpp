#include "rlvrsim/report.hpp"

#include <algorithm>
#include <cstdio>

namespace rlvrsim {
namespace {

constexpr double kWidth = 640, kHeight = 400;
constexpr double kLeft = 60, kRight = 170, kTop = 40, kBottom = 50;
constexpr const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                   "#9467bd", "#8c564b", "#17becf", "#7f7f7f"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape(const std::string& s) {
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

}  // namespace

std::string render_svg(const Chart& chart) {
  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  std::size_t n = 1;
  for (const auto& s : chart.series) n = std::max(n, s.values.size());
  const double x_max = static_cast<double>(std::max<std::size_t>(n - 1, 1));
  const double span = chart.y_max > chart.y_min ? chart.y_max - chart.y_min : 1.0;
  auto px = [&](double x) { return kLeft + pw * x / x_max; };
  auto py = [&](double y) {
    y = std::clamp(y, chart.y_min, chart.y_max);
    return kTop + ph * (1.0 - (y - chart.y_min) / span);
  };

  std::string o = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) +
                  "\" height=\"" + num(kHeight) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o += "<text x=\"" + num(kLeft + pw / 2) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" +
       escape(chart.title) + "</text>\n";
  // Axes and grid.
  for (int i = 0; i <= 4; ++i) {
    const double y = chart.y_min + span * i / 4.0;
    o += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(py(y)) + "\" x2=\"" + num(kLeft + pw) +
         "\" y2=\"" + num(py(y)) + "\" stroke=\"#ddd\"/>\n";
    o += "<text x=\"" + num(kLeft - 6) + "\" y=\"" + num(py(y) + 4) + "\" text-anchor=\"end\">" +
         num(y) + "</text>\n";
  }
  for (int i = 0; i <= 5; ++i) {
    const double x = x_max * i / 5.0;
    char label[32];
    std::snprintf(label, sizeof label, "%.0f", x);
    o += "<text x=\"" + num(px(x)) + "\" y=\"" + num(kTop + ph + 16) +
         "\" text-anchor=\"middle\">" + label + "</text>\n";
  }
  o += "<rect x=\"" + num(kLeft) + "\" y=\"" + num(kTop) + "\" width=\"" + num(pw) + "\" height=\"" +
       num(ph) + "\" fill=\"none\" stroke=\"black\"/>\n";
  o += "<text x=\"" + num(kLeft + pw / 2) + "\" y=\"" + num(kHeight - 12) +
       "\" text-anchor=\"middle\">" + escape(chart.x_label) + "</text>\n";
  o += "<text transform=\"translate(16," + num(kTop + ph / 2) +
       ") rotate(-90)\" text-anchor=\"middle\">" + escape(chart.y_label) + "</text>\n";

  for (std::size_t k = 0; k < chart.series.size(); ++k) {
    const auto& s = chart.series[k];
    const std::string color = kColors[k % std::size(kColors)];
    const std::string dash = s.dashed ? " stroke-dasharray=\"5,3\"" : "";
    std::string pts;
    auto flush = [&] {
      if (!pts.empty()) {
        o += "<polyline fill=\"none\" stroke=\"" + color + "\" stroke-width=\"1.5\"" + dash +
             " points=\"" + pts + "\"/>\n";
      }
      pts.clear();
    };
    for (std::size_t i = 0; i < s.values.size(); ++i) {
      if (!s.values[i]) {
        flush();
        continue;
      }
      if (!pts.empty()) pts += ' ';
      pts += num(px(static_cast<double>(i))) + "," + num(py(*s.values[i]));
    }
    flush();
    const double ly = kTop + 12 + 18.0 * static_cast<double>(k);
    o += "<line x1=\"" + num(kLeft + pw + 12) + "\" y1=\"" + num(ly) + "\" x2=\"" +
         num(kLeft + pw + 36) + "\" y2=\"" + num(ly) + "\" stroke=\"" + color +
         "\" stroke-width=\"2\"" + dash + "/>\n";
    o += "<text x=\"" + num(kLeft + pw + 42) + "\" y=\"" + num(ly + 4) + "\">" + escape(s.label) +
         "</text>\n";
  }
  o += "</svg>\n";
  return o;
}

}  // namespace rlvrsim
