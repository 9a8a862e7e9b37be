#pragma once

#include <optional>
#include <string>
#include <vector>

namespace rlvrsim {

struct Series {
  std::string label;
  std::vector<std::optional<double>> values;  // index = step; gaps break the line
  bool dashed = false;
};

struct Chart {
  std::string title;
  std::string x_label = "step";
  std::string y_label;
  double y_min = 0.0;
  double y_max = 1.0;
  std::vector<Series> series;
};

std::string render_svg(const Chart& chart);

}  // namespace rlvrsim
