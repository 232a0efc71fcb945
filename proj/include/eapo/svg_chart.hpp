#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace eapo {

struct Series {
  std::string name;
  std::vector<std::pair<double, double>> points;  // (x, y), x ascending
};

struct ChartSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  int width = 720;
  int height = 420;
  std::optional<std::string> timestamp;  // rendered as a comment when set
};

// Overlaid line chart with axes, ticks and a legend. Non-finite points are
// skipped.
std::string render_line_chart(const ChartSpec& spec, const std::vector<Series>& series);

}  // namespace eapo
