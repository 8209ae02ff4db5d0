#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace uavedge {

// out[i] = mean(values[max(0, i - window + 1) .. i]). window 0 is treated as 1.
std::vector<double> trailing_moving_average(std::span<const double> values, std::size_t window);

struct ChartSeries {
  std::string name;
  std::string color;  // any SVG color literal, e.g. "#1f77b4"
  std::vector<double> values;  // y values at x = 1, 2, ...
};

struct ChartLabels {
  std::string title;
  std::string x_label = "episode";
  std::string y_label = "reward";
};

// Self-contained SVG line chart: one <polyline> per series, axes drawn with
// <line>/<text>, and a legend group. No external references.
std::string render_line_chart(std::span<const ChartSeries> series, const ChartLabels& labels);

std::string xml_escape(std::string_view text);

}  // namespace uavedge
