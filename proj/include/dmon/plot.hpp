#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace dmon {

// One line on a chart: series name plus (x, y) points.
struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

// Self-contained SVG line chart (axes, ticks, legend, no external assets).
std::string render_line_chart_svg(const std::vector<Series>& series, std::string_view title,
                                  std::string_view x_label, std::string_view y_label,
                                  int width = 640, int height = 400);

// CSV twin of the same data: x,<name1>,<name2>,... with blanks where a series
// has no point at that x.
std::string series_to_csv(const std::vector<Series>& series, std::string_view x_label);

void write_text_file(const std::filesystem::path& path, std::string_view content);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace dmon
