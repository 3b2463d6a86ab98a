#include "dmon/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "dmon/util.hpp"

namespace dmon {

namespace {

std::string fmt(double x) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.6g", x);
  return buf;
}

std::string escape_xml(std::string_view s) {
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

// Round limits outward to a tidy tick step.
void nice_range(double& lo, double& hi, double& step) {
  if (hi <= lo) hi = lo + 1.0;
  const double span = hi - lo;
  const double raw = span / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double norm = raw / mag;
  step = (norm < 1.5 ? 1.0 : norm < 3.0 ? 2.0 : norm < 7.0 ? 5.0 : 10.0) * mag;
  lo = std::floor(lo / step) * step;
  hi = std::ceil(hi / step) * step;
}

const char* kPalette[] = {"#4472c4", "#ed7d31", "#70ad47", "#b02ca4", "#7f7f7f", "#c00000"};

}  // namespace

std::string render_line_chart_svg(const std::vector<Series>& series, std::string_view title,
                                  std::string_view x_label, std::string_view y_label,
                                  int width, int height) {
  if (series.empty()) throw ValidationError("chart: no series");
  for (const Series& s : series) {
    if (s.x.size() != s.y.size()) {
      throw ValidationError("chart: series '" + s.name + "' has mismatched x/y lengths");
    }
    if (s.x.empty()) throw ValidationError("chart: series '" + s.name + "' is empty");
  }

  double x_lo = series[0].x[0], x_hi = x_lo, y_lo = series[0].y[0], y_hi = y_lo;
  for (const Series& s : series) {
    for (double x : s.x) {
      x_lo = std::min(x_lo, x);
      x_hi = std::max(x_hi, x);
    }
    for (double y : s.y) {
      y_lo = std::min(y_lo, y);
      y_hi = std::max(y_hi, y);
    }
  }
  double x_step, y_step;
  nice_range(x_lo, x_hi, x_step);
  nice_range(y_lo, y_hi, y_step);

  const double ml = 62, mr = 18, mt = 34, mb = 48;  // margins
  const double pw = width - ml - mr;
  const double ph = height - mt - mb;
  auto px = [&](double x) { return ml + (x - x_lo) / (x_hi - x_lo) * pw; };
  auto py = [&](double y) { return mt + ph - (y - y_lo) / (y_hi - y_lo) * ph; };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
  svg << "<rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
  svg << "<text x=\"" << width / 2.0 << "\" y=\"20\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"14\" font-weight=\"bold\">"
      << escape_xml(title) << "</text>\n";

  // Grid and ticks.
  for (double gx = x_lo; gx <= x_hi + x_step * 0.5; gx += x_step) {
    svg << "<line x1=\"" << fmt(px(gx)) << "\" y1=\"" << fmt(mt) << "\" x2=\"" << fmt(px(gx))
        << "\" y2=\"" << fmt(mt + ph) << "\" stroke=\"#e0e0e0\"/>\n";
    svg << "<text x=\"" << fmt(px(gx)) << "\" y=\"" << fmt(mt + ph + 16)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">" << fmt(gx)
        << "</text>\n";
  }
  for (double gy = y_lo; gy <= y_hi + y_step * 0.5; gy += y_step) {
    svg << "<line x1=\"" << fmt(ml) << "\" y1=\"" << fmt(py(gy)) << "\" x2=\"" << fmt(ml + pw)
        << "\" y2=\"" << fmt(py(gy)) << "\" stroke=\"#e0e0e0\"/>\n";
    svg << "<text x=\"" << fmt(ml - 6) << "\" y=\"" << fmt(py(gy) + 3)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" << fmt(gy)
        << "</text>\n";
  }
  svg << "<rect x=\"" << fmt(ml) << "\" y=\"" << fmt(mt) << "\" width=\"" << fmt(pw)
      << "\" height=\"" << fmt(ph) << "\" fill=\"none\" stroke=\"#404040\"/>\n";

  // Axis labels.
  svg << "<text x=\"" << fmt(ml + pw / 2) << "\" y=\"" << fmt(height - 8)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
      << escape_xml(x_label) << "</text>\n";
  svg << "<text x=\"14\" y=\"" << fmt(mt + ph / 2)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" transform=\"rotate(-90 14 "
      << fmt(mt + ph / 2) << ")\">" << escape_xml(y_label) << "</text>\n";

  // Series polylines with point markers.
  for (size_t si = 0; si < series.size(); ++si) {
    const char* color = kPalette[si % (sizeof(kPalette) / sizeof(kPalette[0]))];
    std::ostringstream pts;
    for (size_t i = 0; i < series[si].x.size(); ++i) {
      if (i > 0) pts << ' ';
      pts << fmt(px(series[si].x[i])) << ',' << fmt(py(series[si].y[i]));
    }
    svg << "<polyline points=\"" << pts.str() << "\" fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"1.8\"/>\n";
    for (size_t i = 0; i < series[si].x.size(); ++i) {
      svg << "<circle cx=\"" << fmt(px(series[si].x[i])) << "\" cy=\""
          << fmt(py(series[si].y[i])) << "\" r=\"2.6\" fill=\"" << color << "\"/>\n";
    }
    // Legend row.
    const double ly = mt + 10 + 14 * static_cast<double>(si);
    svg << "<line x1=\"" << fmt(ml + pw - 120) << "\" y1=\"" << fmt(ly) << "\" x2=\""
        << fmt(ml + pw - 100) << "\" y2=\"" << fmt(ly) << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << fmt(ml + pw - 95) << "\" y=\"" << fmt(ly + 3)
        << "\" font-family=\"sans-serif\" font-size=\"10\">" << escape_xml(series[si].name)
        << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

std::string series_to_csv(const std::vector<Series>& series, std::string_view x_label) {
  if (series.empty()) throw ValidationError("csv: no series");
  // Union of x values, ascending; blank cells where a series lacks the x.
  std::map<double, std::vector<std::string>> rows;
  for (size_t si = 0; si < series.size(); ++si) {
    for (size_t i = 0; i < series[si].x.size(); ++i) {
      auto& row = rows[series[si].x[i]];
      row.resize(series.size());
      row[si] = fmt(series[si].y[i]);
    }
  }
  std::string out(x_label);
  for (const Series& s : series) out += "," + s.name;
  out += '\n';
  for (auto& [x, row] : rows) {
    row.resize(series.size());
    out += fmt(x);
    for (const std::string& cell : row) out += "," + cell;
    out += '\n';
  }
  return out;
}

void write_text_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw IoError("short write to '" + path.string() + "'");
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace dmon
