#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "copred/common.hpp"

namespace copred {

// Small deterministic SVG chart emitter so plots render headlessly with no
// graphics dependencies; numeric CSV twins are written next to the images.
namespace svg {

struct Series {
  std::string label;
  std::string color;
  std::vector<double> x;
  std::vector<double> y;
};

namespace detail {

constexpr double k_width = 640, k_height = 400;
constexpr double k_left = 60, k_right = 20, k_top = 40, k_bottom = 50;

inline std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

inline void axes(std::ostringstream& os, const std::string& title, const std::string& x_label,
                 const std::string& y_label, double x_min, double x_max, double y_min,
                 double y_max) {
  os << "<rect width=\"" << k_width << "\" height=\"" << k_height << "\" fill=\"white\"/>\n";
  os << "<text x=\"" << k_width / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"15\">"
     << title << "</text>\n";
  os << "<line x1=\"" << k_left << "\" y1=\"" << k_height - k_bottom << "\" x2=\""
     << k_width - k_right << "\" y2=\"" << k_height - k_bottom << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << k_left << "\" y1=\"" << k_top << "\" x2=\"" << k_left << "\" y2=\""
     << k_height - k_bottom << "\" stroke=\"black\"/>\n";
  os << "<text x=\"" << (k_left + k_width - k_right) / 2 << "\" y=\"" << k_height - 12
     << "\" text-anchor=\"middle\" font-size=\"12\">" << x_label << "</text>\n";
  os << "<text x=\"16\" y=\"" << (k_top + k_height - k_bottom) / 2
     << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 16 "
     << (k_top + k_height - k_bottom) / 2 << ")\">" << y_label << "</text>\n";
  for (int i = 0; i <= 4; ++i) {
    const double fx = x_min + (x_max - x_min) * i / 4.0;
    const double px = k_left + (k_width - k_left - k_right) * i / 4.0;
    os << "<text x=\"" << px << "\" y=\"" << k_height - k_bottom + 16
       << "\" text-anchor=\"middle\" font-size=\"10\">" << fmt(fx) << "</text>\n";
    const double fy = y_min + (y_max - y_min) * i / 4.0;
    const double py = k_height - k_bottom - (k_height - k_top - k_bottom) * i / 4.0;
    os << "<text x=\"" << k_left - 6 << "\" y=\"" << py + 3
       << "\" text-anchor=\"end\" font-size=\"10\">" << fmt(fy) << "</text>\n";
  }
}

}  // namespace detail

inline std::string line_chart(const std::vector<Series>& series, const std::string& title,
                              const std::string& x_label, const std::string& y_label) {
  using namespace detail;
  double x_min = 0, x_max = 1, y_min = 0, y_max = 1;
  bool first = true;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (first) {
        x_min = x_max = s.x[i];
        y_min = y_max = s.y[i];
        first = false;
      }
      x_min = std::min(x_min, s.x[i]);
      x_max = std::max(x_max, s.x[i]);
      y_min = std::min(y_min, s.y[i]);
      y_max = std::max(y_max, s.y[i]);
    }
  }
  if (x_max == x_min) x_max = x_min + 1;
  if (y_max == y_min) y_max = y_min + 1;

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << k_width << "\" height=\""
     << k_height << "\">\n";
  axes(os, title, x_label, y_label, x_min, x_max, y_min, y_max);
  auto px = [&](double x) {
    return k_left + (x - x_min) / (x_max - x_min) * (k_width - k_left - k_right);
  };
  auto py = [&](double y) {
    return k_height - k_bottom - (y - y_min) / (y_max - y_min) * (k_height - k_top - k_bottom);
  };
  double legend_y = k_top + 6;
  for (const auto& s : series) {
    os << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      os << fmt(px(s.x[i])) << ',' << fmt(py(s.y[i])) << ' ';
    }
    os << "\"/>\n";
    os << "<line x1=\"" << k_width - 170 << "\" y1=\"" << legend_y << "\" x2=\"" << k_width - 150
       << "\" y2=\"" << legend_y << "\" stroke=\"" << s.color << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << k_width - 144 << "\" y=\"" << legend_y + 4 << "\" font-size=\"11\">"
       << s.label << "</text>\n";
    legend_y += 16;
  }
  os << "</svg>\n";
  return os.str();
}

inline std::string bar_chart(const std::vector<double>& bin_low, const std::vector<double>& bin_high,
                             const std::vector<std::size_t>& counts, const std::string& title,
                             const std::string& x_label, const std::string& y_label) {
  using namespace detail;
  if (bin_low.empty() || bin_low.size() != counts.size() || bin_high.size() != counts.size()) {
    fail_validation("bar_chart: bins and counts must be non-empty and equally sized");
  }
  const double x_min = bin_low.front(), x_max = bin_high.back();
  double y_max = 1;
  for (auto c : counts) y_max = std::max(y_max, static_cast<double>(c));

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << k_width << "\" height=\""
     << k_height << "\">\n";
  axes(os, title, x_label, y_label, x_min, x_max, 0.0, y_max);
  auto px = [&](double x) {
    return k_left + (x - x_min) / (x_max - x_min) * (k_width - k_left - k_right);
  };
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const double x0 = px(bin_low[i]);
    const double x1 = px(bin_high[i]);
    const double h = static_cast<double>(counts[i]) / y_max * (k_height - k_top - k_bottom);
    os << "<rect x=\"" << fmt(x0 + 1) << "\" y=\"" << fmt(k_height - k_bottom - h) << "\" width=\""
       << fmt(std::max(1.0, x1 - x0 - 2)) << "\" height=\"" << fmt(h)
       << "\" fill=\"steelblue\"/>\n";
  }
  os << "</svg>\n";
  return os.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) fail_runtime("cannot write file: ", path);
  out << content;
}

}  // namespace svg
}  // namespace copred
