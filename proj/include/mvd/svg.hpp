#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "mvd/protocol1d.hpp"

namespace mvd {

// Learning-curve plot: median test score vs training-set size per depth
// (log x), error bars from the standard deviation of the selected runs'
// test MSE, and a horizontal reference line at the Wiener ESE. Plain
// hand-written SVG so the output is byte-deterministic.
inline std::string learning_curve_svg(std::span<const RunRecord> records, double wiener_ese) {
  struct Point {
    std::size_t n;
    double score, sd;
  };
  std::map<int, std::vector<Point>> curves;
  {
    std::map<std::pair<int, std::size_t>, std::vector<double>> cells;
    for (const auto& rec : records)
      if (rec.selected) cells[{rec.depth, rec.n_train}].push_back(rec.test_mse);
    for (const auto& [key, tests] : cells) {
      double mean = 0.0;
      for (double t : tests) mean += t;
      mean /= static_cast<double>(tests.size());
      double var = 0.0;
      for (double t : tests) var += (t - mean) * (t - mean);
      var /= static_cast<double>(tests.size());
      curves[key.first].push_back({key.second, median(tests), std::sqrt(var)});
    }
  }
  if (curves.empty()) throw std::invalid_argument("learning_curve_svg: no selected records");
  for (auto& [depth, pts] : curves)
    std::sort(pts.begin(), pts.end(), [](const Point& a, const Point& b) { return a.n < b.n; });

  double lmin = 1e300, lmax = -1e300, ymax = wiener_ese;
  for (const auto& [depth, pts] : curves)
    for (const auto& p : pts) {
      lmin = std::min(lmin, std::log10(static_cast<double>(p.n)));
      lmax = std::max(lmax, std::log10(static_cast<double>(p.n)));
      ymax = std::max(ymax, p.score + p.sd);
    }
  if (lmax == lmin) {
    lmin -= 0.5;
    lmax += 0.5;
  }
  ymax = std::max(ymax * 1.08, 1e-12);

  const double width = 640, height = 440;
  const double left = 62, right = 620, top = 20, bottom = 395;
  auto px = [&](double n) {
    return left + (std::log10(n) - lmin) / (lmax - lmin) * (right - left);
  };
  auto py = [&](double v) { return bottom - v / ymax * (bottom - top); };
  auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return std::string(buf);
  };

  static const char* kColors[4] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
     << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
  os << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height
     << "\" fill=\"white\"/>\n";
  os << "<rect x=\"" << num(left) << "\" y=\"" << num(top) << "\" width=\"" << num(right - left)
     << "\" height=\"" << num(bottom - top)
     << "\" fill=\"none\" stroke=\"#444444\" stroke-width=\"1\"/>\n";

  // x ticks at the decades covered
  for (int e = static_cast<int>(std::floor(lmin)); e <= static_cast<int>(std::ceil(lmax)); ++e) {
    const double x = left + (e - lmin) / (lmax - lmin) * (right - left);
    if (x < left - 0.5 || x > right + 0.5) continue;
    os << "<line x1=\"" << num(x) << "\" y1=\"" << num(bottom) << "\" x2=\"" << num(x)
       << "\" y2=\"" << num(bottom + 5) << "\" stroke=\"#444444\"/>\n";
    os << "<text x=\"" << num(x) << "\" y=\"" << num(bottom + 20)
       << "\" font-size=\"12\" text-anchor=\"middle\">1e" << e << "</text>\n";
  }
  // y ticks
  for (int i = 0; i <= 5; ++i) {
    const double v = ymax * i / 5.0;
    os << "<line x1=\"" << num(left - 5) << "\" y1=\"" << num(py(v)) << "\" x2=\"" << num(left)
       << "\" y2=\"" << num(py(v)) << "\" stroke=\"#444444\"/>\n";
    os << "<text x=\"" << num(left - 9) << "\" y=\"" << num(py(v) + 4)
       << "\" font-size=\"12\" text-anchor=\"end\">" << num(v) << "</text>\n";
  }
  os << "<text x=\"" << num((left + right) / 2) << "\" y=\"" << num(height - 8)
     << "\" font-size=\"13\" text-anchor=\"middle\">training samples N</text>\n";
  os << "<text x=\"16\" y=\"" << num((top + bottom) / 2)
     << "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
     << num((top + bottom) / 2) << ")\">test MSE</text>\n";

  // Wiener reference line
  os << "<line class=\"wiener\" x1=\"" << num(left) << "\" y1=\"" << num(py(wiener_ese))
     << "\" x2=\"" << num(right) << "\" y2=\"" << num(py(wiener_ese))
     << "\" stroke=\"#333333\" stroke-dasharray=\"6 4\" stroke-width=\"1.5\"/>\n";
  os << "<text x=\"" << num(right - 4) << "\" y=\"" << num(py(wiener_ese) - 5)
     << "\" font-size=\"12\" text-anchor=\"end\">Wiener " << num(wiener_ese) << "</text>\n";

  int legend_row = 0;
  for (const auto& [depth, pts] : curves) {
    const char* color = kColors[depth & 3];
    if (pts.size() > 1) {
      os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
      for (const auto& p : pts) os << num(px(static_cast<double>(p.n))) << "," << num(py(p.score)) << " ";
      os << "\"/>\n";
    }
    for (const auto& p : pts) {
      const double x = px(static_cast<double>(p.n));
      if (p.sd > 0.0) {
        os << "<line class=\"err\" x1=\"" << num(x) << "\" y1=\""
           << num(py(std::max(0.0, p.score - p.sd))) << "\" x2=\"" << num(x) << "\" y2=\""
           << num(py(p.score + p.sd)) << "\" stroke=\"" << color << "\" stroke-width=\"1\"/>\n";
      }
      os << "<circle class=\"pt\" cx=\"" << num(x) << "\" cy=\"" << num(py(p.score))
         << "\" r=\"3.2\" fill=\"" << color << "\"/>\n";
    }
    os << "<circle cx=\"" << num(left + 14) << "\" cy=\"" << num(top + 14 + 16 * legend_row)
       << "\" r=\"3.2\" fill=\"" << color << "\"/>\n";
    os << "<text x=\"" << num(left + 24) << "\" y=\"" << num(top + 18 + 16 * legend_row)
       << "\" font-size=\"12\">depth " << depth << "</text>\n";
    ++legend_row;
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace mvd
