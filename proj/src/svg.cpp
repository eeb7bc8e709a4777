#include "diffcontact/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace diffcontact {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 440.0;
constexpr double kMarginL = 62.0;
constexpr double kMarginR = 16.0;
constexpr double kMarginT = 34.0;
constexpr double kMarginB = 48.0;

std::string num(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

}  // namespace

SvgPlot::SvgPlot(std::string title, std::string x_label, std::string y_label)
    : title_(std::move(title)), x_label_(std::move(x_label)), y_label_(std::move(y_label)) {}

void SvgPlot::add_series(std::vector<Vec2> points, std::string color, std::string label,
                         bool dashed) {
  series_.push_back({std::move(points), std::move(color), std::move(label), dashed});
}

void SvgPlot::add_marker(Vec2 p, std::string color, std::string label) {
  markers_.push_back({p, std::move(color), std::move(label)});
}

void SvgPlot::add_hline(double y, std::string color) { hlines_.emplace_back(y, std::move(color)); }
void SvgPlot::add_vline(double x, std::string color) { vlines_.emplace_back(x, std::move(color)); }

std::string SvgPlot::render() const {
  double min_pos_y = std::numeric_limits<double>::max();
  for (const Series& s : series_) {
    for (const Vec2& p : s.points) {
      if (p.y > 0.0) min_pos_y = std::min(min_pos_y, p.y);
    }
  }
  if (min_pos_y == std::numeric_limits<double>::max()) min_pos_y = 1e-12;

  auto ty = [&](double y) { return log_y_ ? std::log10(std::max(y, min_pos_y)) : y; };

  double x0 = std::numeric_limits<double>::max(), x1 = -x0;
  double y0 = std::numeric_limits<double>::max(), y1 = -y0;
  auto grow = [&](double x, double y) {
    x0 = std::min(x0, x);
    x1 = std::max(x1, x);
    y0 = std::min(y0, y);
    y1 = std::max(y1, y);
  };
  for (const Series& s : series_) {
    for (const Vec2& p : s.points) grow(p.x, ty(p.y));
  }
  for (const Marker& m : markers_) grow(m.p.x, ty(m.p.y));
  for (const auto& h : hlines_) grow(x0 == std::numeric_limits<double>::max() ? 0.0 : x0, ty(h.first));
  for (const auto& v : vlines_) grow(v.first, y0 == std::numeric_limits<double>::max() ? 0.0 : y0);
  if (x0 > x1) {
    x0 = 0.0;
    x1 = 1.0;
  }
  if (y0 > y1) {
    y0 = 0.0;
    y1 = 1.0;
  }
  if (x1 - x0 < 1e-12) x1 = x0 + 1.0;
  if (y1 - y0 < 1e-12) y1 = y0 + 1.0;
  double padx = 0.04 * (x1 - x0), pady = 0.06 * (y1 - y0);
  x0 -= padx;
  x1 += padx;
  y0 -= pady;
  y1 += pady;
  if (equal_axes_) {
    double cx = 0.5 * (x0 + x1), cy = 0.5 * (y0 + y1);
    double pw = (kWidth - kMarginL - kMarginR), ph = (kHeight - kMarginT - kMarginB);
    double unit = std::max((x1 - x0) / pw, (y1 - y0) / ph);
    x0 = cx - 0.5 * unit * pw;
    x1 = cx + 0.5 * unit * pw;
    y0 = cy - 0.5 * unit * ph;
    y1 = cy + 0.5 * unit * ph;
  }

  auto px = [&](double x) { return kMarginL + (x - x0) / (x1 - x0) * (kWidth - kMarginL - kMarginR); };
  auto py = [&](double y) {
    return kHeight - kMarginB - (ty(y) - y0) / (y1 - y0) * (kHeight - kMarginT - kMarginB);
  };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) + "\" height=\"" +
         num(kHeight) + "\" viewBox=\"0 0 " + num(kWidth) + " " + num(kHeight) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"" + num(kWidth / 2) + "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" +
         title_ + "</text>\n";

  // axes box + ticks
  svg += "<rect x=\"" + num(kMarginL) + "\" y=\"" + num(kMarginT) + "\" width=\"" +
         num(kWidth - kMarginL - kMarginR) + "\" height=\"" + num(kHeight - kMarginT - kMarginB) +
         "\" fill=\"none\" stroke=\"#444\"/>\n";
  const int kTicks = 5;
  for (int i = 0; i <= kTicks; ++i) {
    double fx = x0 + (x1 - x0) * i / kTicks;
    double fy = y0 + (y1 - y0) * i / kTicks;
    double sx = px(fx);
    double sy = kHeight - kMarginB - (fy - y0) / (y1 - y0) * (kHeight - kMarginT - kMarginB);
    svg += "<line x1=\"" + num(sx) + "\" y1=\"" + num(kHeight - kMarginB) + "\" x2=\"" + num(sx) +
           "\" y2=\"" + num(kHeight - kMarginB + 5) + "\" stroke=\"#444\"/>\n";
    svg += "<text x=\"" + num(sx) + "\" y=\"" + num(kHeight - kMarginB + 18) +
           "\" text-anchor=\"middle\" font-size=\"11\">" + num(fx) + "</text>\n";
    svg += "<line x1=\"" + num(kMarginL - 5) + "\" y1=\"" + num(sy) + "\" x2=\"" + num(kMarginL) +
           "\" y2=\"" + num(sy) + "\" stroke=\"#444\"/>\n";
    std::string ylab = log_y_ ? ("1e" + num(fy)) : num(fy);
    svg += "<text x=\"" + num(kMarginL - 8) + "\" y=\"" + num(sy + 4) +
           "\" text-anchor=\"end\" font-size=\"11\">" + ylab + "</text>\n";
  }
  svg += "<text x=\"" + num(kWidth / 2) + "\" y=\"" + num(kHeight - 12) +
         "\" text-anchor=\"middle\" font-size=\"12\">" + x_label_ + "</text>\n";
  svg += "<text x=\"16\" y=\"" + num(kHeight / 2) + "\" text-anchor=\"middle\" font-size=\"12\" " +
         "transform=\"rotate(-90 16 " + num(kHeight / 2) + ")\">" + y_label_ + "</text>\n";

  for (const auto& h : hlines_) {
    svg += "<line x1=\"" + num(kMarginL) + "\" y1=\"" + num(py(h.first)) + "\" x2=\"" +
           num(kWidth - kMarginR) + "\" y2=\"" + num(py(h.first)) + "\" stroke=\"" + h.second +
           "\" stroke-dasharray=\"3,3\"/>\n";
  }
  for (const auto& v : vlines_) {
    svg += "<line x1=\"" + num(px(v.first)) + "\" y1=\"" + num(kMarginT) + "\" x2=\"" +
           num(px(v.first)) + "\" y2=\"" + num(kHeight - kMarginB) + "\" stroke=\"" + v.second +
           "\" stroke-dasharray=\"3,3\"/>\n";
  }

  for (const Series& s : series_) {
    if (s.points.empty()) continue;
    svg += "<polyline fill=\"none\" stroke=\"" + s.color + "\" stroke-width=\"1.5\"";
    if (s.dashed) svg += " stroke-dasharray=\"6,4\"";
    svg += " points=\"";
    for (const Vec2& p : s.points) {
      svg += num(px(p.x)) + "," + num(py(p.y)) + " ";
    }
    svg += "\"/>\n";
  }
  for (const Marker& m : markers_) {
    svg += "<circle cx=\"" + num(px(m.p.x)) + "\" cy=\"" + num(py(m.p.y)) +
           "\" r=\"4\" fill=\"" + m.color + "\"/>\n";
    if (!m.label.empty()) {
      svg += "<text x=\"" + num(px(m.p.x) + 7) + "\" y=\"" + num(py(m.p.y) - 5) +
             "\" font-size=\"11\">" + m.label + "</text>\n";
    }
  }

  // legend
  double ly = kMarginT + 14;
  for (const Series& s : series_) {
    if (s.label.empty()) continue;
    svg += "<line x1=\"" + num(kMarginL + 10) + "\" y1=\"" + num(ly - 4) + "\" x2=\"" +
           num(kMarginL + 34) + "\" y2=\"" + num(ly - 4) + "\" stroke=\"" + s.color +
           "\" stroke-width=\"2\"" + (s.dashed ? " stroke-dasharray=\"6,4\"" : "") + "/>\n";
    svg += "<text x=\"" + num(kMarginL + 40) + "\" y=\"" + num(ly) + "\" font-size=\"11\">" +
           s.label + "</text>\n";
    ly += 15;
  }

  svg += "</svg>\n";
  return svg;
}

}  // namespace diffcontact
