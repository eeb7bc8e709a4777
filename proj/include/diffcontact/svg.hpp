#pragma once

#include <string>
#include <vector>

#include "diffcontact/vec2.hpp"

namespace diffcontact {

/// Minimal polyline plot emitter (SVG 1.1): auto-ranged axes with tick
/// labels, series polylines with a small legend, optional markers and guide
/// lines. Enough for trajectories, learning curves and control profiles.
class SvgPlot {
 public:
  SvgPlot(std::string title, std::string x_label, std::string y_label);

  void add_series(std::vector<Vec2> points, std::string color, std::string label,
                  bool dashed = false);
  void add_marker(Vec2 p, std::string color, std::string label);
  void add_hline(double y, std::string color);
  void add_vline(double x, std::string color);
  /// Plot log10(y); non-positive values are clamped to the smallest positive
  /// sample in the series.
  void set_log_y(bool enabled) { log_y_ = enabled; }
  void set_equal_axes(bool enabled) { equal_axes_ = enabled; }

  std::string render() const;

 private:
  struct Series {
    std::vector<Vec2> points;
    std::string color;
    std::string label;
    bool dashed;
  };
  struct Marker {
    Vec2 p;
    std::string color;
    std::string label;
  };

  std::string title_, x_label_, y_label_;
  std::vector<Series> series_;
  std::vector<Marker> markers_;
  std::vector<std::pair<double, std::string>> hlines_;
  std::vector<std::pair<double, std::string>> vlines_;
  bool log_y_ = false;
  bool equal_axes_ = false;
};

}  // namespace diffcontact
