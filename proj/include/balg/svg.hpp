#pragma once

#include <string>
#include <utility>
#include <vector>

namespace balg {

/// Static line drawing in data coordinates.
struct SvgPlot {
  double xmin = -1, xmax = 1, ymin = -1, ymax = 1;
  int width = 480, height = 480;
  std::string title, xlabel, ylabel;
  struct Line {
    std::vector<std::pair<double, double>> pts;
    std::string colour = "#1f4e79";
    double stroke = 1.0;
  };
  std::vector<Line> lines;

  void add(std::vector<std::pair<double, double>> pts, std::string colour = "#1f4e79", double stroke = 1.0);
  std::string str() const;
};

}  // namespace balg
