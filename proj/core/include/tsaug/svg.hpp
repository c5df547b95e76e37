#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "tsaug/series.hpp"

namespace tsaug::svg {

struct LineSeries {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
  std::string color;  // empty picks from the default palette
};

struct LineChart {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<LineSeries> series;
  bool markers = false;
};

struct ScatterPoint {
  double x = 0.0;
  double y = 0.0;
  double color_value = 0.0;
  std::string label;
};

struct ScatterChart {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::string color_label;
  std::vector<ScatterPoint> points;
};

std::string render(const LineChart& chart, int width = 720, int height = 440);
std::string render(const ScatterChart& chart, int width = 720, int height = 440);

// Channel 0 of input (red) and augmented (green) on shared axes.
std::string render_overlay(const TimeSeries& input, const TimeSeries& augmented, const std::string& title,
                           int width = 720, int height = 320);

void write_file(const std::filesystem::path& path, const std::string& svg);

}  // namespace tsaug::svg
