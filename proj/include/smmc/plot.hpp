#pragma once

#include <span>
#include <string>
#include <vector>

namespace smmc {

struct PlotSeries {
  std::string label;
  std::vector<double> y;
};

struct PlotSpec {
  std::string title;
  std::string x_label = "t (s)";
  std::string y_label;
  int width = 900;
  int height = 420;
  std::size_t max_columns = 1500;  // min/max decimation above this many samples
};

/// Static SVG line plot of several series over a shared x axis.
std::string render_svg(const PlotSpec& spec, std::span<const double> x,
                       std::span<const PlotSeries> series);
/// Throws IoError.
void write_svg(const std::string& path, const PlotSpec& spec, std::span<const double> x,
               std::span<const PlotSeries> series);

}  // namespace smmc
