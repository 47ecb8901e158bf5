#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace jamloc {

// Minimal SVG charts for run reports. Non-finite points are skipped.
struct Series {
  std::string name;
  std::vector<double> x, y;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_y = false;
  int width = 720;
  int height = 420;
};

void write_line_plot(const std::filesystem::path& file, const PlotSpec& spec,
                     const std::vector<Series>& series);

// One colour per group; `groups[i]` indexes the palette.
void write_scatter_plot(const std::filesystem::path& file, const PlotSpec& spec,
                        const std::vector<double>& x, const std::vector<double>& y,
                        const std::vector<int>& groups,
                        const std::vector<std::pair<double, double>>& markers = {});

// Horizontal bars, drawn in the given order.
void write_bar_plot(const std::filesystem::path& file, const PlotSpec& spec,
                    const std::vector<std::string>& labels, const std::vector<double>& values);

}  // namespace jamloc
