#pragma once

#include <string>
#include <vector>

#include "nadv/experiment.hpp"

namespace nadv {

struct PlotGeometry {
  double width = 640.0;
  double height = 400.0;
  double left = 60.0;
  double right = 200.0;  // room for the legend
  double top = 40.0;
  double bottom = 50.0;

  double x_of(double r, int r_max) const;
  double y_of(double share) const;
};

// Share-vs-retries chart, one polyline per (arm, method, cost); theorem
// reports become a bar chart of expected NADV per weighting.
std::string render_svg(const ExperimentReport& report, const PlotGeometry& geometry = {});

// Reads each JSONL report and writes <output_dir>/<report stem>.svg.
std::vector<std::string> render_plots(const std::vector<std::string>& report_paths, const std::string& output_dir);

}  // namespace nadv
