#pragma once

#include <string>
#include <utility>
#include <vector>

namespace sgda {

struct Series {
  std::string name;
  std::vector<std::pair<double, double>> points;
};

/// Standalone SVG with log-scaled axes and a gridline at every decade.
/// Non-positive coordinates are dropped.
std::string loglog_svg(const std::string& title, const std::vector<Series>& series,
                       const std::string& x_label = "iteration",
                       const std::string& y_label = "residual");

}  // namespace sgda
