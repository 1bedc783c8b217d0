#pragma once

#include <string>
#include <vector>

namespace arinfo::svg {

struct Series {
  std::string label;
  std::vector<double> values;
};

/// SVG 1.1 line chart, sample index on the x axis.
std::string line_chart(const std::string& title, const std::vector<Series>& series,
                       int width = 640, int height = 360);

}  // namespace arinfo::svg
