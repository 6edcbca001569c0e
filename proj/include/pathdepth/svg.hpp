#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

// Minimal standalone SVG charts.
namespace pathdepth::svg {

struct Series {
  std::string label;
  std::vector<std::pair<double, double>> points;
};

std::string escape(std::string_view text);

std::string line_chart(const std::string& title, const std::string& x_label, const std::string& y_label,
                       const std::vector<Series>& series);

/// Bars between consecutive edges; edges.size() == counts.size() + 1.
std::string bar_chart(const std::string& title, const std::string& x_label, const std::string& y_label,
                      const std::vector<double>& edges, const std::vector<std::size_t>& counts);

}  // namespace pathdepth::svg
