#pragma once

// Minimal static SVG renderer for grouped bar charts.

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace rtmatch {

struct BarSeries {
  std::string name;
  std::vector<std::optional<double>> values;  // one per group; empty = no bar
};

struct BarPanel {
  std::string title;
  std::string y_label;
  std::vector<std::string> groups;
  std::vector<BarSeries> series;
  /// Upper end of the y axis; derived from the data when empty.
  std::optional<double> y_max;
};

/// Lays the panels out on a grid with `columns` columns and returns the SVG document.
std::string render_bar_panels(std::span<const BarPanel> panels, int columns, const std::string& title);

}  // namespace rtmatch
