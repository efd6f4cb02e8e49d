// Minimal static SVG writers for the diagnostic artifacts: a labeled
// scatter with identity line and one- or two-panel line charts. Output is
// standalone, well-formed XML with no external references.
#pragma once

#include <limits>
#include <string>
#include <vector>

namespace syncon {

struct ScatterPoint {
  double x = 0.0;
  double y = 0.0;
  std::string label;
};

// Scatter plot; with `identity_line` both axes share one range and a dashed
// y = x reference is drawn. Points with non-finite coordinates are skipped.
std::string svg_scatter(const std::vector<ScatterPoint>& points,
                        const std::string& x_label, const std::string& y_label,
                        const std::string& title, bool identity_line);

struct LineSeries {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;  // same length as x; NaN breaks the line
};

struct ChartSpec {
  std::string title;
  std::vector<LineSeries> series;
  // Dashed vertical marker (e.g. the first post-treatment period);
  // NaN draws none.
  double marker_x = std::numeric_limits<double>::quiet_NaN();
};

std::string svg_line_chart(const ChartSpec& chart);

// Two charts side by side in one document; used for before/after views.
std::string svg_two_panel(const ChartSpec& left, const ChartSpec& right);

}  // namespace syncon
