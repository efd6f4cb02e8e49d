#include "syncon/svg.hpp"

#include "syncon/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace syncon {

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
constexpr int kPaletteSize = 8;

std::string xml_escape(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_text(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

struct Range {
  double lo = 0.0;
  double hi = 1.0;

  void include(double v) {
    if (!std::isfinite(v)) return;
    if (!seen) {
      lo = hi = v;
      seen = true;
      return;
    }
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  // Pads by 5% and splits degenerate ranges so the scale never collapses.
  void finish() {
    if (!seen) {
      lo = 0.0;
      hi = 1.0;
      return;
    }
    if (hi - lo < 1e-12) {
      lo -= 1.0;
      hi += 1.0;
      return;
    }
    const double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;
  }

 private:
  bool seen = false;
};

// Affine map from data coordinates to one plot viewport.
struct Frame {
  double x0, y0, width, height;  // pixel viewport of the plot area
  Range xr, yr;

  double sx(double v) const { return x0 + (v - xr.lo) / (xr.hi - xr.lo) * width; }
  double sy(double v) const {
    return y0 + height - (v - yr.lo) / (yr.hi - yr.lo) * height;
  }
};

void draw_axes(std::ostringstream& out, const Frame& f,
               const std::string& x_label, const std::string& y_label,
               const std::string& title) {
  out << "<rect x=\"" << num(f.x0) << "\" y=\"" << num(f.y0) << "\" width=\""
      << num(f.width) << "\" height=\"" << num(f.height)
      << "\" fill=\"none\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
  const int ticks = 5;
  for (int i = 0; i < ticks; ++i) {
    const double fx = f.xr.lo + (f.xr.hi - f.xr.lo) * i / (ticks - 1);
    const double fy = f.yr.lo + (f.yr.hi - f.yr.lo) * i / (ticks - 1);
    const double px = f.sx(fx);
    const double py = f.sy(fy);
    out << "<line x1=\"" << num(px) << "\" y1=\"" << num(f.y0 + f.height)
        << "\" x2=\"" << num(px) << "\" y2=\"" << num(f.y0 + f.height + 4)
        << "\" stroke=\"#333333\"/>\n";
    out << "<text x=\"" << num(px) << "\" y=\"" << num(f.y0 + f.height + 16)
        << "\" font-size=\"10\" text-anchor=\"middle\">" << tick_text(fx)
        << "</text>\n";
    out << "<line x1=\"" << num(f.x0 - 4) << "\" y1=\"" << num(py)
        << "\" x2=\"" << num(f.x0) << "\" y2=\"" << num(py)
        << "\" stroke=\"#333333\"/>\n";
    out << "<text x=\"" << num(f.x0 - 6) << "\" y=\"" << num(py + 3)
        << "\" font-size=\"10\" text-anchor=\"end\">" << tick_text(fy)
        << "</text>\n";
  }
  if (!x_label.empty())
    out << "<text x=\"" << num(f.x0 + f.width / 2) << "\" y=\""
        << num(f.y0 + f.height + 32)
        << "\" font-size=\"12\" text-anchor=\"middle\">" << xml_escape(x_label)
        << "</text>\n";
  if (!y_label.empty())
    out << "<text x=\"" << num(f.x0 - 44) << "\" y=\""
        << num(f.y0 + f.height / 2) << "\" font-size=\"12\" "
        << "text-anchor=\"middle\" transform=\"rotate(-90 " << num(f.x0 - 44)
        << " " << num(f.y0 + f.height / 2) << ")\">" << xml_escape(y_label)
        << "</text>\n";
  if (!title.empty())
    out << "<text x=\"" << num(f.x0 + f.width / 2) << "\" y=\""
        << num(f.y0 - 10) << "\" font-size=\"13\" text-anchor=\"middle\" "
        << "font-weight=\"bold\">" << xml_escape(title) << "</text>\n";
}

void draw_chart(std::ostringstream& out, const ChartSpec& chart, double x0,
                double y0, double plot_width, double plot_height) {
  Frame f;
  f.x0 = x0 + 56;
  f.y0 = y0 + 28;
  f.width = plot_width - 72;
  f.height = plot_height - 72;
  for (const LineSeries& s : chart.series) {
    for (double v : s.x) f.xr.include(v);
    for (double v : s.y) f.yr.include(v);
  }
  if (std::isfinite(chart.marker_x)) f.xr.include(chart.marker_x);
  f.xr.finish();
  f.yr.finish();

  draw_axes(out, f, "period", "", chart.title);

  if (std::isfinite(chart.marker_x)) {
    const double px = f.sx(chart.marker_x);
    out << "<line x1=\"" << num(px) << "\" y1=\"" << num(f.y0) << "\" x2=\""
        << num(px) << "\" y2=\"" << num(f.y0 + f.height)
        << "\" stroke=\"#999999\" stroke-dasharray=\"4 3\"/>\n";
  }

  int color = 0;
  for (const LineSeries& s : chart.series) {
    const char* stroke = kPalette[color % kPaletteSize];
    std::ostringstream path;
    bool pen_down = false;
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) {
        pen_down = false;
        continue;
      }
      path << (pen_down ? " L " : " M ") << num(f.sx(s.x[i])) << ' '
           << num(f.sy(s.y[i]));
      pen_down = true;
    }
    const std::string d = path.str();
    if (!d.empty())
      out << "<path d=\"" << d.substr(1)
          << "\" fill=\"none\" stroke=\"" << stroke
          << "\" stroke-width=\"1.5\"/>\n";
    // Legend entry.
    const double lx = f.x0 + 8;
    const double ly = f.y0 + 14 + 14 * color;
    out << "<line x1=\"" << num(lx) << "\" y1=\"" << num(ly) << "\" x2=\""
        << num(lx + 18) << "\" y2=\"" << num(ly) << "\" stroke=\"" << stroke
        << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << num(lx + 22) << "\" y=\"" << num(ly + 3)
        << "\" font-size=\"10\">" << xml_escape(s.name) << "</text>\n";
    ++color;
  }
}

std::string document(double width, double height, const std::string& body) {
  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width)
      << "\" height=\"" << num(height) << "\" viewBox=\"0 0 " << num(width)
      << " " << num(height) << "\">\n"
      << "<rect width=\"" << num(width) << "\" height=\"" << num(height)
      << "\" fill=\"#ffffff\"/>\n"
      << body << "</svg>\n";
  return out.str();
}

}  // namespace

std::string svg_scatter(const std::vector<ScatterPoint>& points,
                        const std::string& x_label, const std::string& y_label,
                        const std::string& title, bool identity_line) {
  const double width = 560, height = 560;
  Frame f;
  f.x0 = 70;
  f.y0 = 46;
  f.width = width - 70 - 24;
  f.height = height - 46 - 64;
  for (const ScatterPoint& p : points) {
    f.xr.include(p.x);
    f.yr.include(p.y);
    if (identity_line) {
      f.xr.include(p.y);
      f.yr.include(p.x);
    }
  }
  f.xr.finish();
  f.yr.finish();
  if (identity_line) {
    // One shared range keeps the reference line at 45 degrees.
    Range shared;
    shared.include(f.xr.lo);
    shared.include(f.xr.hi);
    shared.include(f.yr.lo);
    shared.include(f.yr.hi);
    f.xr = shared;
    f.yr = shared;
  }

  std::ostringstream body;
  draw_axes(body, f, x_label, y_label, title);
  if (identity_line)
    body << "<line x1=\"" << num(f.sx(f.xr.lo)) << "\" y1=\""
         << num(f.sy(f.xr.lo)) << "\" x2=\"" << num(f.sx(f.xr.hi))
         << "\" y2=\"" << num(f.sy(f.xr.hi))
         << "\" stroke=\"#999999\" stroke-dasharray=\"5 4\"/>\n";
  for (const ScatterPoint& p : points) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) continue;
    body << "<circle cx=\"" << num(f.sx(p.x)) << "\" cy=\"" << num(f.sy(p.y))
         << "\" r=\"4\" fill=\"#1f77b4\" fill-opacity=\"0.8\">"
         << "<title>" << xml_escape(p.label) << "</title></circle>\n";
  }
  return document(width, height, body.str());
}

std::string svg_line_chart(const ChartSpec& chart) {
  const double width = 640, height = 440;
  std::ostringstream body;
  draw_chart(body, chart, 0, 0, width, height);
  return document(width, height, body.str());
}

std::string svg_two_panel(const ChartSpec& left, const ChartSpec& right) {
  const double panel_width = 520, height = 420;
  std::ostringstream body;
  draw_chart(body, left, 0, 0, panel_width, height);
  draw_chart(body, right, panel_width, 0, panel_width, height);
  return document(2 * panel_width, height, body.str());
}

}  // namespace syncon
