#include "rtmatch/svg_chart.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <sstream>

namespace rtmatch {

namespace {

constexpr double kPanelWidth = 300.0;
constexpr double kPanelHeight = 230.0;
constexpr double kMarginLeft = 52.0;
constexpr double kMarginRight = 12.0;
constexpr double kMarginTop = 28.0;
constexpr double kMarginBottom = 40.0;
constexpr double kHeader = 60.0;

constexpr std::array<const char*, 6> kPalette = {"#5a5a5a", "#f28e2b", "#4e79a7", "#59a14f", "#b07aa1", "#e15759"};

std::string num(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, 2);
  (void)ec;
  return std::string(buf, end);
}

std::string label(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 3);
  (void)ec;
  return std::string(buf, end);
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
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

// 1, 2 or 5 times a power of ten, at least v.
double nice_ceiling(double v) {
  if (!(v > 0.0)) return 1.0;
  const double p = std::pow(10.0, std::floor(std::log10(v)));
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (m * p >= v * (1.0 - 1e-12)) return m * p;
  }
  return 10.0 * p;
}

void render_panel(std::ostringstream& out, const BarPanel& panel, double x0, double y0) {
  double data_max = 0.0;
  for (const auto& s : panel.series) {
    for (const auto& v : s.values) {
      if (v) data_max = std::max(data_max, *v);
    }
  }
  const double y_max = panel.y_max.value_or(nice_ceiling(data_max));
  const double plot_w = kPanelWidth - kMarginLeft - kMarginRight;
  const double plot_h = kPanelHeight - kMarginTop - kMarginBottom;
  const double px = x0 + kMarginLeft;
  const double py = y0 + kMarginTop;

  out << "<text x=\"" << num(x0 + kPanelWidth / 2) << "\" y=\"" << num(y0 + 18)
      << "\" text-anchor=\"middle\" font-size=\"13\" font-weight=\"bold\">" << escape(panel.title) << "</text>\n";

  constexpr int kTicks = 5;
  for (int t = 0; t <= kTicks; ++t) {
    const double v = y_max * t / kTicks;
    const double y = py + plot_h - plot_h * t / kTicks;
    out << "<line x1=\"" << num(px) << "\" y1=\"" << num(y) << "\" x2=\"" << num(px + plot_w) << "\" y2=\""
        << num(y) << "\" stroke=\"#e0e0e0\"/>\n";
    out << "<text x=\"" << num(px - 4) << "\" y=\"" << num(y + 4)
        << "\" text-anchor=\"end\" font-size=\"10\">" << label(v) << "</text>\n";
  }
  out << "<line x1=\"" << num(px) << "\" y1=\"" << num(py + plot_h) << "\" x2=\"" << num(px + plot_w)
      << "\" y2=\"" << num(py + plot_h) << "\" stroke=\"#000\"/>\n";
  out << "<text transform=\"translate(" << num(x0 + 12) << "," << num(py + plot_h / 2)
      << ") rotate(-90)\" text-anchor=\"middle\" font-size=\"11\">" << escape(panel.y_label) << "</text>\n";

  const std::size_t groups = std::max<std::size_t>(panel.groups.size(), 1);
  const std::size_t nseries = std::max<std::size_t>(panel.series.size(), 1);
  const double group_w = plot_w / static_cast<double>(groups);
  const double bar_w = group_w * 0.8 / static_cast<double>(nseries);
  for (std::size_t g = 0; g < panel.groups.size(); ++g) {
    const double gx = px + group_w * static_cast<double>(g);
    for (std::size_t s = 0; s < panel.series.size(); ++s) {
      const auto& values = panel.series[s].values;
      if (g >= values.size() || !values[g]) continue;
      const double v = std::clamp(*values[g], 0.0, y_max);
      const double h = y_max > 0.0 ? plot_h * v / y_max : 0.0;
      const double bx = gx + group_w * 0.1 + bar_w * static_cast<double>(s);
      out << "<rect x=\"" << num(bx) << "\" y=\"" << num(py + plot_h - h) << "\" width=\"" << num(bar_w)
          << "\" height=\"" << num(h) << "\" fill=\"" << kPalette[s % kPalette.size()] << "\"/>\n";
    }
    out << "<text x=\"" << num(gx + group_w / 2) << "\" y=\"" << num(py + plot_h + 14)
        << "\" text-anchor=\"middle\" font-size=\"10\">" << escape(panel.groups[g]) << "</text>\n";
  }
}

}  // namespace

std::string render_bar_panels(std::span<const BarPanel> panels, int columns, const std::string& title) {
  columns = std::max(columns, 1);
  const int rows = static_cast<int>((panels.size() + static_cast<std::size_t>(columns) - 1) / static_cast<std::size_t>(columns));
  const double width = kPanelWidth * columns;
  const double height = kHeader + kPanelHeight * std::max(rows, 1);

  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width) << "\" height=\"" << num(height)
      << "\" viewBox=\"0 0 " << num(width) << " " << num(height) << "\" font-family=\"sans-serif\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"#fff\"/>\n";
  out << "<text x=\"" << num(width / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"16\">" << escape(title)
      << "</text>\n";

  // Legend from the first panel's series names.
  if (!panels.empty()) {
    double lx = 20.0;
    for (std::size_t s = 0; s < panels.front().series.size(); ++s) {
      out << "<rect x=\"" << num(lx) << "\" y=\"34\" width=\"12\" height=\"12\" fill=\""
          << kPalette[s % kPalette.size()] << "\"/>\n";
      out << "<text x=\"" << num(lx + 16) << "\" y=\"44\" font-size=\"11\">"
          << escape(panels.front().series[s].name) << "</text>\n";
      lx += 90.0;
    }
  }

  for (std::size_t i = 0; i < panels.size(); ++i) {
    const double x0 = kPanelWidth * static_cast<double>(i % static_cast<std::size_t>(columns));
    const double y0 = kHeader + kPanelHeight * static_cast<double>(i / static_cast<std::size_t>(columns));
    render_panel(out, panels[i], x0, y0);
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace rtmatch
