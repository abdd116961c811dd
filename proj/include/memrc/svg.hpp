#pragma once

// Static line/scatter charts. Output bytes depend only on the input values.

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "memrc/common.hpp"

namespace memrc::harness {

struct Series {
  enum class Style { Line, Scatter };
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  Style style = Style::Line;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  int width = 640;
  int height = 420;
};

namespace detail {

inline std::string xml_escape(std::string_view s) {
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

/// Tick step from {1, 2, 5} x 10^k giving about `target` intervals.
inline double nice_step(double span, int target) {
  const double raw = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0, 10.0})
    if (m * mag >= raw) return m * mag;
  return 10.0 * mag;
}

inline std::string tick_label(double v, double step) {
  if (v == 0.0) return "0";
  const double a = std::abs(v);
  if (a >= 1e5 || a < 1e-3) return fmt::format("{:.2e}", v);
  const int decimals = std::max(0, static_cast<int>(-std::floor(std::log10(step))));
  return fmt::format("{:.{}f}", v, decimals);
}

inline std::string coord(double v) { return fmt::format("{:.2f}", v); }

constexpr std::array<const char*, 8> kPalette{"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                             "#9467bd", "#8c564b", "#e377c2", "#17becf"};

}  // namespace detail

inline std::string render_svg(std::span<const Series> series, const PlotSpec& spec) {
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  std::size_t points = 0;
  for (const auto& s : series) {
    if (s.x.size() != s.y.size()) throw InputError("series '" + s.label + "' has mismatched x/y lengths");
    for (std::size_t k = 0; k < s.x.size(); ++k) {
      if (!std::isfinite(s.x[k]) || !std::isfinite(s.y[k])) continue;
      x0 = std::min(x0, s.x[k]);
      x1 = std::max(x1, s.x[k]);
      y0 = std::min(y0, s.y[k]);
      y1 = std::max(y1, s.y[k]);
      ++points;
    }
  }
  if (points == 0) throw InputError("nothing to plot: table is empty");
  if (x1 == x0) x0 -= 0.5, x1 += 0.5;
  if (y1 == y0) y0 -= 0.5 * std::max(1.0, std::abs(y0)), y1 += 0.5 * std::max(1.0, std::abs(y1));
  const double xs = detail::nice_step(x1 - x0, 6), ys = detail::nice_step(y1 - y0, 5);
  x0 = std::floor(x0 / xs) * xs;
  x1 = std::ceil(x1 / xs) * xs;
  y0 = std::floor(y0 / ys) * ys;
  y1 = std::ceil(y1 / ys) * ys;

  const double left = 80, right = 150, top = 40, bottom = 55;
  const double pw = spec.width - left - right, ph = spec.height - top - bottom;
  auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * pw; };
  auto py = [&](double y) { return top + ph - (y - y0) / (y1 - y0) * ph; };
  using detail::coord;

  std::string o;
  o += fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\" "
      "font-family=\"sans-serif\" font-size=\"12\">\n",
      spec.width, spec.height, spec.width, spec.height);
  o += fmt::format("<rect x=\"0\" y=\"0\" width=\"{}\" height=\"{}\" fill=\"white\"/>\n", spec.width, spec.height);
  o += fmt::format("<text x=\"{}\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">{}</text>\n",
                   coord(left + pw / 2), detail::xml_escape(spec.title));
  // Grid and ticks.
  auto tick = [](double origin, double step, int i) {
    const double t = origin + i * step;
    return std::abs(t) < 1e-9 * step ? 0.0 : t;
  };
  const int nx = static_cast<int>(std::lround((x1 - x0) / xs)), ny = static_cast<int>(std::lround((y1 - y0) / ys));
  for (int i = 0; i <= nx; ++i) {
    const double t = tick(x0, xs, i);
    const double tx = px(t);
    o += fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"#e0e0e0\"/>\n", coord(tx), coord(top),
                     coord(top + ph));
    o += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", coord(tx), coord(top + ph + 16),
                     detail::tick_label(t, xs));
  }
  for (int i = 0; i <= ny; ++i) {
    const double t = tick(y0, ys, i);
    const double ty = py(t);
    o += fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"#e0e0e0\"/>\n", coord(left), coord(ty),
                     coord(left + pw));
    o += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>\n", coord(left - 6), coord(ty + 4),
                     detail::tick_label(t, ys));
  }
  o += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n",
                   coord(left), coord(top), coord(pw), coord(ph));
  o += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", coord(left + pw / 2),
                   coord(spec.height - 12.0), detail::xml_escape(spec.x_label));
  o += fmt::format("<text x=\"16\" y=\"{0}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {0})\">{1}</text>\n",
                   coord(top + ph / 2), detail::xml_escape(spec.y_label));

  for (std::size_t si = 0; si < series.size(); ++si) {
    const auto& s = series[si];
    const char* color = detail::kPalette[si % detail::kPalette.size()];
    if (s.style == Series::Style::Line) {
      std::string pts;
      for (std::size_t k = 0; k < s.x.size(); ++k) {
        if (!std::isfinite(s.x[k]) || !std::isfinite(s.y[k])) continue;
        if (!pts.empty()) pts += ' ';
        pts += coord(px(s.x[k])) + "," + coord(py(s.y[k]));
      }
      if (!pts.empty())
        o += fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"{}\"/>\n", color, pts);
    } else {
      o += fmt::format("<g fill=\"{}\" fill-opacity=\"0.6\">\n", color);
      for (std::size_t k = 0; k < s.x.size(); ++k) {
        if (!std::isfinite(s.x[k]) || !std::isfinite(s.y[k])) continue;
        o += fmt::format("<circle cx=\"{}\" cy=\"{}\" r=\"1.8\"/>\n", coord(px(s.x[k])), coord(py(s.y[k])));
      }
      o += "</g>\n";
    }
    const double ly = top + 10 + 18.0 * static_cast<double>(si);
    const double lx = left + pw + 12;
    o += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"14\" height=\"4\" fill=\"{}\"/>\n", coord(lx), coord(ly - 2), color);
    o += fmt::format("<text x=\"{}\" y=\"{}\">{}</text>\n", coord(lx + 20), coord(ly + 4), detail::xml_escape(s.label));
  }
  o += "</svg>\n";
  return o;
}

inline void emit_svg(const std::filesystem::path& path, std::span<const Series> series, const PlotSpec& spec) {
  write_file_atomic(path, render_svg(series, spec));
}

/// Chart of `y_columns` against `x_column` from a CSV table.
inline std::string render_table_svg(const CsvTable& table, const std::string& x_column,
                                    const std::vector<std::string>& y_columns, const PlotSpec& spec,
                                    Series::Style style = Series::Style::Line) {
  if (table.rows.empty()) throw InputError("nothing to plot: table has no rows");
  const auto x = table.numeric(x_column);
  std::vector<Series> series;
  for (const auto& c : y_columns) series.push_back({c, x, table.numeric(c), style});
  return render_svg(series, spec);
}

}  // namespace memrc::harness
