#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "cnls/error.hpp"

namespace cnls {

enum class PlotKind { profile, branch, sweep };

inline const char* to_string(PlotKind k) {
  switch (k) {
    case PlotKind::profile: return "profile";
    case PlotKind::branch: return "branch";
    case PlotKind::sweep: return "sweep";
  }
  return "profile";
}

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

/// Horizontal reference line (the A level of a sweep, a branch threshold).
struct Reference {
  std::string name;
  double y = 0.0;
};

struct PlotOptions {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Reference> references;
  bool markers = false;  // draw a dot at every point (sweeps)
};

namespace plot_detail {

/// 1-2-5 tick step giving at most `target` intervals over [lo, hi].
inline double tick_step(double lo, double hi, int target = 6) {
  const double raw = (hi - lo) / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0, 10.0})
    if (m * mag >= raw) return m * mag;
  return 10.0 * mag;
}

inline std::string fmt(double v, const char* f = "%.6g") {
  char buf[40];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

inline std::string escape(const std::string& s) {
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

/// Axis range snapped outward to whole ticks; a flat range gets padded.
inline void nice_range(double& lo, double& hi) {
  if (hi - lo <= 1e-12 * std::max(1.0, std::abs(hi))) {
    const double pad = std::max(1.0, std::abs(hi)) * 0.5;
    lo -= pad;
    hi += pad;
  }
  const double step = tick_step(lo, hi);
  lo = std::floor(lo / step) * step;
  hi = std::ceil(hi / step) * step;
}

constexpr const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

}  // namespace plot_detail

/// Deterministic SVG line chart: 800x600 viewport, fixed margins, 1-2-5
/// ticks, values printed with 6 significant digits. Identical inputs give
/// identical bytes.
inline std::string emit_plot(const std::vector<Series>& series, PlotKind kind, const PlotOptions& opt = {}) {
  using namespace plot_detail;
  if (series.empty()) throw DomainError("emit_plot: empty series list");
  double xlo = INFINITY, xhi = -INFINITY, ylo = INFINITY, yhi = -INFINITY;
  for (const auto& s : series) {
    if (s.x.empty() || s.x.size() != s.y.size())
      throw DomainError("emit_plot: series '" + s.name + "' is empty or ragged");
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i]))
        throw DomainError("emit_plot: series '" + s.name + "' has non-finite values");
      xlo = std::min(xlo, s.x[i]);
      xhi = std::max(xhi, s.x[i]);
      ylo = std::min(ylo, s.y[i]);
      yhi = std::max(yhi, s.y[i]);
    }
  }
  for (const auto& r : opt.references) {
    if (!std::isfinite(r.y)) throw DomainError("emit_plot: reference '" + r.name + "' is not finite");
    ylo = std::min(ylo, r.y);
    yhi = std::max(yhi, r.y);
  }
  nice_range(xlo, xhi);
  nice_range(ylo, yhi);

  const double left = 90, right = 770, top = 60, bottom = 530;
  auto px = [&](double x) { return left + (x - xlo) / (xhi - xlo) * (right - left); };
  auto py = [&](double y) { return bottom - (y - ylo) / (yhi - ylo) * (bottom - top); };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"600\" viewBox=\"0 0 800 600\" "
         "data-kind=\"" + std::string(to_string(kind)) + "\">\n";
  svg += "<rect x=\"0\" y=\"0\" width=\"800\" height=\"600\" fill=\"white\"/>\n";
  if (!opt.title.empty())
    svg += "<text x=\"400\" y=\"30\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"18\">" +
           escape(opt.title) + "</text>\n";
  svg += "<rect x=\"90\" y=\"60\" width=\"680\" height=\"470\" fill=\"none\" stroke=\"black\"/>\n";

  const double xs = tick_step(xlo, xhi), ys = tick_step(ylo, yhi);
  for (int i = 0;; ++i) {
    const double x = xlo + i * xs;
    if (x > xhi + 1e-9 * xs) break;
    const double snapped = std::abs(x) < 1e-12 * xs ? 0.0 : x;
    svg += "<line x1=\"" + fmt(px(x), "%.2f") + "\" y1=\"530\" x2=\"" + fmt(px(x), "%.2f") +
           "\" y2=\"536\" stroke=\"black\"/>\n";
    svg += "<text x=\"" + fmt(px(x), "%.2f") +
           "\" y=\"552\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" +
           fmt(snapped) + "</text>\n";
  }
  for (int i = 0;; ++i) {
    const double y = ylo + i * ys;
    if (y > yhi + 1e-9 * ys) break;
    const double snapped = std::abs(y) < 1e-12 * ys ? 0.0 : y;
    svg += "<line x1=\"84\" y1=\"" + fmt(py(y), "%.2f") + "\" x2=\"90\" y2=\"" + fmt(py(y), "%.2f") +
           "\" stroke=\"black\"/>\n";
    svg += "<text x=\"80\" y=\"" + fmt(py(y) + 4.0, "%.2f") +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\">" + fmt(snapped) +
           "</text>\n";
  }
  if (!opt.x_label.empty())
    svg += "<text x=\"430\" y=\"580\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">" +
           escape(opt.x_label) + "</text>\n";
  if (!opt.y_label.empty())
    svg += "<text x=\"22\" y=\"295\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\" "
           "transform=\"rotate(-90 22 295)\">" + escape(opt.y_label) + "</text>\n";

  for (const auto& r : opt.references) {
    svg += "<line x1=\"90\" y1=\"" + fmt(py(r.y), "%.2f") + "\" x2=\"770\" y2=\"" + fmt(py(r.y), "%.2f") +
           "\" stroke=\"gray\" stroke-dasharray=\"6 4\"/>\n";
    svg += "<text x=\"766\" y=\"" + fmt(py(r.y) - 5.0, "%.2f") +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\" fill=\"gray\">" +
           escape(r.name) + "</text>\n";
  }
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* color = kColors[k % std::size(kColors)];
    svg += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i)
      svg += (i ? " " : "") + fmt(px(s.x[i]), "%.2f") + "," + fmt(py(s.y[i]), "%.2f");
    svg += "\"/>\n";
    if (opt.markers)
      for (std::size_t i = 0; i < s.x.size(); ++i)
        svg += "<circle cx=\"" + fmt(px(s.x[i]), "%.2f") + "\" cy=\"" + fmt(py(s.y[i]), "%.2f") +
               "\" r=\"3\" fill=\"" + color + "\"/>\n";
    const double ly = 80.0 + 18.0 * static_cast<double>(k);
    svg += "<line x1=\"600\" y1=\"" + fmt(ly, "%.2f") + "\" x2=\"625\" y2=\"" + fmt(ly, "%.2f") +
           "\" stroke=\"" + color + "\" stroke-width=\"1.5\"/>\n";
    svg += "<text x=\"630\" y=\"" + fmt(ly + 4.0, "%.2f") + "\" font-family=\"sans-serif\" font-size=\"12\">" +
           escape(s.name) + "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace cnls
