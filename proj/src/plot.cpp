#include "smmc/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "smmc/error.hpp"

namespace smmc {
namespace {

constexpr const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

// Index pairs (first, last) of each pixel column.
std::vector<std::pair<std::size_t, std::size_t>> buckets(std::size_t n, std::size_t columns) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  if (n <= columns) {
    for (std::size_t i = 0; i < n; ++i) out.emplace_back(i, i + 1);
    return out;
  }
  for (std::size_t c = 0; c < columns; ++c) {
    out.emplace_back(c * n / columns, (c + 1) * n / columns);
  }
  return out;
}

}  // namespace

std::string render_svg(const PlotSpec& spec, std::span<const double> x,
                       std::span<const PlotSeries> series) {
  const double left = 70, right = 20, top = 36, bottom = 48;
  const double pw = spec.width - left - right;
  const double ph = spec.height - top - bottom;

  double x0 = x.empty() ? 0.0 : x.front();
  double x1 = x.empty() ? 1.0 : x.back();
  if (x1 <= x0) x1 = x0 + 1.0;
  double y0 = std::numeric_limits<double>::infinity();
  double y1 = -y0;
  for (const auto& s : series) {
    for (double v : s.y) {
      if (!std::isfinite(v)) continue;
      y0 = std::min(y0, v);
      y1 = std::max(y1, v);
    }
  }
  if (!std::isfinite(y0)) y0 = -1.0, y1 = 1.0;
  if (y1 - y0 < 1e-12) y0 -= 1.0, y1 += 1.0;
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad;
  y1 += pad;

  auto px = [&](double v) { return left + (v - x0) / (x1 - x0) * pw; };
  auto py = [&](double v) { return top + (y1 - v) / (y1 - y0) * ph; };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << spec.width << "\" height=\""
    << spec.height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << spec.width / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">"
    << escape(spec.title) << "</text>\n";

  for (int k = 0; k <= 5; ++k) {
    const double xv = x0 + (x1 - x0) * k / 5.0;
    const double yv = y0 + (y1 - y0) * k / 5.0;
    o << "<line x1=\"" << px(xv) << "\" y1=\"" << top << "\" x2=\"" << px(xv) << "\" y2=\""
      << top + ph << "\" stroke=\"#eee\"/>\n";
    o << "<line x1=\"" << left << "\" y1=\"" << py(yv) << "\" x2=\"" << left + pw << "\" y2=\""
      << py(yv) << "\" stroke=\"#eee\"/>\n";
    o << "<text x=\"" << px(xv) << "\" y=\"" << top + ph + 16 << "\" text-anchor=\"middle\">"
      << fmt(xv) << "</text>\n";
    o << "<text x=\"" << left - 6 << "\" y=\"" << py(yv) + 4 << "\" text-anchor=\"end\">"
      << fmt(yv) << "</text>\n";
  }
  o << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  o << "<text x=\"" << left + pw / 2 << "\" y=\"" << spec.height - 10
    << "\" text-anchor=\"middle\">" << escape(spec.x_label) << "</text>\n";
  o << "<text transform=\"translate(16," << top + ph / 2
    << ") rotate(-90)\" text-anchor=\"middle\">" << escape(spec.y_label) << "</text>\n";

  const std::size_t n = x.size();
  const auto cols = buckets(n, spec.max_columns);
  for (std::size_t si = 0; si < series.size(); ++si) {
    const auto& s = series[si];
    const char* color = kColors[si % std::size(kColors)];
    o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1\" points=\"";
    for (const auto& [first, last] : cols) {
      const std::size_t end = std::min(last, s.y.size());
      if (first >= end) continue;
      // Keep the extremes of each column so chattering stays visible.
      std::size_t lo = first, hi = first;
      for (std::size_t i = first; i < end; ++i) {
        if (s.y[i] < s.y[lo]) lo = i;
        if (s.y[i] > s.y[hi]) hi = i;
      }
      const std::size_t a = std::min(lo, hi), b = std::max(lo, hi);
      o << fmt(px(x[a])) << ',' << fmt(py(s.y[a])) << ' ';
      if (b != a) o << fmt(px(x[b])) << ',' << fmt(py(s.y[b])) << ' ';
    }
    o << "\"/>\n";
    o << "<text x=\"" << left + 8 << "\" y=\"" << top + 16 + 14 * si << "\" fill=\"" << color
      << "\">" << escape(s.label) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

void write_svg(const std::string& path, const PlotSpec& spec, std::span<const double> x,
               std::span<const PlotSeries> series) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::kIoError, "cannot write " + path);
  out << render_svg(spec, x, series);
  if (!out) throw Error(ErrorKind::kIoError, "write failed: " + path);
}

}  // namespace smmc
