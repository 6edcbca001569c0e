#include "pathdepth/svg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace pathdepth::svg {

namespace {

constexpr double kWidth = 720.0;
constexpr double kHeight = 440.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 180.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 60.0;

constexpr std::array<std::string_view, 8> kPalette = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                                     "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

struct Frame {
  double x0, x1, y0, y1;

  double px(double x) const { return kLeft + (x - x0) / (x1 - x0) * (kWidth - kLeft - kRight); }
  double py(double y) const { return kHeight - kBottom - (y - y0) / (y1 - y0) * (kHeight - kTop - kBottom); }
};

Frame padded(double x0, double x1, double y0, double y1) {
  if (!(x1 > x0)) x1 = x0 + 1.0;
  if (!(y1 > y0)) {
    y0 -= 0.5;
    y1 += 0.5;
  }
  return {x0, x1, y0, y1};
}

void header(std::ostringstream& out, const std::string& title) {
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
      << "font-size=\"15\">" << escape(title) << "</text>\n";
}

void axes(std::ostringstream& out, const Frame& f, const std::string& x_label, const std::string& y_label) {
  const double left = kLeft;
  const double right = kWidth - kRight;
  const double top = kTop;
  const double bottom = kHeight - kBottom;
  out << "<g stroke=\"black\" stroke-width=\"1\" fill=\"none\">\n"
      << "<line x1=\"" << left << "\" y1=\"" << bottom << "\" x2=\"" << right << "\" y2=\"" << bottom << "\"/>\n"
      << "<line x1=\"" << left << "\" y1=\"" << bottom << "\" x2=\"" << left << "\" y2=\"" << top << "\"/>\n"
      << "</g>\n<g font-family=\"sans-serif\" font-size=\"11\">\n";
  for (int k = 0; k <= 5; ++k) {
    const double xv = f.x0 + (f.x1 - f.x0) * k / 5.0;
    const double yv = f.y0 + (f.y1 - f.y0) * k / 5.0;
    out << "<text x=\"" << num(f.px(xv)) << "\" y=\"" << bottom + 16 << "\" text-anchor=\"middle\">" << tick(xv)
        << "</text>\n"
        << "<text x=\"" << left - 6 << "\" y=\"" << num(f.py(yv) + 4) << "\" text-anchor=\"end\">" << tick(yv)
        << "</text>\n";
  }
  out << "<text x=\"" << (left + right) / 2 << "\" y=\"" << kHeight - 18 << "\" text-anchor=\"middle\">"
      << escape(x_label) << "</text>\n"
      << "<text x=\"16\" y=\"" << (top + bottom) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << (top + bottom) / 2 << ")\">" << escape(y_label) << "</text>\n"
      << "</g>\n";
}

}  // namespace

std::string escape(std::string_view text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string line_chart(const std::string& title, const std::string& x_label, const std::string& y_label,
                       const std::vector<Series>& series) {
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : series) {
    for (const auto& [x, y] : s.points) {
      x0 = std::min(x0, x);
      x1 = std::max(x1, x);
      y0 = std::min(y0, y);
      y1 = std::max(y1, y);
    }
  }
  if (!std::isfinite(x0)) x0 = x1 = y0 = y1 = 0.0;
  const Frame f = padded(x0, x1, y0, y1);

  std::ostringstream out;
  header(out, title);
  axes(out, f, x_label, y_label);
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto color = kPalette[i % kPalette.size()];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t k = 0; k < series[i].points.size(); ++k) {
      if (k) out << ' ';
      out << num(f.px(series[i].points[k].first)) << ',' << num(f.py(series[i].points[k].second));
    }
    out << "\"/>\n";
    const double ly = kTop + 14.0 + 18.0 * static_cast<double>(i);
    const double lx = kWidth - kRight + 12.0;
    out << "<line x1=\"" << lx << "\" y1=\"" << ly << "\" x2=\"" << lx + 20 << "\" y2=\"" << ly << "\" stroke=\""
        << color << "\" stroke-width=\"2\"/>\n"
        << "<text x=\"" << lx + 26 << "\" y=\"" << ly + 4 << "\" font-family=\"sans-serif\" font-size=\"11\">"
        << escape(series[i].label) << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

std::string bar_chart(const std::string& title, const std::string& x_label, const std::string& y_label,
                      const std::vector<double>& edges, const std::vector<std::size_t>& counts) {
  std::size_t peak = 0;
  for (auto c : counts) peak = std::max(peak, c);
  const Frame f = edges.size() >= 2 ? padded(edges.front(), edges.back(), 0.0, static_cast<double>(peak))
                                    : padded(0.0, 1.0, 0.0, 1.0);
  std::ostringstream out;
  header(out, title);
  axes(out, f, x_label, y_label);
  out << "<g fill=\"#1f77b4\" stroke=\"white\" stroke-width=\"0.5\">\n";
  for (std::size_t k = 0; k < counts.size() && k + 1 < edges.size(); ++k) {
    const double x = f.px(edges[k]);
    const double w = f.px(edges[k + 1]) - x;
    const double y = f.py(static_cast<double>(counts[k]));
    out << "<rect x=\"" << num(x) << "\" y=\"" << num(y) << "\" width=\"" << num(w) << "\" height=\""
        << num(f.py(0.0) - y) << "\"/>\n";
  }
  out << "</g>\n</svg>\n";
  return out.str();
}

}  // namespace pathdepth::svg
