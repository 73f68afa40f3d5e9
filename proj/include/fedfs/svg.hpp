#pragma once

// Minimal standalone SVG charts for experiment output.

#include <algorithm>
#include <cstddef>
#include <cstdio>
#include <span>
#include <sstream>
#include <string>

namespace fedfs::svg {

namespace detail {

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

constexpr double kWidth = 800;
constexpr double kHeight = 400;
constexpr double kLeft = 60;
constexpr double kRight = 20;
constexpr double kTop = 30;
constexpr double kBottom = 50;

inline void open(std::ostringstream& out, const std::string& title, const std::string& x_label,
                 const std::string& y_label) {
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << kWidth / 2 << "\" y=\"18\" text-anchor=\"middle\" font-size=\"14\">" << title
      << "</text>\n"
      << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight - 10 << "\" text-anchor=\"middle\">"
      << x_label << "</text>\n"
      << "<text x=\"15\" y=\"" << kHeight / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 15 "
      << kHeight / 2 << ")\">" << y_label << "</text>\n"
      << "<line x1=\"" << kLeft << "\" y1=\"" << kHeight - kBottom << "\" x2=\"" << kWidth - kRight
      << "\" y2=\"" << kHeight - kBottom << "\" stroke=\"black\"/>\n"
      << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\""
      << kHeight - kBottom << "\" stroke=\"black\"/>\n";
}

inline void y_tick(std::ostringstream& out, double y, const std::string& label) {
  out << "<text x=\"" << kLeft - 6 << "\" y=\"" << num(y + 4) << "\" text-anchor=\"end\">" << label
      << "</text>\n";
}

}  // namespace detail

/// One bar per feature with a dashed horizontal line at `threshold`.
inline std::string probability_bars(std::span<const double> probs, double threshold,
                                    const std::string& title) {
  using namespace detail;
  std::ostringstream out;
  open(out, title, "feature index", "selection probability");
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  const double bar_w = plot_w / static_cast<double>(std::max<std::size_t>(probs.size(), 1));
  auto y_of = [&](double p) { return kTop + (1.0 - p) * plot_h; };
  for (double t : {0.0, 0.5, 1.0}) y_tick(out, y_of(t), num(t));
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const bool above = probs[i] > threshold;
    out << "<rect x=\"" << num(kLeft + bar_w * static_cast<double>(i)) << "\" y=\"" << num(y_of(probs[i]))
        << "\" width=\"" << num(std::max(bar_w * 0.8, 0.5)) << "\" height=\""
        << num(probs[i] * plot_h) << "\" fill=\"" << (above ? "#c0392b" : "#5d7fa3") << "\"/>\n";
  }
  out << "<line x1=\"" << kLeft << "\" y1=\"" << num(y_of(threshold)) << "\" x2=\"" << kWidth - kRight
      << "\" y2=\"" << num(y_of(threshold)) << "\" stroke=\"black\" stroke-dasharray=\"6,4\"/>\n"
      << "<text x=\"" << kWidth - kRight << "\" y=\"" << num(y_of(threshold) - 4)
      << "\" text-anchor=\"end\">threshold " << num(threshold) << "</text>\n"
      << "</svg>\n";
  return out.str();
}

/// Polyline of a count against a 1-based round index.
inline std::string count_curve(std::span<const std::size_t> counts, const std::string& title,
                               const std::string& y_label) {
  using namespace detail;
  std::ostringstream out;
  open(out, title, "communication round", y_label);
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  std::size_t top = 1;
  for (auto c : counts) top = std::max(top, c);
  const double n = static_cast<double>(std::max<std::size_t>(counts.size(), 2) - 1);
  auto x_of = [&](std::size_t i) { return kLeft + plot_w * static_cast<double>(i) / n; };
  auto y_of = [&](double c) { return kTop + (1.0 - c / static_cast<double>(top)) * plot_h; };
  y_tick(out, y_of(0), "0");
  y_tick(out, y_of(static_cast<double>(top)), std::to_string(top));
  out << "<polyline fill=\"none\" stroke=\"#c0392b\" stroke-width=\"2\" points=\"";
  for (std::size_t i = 0; i < counts.size(); ++i)
    out << num(x_of(i)) << ',' << num(y_of(static_cast<double>(counts[i]))) << ' ';
  out << "\"/>\n</svg>\n";
  return out.str();
}

}  // namespace fedfs::svg
