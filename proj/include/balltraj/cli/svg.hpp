#pragma once

// Minimal SVG plots: trajectory overlays on the pitch and score series.

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "balltraj/data/types.hpp"

namespace balltraj::cli {

struct Series {
  std::string label;
  std::string colour;
  data::MatrixD points;  // [T, 2]
};

namespace detail {

inline std::string polyline(const data::MatrixD& pts, double sx, double sy, double ox, double oy, double height,
                            const std::string& colour, double width) {
  std::ostringstream os;
  os << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"" << width << "\" points=\"";
  for (Eigen::Index t = 0; t < pts.rows(); ++t) {
    if (!std::isfinite(pts(t, 0)) || !std::isfinite(pts(t, 1))) continue;
    os << ox + pts(t, 0) * sx << ',' << height - (oy + pts(t, 1) * sy) << ' ';
  }
  os << "\"/>\n";
  return os.str();
}

inline void write_file(const std::string& path, const std::string& body) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  out << body;
}

}  // namespace detail

// Ball trajectories drawn over the pitch outline, y pointing up.
inline std::string trajectory_svg(const std::vector<Series>& series, const data::PitchConfig& pitch,
                                  const std::string& title = {}) {
  const double scale = 8.0, margin = 20.0;
  const double w = pitch.length * scale + 2 * margin, h = pitch.width * scale + 2 * margin + 20.0;
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\">\n";
  os << "<rect x=\"0\" y=\"0\" width=\"" << w << "\" height=\"" << h << "\" fill=\"#2e7d32\"/>\n";
  os << "<rect x=\"" << margin << "\" y=\"" << margin + 20.0 << "\" width=\"" << pitch.length * scale
     << "\" height=\"" << pitch.width * scale << "\" fill=\"none\" stroke=\"white\"/>\n";
  os << "<line x1=\"" << margin + pitch.length * scale / 2 << "\" y1=\"" << margin + 20.0 << "\" x2=\""
     << margin + pitch.length * scale / 2 << "\" y2=\"" << margin + 20.0 + pitch.width * scale
     << "\" stroke=\"white\"/>\n";
  if (!title.empty()) os << "<text x=\"" << margin << "\" y=\"16\" fill=\"white\" font-size=\"14\">" << title << "</text>\n";
  double lx = margin + 200.0;
  for (const auto& s : series) {
    os << detail::polyline(s.points, scale, scale, margin, margin, h, s.colour, 2.0);
    os << "<text x=\"" << lx << "\" y=\"16\" fill=\"" << s.colour << "\" font-size=\"14\">" << s.label << "</text>\n";
    lx += 120.0;
  }
  os << "</svg>\n";
  return os.str();
}

// Score series over time with horizontal threshold lines.
inline std::string score_svg(const std::vector<double>& values, double dt, const std::vector<double>& thresholds,
                             const std::string& title = {}) {
  const double w = 800.0, h = 240.0, margin = 30.0;
  const double duration = std::max(dt * static_cast<double>(values.size()), dt);
  double top = 1.0;
  for (double v : values) top = std::max(top, v);
  const double sx = (w - 2 * margin) / duration, sy = (h - 2 * margin) / top;
  data::MatrixD pts(static_cast<Eigen::Index>(values.size()), 2);
  for (std::size_t t = 0; t < values.size(); ++t) pts.row(static_cast<Eigen::Index>(t)) << dt * static_cast<double>(t), values[t];
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\">\n";
  os << "<rect x=\"0\" y=\"0\" width=\"" << w << "\" height=\"" << h << "\" fill=\"white\"/>\n";
  if (!title.empty()) os << "<text x=\"" << margin << "\" y=\"18\" font-size=\"14\">" << title << "</text>\n";
  for (double th : thresholds) {
    const double y = h - (margin + th * sy);
    os << "<line x1=\"" << margin << "\" y1=\"" << y << "\" x2=\"" << w - margin << "\" y2=\"" << y
       << "\" stroke=\"grey\" stroke-dasharray=\"4 3\"/>\n";
  }
  os << detail::polyline(pts, sx, sy, margin, margin, h, "#1565c0", 1.5);
  os << "</svg>\n";
  return os.str();
}

inline void save_svg(const std::string& path, const std::string& svg) { detail::write_file(path, svg); }

}  // namespace balltraj::cli
