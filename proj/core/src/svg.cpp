#include "rnnode/svg.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "rnnode/errors.hpp"

namespace rnnode {
namespace {

std::string escape_xml(const std::string& text) {
  std::string out;
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

}  // namespace

std::array<double, 2> TernaryFrame::vertex(int index) const {
  const double side = size - 2.0 * margin;
  const double height = side * std::sqrt(3.0) / 2.0;
  const double base = margin + (size - 2.0 * margin + height) / 2.0;  // vertically centred
  switch (index) {
    case 0: return {margin, base};
    case 1: return {margin + side, base};
    default: return {margin + side / 2.0, base - height};
  }
}

std::array<double, 2> TernaryFrame::project(const Vector& y) const {
  if (y.size() != 3) throw DimensionError("ternary projection needs exactly three components");
  std::array<double, 2> p{0.0, 0.0};
  for (int i = 0; i < 3; ++i) {
    const auto v = vertex(i);
    p[0] += y(i) * v[0];
    p[1] += y(i) * v[1];
  }
  return p;
}

std::string ternary_svg(const std::vector<TernaryPath>& paths, const std::string& title, const TernaryFrame& frame) {
  std::ostringstream svg;
  svg << std::fixed << std::setprecision(3);
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << frame.size << "\" height=\"" << frame.size
      << "\" viewBox=\"0 0 " << frame.size << ' ' << frame.size << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!title.empty()) {
    svg << "<text x=\"" << frame.size / 2.0 << "\" y=\"20\" text-anchor=\"middle\" font-family=\"sans-serif\" "
        << "font-size=\"14\">" << escape_xml(title) << "</text>\n";
  }
  const auto v0 = frame.vertex(0);
  const auto v1 = frame.vertex(1);
  const auto v2 = frame.vertex(2);
  svg << "<polygon class=\"simplex\" points=\"" << v0[0] << ',' << v0[1] << ' ' << v1[0] << ',' << v1[1] << ' '
      << v2[0] << ',' << v2[1] << "\" fill=\"none\" stroke=\"black\" stroke-width=\"1.5\"/>\n";
  const std::array<std::array<double, 2>, 3> label_offsets{{{-14.0, 16.0}, {14.0, 16.0}, {0.0, -10.0}}};
  for (int i = 0; i < 3; ++i) {
    const auto v = frame.vertex(i);
    svg << "<text class=\"vertex-label\" x=\"" << v[0] + label_offsets[i][0] << "\" y=\""
        << v[1] + label_offsets[i][1] << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">"
        << i + 1 << "</text>\n";
  }
  for (const auto& path : paths) {
    if (path.points.empty()) continue;
    svg << "<polyline class=\"trajectory\" fill=\"none\" stroke=\"" << escape_xml(path.color)
        << "\" stroke-width=\"1.2\" points=\"";
    for (std::size_t k = 0; k < path.points.size(); ++k) {
      const auto p = frame.project(path.points[k]);
      svg << (k ? " " : "") << p[0] << ',' << p[1];
    }
    svg << "\"/>\n";
    const auto start = frame.project(path.points.front());
    svg << "<circle class=\"start\" cx=\"" << start[0] << "\" cy=\"" << start[1]
        << "\" r=\"4\" fill=\"black\"/>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

void write_ternary_svg(const std::vector<TernaryPath>& paths, const std::string& path, const std::string& title,
                       const TernaryFrame& frame) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot open '" + path + "' for writing");
  out << ternary_svg(paths, title, frame);
}

}  // namespace rnnode
