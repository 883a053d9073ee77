#include "setprice/plot.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace setprice {

std::vector<Eigen::Vector2d> clip_polygon(const Polyhedron& poly, const Eigen::Vector2d& lo,
                                          const Eigen::Vector2d& hi) {
  if (poly.is_empty() || poly.dim() != 2) return {};
  Polyhedron full = poly.has_hrep() ? poly : dd_convert(poly);
  std::vector<Halfspace> hs = full.halfspaces();
  hs.push_back({Eigen::Vector2d(1, 0), lo.x()});
  hs.push_back({Eigen::Vector2d(0, 1), lo.y()});
  hs.push_back({Eigen::Vector2d(-1, 0), -hi.x()});
  hs.push_back({Eigen::Vector2d(0, -1), -hi.y()});
  const Polyhedron box = dd_convert(Polyhedron::from_halfspaces(2, std::move(hs)));
  if (box.is_empty()) return {};
  std::vector<Eigen::Vector2d> pts;
  for (const auto& v : box.vertices()) pts.emplace_back(v[0], v[1]);
  if (pts.empty()) return pts;
  Eigen::Vector2d c = Eigen::Vector2d::Zero();
  for (const auto& p : pts) c += p;
  c /= static_cast<double>(pts.size());
  std::sort(pts.begin(), pts.end(), [&](const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
    return std::atan2(a.y() - c.y(), a.x() - c.x()) < std::atan2(b.y() - c.y(), b.x() - c.x());
  });
  return pts;
}

namespace {

struct Frame {
  Eigen::Vector2d lo, hi;
  int width, height;
  double margin = 48;

  double sx(double x) const { return margin + (x - lo.x()) / (hi.x() - lo.x()) * (width - 2 * margin); }
  double sy(double y) const { return height - margin - (y - lo.y()) / (hi.y() - lo.y()) * (height - 2 * margin); }
};

Frame make_frame(const std::vector<Eigen::Vector2d>& anchors, const PlotOptions& o) {
  Frame f{Eigen::Vector2d(-1, -1), Eigen::Vector2d(1, 1), o.width, o.height};
  if (!anchors.empty()) {
    f.lo = f.hi = anchors.front();
    for (const auto& a : anchors) {
      f.lo = f.lo.cwiseMin(a);
      f.hi = f.hi.cwiseMax(a);
    }
  }
  Eigen::Vector2d span = f.hi - f.lo;
  const double scale = std::max(span.maxCoeff(), 1e-3);
  for (int i = 0; i < 2; ++i) {
    const double pad = o.padding * std::max(span[i], 0.25 * scale);
    f.lo[i] -= pad;
    f.hi[i] += pad;
  }
  return f;
}

void axes(std::ostringstream& out, const Frame& f, const PlotOptions& o) {
  out << "<rect x=\"" << f.margin << "\" y=\"" << f.margin << "\" width=\"" << f.width - 2 * f.margin
      << "\" height=\"" << f.height - 2 * f.margin << "\" fill=\"none\" stroke=\"#333\"/>\n";
  out << "<text x=\"" << f.width / 2 << "\" y=\"" << f.height - 12 << "\" text-anchor=\"middle\">" << o.x_label
      << "</text>\n";
  out << "<text x=\"14\" y=\"" << f.height / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 14 "
      << f.height / 2 << ")\">" << o.y_label << "</text>\n";
  out.precision(4);
  out << "<text x=\"" << f.margin << "\" y=\"" << f.height - f.margin + 16 << "\" font-size=\"10\">" << f.lo.x()
      << "</text>\n";
  out << "<text x=\"" << f.width - f.margin << "\" y=\"" << f.height - f.margin + 16
      << "\" font-size=\"10\" text-anchor=\"end\">" << f.hi.x() << "</text>\n";
  out << "<text x=\"" << f.margin - 4 << "\" y=\"" << f.height - f.margin
      << "\" font-size=\"10\" text-anchor=\"end\">" << f.lo.y() << "</text>\n";
  out << "<text x=\"" << f.margin - 4 << "\" y=\"" << f.margin + 10 << "\" font-size=\"10\" text-anchor=\"end\">"
      << f.hi.y() << "</text>\n";
  out.precision(10);
}

std::string header(const PlotOptions& o) {
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << o.width << "\" height=\"" << o.height
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  return out.str();
}

void polygon(std::ostringstream& out, const Frame& f, const std::vector<Eigen::Vector2d>& pts,
             const std::string& fill, double opacity) {
  if (pts.empty()) return;
  out << "<polygon points=\"";
  for (const auto& p : pts) out << f.sx(p.x()) << ',' << f.sy(p.y()) << ' ';
  out << "\" fill=\"" << fill << "\" fill-opacity=\"" << opacity << "\" stroke=\"" << fill << "\"/>\n";
}

std::vector<Eigen::Vector2d> anchors_of(const Polyhedron& p) {
  std::vector<Eigen::Vector2d> out;
  if (p.is_empty() || p.dim() != 2) return out;
  const Polyhedron full = p.has_vrep() ? p : dd_convert(p);
  for (const auto& v : full.vertices()) out.emplace_back(v[0], v[1]);
  return out;
}

}  // namespace

std::string regions_svg(const std::vector<PlotRegion>& regions, const std::vector<PlotMarker>& markers,
                        const PlotOptions& options) {
  std::vector<Eigen::Vector2d> anchors;
  for (const auto& r : regions) {
    auto a = anchors_of(r.poly);
    anchors.insert(anchors.end(), a.begin(), a.end());
  }
  for (const auto& m : markers) anchors.push_back(m.at);
  const Frame f = make_frame(anchors, options);

  std::ostringstream out;
  out.precision(10);
  out << header(options);
  axes(out, f, options);
  double legend_y = f.margin + 16;
  for (const auto& r : regions) {
    polygon(out, f, clip_polygon(r.poly, f.lo, f.hi), r.fill, r.opacity);
    if (!r.label.empty()) {
      out << "<rect x=\"" << f.width - f.margin - 110 << "\" y=\"" << legend_y - 10
          << "\" width=\"10\" height=\"10\" fill=\"" << r.fill << "\"/>\n";
      out << "<text x=\"" << f.width - f.margin - 96 << "\" y=\"" << legend_y << "\">" << r.label << "</text>\n";
      legend_y += 16;
    }
  }
  for (const auto& m : markers) {
    out << "<circle cx=\"" << f.sx(m.at.x()) << "\" cy=\"" << f.sy(m.at.y()) << "\" r=\"3\" fill=\"#000\"/>\n";
    if (!m.label.empty())
      out << "<text x=\"" << f.sx(m.at.x()) + 5 << "\" y=\"" << f.sy(m.at.y()) - 5 << "\">" << m.label
          << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

std::string frontier_svg(const EpsilonSolution& solution, const PlotOptions& options) {
  std::vector<PlotRegion> regions;
  if (!solution.outer.is_empty() && solution.outer.dim() == 2)
    regions.push_back({solution.outer, "outer", "#d9822b", 0.25});
  if (!solution.inner.is_empty() && solution.inner.dim() == 2)
    regions.push_back({solution.inner, "inner", "#4a7ab5", 0.4});
  std::vector<PlotMarker> markers;
  for (const auto& p : solution.points)
    if (p.image.size() == 2 && p.image.allFinite()) markers.push_back({Eigen::Vector2d(p.image[0], p.image[1]), ""});
  return regions_svg(regions, markers, options);
}

}  // namespace setprice
