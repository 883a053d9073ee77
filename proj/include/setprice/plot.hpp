#pragma once

#include "setprice/cvop.hpp"
#include "setprice/polytope.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace setprice {

struct PlotRegion {
  Polyhedron poly;  // dimension 2
  std::string label;
  std::string fill = "#4a7ab5";
  double opacity = 0.35;
};

struct PlotMarker {
  Eigen::Vector2d at;
  std::string label;
};

struct PlotOptions {
  int width = 480;
  int height = 480;
  std::string x_label = "y0";
  std::string y_label = "y1";
  /// Fraction of the data extent added on every side; rays are drawn to the frame.
  double padding = 0.25;
};

/// SVG of planar regions, clipped to a frame around their vertices and the markers.
std::string regions_svg(const std::vector<PlotRegion>& regions, const std::vector<PlotMarker>& markers = {},
                        const PlotOptions& options = {});

/// SVG of the image points of a two-objective solution, its inner and outer sets.
std::string frontier_svg(const EpsilonSolution& solution, const PlotOptions& options = {});

/// Vertices of poly intersected with the box [lo, hi], counter-clockwise.
std::vector<Eigen::Vector2d> clip_polygon(const Polyhedron& poly, const Eigen::Vector2d& lo,
                                          const Eigen::Vector2d& hi);

}  // namespace setprice
