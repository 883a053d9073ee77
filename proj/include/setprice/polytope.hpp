#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace setprice {

/// {y : a.y >= b}
struct Halfspace {
  Eigen::VectorXd a;
  double b = 0.0;
};

inline constexpr double kGeomTol = 1e-9;

/// Convex polyhedron carrying an H-representation, a V-representation
/// (vertices plus recession rays; lines appear as a pair of opposite rays),
/// or both. Use dd_convert to fill in the missing side.
class Polyhedron {
 public:
  Polyhedron() = default;
  static Polyhedron from_halfspaces(int dim, std::vector<Halfspace> halfspaces);
  static Polyhedron from_generators(int dim, std::vector<Eigen::VectorXd> vertices,
                                    std::vector<Eigen::VectorXd> rays = {});
  static Polyhedron empty_set(int dim);
  /// Whole space R^dim.
  static Polyhedron whole_space(int dim);

  int dim() const { return dim_; }
  bool is_empty() const { return empty_; }
  bool has_hrep() const { return has_h_; }
  bool has_vrep() const { return has_v_; }
  const std::vector<Halfspace>& halfspaces() const { return halfspaces_; }
  const std::vector<Eigen::VectorXd>& vertices() const { return vertices_; }
  const std::vector<Eigen::VectorXd>& rays() const { return rays_; }

  /// Bounded iff no recession rays (requires V-rep).
  bool is_bounded() const;

  Polyhedron translated(const Eigen::VectorXd& shift) const;
  Polyhedron negated() const;
  Polyhedron scaled(double factor) const;

 private:
  friend Polyhedron dd_convert(const Polyhedron& poly, double tol);
  int dim_ = 0;
  bool empty_ = false;
  bool has_h_ = false;
  bool has_v_ = false;
  std::vector<Halfspace> halfspaces_;
  std::vector<Eigen::VectorXd> vertices_;
  std::vector<Eigen::VectorXd> rays_;
};

/// Returns a copy with both representations populated (double-description method).
Polyhedron dd_convert(const Polyhedron& poly, double tol = kGeomTol);

bool contains_point(const Polyhedron& poly, const Eigen::VectorXd& y, double tol = kGeomTol);
/// Whether B is a subset of A: every vertex of B satisfies A's halfspaces and
/// every ray of B lies in A's recession cone.
bool contains_poly(const Polyhedron& a, const Polyhedron& b, double tol = kGeomTol);
/// Mutual containment.
bool same_set(const Polyhedron& a, const Polyhedron& b, double tol = kGeomTol);

Polyhedron intersect(const Polyhedron& a, const Polyhedron& b);
/// Minkowski sum of two V-represented polyhedra.
Polyhedron minkowski_sum(const Polyhedron& a, const Polyhedron& b);

/// Smallest t >= 0 with outer + t*k contained in inner (both upper sets along k);
/// +inf when no such t exists.
double shift_gap(const Polyhedron& inner, const Polyhedron& outer, const Eigen::VectorXd& k);

// ---------------------------------------------------------------------------
// Double-description kernel

/// Extreme rays and lineality of a polyhedral cone {x : A x >= 0}.
struct ConeGenerators {
  std::vector<Eigen::VectorXd> rays;
  std::vector<Eigen::VectorXd> lines;
};

/// Incremental double-description state for a polyhedral cone {x in R^n : A x >= 0}
/// starting from the whole space. Rows may be added one at a time.
class ConeDD {
 public:
  explicit ConeDD(int n, double tol = kGeomTol);
  void add_row(const Eigen::VectorXd& row);
  int ambient() const { return n_; }
  int row_count() const { return static_cast<int>(rows_.size()); }
  const std::vector<Eigen::VectorXd>& rays() const { return rays_; }
  const std::vector<Eigen::VectorXd>& lines() const { return lines_; }
  ConeGenerators generators() const { return {rays_, lines_}; }

 private:
  using Bits = std::vector<std::uint64_t>;
  Bits zero_set(const Eigen::VectorXd& x) const;
  bool adjacent(std::size_t i, std::size_t j, const Bits& common) const;

  int n_;
  double tol_;
  std::vector<Eigen::VectorXd> rows_;
  std::vector<Eigen::VectorXd> rays_;
  std::vector<Bits> zeros_;
  std::vector<Eigen::VectorXd> lines_;
};

ConeGenerators cone_generators(const std::vector<Eigen::VectorXd>& rows, int n, double tol = kGeomTol);

/// Builds a polyhedron from halfspaces added one by one, keeping its vertex set
/// current. Used by the outer approximation loop.
class PolyhedronBuilder {
 public:
  explicit PolyhedronBuilder(int dim, double tol = kGeomTol);
  /// Adds {y : a.y >= b}.
  void add_halfspace(const Eigen::VectorXd& a, double b);
  int dim() const { return dim_; }
  bool is_empty() const;
  std::vector<Eigen::VectorXd> vertices() const;
  std::vector<Eigen::VectorXd> rays() const;
  const std::vector<Halfspace>& halfspaces() const { return halfspaces_; }
  Polyhedron polyhedron() const;

 private:
  int dim_;
  double tol_;
  ConeDD dd_;
  std::vector<Halfspace> halfspaces_;
};

// ---------------------------------------------------------------------------
// Cones

/// Polyhedral convex cone with generators and inward normals {y : n.y >= 0}.
class Cone {
 public:
  static Cone from_generators(std::vector<Eigen::VectorXd> generators, double tol = kGeomTol);
  static Cone from_normals(std::vector<Eigen::VectorXd> normals, double tol = kGeomTol);
  static Cone orthant(int dim);

  int dim() const { return dim_; }
  const std::vector<Eigen::VectorXd>& generators() const { return generators_; }
  const std::vector<Eigen::VectorXd>& normals() const { return normals_; }

  bool contains(const Eigen::VectorXd& y, double tol = kGeomTol) const;
  /// Strictly inside: n.k > 0 for every normal.
  bool interior(const Eigen::VectorXd& k, double tol = kGeomTol) const;
  /// No nonzero generator whose negative lies in the cone.
  bool is_pointed(double tol = kGeomTol) const;
  bool contains_orthant(double tol = kGeomTol) const;
  /// Sum of generators scaled to unit Euclidean length.
  Eigen::VectorXd default_direction() const;
  bool is_orthant(double tol = kGeomTol) const;

  Polyhedron as_polyhedron() const;

 private:
  int dim_ = 0;
  std::vector<Eigen::VectorXd> generators_;
  std::vector<Eigen::VectorXd> normals_;
};

Cone positive_dual_cone(const Cone& k);

}  // namespace setprice
