#include "setprice/polytope.hpp"

#include "setprice/core.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace setprice {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Homogenizing coordinate below this marks a direction rather than a point.
constexpr double kPointThreshold = 1e-11;

void check_dim(const Eigen::VectorXd& v, int dim, const char* what) {
  if (v.size() != dim) throw DimensionError(std::string(what) + ": expected dimension " + std::to_string(dim) +
                                            ", got " + std::to_string(v.size()));
}

Eigen::VectorXd normalized_inf(const Eigen::VectorXd& v) {
  const double m = v.cwiseAbs().maxCoeff();
  return m > 0.0 ? Eigen::VectorXd(v / m) : v;
}

// Drops near-duplicate directions (after unit scaling).
std::vector<Eigen::VectorXd> unique_directions(std::vector<Eigen::VectorXd> dirs, double tol) {
  std::vector<Eigen::VectorXd> out;
  for (auto& d : dirs) {
    const double n = d.norm();
    if (n <= tol) continue;
    Eigen::VectorXd u = d / n;
    bool dup = false;
    for (const auto& o : out)
      if ((o - u).norm() <= 1e3 * tol) dup = true;
    if (!dup) out.push_back(std::move(u));
  }
  return out;
}

std::vector<Eigen::VectorXd> unique_points(std::vector<Eigen::VectorXd> pts, double tol) {
  std::vector<Eigen::VectorXd> out;
  for (auto& p : pts) {
    bool dup = false;
    for (const auto& o : out)
      if ((o - p).cwiseAbs().maxCoeff() <= tol * std::max(1.0, p.cwiseAbs().maxCoeff())) dup = true;
    if (!dup) out.push_back(std::move(p));
  }
  return out;
}

double row_tol(const Halfspace& h, const Eigen::VectorXd& y, double tol) {
  const double ya = y.size() ? y.cwiseAbs().maxCoeff() : 0.0;
  const double aa = h.a.size() ? h.a.cwiseAbs().maxCoeff() : 0.0;
  return tol * std::max({1.0, aa * ya, std::abs(h.b)});
}

}  // namespace

// ---------------------------------------------------------------------------
// ConeDD

ConeDD::ConeDD(int n, double tol) : n_(n), tol_(tol) {
  if (n <= 0) throw std::invalid_argument("cone dimension must be positive");
  for (int i = 0; i < n; ++i) lines_.push_back(Eigen::VectorXd::Unit(n, i));
}

ConeDD::Bits ConeDD::zero_set(const Eigen::VectorXd& x) const {
  Bits bits((rows_.size() + 63) / 64, 0);
  for (std::size_t i = 0; i < rows_.size(); ++i)
    if (std::abs(rows_[i].dot(x)) <= tol_) bits[i / 64] |= (std::uint64_t{1} << (i % 64));
  return bits;
}

bool ConeDD::adjacent(std::size_t i, std::size_t j, const Bits& common) const {
  int count = 0;
  for (auto w : common) count += std::popcount(w);
  const int needed = n_ - static_cast<int>(lines_.size()) - 2;
  if (count < needed) return false;
  for (std::size_t r = 0; r < rays_.size(); ++r) {
    if (r == i || r == j) continue;
    const Bits& z = zeros_[r];
    bool superset = true;
    for (std::size_t w = 0; w < common.size() && superset; ++w) {
      const std::uint64_t zw = w < z.size() ? z[w] : 0;
      if ((common[w] & ~zw) != 0) superset = false;
    }
    if (superset) return false;
  }
  return true;
}

void ConeDD::add_row(const Eigen::VectorXd& row_in) {
  check_dim(row_in, n_, "cone row");
  const double scale = row_in.cwiseAbs().maxCoeff();
  if (scale == 0.0) return;  // 0 >= 0
  const Eigen::VectorXd row = row_in / scale;
  const std::size_t idx = rows_.size();
  rows_.push_back(row);
  auto set_bit = [idx](Bits& b) {
    if (b.size() < idx / 64 + 1) b.resize(idx / 64 + 1, 0);
    b[idx / 64] |= (std::uint64_t{1} << (idx % 64));
  };

  // Case 1: the row is not orthogonal to the lineality space.
  int pivot = -1;
  double best = tol_;
  for (std::size_t i = 0; i < lines_.size(); ++i) {
    const double v = std::abs(row.dot(lines_[i]));
    if (v > best) {
      best = v;
      pivot = static_cast<int>(i);
    }
  }
  if (pivot >= 0) {
    Eigen::VectorXd lp = lines_[pivot];
    if (row.dot(lp) < 0) lp = -lp;
    const double alp = row.dot(lp);
    std::vector<Eigen::VectorXd> kept;
    for (std::size_t i = 0; i < lines_.size(); ++i) {
      if (static_cast<int>(i) == pivot) continue;
      Eigen::VectorXd l = lines_[i] - (row.dot(lines_[i]) / alp) * lp;
      kept.push_back(normalized_inf(l));
    }
    lines_ = std::move(kept);
    for (std::size_t i = 0; i < rays_.size(); ++i) {
      rays_[i] = normalized_inf(rays_[i] - (row.dot(rays_[i]) / alp) * lp);
      set_bit(zeros_[i]);
    }
    Bits lp_zero((idx + 64) / 64, 0);
    for (std::size_t i = 0; i < idx; ++i) lp_zero[i / 64] |= (std::uint64_t{1} << (i % 64));
    rays_.push_back(normalized_inf(lp));
    zeros_.push_back(std::move(lp_zero));
    return;
  }

  // Case 2: partition the extreme rays.
  std::vector<double> val(rays_.size());
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < rays_.size(); ++i) {
    val[i] = row.dot(rays_[i]);
    if (val[i] > tol_) {
      pos.push_back(i);
    } else if (val[i] < -tol_) {
      neg.push_back(i);
    } else {
      set_bit(zeros_[i]);
    }
  }
  if (neg.empty()) return;

  std::vector<Eigen::VectorXd> new_rays;
  std::vector<Bits> new_zeros;
  for (std::size_t p : pos) {
    for (std::size_t q : neg) {
      Bits common(std::max(zeros_[p].size(), zeros_[q].size()), 0);
      for (std::size_t w = 0; w < common.size(); ++w) {
        const std::uint64_t a = w < zeros_[p].size() ? zeros_[p][w] : 0;
        const std::uint64_t b = w < zeros_[q].size() ? zeros_[q][w] : 0;
        common[w] = a & b;
      }
      // the new row is not part of either zero set at this point
      if (!adjacent(p, q, common)) continue;
      Eigen::VectorXd r = val[p] * rays_[q] - val[q] * rays_[p];
      r = normalized_inf(r);
      set_bit(common);
      new_rays.push_back(std::move(r));
      new_zeros.push_back(std::move(common));
    }
  }

  std::vector<Eigen::VectorXd> rays;
  std::vector<Bits> zeros;
  for (std::size_t i = 0; i < rays_.size(); ++i) {
    if (val[i] < -tol_) continue;
    rays.push_back(std::move(rays_[i]));
    zeros.push_back(std::move(zeros_[i]));
  }
  for (std::size_t i = 0; i < new_rays.size(); ++i) {
    rays.push_back(std::move(new_rays[i]));
    zeros.push_back(std::move(new_zeros[i]));
  }
  rays_ = std::move(rays);
  zeros_ = std::move(zeros);
}

ConeGenerators cone_generators(const std::vector<Eigen::VectorXd>& rows, int n, double tol) {
  ConeDD dd(n, tol);
  for (const auto& r : rows) dd.add_row(r);
  return dd.generators();
}

// ---------------------------------------------------------------------------
// Polyhedron

Polyhedron Polyhedron::from_halfspaces(int dim, std::vector<Halfspace> halfspaces) {
  for (const auto& h : halfspaces) {
    check_dim(h.a, dim, "halfspace normal");
    if (!std::isfinite(h.b) || !h.a.allFinite()) throw std::invalid_argument("halfspace data must be finite");
  }
  Polyhedron p;
  p.dim_ = dim;
  p.has_h_ = true;
  p.halfspaces_ = std::move(halfspaces);
  return p;
}

Polyhedron Polyhedron::from_generators(int dim, std::vector<Eigen::VectorXd> vertices,
                                       std::vector<Eigen::VectorXd> rays) {
  for (const auto& v : vertices) check_dim(v, dim, "vertex");
  for (const auto& r : rays) check_dim(r, dim, "ray");
  Polyhedron p;
  p.dim_ = dim;
  p.has_v_ = true;
  p.empty_ = vertices.empty();
  p.vertices_ = std::move(vertices);
  if (!p.empty_) p.rays_ = std::move(rays);
  return p;
}

Polyhedron Polyhedron::empty_set(int dim) {
  Polyhedron p;
  p.dim_ = dim;
  p.empty_ = true;
  p.has_h_ = true;
  p.has_v_ = true;
  p.halfspaces_.push_back({Eigen::VectorXd::Zero(dim), 1.0});
  return p;
}

Polyhedron Polyhedron::whole_space(int dim) {
  Polyhedron p;
  p.dim_ = dim;
  p.has_h_ = true;
  p.has_v_ = true;
  p.vertices_.push_back(Eigen::VectorXd::Zero(dim));
  for (int i = 0; i < dim; ++i) {
    p.rays_.push_back(Eigen::VectorXd::Unit(dim, i));
    p.rays_.push_back(-Eigen::VectorXd::Unit(dim, i));
  }
  return p;
}

bool Polyhedron::is_bounded() const {
  if (!has_v_) return dd_convert(*this).is_bounded();
  return rays_.empty();
}

Polyhedron Polyhedron::translated(const Eigen::VectorXd& shift) const {
  check_dim(shift, dim_, "translation");
  Polyhedron p = *this;
  for (auto& h : p.halfspaces_) h.b += h.a.dot(shift);
  for (auto& v : p.vertices_) v += shift;
  return p;
}

Polyhedron Polyhedron::negated() const {
  Polyhedron p = *this;
  for (auto& h : p.halfspaces_) h.a = -h.a;
  for (auto& v : p.vertices_) v = -v;
  for (auto& r : p.rays_) r = -r;
  return p;
}

Polyhedron Polyhedron::scaled(double factor) const {
  if (!(factor > 0.0)) throw std::invalid_argument("polyhedron scale factor must be positive");
  Polyhedron p = *this;
  for (auto& h : p.halfspaces_) h.b *= factor;
  for (auto& v : p.vertices_) v *= factor;
  return p;
}

Polyhedron dd_convert(const Polyhedron& poly, double tol) {
  if (poly.has_h_ && poly.has_v_) return poly;
  const int d = poly.dim_;
  Polyhedron out = poly;
  if (poly.has_h_) {
    ConeDD dd(d + 1, tol);
    Eigen::VectorXd row = Eigen::VectorXd::Zero(d + 1);
    row[0] = 1.0;
    dd.add_row(row);
    for (const auto& h : poly.halfspaces_) {
      row[0] = -h.b;
      row.tail(d) = h.a;
      dd.add_row(row);
    }
    std::vector<Eigen::VectorXd> verts, rays;
    for (const auto& r : dd.rays()) {
      if (r[0] > kPointThreshold) {
        verts.push_back(r.tail(d) / r[0]);
      } else {
        rays.push_back(r.tail(d));
      }
    }
    for (const auto& l : dd.lines()) {
      rays.push_back(l.tail(d));
      rays.push_back(-l.tail(d));
    }
    out.has_v_ = true;
    out.empty_ = verts.empty();
    out.vertices_ = unique_points(std::move(verts), tol);
    out.rays_ = out.empty_ ? std::vector<Eigen::VectorXd>{} : unique_directions(std::move(rays), tol);
    return out;
  }
  // V -> H via the dual cone of the homogenized generators
  if (poly.empty_ || poly.vertices_.empty()) return Polyhedron::empty_set(d);
  ConeDD dd(d + 1, tol);
  Eigen::VectorXd g(d + 1);
  for (const auto& v : poly.vertices_) {
    g[0] = 1.0;
    g.tail(d) = v;
    dd.add_row(g);
  }
  for (const auto& r : poly.rays_) {
    g[0] = 0.0;
    g.tail(d) = r;
    dd.add_row(g);
  }
  std::vector<Halfspace> hs;
  auto emit = [&](const Eigen::VectorXd& z) {
    Eigen::VectorXd a = z.tail(d);
    const double n = a.norm();
    if (n <= tol) return;
    hs.push_back({a / n, -z[0] / n});
  };
  for (const auto& z : dd.rays()) emit(z);
  for (const auto& z : dd.lines()) {
    emit(z);
    emit(-z);
  }
  out.has_h_ = true;
  out.halfspaces_ = std::move(hs);
  return out;
}

bool contains_point(const Polyhedron& poly, const Eigen::VectorXd& y, double tol) {
  check_dim(y, poly.dim(), "point");
  if (!poly.has_hrep()) return contains_point(dd_convert(poly, tol), y, tol);
  if (poly.is_empty()) return false;
  for (const auto& h : poly.halfspaces())
    if (h.a.dot(y) - h.b < -row_tol(h, y, tol)) return false;
  return true;
}

bool contains_poly(const Polyhedron& a, const Polyhedron& b, double tol) {
  if (a.dim() != b.dim()) throw DimensionError("contains_poly: dimension mismatch");
  const Polyhedron aa = a.has_hrep() ? a : dd_convert(a, tol);
  const Polyhedron bb = b.has_vrep() ? b : dd_convert(b, tol);
  if (bb.is_empty()) return true;
  if (aa.is_empty()) return false;
  for (const auto& v : bb.vertices())
    if (!contains_point(aa, v, tol)) return false;
  for (const auto& r : bb.rays()) {
    const Eigen::VectorXd u = r / std::max(r.norm(), 1e-300);
    for (const auto& h : aa.halfspaces())
      if (h.a.dot(u) < -tol * std::max(1.0, h.a.norm())) return false;
  }
  return true;
}

bool same_set(const Polyhedron& a, const Polyhedron& b, double tol) {
  return contains_poly(a, b, tol) && contains_poly(b, a, tol);
}

Polyhedron intersect(const Polyhedron& a, const Polyhedron& b) {
  if (a.dim() != b.dim()) throw DimensionError("intersect: dimension mismatch");
  const Polyhedron aa = a.has_hrep() ? a : dd_convert(a);
  const Polyhedron bb = b.has_hrep() ? b : dd_convert(b);
  std::vector<Halfspace> hs = aa.halfspaces();
  hs.insert(hs.end(), bb.halfspaces().begin(), bb.halfspaces().end());
  return Polyhedron::from_halfspaces(a.dim(), std::move(hs));
}

Polyhedron minkowski_sum(const Polyhedron& a, const Polyhedron& b) {
  if (a.dim() != b.dim()) throw DimensionError("minkowski_sum: dimension mismatch");
  const Polyhedron aa = a.has_vrep() ? a : dd_convert(a);
  const Polyhedron bb = b.has_vrep() ? b : dd_convert(b);
  if (aa.is_empty() || bb.is_empty()) return Polyhedron::empty_set(a.dim());
  std::vector<Eigen::VectorXd> verts;
  for (const auto& u : aa.vertices())
    for (const auto& v : bb.vertices()) verts.push_back(u + v);
  std::vector<Eigen::VectorXd> rays = aa.rays();
  rays.insert(rays.end(), bb.rays().begin(), bb.rays().end());
  return Polyhedron::from_generators(a.dim(), std::move(verts), std::move(rays));
}

double shift_gap(const Polyhedron& inner, const Polyhedron& outer, const Eigen::VectorXd& k) {
  const Polyhedron in = inner.has_hrep() ? inner : dd_convert(inner);
  const Polyhedron out = outer.has_vrep() ? outer : dd_convert(outer);
  check_dim(k, in.dim(), "shift direction");
  if (out.is_empty()) return 0.0;
  if (in.is_empty()) return kInf;
  for (const auto& r : out.rays())
    for (const auto& h : in.halfspaces())
      if (h.a.dot(r) < -kGeomTol * std::max(1.0, h.a.norm() * r.norm())) return kInf;
  double t = 0.0;
  for (const auto& v : out.vertices()) {
    for (const auto& h : in.halfspaces()) {
      const double slack = h.a.dot(v) - h.b;
      const double ak = h.a.dot(k);
      if (ak > kGeomTol) {
        t = std::max(t, -slack / ak);
      } else if (slack < -row_tol(h, v, kGeomTol)) {
        return kInf;
      }
    }
  }
  return t;
}

// ---------------------------------------------------------------------------
// PolyhedronBuilder

PolyhedronBuilder::PolyhedronBuilder(int dim, double tol) : dim_(dim), tol_(tol), dd_(dim + 1, tol) {
  Eigen::VectorXd row = Eigen::VectorXd::Zero(dim + 1);
  row[0] = 1.0;
  dd_.add_row(row);
}

void PolyhedronBuilder::add_halfspace(const Eigen::VectorXd& a, double b) {
  check_dim(a, dim_, "halfspace normal");
  Eigen::VectorXd row(dim_ + 1);
  row[0] = -b;
  row.tail(dim_) = a;
  dd_.add_row(row);
  halfspaces_.push_back({a, b});
}

bool PolyhedronBuilder::is_empty() const { return vertices().empty(); }

std::vector<Eigen::VectorXd> PolyhedronBuilder::vertices() const {
  std::vector<Eigen::VectorXd> out;
  for (const auto& r : dd_.rays())
    if (r[0] > kPointThreshold) out.push_back(r.tail(dim_) / r[0]);
  return out;
}

std::vector<Eigen::VectorXd> PolyhedronBuilder::rays() const {
  std::vector<Eigen::VectorXd> out;
  for (const auto& r : dd_.rays())
    if (r[0] <= kPointThreshold) out.push_back(r.tail(dim_));
  for (const auto& l : dd_.lines()) {
    out.push_back(l.tail(dim_));
    out.push_back(-l.tail(dim_));
  }
  return unique_directions(std::move(out), tol_);
}

Polyhedron PolyhedronBuilder::polyhedron() const {
  auto verts = vertices();
  if (verts.empty()) return Polyhedron::empty_set(dim_);
  // the facet list from the generators drops redundant cuts
  return dd_convert(Polyhedron::from_generators(dim_, std::move(verts), rays()), tol_);
}

// ---------------------------------------------------------------------------
// Cones

Cone Cone::from_generators(std::vector<Eigen::VectorXd> generators, double tol) {
  if (generators.empty()) throw std::invalid_argument("cone needs at least one generator");
  const int d = static_cast<int>(generators.front().size());
  for (const auto& g : generators) check_dim(g, d, "cone generator");
  const auto dual = cone_generators(generators, d, tol);
  std::vector<Eigen::VectorXd> normals = dual.rays;
  for (const auto& l : dual.lines) {
    normals.push_back(l);
    normals.push_back(-l);
  }
  Cone k;
  k.dim_ = d;
  k.generators_ = std::move(generators);
  k.normals_ = unique_directions(std::move(normals), tol);
  return k;
}

Cone Cone::from_normals(std::vector<Eigen::VectorXd> normals, double tol) {
  if (normals.empty()) throw std::invalid_argument("cone needs at least one normal");
  const int d = static_cast<int>(normals.front().size());
  for (const auto& n : normals) check_dim(n, d, "cone normal");
  const auto prim = cone_generators(normals, d, tol);
  std::vector<Eigen::VectorXd> gens = prim.rays;
  for (const auto& l : prim.lines) {
    gens.push_back(l);
    gens.push_back(-l);
  }
  Cone k;
  k.dim_ = d;
  k.generators_ = unique_directions(std::move(gens), tol);
  k.normals_ = std::move(normals);
  return k;
}

Cone Cone::orthant(int dim) {
  Cone k;
  k.dim_ = dim;
  for (int i = 0; i < dim; ++i) {
    k.generators_.push_back(Eigen::VectorXd::Unit(dim, i));
    k.normals_.push_back(Eigen::VectorXd::Unit(dim, i));
  }
  return k;
}

bool Cone::contains(const Eigen::VectorXd& y, double tol) const {
  check_dim(y, dim_, "cone point");
  for (const auto& n : normals_)
    if (n.dot(y) < -tol * std::max(1.0, n.norm() * y.norm())) return false;
  return true;
}

bool Cone::interior(const Eigen::VectorXd& k, double tol) const {
  check_dim(k, dim_, "cone direction");
  for (const auto& n : normals_)
    if (n.dot(k) <= tol * n.norm() * std::max(1.0, k.norm())) return false;
  return true;
}

bool Cone::is_pointed(double tol) const {
  if (normals_.empty()) return false;
  for (const auto& g : generators_) {
    if (g.norm() <= tol) continue;
    if (contains(-g, tol)) return false;
  }
  return true;
}

bool Cone::contains_orthant(double tol) const {
  for (int i = 0; i < dim_; ++i)
    if (!contains(Eigen::VectorXd::Unit(dim_, i), tol)) return false;
  return true;
}

Eigen::VectorXd Cone::default_direction() const {
  Eigen::VectorXd k = Eigen::VectorXd::Zero(dim_);
  for (const auto& g : generators_) k += g;
  const double n = k.norm();
  if (n == 0.0) throw std::invalid_argument("cone generators sum to zero; supply a direction explicitly");
  return k / n;
}

bool Cone::is_orthant(double tol) const {
  if (static_cast<int>(normals_.size()) != dim_) return false;
  for (int i = 0; i < dim_; ++i) {
    bool found = false;
    for (const auto& n : normals_)
      if ((n / n.norm() - Eigen::VectorXd::Unit(dim_, i)).norm() <= tol) found = true;
    if (!found) return false;
  }
  return true;
}

Polyhedron Cone::as_polyhedron() const {
  return dd_convert(Polyhedron::from_generators(dim_, {Eigen::VectorXd::Zero(dim_)}, generators_));
}

Cone positive_dual_cone(const Cone& k) {
  return Cone::from_generators(k.normals());
}

}  // namespace setprice
