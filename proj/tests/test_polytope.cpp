#include "setprice/polytope.hpp"

#include <doctest.h>

#include <random>

using namespace setprice;

namespace {

Polyhedron unit_square() {
  return Polyhedron::from_halfspaces(2, {{Eigen::Vector2d(1, 0), 0.0},
                                         {Eigen::Vector2d(0, 1), 0.0},
                                         {Eigen::Vector2d(-1, 0), -1.0},
                                         {Eigen::Vector2d(0, -1), -1.0}});
}

std::vector<Eigen::VectorXd> random_points(std::mt19937_64& rng, int dim, int count) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<Eigen::VectorXd> out;
  for (int i = 0; i < count; ++i) {
    Eigen::VectorXd v(dim);
    for (int j = 0; j < dim; ++j) v[j] = g(rng);
    out.push_back(v);
  }
  return out;
}

}  // namespace

TEST_SUITE("polytope") {
  TEST_CASE("square from inequalities has four vertices") {
    const Polyhedron sq = dd_convert(unit_square());
    CHECK(sq.vertices().size() == 4);
    CHECK(sq.rays().empty());
    CHECK(sq.is_bounded());
    CHECK(contains_point(sq, Eigen::Vector2d(0.5, 0.5)));
    CHECK_FALSE(contains_point(sq, Eigen::Vector2d(1.1, 0.5)));
  }

  TEST_CASE("orthant has the origin and two rays") {
    const Polyhedron q = dd_convert(Cone::orthant(2).as_polyhedron());
    CHECK(q.vertices().size() == 1);
    CHECK(q.vertices()[0].norm() == doctest::Approx(0.0));
    CHECK(q.rays().size() == 2);
    CHECK_FALSE(q.is_bounded());
  }

  TEST_CASE("infeasible inequalities give the empty set") {
    const Polyhedron p = dd_convert(Polyhedron::from_halfspaces(
        1, {{Eigen::VectorXd::Constant(1, 1.0), 1.0}, {Eigen::VectorXd::Constant(1, -1.0), 0.0}}));
    CHECK(p.is_empty());
  }

  TEST_CASE("lines show up as opposite rays") {
    // {y : y0 >= 0} in R^2
    const Polyhedron p = dd_convert(Polyhedron::from_halfspaces(2, {{Eigen::Vector2d(1, 0), 0.0}}));
    CHECK(contains_point(p, Eigen::Vector2d(0.0, 1e6)));
    CHECK(contains_point(p, Eigen::Vector2d(0.0, -1e6)));
    CHECK_FALSE(contains_point(p, Eigen::Vector2d(-1e-3, 0.0)));
  }

  TEST_CASE("containment, intersection and Minkowski sums") {
    const Polyhedron sq = dd_convert(unit_square());
    const Polyhedron big = sq.scaled(2.0);
    CHECK(contains_poly(big, sq));
    CHECK_FALSE(contains_poly(sq, big));
    CHECK(same_set(sq, Polyhedron::from_generators(2, dd_convert(sq).vertices())));

    const Polyhedron shifted = sq.translated(Eigen::Vector2d(0.5, 0.5));
    const Polyhedron both = dd_convert(intersect(sq, shifted));
    CHECK(same_set(both, unit_square().scaled(0.5).translated(Eigen::Vector2d(0.5, 0.5))));

    const Polyhedron sum = minkowski_sum(sq, sq);
    CHECK(same_set(sum, big));
    CHECK(same_set(sq.negated().negated(), sq));
  }

  TEST_CASE("shift gap between nested upper sets") {
    const Eigen::Vector2d k(1, 1);
    const Polyhedron inner = Polyhedron::from_generators(2, {Eigen::Vector2d(1, 1)}, {Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 1)});
    const Polyhedron outer = inner.translated(-0.3 * k);
    CHECK(shift_gap(inner, outer, k) == doctest::Approx(0.3).epsilon(1e-9));
    CHECK(shift_gap(inner, inner, k) == doctest::Approx(0.0).scale(1.0));
    // a recession direction missing from inner: no shift works
    const Polyhedron wide = Polyhedron::from_generators(2, {Eigen::Vector2d(0, 0)}, {Eigen::Vector2d(1, -0.5), Eigen::Vector2d(0, 1)});
    CHECK(std::isinf(shift_gap(inner, wide, k)));
  }

  TEST_CASE("cones, normals and duals") {
    const Cone k0 = Cone::from_generators({Eigen::Vector2d(1, -0.9), Eigen::Vector2d(-0.9, 1)});
    CHECK(k0.contains(Eigen::Vector2d(1, 1)));
    CHECK(k0.contains(Eigen::Vector2d(1, -0.9)));
    CHECK_FALSE(k0.contains(Eigen::Vector2d(1, -1)));
    CHECK(k0.interior(Eigen::Vector2d(1, 1)));
    CHECK(k0.is_pointed());
    CHECK(k0.contains_orthant());
    CHECK_FALSE(k0.is_orthant());
    for (const auto& nk : k0.normals())
      for (const auto& g : k0.generators()) CHECK(nk.dot(g) >= -1e-12);

    const Cone dual = positive_dual_cone(k0);
    const Cone back = positive_dual_cone(dual);
    for (const auto& g : k0.generators()) CHECK(back.contains(g, 1e-9));
    for (const auto& g : back.generators()) CHECK(k0.contains(g, 1e-9));
    CHECK(positive_dual_cone(Cone::orthant(3)).is_orthant());
    CHECK(Cone::orthant(2).default_direction().norm() == doctest::Approx(1.0));
  }

  TEST_CASE("cone double description") {
    const auto gens = cone_generators({Eigen::Vector3d(1, 0, 0), Eigen::Vector3d(0, 1, 0)}, 3);
    CHECK(gens.rays.size() == 2);
    CHECK(gens.lines.size() == 1);
    ConeDD dd(2);
    CHECK(dd.lines().size() == 2);
    dd.add_row(Eigen::Vector2d(1, 0));
    dd.add_row(Eigen::Vector2d(0, 1));
    CHECK(dd.rays().size() == 2);
    CHECK(dd.lines().empty());
  }

  TEST_CASE("incremental builder agrees with a batch conversion") {
    std::mt19937_64 rng(8);
    for (int t = 0; t < 20; ++t) {
      const int dim = 2 + t % 2;
      const auto pts = random_points(rng, dim, 8);
      std::vector<Eigen::VectorXd> rays;
      for (int j = 0; j < dim; ++j) rays.push_back(Eigen::VectorXd::Unit(dim, j));
      const Polyhedron target = dd_convert(Polyhedron::from_generators(dim, pts, rays));
      PolyhedronBuilder b(dim);
      for (int j = 0; j < dim; ++j) b.add_halfspace(Eigen::VectorXd::Unit(dim, j), -100.0);
      for (const auto& h : target.halfspaces()) b.add_halfspace(h.a, h.b);
      CHECK(same_set(b.polyhedron(), target, 1e-8));
    }
  }

  TEST_CASE("round trip between representations") {
    std::mt19937_64 rng(4);
    for (int t = 0; t < 30; ++t) {
      const int dim = 2 + t % 3;
      const auto pts = random_points(rng, dim, dim + 3 + t % 5);
      const Polyhedron v = Polyhedron::from_generators(dim, pts);
      const Polyhedron h = dd_convert(v);
      const Polyhedron back = dd_convert(Polyhedron::from_halfspaces(dim, h.halfspaces()));
      CHECK(same_set(v, back));
      // every vertex found is one of the input points
      for (const auto& x : back.vertices()) {
        double best = INFINITY;
        for (const auto& p : pts) best = std::min(best, (p - x).norm());
        CHECK(best < 1e-8);
      }
    }
  }
}
