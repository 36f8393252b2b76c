#pragma once

#include <memory>
#include <vector>

#include "alspg/sets.hpp"
#include "alspg/types.hpp"

namespace alspg {

/// Strictly convex polygon with counterclockwise vertex order. Consecutive
/// duplicate vertices are dropped on construction; collinear or clockwise
/// input is rejected.
class ConvexPolygon2D {
 public:
  explicit ConvexPolygon2D(std::vector<Vec2> vertices);

  static ConvexPolygon2D rectangle(const Vec2& center, double half_x, double half_y,
                                   double rotation = 0.0);
  static ConvexPolygon2D regular(const Vec2& center, double radius, int sides,
                                 double rotation = 0.0);

  const std::vector<Vec2>& vertices() const { return vertices_; }
  int size() const { return static_cast<int>(vertices_.size()); }

  double signed_area() const;
  Vec2 centroid() const;

  /// Closed-polygon membership (boundary included, within tol).
  bool contains_point(const Vec2& p, double tol = 1e-9) const;
  /// Membership of the open interior with a margin: true when p is at least
  /// tol inside every edge.
  bool strictly_inside(const Vec2& p, double tol = 1e-9) const;

  /// Nearest point of the closed polygon; interior points map to themselves.
  Vec2 project_onto(const Vec2& p) const;
  /// Nearest point of the closed exterior; interior points map to the nearest
  /// boundary point, everything else to itself. Ties resolve to the lowest
  /// edge index.
  Vec2 project_out(const Vec2& p) const;
  /// Nearest point of the boundary (used by both projections).
  Vec2 nearest_boundary_point(const Vec2& p) const;

  /// Distance to the boundary from inside (0 for exterior points).
  double penetration_depth(const Vec2& p) const;

  ConvexPolygon2D translated(const Vec2& offset) const;
  /// Point reflection through the origin (for configuration-space obstacles
  /// the vertices are expressed relative to the body center).
  ConvexPolygon2D reflected() const;

 private:
  std::vector<Vec2> vertices_;
};

/// Exact Minkowski sum of two convex polygons by the rotating edge merge.
/// Parallel edges are fused, so the result is again strictly convex.
ConvexPolygon2D minkowski_sum(const ConvexPolygon2D& a, const ConvexPolygon2D& b);

/// Sum with a single point degenerates to a translation.
ConvexPolygon2D minkowski_sum(const ConvexPolygon2D& a, const Vec2& point);

/// Configuration-space obstacle of a translating convex robot against a
/// convex obstacle, as a projectable keep-out (or keep-in) region of the
/// robot's center point.
class MinkowskiObstacle2D final : public ProjectableSet {
 public:
  enum class Mode { keep_out, keep_in };

  MinkowskiObstacle2D(ConvexPolygon2D sum, Mode mode);

  Vector project(const Vector& p) const override;
  using ProjectableSet::contains;
  bool contains(const Vector& p, double tol) const override;
  Index dim() const override { return 2; }
  double violation(const Vector& p, Vector* grad) const override;

  const ConvexPolygon2D& polygon() const { return sum_; }
  Mode mode() const { return mode_; }

 private:
  ConvexPolygon2D sum_;
  Mode mode_;
};

/// Builds the keep-out region for a robot polygon (vertices relative to its
/// geometric center) against an obstacle polygon: obstacle (+) reflect(robot).
/// The robot center lies in the returned polygon iff robot and obstacle
/// overlap.
MinkowskiObstacle2D c_obstacle(const ConvexPolygon2D& robot, const ConvexPolygon2D& obstacle);

/// Point-robot variant: the configuration-space obstacle is the obstacle
/// itself.
MinkowskiObstacle2D c_obstacle(const ConvexPolygon2D& obstacle);

/// ProjectableSet view of a convex polygon interior (goal regions).
class PolygonSet final : public ProjectableSet {
 public:
  explicit PolygonSet(ConvexPolygon2D poly) : poly_(std::move(poly)) {}

  Vector project(const Vector& p) const override;
  using ProjectableSet::contains;
  bool contains(const Vector& p, double tol) const override;
  Index dim() const override { return 2; }

  const ConvexPolygon2D& polygon() const { return poly_; }

 private:
  ConvexPolygon2D poly_;
};

}  // namespace alspg
