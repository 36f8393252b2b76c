#include "alspg/polygon.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace alspg {

namespace {

double cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

/// Signed distance of p to the edge line through a->b, positive on the left
/// (inside for counterclockwise polygons).
double inward_distance(const Vec2& a, const Vec2& b, const Vec2& p) {
  const Vec2 e = b - a;
  return cross2(e, p - a) / e.norm();
}

Vec2 closest_on_segment(const Vec2& a, const Vec2& b, const Vec2& p) {
  const Vec2 e = b - a;
  const double len_sq = e.squaredNorm();
  if (len_sq == 0.0) return a;
  const double t = std::clamp((p - a).dot(e) / len_sq, 0.0, 1.0);
  return a + t * e;
}

/// Angle of an edge vector mapped to [0, 2*pi), the sweep order of edges of a
/// counterclockwise polygon walked from its bottom-most vertex.
double sweep_angle(const Vec2& e) {
  double a = std::atan2(e.y(), e.x());
  if (a < 0.0) a += 2.0 * M_PI;
  return a;
}

int bottom_most_index(const std::vector<Vec2>& v) {
  int best = 0;
  for (int i = 1; i < static_cast<int>(v.size()); ++i) {
    if (v[i].y() < v[best].y() ||
        (v[i].y() == v[best].y() && v[i].x() < v[best].x())) {
      best = i;
    }
  }
  return best;
}

std::vector<Vec2> clean_chain(std::vector<Vec2> v) {
  const auto scale = [&] {
    double s = 1.0;
    for (const auto& p : v) s = std::max({s, std::abs(p.x()), std::abs(p.y())});
    return s;
  }();
  // Drop consecutive duplicates (cyclically).
  std::vector<Vec2> out;
  for (const auto& p : v) {
    if (out.empty() || (p - out.back()).norm() > 1e-12 * scale) out.push_back(p);
  }
  while (out.size() > 1 && (out.front() - out.back()).norm() <= 1e-12 * scale) out.pop_back();
  // Drop collinear middle vertices.
  if (out.size() >= 3) {
    std::vector<Vec2> kept;
    const int n = static_cast<int>(out.size());
    for (int i = 0; i < n; ++i) {
      const Vec2& prev = out[(i + n - 1) % n];
      const Vec2& cur = out[i];
      const Vec2& next = out[(i + 1) % n];
      const Vec2 e1 = cur - prev, e2 = next - cur;
      if (std::abs(cross2(e1, e2)) > 1e-10 * e1.norm() * e2.norm()) kept.push_back(cur);
    }
    out = std::move(kept);
  }
  return out;
}

}  // namespace

ConvexPolygon2D::ConvexPolygon2D(std::vector<Vec2> vertices)
    : vertices_(clean_chain(std::move(vertices))) {
  if (vertices_.size() < 3) {
    throw std::invalid_argument("ConvexPolygon2D: need at least 3 distinct vertices");
  }
  const int n = size();
  for (int i = 0; i < n; ++i) {
    const Vec2 e1 = vertices_[(i + 1) % n] - vertices_[i];
    const Vec2 e2 = vertices_[(i + 2) % n] - vertices_[(i + 1) % n];
    if (cross2(e1, e2) <= 0.0) {
      throw std::invalid_argument(
          "ConvexPolygon2D: vertices must be strictly convex in counterclockwise order");
    }
  }
}

ConvexPolygon2D ConvexPolygon2D::rectangle(const Vec2& center, double half_x, double half_y,
                                           double rotation) {
  const double c = std::cos(rotation), s = std::sin(rotation);
  const auto rot = [&](double x, double y) {
    return Vec2(center.x() + c * x - s * y, center.y() + s * x + c * y);
  };
  return ConvexPolygon2D({rot(-half_x, -half_y), rot(half_x, -half_y), rot(half_x, half_y),
                          rot(-half_x, half_y)});
}

ConvexPolygon2D ConvexPolygon2D::regular(const Vec2& center, double radius, int sides,
                                         double rotation) {
  std::vector<Vec2> v;
  v.reserve(sides);
  for (int i = 0; i < sides; ++i) {
    const double a = rotation + 2.0 * M_PI * i / sides;
    v.emplace_back(center.x() + radius * std::cos(a), center.y() + radius * std::sin(a));
  }
  return ConvexPolygon2D(std::move(v));
}

double ConvexPolygon2D::signed_area() const {
  double a = 0.0;
  const int n = size();
  for (int i = 0; i < n; ++i) a += cross2(vertices_[i], vertices_[(i + 1) % n]);
  return 0.5 * a;
}

Vec2 ConvexPolygon2D::centroid() const {
  double a = 0.0;
  Vec2 c = Vec2::Zero();
  const int n = size();
  for (int i = 0; i < n; ++i) {
    const double w = cross2(vertices_[i], vertices_[(i + 1) % n]);
    a += w;
    c += w * (vertices_[i] + vertices_[(i + 1) % n]);
  }
  return c / (3.0 * a);
}

bool ConvexPolygon2D::contains_point(const Vec2& p, double tol) const {
  const int n = size();
  for (int i = 0; i < n; ++i) {
    if (inward_distance(vertices_[i], vertices_[(i + 1) % n], p) < -tol) return false;
  }
  return true;
}

bool ConvexPolygon2D::strictly_inside(const Vec2& p, double tol) const {
  const int n = size();
  for (int i = 0; i < n; ++i) {
    if (inward_distance(vertices_[i], vertices_[(i + 1) % n], p) <= tol) return false;
  }
  return true;
}

Vec2 ConvexPolygon2D::nearest_boundary_point(const Vec2& p) const {
  const int n = size();
  double best = std::numeric_limits<double>::infinity();
  Vec2 best_point = vertices_[0];
  for (int i = 0; i < n; ++i) {
    const Vec2 cand = closest_on_segment(vertices_[i], vertices_[(i + 1) % n], p);
    const double d = (cand - p).squaredNorm();
    if (d < best) {
      best = d;
      best_point = cand;
    }
  }
  return best_point;
}

Vec2 ConvexPolygon2D::project_onto(const Vec2& p) const {
  if (contains_point(p, 0.0)) return p;
  return nearest_boundary_point(p);
}

Vec2 ConvexPolygon2D::project_out(const Vec2& p) const {
  if (!strictly_inside(p, 0.0)) return p;
  return nearest_boundary_point(p);
}

double ConvexPolygon2D::penetration_depth(const Vec2& p) const {
  double depth = std::numeric_limits<double>::infinity();
  const int n = size();
  for (int i = 0; i < n; ++i) {
    depth = std::min(depth, inward_distance(vertices_[i], vertices_[(i + 1) % n], p));
  }
  return std::max(depth, 0.0);
}

ConvexPolygon2D ConvexPolygon2D::translated(const Vec2& offset) const {
  std::vector<Vec2> v = vertices_;
  for (auto& p : v) p += offset;
  return ConvexPolygon2D(std::move(v));
}

ConvexPolygon2D ConvexPolygon2D::reflected() const {
  std::vector<Vec2> v = vertices_;
  for (auto& p : v) p = -p;
  return ConvexPolygon2D(std::move(v));
}

ConvexPolygon2D minkowski_sum(const ConvexPolygon2D& a, const ConvexPolygon2D& b) {
  const auto& va = a.vertices();
  const auto& vb = b.vertices();
  const int n = a.size(), m = b.size();
  const int ia0 = bottom_most_index(va);
  const int ib0 = bottom_most_index(vb);

  std::vector<Vec2> out;
  out.reserve(n + m);
  Vec2 cur = va[ia0] + vb[ib0];
  int i = 0, j = 0;
  while (i < n || j < m) {
    out.push_back(cur);
    const Vec2 ea = va[(ia0 + i + 1) % n] - va[(ia0 + i) % n];
    const Vec2 eb = vb[(ib0 + j + 1) % m] - vb[(ib0 + j) % m];
    if (j >= m) {
      cur += ea;
      ++i;
    } else if (i >= n) {
      cur += eb;
      ++j;
    } else {
      const double cr = cross2(ea, eb);
      if (std::abs(cr) <= 1e-12 * ea.norm() * eb.norm() && ea.dot(eb) > 0.0) {
        cur += ea + eb;  // parallel edges fuse
        ++i;
        ++j;
      } else if (sweep_angle(ea) < sweep_angle(eb)) {
        cur += ea;
        ++i;
      } else {
        cur += eb;
        ++j;
      }
    }
  }
  return ConvexPolygon2D(std::move(out));
}

ConvexPolygon2D minkowski_sum(const ConvexPolygon2D& a, const Vec2& point) {
  return a.translated(point);
}

// ---------------------------------------------------------------------------
// MinkowskiObstacle2D

MinkowskiObstacle2D::MinkowskiObstacle2D(ConvexPolygon2D sum, Mode mode)
    : sum_(std::move(sum)), mode_(mode) {}

Vector MinkowskiObstacle2D::project(const Vector& p) const {
  if (p.size() != 2) throw std::invalid_argument("MinkowskiObstacle2D: expects 2-D points");
  const Vec2 q(p[0], p[1]);
  const Vec2 r = mode_ == Mode::keep_out ? sum_.project_out(q) : sum_.project_onto(q);
  return to_vector(r);
}

bool MinkowskiObstacle2D::contains(const Vector& p, double tol) const {
  if (p.size() != 2) throw std::invalid_argument("MinkowskiObstacle2D: expects 2-D points");
  const Vec2 q(p[0], p[1]);
  return mode_ == Mode::keep_out ? !sum_.strictly_inside(q, tol) : sum_.contains_point(q, tol);
}

double MinkowskiObstacle2D::violation(const Vector& p, Vector* grad) const {
  if (mode_ == Mode::keep_out) {
    // Half squared penetration depth; gradient points from the nearest
    // boundary point toward p (descent pushes p outward).
    const Vec2 q(p[0], p[1]);
    if (!sum_.strictly_inside(q, 0.0)) {
      if (grad) grad->setZero(2);
      return 0.0;
    }
    const Vec2 r = q - sum_.nearest_boundary_point(q);
    if (grad) *grad = to_vector(r);
    return 0.5 * r.squaredNorm();
  }
  return ProjectableSet::violation(p, grad);
}

MinkowskiObstacle2D c_obstacle(const ConvexPolygon2D& robot, const ConvexPolygon2D& obstacle) {
  return {minkowski_sum(obstacle, robot.reflected()), MinkowskiObstacle2D::Mode::keep_out};
}

MinkowskiObstacle2D c_obstacle(const ConvexPolygon2D& obstacle) {
  return {obstacle, MinkowskiObstacle2D::Mode::keep_out};
}

// ---------------------------------------------------------------------------
// PolygonSet

Vector PolygonSet::project(const Vector& p) const {
  if (p.size() != 2) throw std::invalid_argument("PolygonSet: expects 2-D points");
  const Vec2 r = poly_.project_onto(Vec2(p[0], p[1]));
  return to_vector(r);
}

bool PolygonSet::contains(const Vector& p, double tol) const {
  if (p.size() != 2) throw std::invalid_argument("PolygonSet: expects 2-D points");
  return poly_.contains_point(Vec2(p[0], p[1]), tol);
}

}  // namespace alspg
