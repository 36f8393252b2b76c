#pragma once

// Independent reference implementations used only to check the library:
// brute-force geometry, finite differences, dense adjoint assembly, a
// textbook Riccati solve and a coordinate-descent box QP. They share no code
// with the implementations they validate.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include <Eigen/Cholesky>

#include "alspg/ocp.hpp"
#include "alspg/rng.hpp"
#include "alspg/types.hpp"

namespace oracles {

using alspg::Index;
using alspg::Matrix;
using alspg::Vec2;
using alspg::Vector;

inline double cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

/// Monotone-chain convex hull, counterclockwise, collinear points dropped.
inline std::vector<Vec2> convex_hull(std::vector<Vec2> pts) {
  std::sort(pts.begin(), pts.end(), [](const Vec2& a, const Vec2& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](const Vec2& a, const Vec2& b) { return (a - b).norm() < 1e-12; }),
            pts.end());
  const int n = static_cast<int>(pts.size());
  if (n < 3) return pts;
  std::vector<Vec2> hull(2 * n);
  int k = 0;
  for (int i = 0; i < n; ++i) {
    while (k >= 2 && cross2(hull[k - 1] - hull[k - 2], pts[i] - hull[k - 2]) <= 1e-12) --k;
    hull[k++] = pts[i];
  }
  for (int i = n - 2, lower = k + 1; i >= 0; --i) {
    while (k >= lower && cross2(hull[k - 1] - hull[k - 2], pts[i] - hull[k - 2]) <= 1e-12) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

/// Separating-axis intersection test for convex polygons (closed sets).
inline bool polygons_intersect(const std::vector<Vec2>& a, const std::vector<Vec2>& b) {
  const auto separated_by_edges_of = [](const std::vector<Vec2>& p, const std::vector<Vec2>& q) {
    const int n = static_cast<int>(p.size());
    for (int i = 0; i < n; ++i) {
      const Vec2 edge = p[(i + 1) % n] - p[i];
      const Vec2 axis(-edge.y(), edge.x());
      double pmin = 1e300, pmax = -1e300, qmin = 1e300, qmax = -1e300;
      for (const auto& v : p) {
        pmin = std::min(pmin, axis.dot(v));
        pmax = std::max(pmax, axis.dot(v));
      }
      for (const auto& v : q) {
        qmin = std::min(qmin, axis.dot(v));
        qmax = std::max(qmax, axis.dot(v));
      }
      if (pmax < qmin || qmax < pmin) return true;
    }
    return false;
  };
  return !separated_by_edges_of(a, b) && !separated_by_edges_of(b, a);
}

/// Central finite-difference gradient.
inline Vector fd_gradient(const std::function<double(const Vector&)>& f, const Vector& x,
                          double h = 1e-6) {
  Vector g(x.size());
  for (Index i = 0; i < x.size(); ++i) {
    Vector xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    g[i] = (f(xp) - f(xm)) / (2.0 * h);
  }
  return g;
}

/// Central finite-difference Jacobian of a vector map.
inline Matrix fd_jacobian(const std::function<Vector(const Vector&)>& f, const Vector& x,
                          double h = 1e-6) {
  const Vector f0 = f(x);
  Matrix J(f0.size(), x.size());
  for (Index i = 0; i < x.size(); ++i) {
    Vector xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    J.col(i) = (f(xp) - f(xm)) / (2.0 * h);
  }
  return J;
}

/// Dense assembly of grad_u F(x0, u)^T from the block-triangular chain rule;
/// quadratic in T by construction.
inline Matrix dense_rollout_jacobian_t(const alspg::DynamicsModel& dyn, const Vector& x0,
                                       const Vector& u, const Vector& x) {
  const int m = dyn.state_dim, n = dyn.control_dim;
  const int T = static_cast<int>(u.size() / n);
  std::vector<Matrix> A(T), B(T);
  for (int t = 0; t < T; ++t) {
    const Vector xt = t == 0 ? x0 : Vector(x.segment(alspg::traj_index(t - 1, m), m));
    dyn.linearize(xt, u.segment(alspg::traj_index(t, n), n), A[t], B[t]);
  }
  Matrix J = Matrix::Zero(static_cast<Index>(T) * m, static_cast<Index>(T) * n);
  for (int t = 0; t < T; ++t) {
    Matrix chain = B[t];  // d x_{t+1} / d u_t
    J.block(alspg::traj_index(t, m), alspg::traj_index(t, n), m, n) = chain;
    for (int j = t + 1; j < T; ++j) {
      chain = A[j] * chain;
      J.block(alspg::traj_index(j, m), alspg::traj_index(t, n), m, n) = chain;
    }
  }
  return J.transpose();
}

/// Finite-horizon LQR via the standard Riccati recursion; returns the optimal
/// controls for linear dynamics x' = A x + B u + ... with quadratic cost.
inline Vector lqr_optimal_controls(const Matrix& A, const Matrix& B, const Matrix& Q,
                                   const Matrix& R, const Matrix& Qf, const Vector& x0, int T) {
  const Index m = A.rows(), n = B.cols();
  std::vector<Matrix> K(T);
  Matrix P = Qf;
  for (int t = T - 1; t >= 0; --t) {
    const Matrix G = R + B.transpose() * P * B;
    K[t] = G.ldlt().solve(B.transpose() * P * A);
    P = Q + A.transpose() * P * (A - B * K[t]);
  }
  Vector u(static_cast<Index>(T) * n);
  Vector x = x0;
  for (int t = 0; t < T; ++t) {
    const Vector ut = -K[t] * x;
    u.segment(static_cast<Index>(t) * n, n) = ut;
    x = A * x + B * ut;
  }
  (void)m;
  return u;
}

/// Cyclic coordinate descent for min 0.5 x^T H x + c^T x s.t. l <= x <= u,
/// run to a tight fixed point. Independent of the projected-gradient path.
inline Vector box_qp_coordinate_descent(const Matrix& H, const Vector& c, const Vector& lo,
                                        const Vector& hi, int sweeps = 20000) {
  const Index n = c.size();
  Vector x = Vector::Zero(n);
  for (Index i = 0; i < n; ++i) x[i] = std::clamp(0.0, lo[i], hi[i]);
  for (int s = 0; s < sweeps; ++s) {
    double change = 0.0;
    for (Index i = 0; i < n; ++i) {
      const double g = H.row(i).dot(x) + c[i];
      const double xi = std::clamp(x[i] - g / H(i, i), lo[i], hi[i]);
      change = std::max(change, std::abs(xi - x[i]));
      x[i] = xi;
    }
    if (change < 1e-14) break;
  }
  return x;
}

/// Random strictly convex polygon: hull of random points (retries until the
/// hull has the requested size or at least 3 vertices).
inline std::vector<Vec2> random_convex_polygon(alspg::Rng& rng, int points, double scale,
                                               const Vec2& center = Vec2::Zero()) {
  while (true) {
    std::vector<Vec2> pts;
    pts.reserve(points);
    for (int i = 0; i < points; ++i) {
      pts.emplace_back(center.x() + rng.uniform(-scale, scale),
                       center.y() + rng.uniform(-scale, scale));
    }
    auto hull = convex_hull(pts);
    if (hull.size() >= 3) return hull;
  }
}

/// Bisection inverse of a monotone scalar function on [lo, hi].
inline double bisect_inverse(const std::function<double(double)>& f, double target, double lo,
                             double hi, int iters = 200) {
  for (int i = 0; i < iters; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (f(mid) < target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace oracles
