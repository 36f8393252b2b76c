#include "alspg/bernstein.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/QR>

namespace alspg {

namespace {

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r *= static_cast<double>(n - k + i) / i;
  return r;
}

/// Characteristic matrix M with B_i^r(t) = sum_j M(j, i) t^j.
Matrix bernstein_characteristic(int degree) {
  const int n = degree + 1;
  Matrix m = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    const double ci = binomial(degree, i);
    for (int j = i; j < n; ++j) {
      m(j, i) = ci * binomial(degree - i, j - i) * (((j - i) % 2 == 0) ? 1.0 : -1.0);
    }
  }
  return m;
}

Vector power_basis(int degree, double t) {
  Vector v(degree + 1);
  double p = 1.0;
  for (int j = 0; j <= degree; ++j) {
    v[j] = p;
    p *= t;
  }
  return v;
}

Vector power_basis_derivative(int degree, double t) {
  Vector v = Vector::Zero(degree + 1);
  double p = 1.0;
  for (int j = 1; j <= degree; ++j) {
    v[j] = j * p;
    p *= t;
  }
  return v;
}

Vector power_basis_second_derivative(int degree, double t) {
  Vector v = Vector::Zero(degree + 1);
  double p = 1.0;
  for (int j = 2; j <= degree; ++j) {
    v[j] = static_cast<double>(j) * (j - 1) * p;
    p *= t;
  }
  return v;
}

}  // namespace

BernsteinCurve2D::BernsteinCurve2D(int degree, Matrix control_points)
    : degree_(degree),
      control_points_(std::move(control_points)),
      characteristic_(bernstein_characteristic(degree)) {
  if (degree_ < 1) throw std::invalid_argument("BernsteinCurve2D: degree must be >= 1");
  if (control_points_.rows() != degree_ + 1 || control_points_.cols() != 2) {
    throw std::invalid_argument("BernsteinCurve2D: control points must be (degree+1) x 2");
  }
  if (!control_points_.allFinite()) {
    throw std::invalid_argument("BernsteinCurve2D: control points must be finite");
  }
  coeffs_ = characteristic_ * control_points_;
}

BernsteinCurve2D BernsteinCurve2D::fit(int degree, const Matrix& samples) {
  if (samples.rows() < degree + 1 || samples.cols() != 2) {
    throw std::invalid_argument("BernsteinCurve2D::fit: need at least degree+1 samples, 2 columns");
  }
  const Matrix m = bernstein_characteristic(degree);
  const Index n = samples.rows();
  Matrix basis(n, degree + 1);
  for (Index i = 0; i < n; ++i) {
    const double t = n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1);
    basis.row(i) = power_basis(degree, t).transpose() * m;
  }
  Matrix fitted = basis.colPivHouseholderQr().solve(samples);
  return {degree, std::move(fitted)};
}

BernsteinCurve2D::Eval BernsteinCurve2D::eval(double t) const {
  if (t < 0.0 || t > 1.0) {
    throw std::invalid_argument("BernsteinCurve2D::eval: parameter outside [0, 1]");
  }
  Eval e;
  e.point = (power_basis(degree_, t).transpose() * coeffs_).transpose();
  e.tangent = (power_basis_derivative(degree_, t).transpose() * coeffs_).transpose();
  return e;
}

Vec2 BernsteinCurve2D::second_derivative(double t) const {
  return (power_basis_second_derivative(degree_, t).transpose() * coeffs_).transpose();
}

double BernsteinCurve2D::project_parameter(const Vec2& p) const {
  // Coarse seeding: the returned point must beat every grid sample.
  double best_t = 0.0;
  double best_d = std::numeric_limits<double>::infinity();
  for (int i = 0; i < kGridSamples; ++i) {
    const double t = static_cast<double>(i) / (kGridSamples - 1);
    const double d = (eval(t).point - p).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best_t = t;
    }
  }
  // Newton refinement on phi(t) = 0.5 * ||S(t) - p||^2.
  double t = best_t;
  for (int it = 0; it < 30; ++it) {
    const Eval e = eval(t);
    const Vec2 r = e.point - p;
    const double g = r.dot(e.tangent);
    const double h = e.tangent.squaredNorm() + r.dot(second_derivative(t));
    if (h <= 0.0 || !std::isfinite(h)) break;
    const double step = g / h;
    const double t_next = std::clamp(t - step, 0.0, 1.0);
    if (std::abs(t_next - t) < 1e-14) {
      t = t_next;
      break;
    }
    t = t_next;
  }
  const double refined = (eval(t).point - p).squaredNorm();
  return refined <= best_d ? t : best_t;
}

Vec2 BernsteinCurve2D::project_point(const Vec2& p) const {
  return eval(project_parameter(p)).point;
}

Vector BernsteinCurve2D::project(const Vector& p) const {
  if (p.size() != 2) throw std::invalid_argument("BernsteinCurve2D: expects 2-D points");
  return to_vector(project_point(to_vec2(p)));
}

bool BernsteinCurve2D::contains(const Vector& p, double tol) const {
  if (p.size() != 2) throw std::invalid_argument("BernsteinCurve2D: expects 2-D points");
  return (project(p) - p).norm() <= tol;
}

}  // namespace alspg
