#pragma once

#include "alspg/sets.hpp"
#include "alspg/types.hpp"

namespace alspg {

/// Planar curve in Bernstein basis, S(t) = tvec(t)^T * M * P for t in [0, 1],
/// where tvec is the power basis (1, t, ..., t^r), M the Bernstein
/// characteristic matrix and P the (r+1) x 2 control points. Used to
/// represent implicit shapes with smooth analytic gradients.
class BernsteinCurve2D final : public ProjectableSet {
 public:
  BernsteinCurve2D(int degree, Matrix control_points);

  /// Least-squares fit of control points to sample points at uniformly spaced
  /// parameters.
  static BernsteinCurve2D fit(int degree, const Matrix& samples);

  int degree() const { return degree_; }
  const Matrix& control_points() const { return control_points_; }
  const Matrix& characteristic() const { return characteristic_; }

  struct Eval {
    Vec2 point;
    Vec2 tangent;
  };
  /// Curve point and analytic tangent; throws if t is outside [0, 1].
  Eval eval(double t) const;

  /// Nearest curve point, found by coarse grid seeding plus Newton refinement
  /// on the squared distance. Never worse than the best grid sample.
  Vec2 project_point(const Vec2& p) const;
  /// Parameter of the nearest curve point.
  double project_parameter(const Vec2& p) const;

  Vector project(const Vector& p) const override;
  using ProjectableSet::contains;
  bool contains(const Vector& p, double tol) const override;
  Index dim() const override { return 2; }

  static constexpr int kGridSamples = 64;

 private:
  Vec2 second_derivative(double t) const;

  int degree_;
  Matrix control_points_;  // (degree+1) x 2
  Matrix characteristic_;  // (degree+1) x (degree+1), power -> Bernstein
  Matrix coeffs_;          // characteristic * control_points (power-basis coefficients)
};

}  // namespace alspg
