#pragma once

#include <limits>
#include <memory>
#include <vector>

#include "alspg/types.hpp"

namespace alspg {

/// A closed set equipped with a membership test and a Euclidean projection.
/// All constraint sets handled by the solvers derive from this interface.
/// Sets are immutable after construction and safe to share across solves.
class ProjectableSet {
 public:
  static constexpr Index kAnyDim = -1;
  static constexpr double kDefaultTol = 1e-9;

  explicit ProjectableSet(double membership_tol = kDefaultTol)
      : membership_tol_(membership_tol) {}
  virtual ~ProjectableSet() = default;

  /// Closest point of the set in the 2-norm.
  virtual Vector project(const Vector& p) const = 0;

  virtual bool contains(const Vector& p, double tol) const = 0;
  bool contains(const Vector& p) const { return contains(p, membership_tol_); }

  /// Expected argument dimension, or kAnyDim for dimension-generic sets.
  virtual Index dim() const = 0;

  /// Hinged scalar feasibility residual: zero on the set, positive outside,
  /// with gradient. Default is half the squared distance to the set, whose
  /// gradient is p - project(p). Used by the constraints-as-equalities
  /// (no-projection) solver variant.
  virtual double violation(const Vector& p, Vector* grad = nullptr) const;

  double membership_tol() const { return membership_tol_; }

 private:
  double membership_tol_;
};

inline double set_distance(const ProjectableSet& s, const Vector& p) {
  return (p - s.project(p)).norm();
}

/// Unconstrained domain: projection is the identity.
class FreeSet final : public ProjectableSet {
 public:
  FreeSet() = default;
  Vector project(const Vector& p) const override { return p; }
  using ProjectableSet::contains;
  bool contains(const Vector&, double) const override { return true; }
  Index dim() const override { return kAnyDim; }
  double violation(const Vector& p, Vector* grad) const override {
    if (grad) *grad = Vector::Zero(p.size());
    return 0.0;
  }
};

/// Axis-aligned box l <= x <= u. Entries may be +-infinity.
class BoxSet final : public ProjectableSet {
 public:
  BoxSet(Vector lower, Vector upper);

  Vector project(const Vector& p) const override;
  using ProjectableSet::contains;
  bool contains(const Vector& p, double tol) const override;
  Index dim() const override { return lower_.size(); }
  double violation(const Vector& p, Vector* grad) const override;

  const Vector& lower() const { return lower_; }
  const Vector& upper() const { return upper_; }

 private:
  Vector lower_, upper_;
};

/// Slab between two parallel hyperplanes, l <= a^T x <= u. A hyperplane when
/// l == u, a halfspace when one bound is infinite.
class AffineSlabSet final : public ProjectableSet {
 public:
  AffineSlabSet(Vector normal, double lower, double upper);

  Vector project(const Vector& p) const override;
  using ProjectableSet::contains;
  bool contains(const Vector& p, double tol) const override;
  Index dim() const override { return normal_.size(); }

  const Vector& normal() const { return normal_; }
  double lower() const { return lower_; }
  double upper() const { return upper_; }

 private:
  Vector normal_;
  double lower_, upper_;
  double norm_sq_;
};

/// Annulus in the quadratic level sets of half the squared distance to a
/// center point: l <= 0.5 * ||x - center||^2 <= u. With l = 0 this is a ball
/// of radius sqrt(2u); with u = +inf it is the exterior of a ball (keep-out).
/// When l > 0 and p == center, ties are broken toward center + sqrt(2l)*e1.
class QuadricAnnulusSet final : public ProjectableSet {
 public:
  QuadricAnnulusSet(Vector center, double lower, double upper);

  /// Ball of given radius around a center.
  static QuadricAnnulusSet ball(Vector center, double radius);
  /// Closed exterior of a ball (collision keep-out).
  static QuadricAnnulusSet ball_exterior(Vector center, double radius);
  /// Annulus between two radii.
  static QuadricAnnulusSet shell(Vector center, double r_inner, double r_outer);

  Vector project(const Vector& p) const override;
  using ProjectableSet::contains;
  bool contains(const Vector& p, double tol) const override;
  Index dim() const override { return center_.size(); }

  const Vector& center() const { return center_; }
  double lower() const { return lower_; }
  double upper() const { return upper_; }

 private:
  Vector center_;
  double lower_, upper_;
};

/// Second-order cone {(x, t) : ||x|| <= t}, the last coordinate acting as t.
/// Dimension-generic; the argument must have at least two entries.
class SecondOrderConeSet final : public ProjectableSet {
 public:
  SecondOrderConeSet() = default;
  Vector project(const Vector& p) const override;
  using ProjectableSet::contains;
  bool contains(const Vector& p, double tol) const override;
  Index dim() const override { return kAnyDim; }
};

/// Single point. Projection of anything is the point; hosts equality
/// constraints g(x) = v as g(x) in {v}.
class SingletonSet final : public ProjectableSet {
 public:
  explicit SingletonSet(Vector value) : value_(std::move(value)) {}

  Vector project(const Vector& p) const override;
  using ProjectableSet::contains;
  bool contains(const Vector& p, double tol) const override;
  Index dim() const override { return value_.size(); }
  double violation(const Vector& p, Vector* grad) const override;

  const Vector& value() const { return value_; }

 private:
  Vector value_;
};

/// Cartesian product of `count` copies of a fixed-dimension base set. Used to
/// replicate a per-timestep set across a trajectory: projection, membership
/// and violation all act blockwise.
class ReplicatedSet final : public ProjectableSet {
 public:
  ReplicatedSet(std::shared_ptr<const ProjectableSet> base, Index count);

  Vector project(const Vector& p) const override;
  using ProjectableSet::contains;
  bool contains(const Vector& p, double tol) const override;
  Index dim() const override { return base_->dim() * count_; }
  double violation(const Vector& p, Vector* grad) const override;

  const ProjectableSet& base() const { return *base_; }
  Index count() const { return count_; }

 private:
  std::shared_ptr<const ProjectableSet> base_;
  Index count_;
};

}  // namespace alspg
