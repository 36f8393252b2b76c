#include "alspg/sets.hpp"

#include <cmath>
#include <stdexcept>

namespace alspg {

namespace {

void check_dim(const char* op, Index expected, Index got) {
  if (expected != ProjectableSet::kAnyDim && expected != got) {
    throw std::invalid_argument(std::string(op) + ": dimension mismatch, expected " +
                                std::to_string(expected) + ", got " + std::to_string(got));
  }
}

}  // namespace

double ProjectableSet::violation(const Vector& p, Vector* grad) const {
  const Vector r = p - project(p);
  if (grad) *grad = r;
  return 0.5 * r.squaredNorm();
}

// ---------------------------------------------------------------------------
// BoxSet

BoxSet::BoxSet(Vector lower, Vector upper)
    : lower_(std::move(lower)), upper_(std::move(upper)) {
  if (lower_.size() != upper_.size()) {
    throw std::invalid_argument("BoxSet: bound dimensions differ");
  }
  if (lower_.size() == 0) throw std::invalid_argument("BoxSet: empty bounds");
  for (Index i = 0; i < lower_.size(); ++i) {
    if (!(lower_[i] <= upper_[i])) {
      throw std::invalid_argument("BoxSet: lower > upper at coordinate " + std::to_string(i));
    }
  }
}

Vector BoxSet::project(const Vector& p) const {
  check_dim("BoxSet::project", dim(), p.size());
  return p.cwiseMax(lower_).cwiseMin(upper_);
}

bool BoxSet::contains(const Vector& p, double tol) const {
  check_dim("BoxSet::contains", dim(), p.size());
  return (p.array() >= lower_.array() - tol).all() &&
         (p.array() <= upper_.array() + tol).all();
}

double BoxSet::violation(const Vector& p, Vector* grad) const {
  check_dim("BoxSet::violation", dim(), p.size());
  double v = 0.0;
  if (grad) grad->setZero(p.size());
  for (Index i = 0; i < p.size(); ++i) {
    double r = 0.0;
    if (p[i] > upper_[i]) r = p[i] - upper_[i];
    else if (p[i] < lower_[i]) r = p[i] - lower_[i];
    v += 0.5 * r * r;
    if (grad) (*grad)[i] = r;
  }
  return v;
}

// ---------------------------------------------------------------------------
// AffineSlabSet

AffineSlabSet::AffineSlabSet(Vector normal, double lower, double upper)
    : normal_(std::move(normal)), lower_(lower), upper_(upper), norm_sq_(normal_.squaredNorm()) {
  if (norm_sq_ <= 0.0 || !std::isfinite(norm_sq_)) {
    throw std::invalid_argument("AffineSlabSet: normal vector must be nonzero and finite");
  }
  if (!(lower_ <= upper_)) throw std::invalid_argument("AffineSlabSet: lower > upper");
}

Vector AffineSlabSet::project(const Vector& p) const {
  check_dim("AffineSlabSet::project", dim(), p.size());
  const double s = normal_.dot(p);
  if (s > upper_) return p - normal_ * ((s - upper_) / norm_sq_);
  if (s < lower_) return p - normal_ * ((s - lower_) / norm_sq_);
  return p;
}

bool AffineSlabSet::contains(const Vector& p, double tol) const {
  check_dim("AffineSlabSet::contains", dim(), p.size());
  const double s = normal_.dot(p);
  const double scale = std::sqrt(norm_sq_);
  return s >= lower_ - tol * scale && s <= upper_ + tol * scale;
}

// ---------------------------------------------------------------------------
// QuadricAnnulusSet

QuadricAnnulusSet::QuadricAnnulusSet(Vector center, double lower, double upper)
    : center_(std::move(center)), lower_(lower), upper_(upper) {
  if (center_.size() == 0) throw std::invalid_argument("QuadricAnnulusSet: empty center");
  if (!(0.0 <= lower_) || !(lower_ <= upper_)) {
    throw std::invalid_argument("QuadricAnnulusSet: need 0 <= lower <= upper");
  }
}

QuadricAnnulusSet QuadricAnnulusSet::ball(Vector center, double radius) {
  return {std::move(center), 0.0, 0.5 * radius * radius};
}

QuadricAnnulusSet QuadricAnnulusSet::ball_exterior(Vector center, double radius) {
  return {std::move(center), 0.5 * radius * radius, std::numeric_limits<double>::infinity()};
}

QuadricAnnulusSet QuadricAnnulusSet::shell(Vector center, double r_inner, double r_outer) {
  return {std::move(center), 0.5 * r_inner * r_inner, 0.5 * r_outer * r_outer};
}

Vector QuadricAnnulusSet::project(const Vector& p) const {
  check_dim("QuadricAnnulusSet::project", dim(), p.size());
  const Vector d = p - center_;
  const double q = 0.5 * d.squaredNorm();
  if (q > upper_) return center_ + d * (std::sqrt(2.0 * upper_) / d.norm());
  if (q < lower_) {
    const double n = d.norm();
    if (n == 0.0) {
      // Every point at radius sqrt(2l) is optimal; pick the +e1 direction.
      Vector r = center_;
      r[0] += std::sqrt(2.0 * lower_);
      return r;
    }
    return center_ + d * (std::sqrt(2.0 * lower_) / n);
  }
  return p;
}

bool QuadricAnnulusSet::contains(const Vector& p, double tol) const {
  check_dim("QuadricAnnulusSet::contains", dim(), p.size());
  const double q = 0.5 * (p - center_).squaredNorm();
  return q >= lower_ - tol && q <= upper_ + tol;
}

// ---------------------------------------------------------------------------
// SecondOrderConeSet

Vector SecondOrderConeSet::project(const Vector& p) const {
  if (p.size() < 2) throw std::invalid_argument("SecondOrderConeSet: need dim >= 2");
  const Index n = p.size() - 1;
  const double t = p[n];
  const double nx = p.head(n).norm();
  if (nx <= t) return p;
  if (nx <= -t) return Vector::Zero(p.size());
  const double beta = 0.5 * (nx + t);
  Vector r(p.size());
  r.head(n) = p.head(n) * (beta / nx);
  r[n] = beta;
  return r;
}

bool SecondOrderConeSet::contains(const Vector& p, double tol) const {
  if (p.size() < 2) throw std::invalid_argument("SecondOrderConeSet: need dim >= 2");
  const Index n = p.size() - 1;
  return p.head(n).norm() <= p[n] + tol;
}

// ---------------------------------------------------------------------------
// SingletonSet

Vector SingletonSet::project(const Vector& p) const {
  check_dim("SingletonSet::project", dim(), p.size());
  return value_;
}

bool SingletonSet::contains(const Vector& p, double tol) const {
  check_dim("SingletonSet::contains", dim(), p.size());
  return (p - value_).norm() <= tol;
}

double SingletonSet::violation(const Vector& p, Vector* grad) const {
  check_dim("SingletonSet::violation", dim(), p.size());
  const Vector r = p - value_;
  if (grad) *grad = r;
  return 0.5 * r.squaredNorm();
}

// ---------------------------------------------------------------------------
// ReplicatedSet

ReplicatedSet::ReplicatedSet(std::shared_ptr<const ProjectableSet> base, Index count)
    : base_(std::move(base)), count_(count) {
  if (!base_) throw std::invalid_argument("ReplicatedSet: null base set");
  if (base_->dim() == kAnyDim) {
    throw std::invalid_argument("ReplicatedSet: base set must have fixed dimension");
  }
  if (count_ < 1) throw std::invalid_argument("ReplicatedSet: count must be >= 1");
}

Vector ReplicatedSet::project(const Vector& p) const {
  check_dim("ReplicatedSet::project", dim(), p.size());
  const Index k = base_->dim();
  Vector r(p.size());
  for (Index i = 0; i < count_; ++i) {
    r.segment(i * k, k) = base_->project(p.segment(i * k, k));
  }
  return r;
}

bool ReplicatedSet::contains(const Vector& p, double tol) const {
  check_dim("ReplicatedSet::contains", dim(), p.size());
  const Index k = base_->dim();
  for (Index i = 0; i < count_; ++i) {
    if (!base_->contains(p.segment(i * k, k), tol)) return false;
  }
  return true;
}

double ReplicatedSet::violation(const Vector& p, Vector* grad) const {
  check_dim("ReplicatedSet::violation", dim(), p.size());
  const Index k = base_->dim();
  double v = 0.0;
  if (grad) grad->resize(p.size());
  Vector gblock;
  for (Index i = 0; i < count_; ++i) {
    v += base_->violation(p.segment(i * k, k), grad ? &gblock : nullptr);
    if (grad) grad->segment(i * k, k) = gblock;
  }
  return v;
}

}  // namespace alspg
