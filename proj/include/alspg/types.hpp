#pragma once

#include <Eigen/Core>

namespace alspg {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;
using Index = Eigen::Index;

inline Vector to_vector(const Vec2& p) {
  Vector v(2);
  v << p.x(), p.y();
  return v;
}

inline Vec2 to_vec2(const Vector& v) { return {v[0], v[1]}; }

}  // namespace alspg
