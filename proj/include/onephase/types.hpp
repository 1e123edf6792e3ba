#pragma once

#include <Eigen/Core>

namespace onephase {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Norms of empty vectors are zero, so m = 0 problems need no special casing.
inline double inf_norm(const Vector& v) {
  return v.size() == 0 ? 0.0 : v.lpNorm<Eigen::Infinity>();
}

inline double one_norm(const Vector& v) {
  return v.size() == 0 ? 0.0 : v.lpNorm<1>();
}

}  // namespace onephase
