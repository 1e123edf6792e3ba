#pragma once

#include <random>

#include <Eigen/Dense>

#include "onephase/driver.hpp"
#include "onephase/problem.hpp"
#include "onephase/problem_file.hpp"

namespace onephase::testing {

inline Vector random_vector(std::mt19937_64& rng, Eigen::Index n, double lo = -1.0,
                            double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = u(rng);
  return v;
}

inline Matrix random_matrix(std::mt19937_64& rng, Eigen::Index r, Eigen::Index c) {
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = g(rng);
  return m;
}

/// min 1/2 x^T H x + c^T x  s.t.  A x - b <= 0, all rows linear.
inline NlpProblem quadratic_nlp(Matrix H, Vector c, Matrix A, Vector b) {
  NlpProblem p;
  p.name = "quadratic";
  p.n = static_cast<int>(H.rows());
  p.m = static_cast<int>(A.rows());
  p.eval_f = [H, c](const Vector& x) { return 0.5 * x.dot(H * x) + c.dot(x); };
  p.eval_grad_f = [H, c](const Vector& x) -> Vector { return H * x + c; };
  p.eval_a = [A, b](const Vector& x) -> Vector { return A * x - b; };
  p.eval_jac = [A](const Vector&) -> Matrix { return A; };
  p.eval_hess_lag = [H](const Vector&, const Vector&) -> Matrix { return H; };
  for (int i = 0; i < p.m; ++i) p.linear_indices.push_back(i);
  return p;
}

/// Interior iterate with s_i y_i / mu drawn from [lo, hi] and w defined by a + s = mu w.
inline Iterate random_iterate(const NlpProblem& p, std::mt19937_64& rng, double mu,
                              double lo = 0.5, double hi = 2.0) {
  Evaluator eval(p);
  Iterate it;
  it.mu = mu;
  it.x = random_vector(rng, p.n);
  evaluate_at(it, eval);
  it.s = random_vector(rng, p.m, 0.2, 2.0);
  const Vector ratio = random_vector(rng, p.m, lo, hi);
  it.y = (mu * ratio.array() / it.s.array()).matrix();
  it.w = (it.a + it.s) / mu;
  return it;
}

/// Solves the unreduced Newton system
///   [H  0  J^T] [dx]     [b_D]
///   [J  I  0  ] [ds] = - [b_P]
///   [0  Y  S  ] [dy]     [b_C]
/// with H the shifted Lagrangian Hessian, by dense LU on the full block matrix.
struct NewtonOracle {
  Vector dx;
  Vector ds;
  Vector dy;
};

inline NewtonOracle newton_oracle(const Matrix& H, const Matrix& J, const Vector& s,
                                  const Vector& y, const Vector& b_dual, const Vector& b_primal,
                                  const Vector& b_comp) {
  const Eigen::Index n = H.rows();
  const Eigen::Index m = J.rows();
  Matrix K = Matrix::Zero(n + 2 * m, n + 2 * m);
  K.block(0, 0, n, n) = H;
  K.block(0, n + m, n, m) = J.transpose();
  K.block(n, 0, m, n) = J;
  K.block(n, n, m, m).setIdentity();
  K.block(n + m, n, m, m) = y.asDiagonal();
  K.block(n + m, n + m, m, m) = s.asDiagonal();
  Vector rhs(n + 2 * m);
  rhs << b_dual, b_primal, b_comp;
  const Vector d = K.fullPivLu().solve(-rhs);
  return {d.head(n), d.segment(n, m), d.tail(m)};
}

}  // namespace onephase::testing
