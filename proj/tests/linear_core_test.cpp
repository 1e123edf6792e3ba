#include <gtest/gtest.h>

#include <cmath>
#include <memory>
#include <random>

#include <Eigen/Eigenvalues>

#include "onephase/linear_core.hpp"
#include "support.hpp"

using namespace onephase;
using onephase::testing::random_matrix;
using onephase::testing::random_vector;

namespace {

std::shared_ptr<const SchurMatrix> schur_of(Matrix M, bool sparse = false) {
  auto s = std::make_shared<SchurMatrix>();
  s->M = std::move(M);
  s->prefer_sparse = sparse;
  return s;
}

}  // namespace

TEST(AssembleSchur, ScalarQuadratic) {
  // f = x^2/2, a = x - 1, y = 2, s = 0.5: M = 1 + 2/0.5.
  const SchurMatrix S = assemble_schur(Matrix::Ones(1, 1), Matrix::Ones(1, 1), Vector::Zero(1),
                                       Vector::Constant(1, 0.5), Vector::Constant(1, 2.0), 1.0);
  EXPECT_DOUBLE_EQ(S.M(0, 0), 5.0);
}

TEST(AssembleSchur, UnconstrainedIsHessian) {
  Matrix H(2, 2);
  H << 2.0, 1.0, 1.0, 3.0;
  const SchurMatrix S =
      assemble_schur(H, Matrix::Zero(0, 2), Vector::Zero(2), Vector(0), Vector(0), 1.0);
  EXPECT_EQ(S.M, H);
}

TEST(AssembleSchur, UnitRatioAddsJtJ) {
  std::mt19937_64 rng(1);
  const Matrix H = random_matrix(rng, 3, 3);
  const Matrix Hs = 0.5 * (H + H.transpose());
  const Matrix J = random_matrix(rng, 4, 3);
  const Vector s = random_vector(rng, 4, 0.5, 2.0);
  const SchurMatrix S = assemble_schur(Hs, J, Vector::Zero(3), s, s, 1.0);
  EXPECT_LT((S.M - (Hs + J.transpose() * J)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(AssembleSchur, EvaluatesHessianAtShiftedWeights) {
  // a(x) = x^2/2 has Hessian 1, so the Lagrangian Hessian is sum of the weights y - mu*beta1.
  NlpProblem p;
  p.n = 1;
  p.m = 1;
  p.eval_f = [](const Vector&) { return 0.0; };
  p.eval_grad_f = [](const Vector&) -> Vector { return Vector::Zero(1); };
  p.eval_a = [](const Vector& x) -> Vector { return Vector::Constant(1, 0.5 * x[0] * x[0]); };
  p.eval_jac = [](const Vector& x) -> Matrix { return Matrix::Constant(1, 1, x[0]); };
  p.eval_hess_lag = [](const Vector&, const Vector& v) -> Matrix { return Matrix::Constant(1, 1, v[0]); };
  Evaluator eval(p);
  const SchurMatrix S = assemble_schur(eval, Vector::Constant(1, 2.0), Vector::Ones(1),
                                       Vector::Constant(1, 3.0), 10.0, 0.01);
  // (3 - 0.1) + 2 * 3 / 1 * 2
  EXPECT_NEAR(S.M(0, 0), 2.9 + 12.0, 1e-12);
}

TEST(FactorizeWithShift, PositiveScalarNeedsNoShift) {
  DeltaState st;
  const FactorizeOutcome out = factorize_with_shift(schur_of(Matrix::Constant(1, 1, 5.0)), 0.0, st);
  ASSERT_TRUE(out.system);
  EXPECT_EQ(out.system->delta(), 0.0);
  EXPECT_NEAR(std::sqrt(out.system->reconstruct()(0, 0)), std::sqrt(5.0), 1e-15);
  EXPECT_EQ(out.trial_deltas, (std::vector<double>{0.0}));
}

TEST(FactorizeWithShift, NegativeScalarShiftsPastTheEigenvalue) {
  DeltaState st;
  const FactorizeOutcome out = factorize_with_shift(schur_of(Matrix::Constant(1, 1, -1.0)), 0.0, st);
  ASSERT_TRUE(out.system);
  EXPECT_EQ(out.system->delta(), 1.0 + 1e-8);
  EXPECT_EQ(out.trial_deltas.size(), 1u);
  EXPECT_NEAR(std::sqrt(out.system->reconstruct()(0, 0)), 1e-4, 1e-8);
}

TEST(FactorizeWithShift, PathologicalScalingHitsMaxDelta) {
  DeltaState st;
  const FactorizeOutcome out =
      factorize_with_shift(schur_of(Matrix::Constant(1, 1, -1e60)), 0.0, st);
  EXPECT_FALSE(out.system);
}

TEST(FactorizeWithShift, RecordsIncomingShift) {
  DeltaState st;
  factorize_with_shift(schur_of(Matrix::Identity(2, 2)), 0.25, st);
  EXPECT_EQ(st.delta_prev, 0.25);
}

TEST(FactorizeWithShift, PositiveDefiniteGivesZeroShiftAndReconstructs) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + trial % 6;
    const Matrix B = random_matrix(rng, n, n);
    const Matrix M = B * B.transpose() + Matrix::Identity(n, n);
    for (bool sparse : {false, true}) {
      DeltaState st;
      const FactorizeOutcome out = factorize_with_shift(schur_of(M, sparse), 0.0, st);
      ASSERT_TRUE(out.system);
      EXPECT_EQ(out.system->delta(), 0.0);
      EXPECT_EQ(out.system->is_sparse(), sparse);
      EXPECT_LT((out.system->reconstruct() - M).cwiseAbs().maxCoeff(),
                1e-8 * M.cwiseAbs().maxCoeff());
    }
  }
}

TEST(FactorizeWithShift, ShiftSequenceIsIncreasingAndEndsPositiveDefinite) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 2 + trial % 5;
    const Matrix B = random_matrix(rng, n, n);
    const Matrix M = 0.5 * (B + B.transpose());
    for (bool sparse : {false, true}) {
      DeltaState st;
      const FactorizeOutcome out = factorize_with_shift(schur_of(M, sparse), 1e-3, st);
      ASSERT_TRUE(out.system);
      for (std::size_t k = 1; k < out.trial_deltas.size(); ++k) {
        EXPECT_GT(out.trial_deltas[k], out.trial_deltas[k - 1]);
      }
      const Matrix shifted = M + out.system->delta() * Matrix::Identity(n, n);
      EXPECT_GT(Eigen::SelfAdjointEigenSolver<Matrix>(shifted).eigenvalues().minCoeff(), 0.0);
      EXPECT_LT((out.system->reconstruct() - shifted).cwiseAbs().maxCoeff(),
                1e-8 * (1.0 + shifted.cwiseAbs().maxCoeff()));
    }
  }
}

TEST(SolveShifted, Scalar) {
  DeltaState st;
  const auto fs = factorize_with_shift(schur_of(Matrix::Constant(1, 1, 5.0)), 0.0, st).system;
  ASSERT_TRUE(fs);
  EXPECT_NEAR(solve_shifted(*fs, Vector::Constant(1, -10.0))[0], -2.0, 1e-15);
  EXPECT_EQ(solve_shifted(*fs, Vector::Zero(1))[0], 0.0);
}

TEST(SolveShifted, Diagonal) {
  DeltaState st;
  const auto fs =
      factorize_with_shift(schur_of(Vector(Eigen::Vector2d(2.0, 8.0)).asDiagonal()), 0.0, st).system;
  ASSERT_TRUE(fs);
  const Vector d = solve_shifted(*fs, Eigen::Vector2d(2.0, 4.0));
  EXPECT_NEAR(d[0], 1.0, 1e-15);
  EXPECT_NEAR(d[1], 0.5, 1e-15);
}

TEST(SolveShifted, ResidualSmallOnRandomShiftedSystems) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 3 + trial % 5;
    const Matrix B = random_matrix(rng, n, n);
    const Matrix M = 0.5 * (B + B.transpose());
    for (bool sparse : {false, true}) {
      DeltaState st;
      const auto fs = factorize_with_shift(schur_of(M, sparse), 0.0, st).system;
      ASSERT_TRUE(fs);
      const Vector rhs = random_vector(rng, n);
      const Vector d = solve_shifted(*fs, rhs);
      EXPECT_LT((fs->apply(d) - rhs).lpNorm<Eigen::Infinity>(), 1e-9 * (1.0 + d.norm()));
    }
  }
}

TEST(EscalateDelta, GradientRatioDominates) {
  DeltaState st;
  EXPECT_EQ(escalate_delta(st, 0.0, 1.0, 2.0), 0.5);
}

TEST(EscalateDelta, IncreaseFactorDominates) {
  DeltaState st;
  EXPECT_EQ(escalate_delta(st, 1.0, 1e-3, 1.0), 8.0);
}

TEST(EscalateDelta, PreviousShiftOverDecrease) {
  DeltaState st;
  st.delta_prev = 31.4159265358979323846;
  EXPECT_NEAR(*escalate_delta(st, 0.0, 0.0, 1.0), 10.0, 1e-12);
}

TEST(EscalateDelta, OverflowFails) {
  DeltaState st;
  EXPECT_FALSE(escalate_delta(st, 1e50, 1.0, 1.0));
}

TEST(DeltaParams, ValidateRejectsBadFactors) {
  DeltaParams p;
  p.inc = 1.0;
  EXPECT_THROW(p.validate(), std::invalid_argument);
}
