#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "onephase/driver.hpp"
#include "onephase/registry.hpp"
#include "support.hpp"

using namespace onephase;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

NlpProblem inequality(const BuiltinProblem& b) { return to_inequality_form(b.problem).problem; }

Vector start_of(const BuiltinProblem& b) {
  return b.problem.start.size() ? b.problem.start : Vector::Zero(b.problem.n);
}

}  // namespace

TEST(Initialize, SatisfiesShiftedFeasibilityAndBand) {
  const SolverOptions opts;
  for (const BuiltinProblem& b : builtin_registry()) {
    const NlpProblem p = inequality(b);
    const Iterate it = initialize(p, start_of(b), opts);
    EXPECT_GT(it.mu, 0.0) << b.name;
    if (p.m == 0) {
      EXPECT_EQ(it.mu, opts.mu_scale) << b.name;
      continue;
    }
    EXPECT_LE(primal_residual(it), 1e-12 * (1.0 + it.mu * inf_norm(it.w) + inf_norm(it.a)))
        << b.name;
    for (int i : p.bound_indices) EXPECT_EQ(it.w[i], 0.0) << b.name << " row " << i;
    const Vector ratio = it.s.cwiseProduct(it.y) / it.mu;
    EXPECT_GE(ratio.minCoeff(), opts.beta3 * (1.0 - 1e-12)) << b.name;
    EXPECT_LE(ratio.maxCoeff(), (1.0 + 1e-12) / opts.beta3) << b.name;
    EXPECT_TRUE(check_interior(it, opts.beta2)) << b.name;
  }
}

TEST(Initialize, ProjectsIntoBounds) {
  MixedProblem m;
  m.n = 2;
  m.objective = linear_function(Vector::Ones(2));
  m.lower = Eigen::Vector2d(0.0, -kInf);
  m.upper = Eigen::Vector2d(1.0, 10.0);
  const NlpProblem p = to_inequality_form(m).problem;
  const Vector x = project_start(p, Eigen::Vector2d(-5.0, 50.0));
  EXPECT_DOUBLE_EQ(x[0], 0.01);  // min(1e-2 max(1, 0), 1e-2 * 1)
  EXPECT_DOUBLE_EQ(x[1], 9.9);   // 1e-2 * max(1, 10)
  const Vector inside = project_start(p, Eigen::Vector2d(0.5, 0.0));
  EXPECT_EQ(inside, Eigen::Vector2d(0.5, 0.0));
}

TEST(Initialize, FixedVariableCannotBeMadeInterior) {
  MixedProblem m;
  m.n = 1;
  m.objective = linear_function(Vector::Ones(1));
  m.lower = Vector::Constant(1, 2.0);
  m.upper = Vector::Constant(1, 2.0);
  const NlpProblem p = to_inequality_form(m).problem;
  EXPECT_THROW(initialize(p, Vector::Zero(1), SolverOptions{}), InitializationError);
}

TEST(Initialize, ClipsMultipliersAwayFromZero) {
  // a(x) = x - 2 at x = 0 with a zero objective: the predictor multiplier is tiny.
  const auto p = onephase::testing::quadratic_nlp(Matrix::Zero(1, 1), Vector::Zero(1),
                                                  Matrix::Ones(1, 1), Vector::Constant(1, 2.0));
  const SolverOptions opts;
  const Iterate it = initialize(p, Vector::Zero(1), opts);
  EXPECT_GT(it.y[0], 0.0);
  EXPECT_GE(it.s[0] * it.y[0] / it.mu, opts.beta3 * (1.0 - 1e-12));
  EXPECT_NEAR(it.a[0] + it.s[0], it.mu * it.w[0], 1e-12);
}

TEST(Solve, AlreadyOptimalTakesNoSteps) {
  const auto p = onephase::testing::quadratic_nlp(Matrix::Identity(2, 2), Vector::Zero(2),
                                                  Matrix::Zero(0, 2), Vector(0));
  const SolveResult r = solve(p, Vector::Zero(2), SolverOptions{});
  EXPECT_EQ(r.status, Status::Optimal);
  EXPECT_EQ(r.iterations, 0);
  EXPECT_TRUE(r.trace.empty());
}

TEST(Solve, LinearProgramReachesBound) {
  const auto b = find_builtin("lp-min-x");
  ASSERT_TRUE(b);
  const SolveResult r = solve(inequality(*b), start_of(*b), SolverOptions{});
  ASSERT_EQ(r.status, Status::Optimal);
  EXPECT_NEAR(r.iterate.x[0], 1.0, 1e-5);
}

TEST(Solve, InfeasibleBoxGivesCertificate) {
  const auto b = find_builtin("infeasible-box");
  ASSERT_TRUE(b);
  const SolveResult r = solve(inequality(*b), start_of(*b), SolverOptions{});
  ASSERT_EQ(r.status, Status::PrimalInfeasible);
  EXPECT_GT(r.iterate.a.dot(r.iterate.y), 0.0);
  ASSERT_TRUE(r.certificate.gamma_inf);
  EXPECT_LE(*r.certificate.gamma_inf, 1e-6);
}

TEST(Solve, RegistryExpectationsAndTraceInvariants) {
  SolveControl control;
  control.check_invariants = true;
  for (const BuiltinProblem& b : builtin_registry()) {
    if (b.expected == Status::Unbounded) continue;  // covered by the acceptance binary
    const NlpProblem p = inequality(b);
    SolveResult r;
    ASSERT_NO_THROW(r = solve(p, start_of(b), SolverOptions{}, control)) << b.name;
    EXPECT_EQ(r.status, b.expected) << b.name;
    if (b.x_star && r.status == Status::Optimal) {
      EXPECT_LE(inf_norm(r.iterate.x - *b.x_star), 1e-5) << b.name;
    }
    if (b.f_star && r.status == Status::Optimal) {
      EXPECT_NEAR(r.iterate.f, *b.f_star, 1e-5) << b.name;
    }
    EXPECT_LE(r.hessian_evaluations, r.outer_iterations + 1) << b.name;
    EXPECT_EQ(static_cast<int>(r.trace.size()), r.iterations) << b.name;

    const double bound = 1e-8 * (1.0 + r.mu0 * r.w_norm);
    double mu = r.mu0;
    for (const TraceRecord& rec : r.trace) {
      EXPECT_LE(rec.mu, mu) << b.name << " iteration " << rec.iteration;
      if (rec.accepted && rec.kind == StepKind::Aggressive) {
        EXPECT_LT(rec.mu, rec.mu_before) << b.name << " iteration " << rec.iteration;
      }
      if (!rec.accepted) EXPECT_EQ(rec.mu, rec.mu_before) << b.name;
      EXPECT_LE(rec.primal_residual, bound) << b.name << " iteration " << rec.iteration;
      mu = rec.mu;
    }
  }
}

TEST(Solve, ProgressCallbackSeesEveryRecord) {
  const auto b = find_builtin("wachter");
  ASSERT_TRUE(b);
  int calls = 0;
  SolveControl control;
  control.progress = [&](const TraceRecord& rec) { EXPECT_EQ(rec.iteration, ++calls); };
  const SolveResult r = solve(inequality(*b), start_of(*b), SolverOptions{}, control);
  EXPECT_EQ(calls, r.iterations);
}

TEST(Solve, IterationLimitStopsEarly) {
  const auto b = find_builtin("hs071");
  ASSERT_TRUE(b);
  SolverOptions opts;
  opts.max_iter = 3;
  const SolveResult r = solve(inequality(*b), start_of(*b), opts);
  EXPECT_EQ(r.status, Status::IterationLimit);
  EXPECT_EQ(r.iterations, 3);
}

TEST(Solve, NonFiniteStartIsEvaluationError) {
  auto p = onephase::testing::quadratic_nlp(Matrix::Identity(1, 1), Vector::Zero(1),
                                            Matrix::Ones(1, 1), Vector::Ones(1));
  p.eval_f = [](const Vector&) { return std::nan(""); };
  const SolveResult r = solve(p, Vector::Zero(1), SolverOptions{});
  EXPECT_EQ(r.status, Status::EvaluationError);
}

TEST(Solve, RejectsInvalidOptions) {
  const auto p = onephase::testing::quadratic_nlp(Matrix::Identity(1, 1), Vector::Zero(1),
                                                  Matrix::Ones(1, 1), Vector::Ones(1));
  SolverOptions opts;
  opts.beta3 = opts.beta2 / 2.0;
  EXPECT_THROW(solve(p, Vector::Zero(1), opts), std::invalid_argument);
}

TEST(Solve, UnconstrainedNonconvexFindsGlobalMinimiser) {
  const auto b = find_builtin("nonconvex-1d");
  ASSERT_TRUE(b);
  const SolveResult r = solve(inequality(*b), start_of(*b), SolverOptions{});
  ASSERT_EQ(r.status, Status::Optimal);
  EXPECT_NEAR(r.iterate.x[0], 3.0, 1e-5);
  EXPECT_NEAR(r.iterate.f, -33.75, 1e-5);
}

TEST(Certificate, ReportsTerminalQuantities) {
  const auto b = find_builtin("infeasible-box");
  ASSERT_TRUE(b);
  const SolveResult r = solve(inequality(*b), start_of(*b), SolverOptions{});
  const Certificate c = certificate_of(r.iterate);
  EXPECT_EQ(c.a_dot_y, r.iterate.a.dot(r.iterate.y));
  EXPECT_EQ(c.x_norm, inf_norm(r.iterate.x));
  EXPECT_EQ(c.constraint_violation, inf_norm(r.iterate.a + r.iterate.s));
}
