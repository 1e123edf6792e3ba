#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <string_view>

#include "onephase/linear_core.hpp"
#include "onephase/problem.hpp"
#include "onephase/types.hpp"

namespace onephase {

/// Algorithm parameters. Defaults are the published tuning.
struct SolverOptions {
  double eps_opt = 1e-6;
  double eps_far = 1e-3;
  double eps_inf = 1e-6;
  double eps_unbd = 1e-12;

  double beta1 = 1e-4;    // modified-barrier linear term
  double beta2 = 0.01;    // complementarity band kept by every iterate
  double beta3 = 0.02;    // tighter band required before an aggressive step
  double beta4 = 0.2;     // sufficient decrease on phi
  double beta5 = 0.03125; // minimum stabilization step (2^-5)
  double beta6 = 0.5;     // backtracking factor
  double beta_kkt = 0.01; // KKT-merit reduction factor in the filter
  double beta_exp = 0.5;  // exponent of ||d_x|| in the fraction-to-boundary cap
  double beta8 = 0.9;     // dual-feasibility guard on aggressive steps
  double theta_b = 0.1;
  double theta_p_linear = 0.1;
  double theta_p_nonlinear = 0.25;

  DeltaParams delta;
  int j_max = 2;

  double beta10 = 1e-4;  // minimum initial slack shift
  double beta11 = 1e-2;  // initial dual clip, lower
  double beta12 = 1e3;   // initial dual clip, upper
  double mu_scale = 1.0;

  int max_iter = 3000;
  double max_time = std::numeric_limits<double>::infinity();
  /// Guard retries allowed per aggressive step before it is declared a failure.
  int max_guard_retries = 10;
  LinearBackend backend = LinearBackend::Auto;

  /// Throws std::invalid_argument when a parameter is outside its admissible range.
  void validate() const;
};

/// (mu, x, s, y) with the fixed shift w and evaluations cached at x.
struct Iterate {
  double mu = 0.0;
  Vector x;
  Vector s;
  Vector y;
  Vector w;

  double f = 0.0;
  Vector grad_f;
  Vector a;
  Matrix jac;

  Eigen::Index n() const { return x.size(); }
  Eigen::Index m() const { return s.size(); }
};

/// Evaluates f, grad f, a and the Jacobian at it.x.
void evaluate_at(Iterate& it, Evaluator& eval);

/// a(x) + s - mu*w, in the infinity norm.
double primal_residual(const Iterate& it);

enum class Status {
  Optimal,
  PrimalInfeasible,
  Unbounded,
  MaxDelta,
  IterationLimit,
  TimeLimit,
  EvaluationError,
};

std::string_view to_string(Status status);

// ---------------------------------------------------------------------------
// Updates and invariants.

enum class UpdateStatus { Ok, EvaluationFailure, NonInterior };

/// Trial primal point: mu+ = (1-(1-gamma)alpha_p) mu, x+ = x + alpha_p d_x, s+ = mu+ w - a(x+).
struct PrimalTrial {
  UpdateStatus status = UpdateStatus::Ok;
  double mu = 0.0;
  Vector x;
  Vector a;
  Vector s;
};

struct Direction;

/// Evaluates only the constraints at x+. s+ <= 0 or mu+ <= 0 is reported as NonInterior.
PrimalTrial trial_primal(const Iterate& cur, const Direction& dir, double alpha_p,
                         Evaluator& eval);

struct UpdateResult {
  UpdateStatus status = UpdateStatus::Ok;
  Iterate next;
};

/// Completes a trial with y+ and evaluates the remaining derivatives at x+.
UpdateResult complete_trial(const Iterate& cur, PrimalTrial trial, Vector y_plus,
                            Evaluator& eval);

/// Full iterate update with primal step alpha_p and dual step alpha_d.
UpdateResult update_iterate(const Iterate& cur, const Direction& dir, double alpha_p,
                            double alpha_d, Evaluator& eval);

/// s, y, mu > 0 and s_i y_i / mu in [beta2, 1/beta2].
bool check_interior(const Iterate& it, double beta2);

// ---------------------------------------------------------------------------
// Termination certificates and switching.

/// 100 / max(100, ||y||_inf).
double sigma(const Vector& y);

/// grad f + J^T (y - mu_bar*beta1*e) at the cached point.
Vector lagrangian_gradient(const Iterate& it, double mu_bar, double beta1);

bool terminate_optimal(const Iterate& it, double eps_opt);

/// ||J^T y||_1 / (a^T y); nullopt when a^T y <= 0.
std::optional<double> gamma_far(const Iterate& it);

/// (||J^T y||_1 + s^T y) / ||y||_1; nullopt when y = 0.
std::optional<double> gamma_inf(const Iterate& it);

bool terminate_infeasible(const Iterate& it, double eps_far, double eps_inf);

/// ||x||_inf >= 1 / eps_unbd.
bool terminate_unbounded(const Iterate& it, double eps_unbd);

/// Conditions under which an aggressive (mu-reducing) step is attempted.
/// Always false for problems without constraints.
bool aggressive_criterion(const Iterate& it, double beta1, double beta3);

// ---------------------------------------------------------------------------
// Merit functions. Points outside the barrier domain give +infinity.

double merit_psi(const Iterate& it, double beta1);
double merit_phi(const Iterate& it, double beta1);
double merit_kkt(const Iterate& it, double beta1);

/// grad psi_mu(x) = grad f - mu*beta1*J^T e + mu J^T (mu*w - a)^{-1}.
Vector barrier_gradient(const Iterate& it, double beta1);

/// ||S y - mu e||_inf.
double complementarity_deviation(const Iterate& it);

}  // namespace onephase
