#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "onephase/iterate.hpp"
#include "onephase/search.hpp"

namespace onephase {

enum class StepKind { Aggressive, Stabilization };

std::string_view to_string(StepKind kind);
std::string_view to_string(StepFailure failure);

/// One inner iteration (a direction solve plus its line search), accepted or not.
struct TraceRecord {
  int iteration = 0;  // 1-based count over all inner iterations
  int outer = 0;
  int inner = 0;
  StepKind kind = StepKind::Stabilization;
  bool accepted = false;
  StepFailure failure = StepFailure::None;
  bool filter_accept = false;
  int trials = 0;

  double gamma = 1.0;
  double delta = 0.0;
  double alpha_p = 0.0;
  double alpha_d = 0.0;
  double mu_before = 0.0;
  double mu = 0.0;
  /// sigma(y) ||grad L_mu||_inf / mu at dispatch time.
  double dispatch_ratio = 0.0;

  // Measured at the iterate after the step (the unchanged iterate on rejection).
  double primal_residual = 0.0;
  double dual_infeasibility = 0.0;  // sigma(y) ||grad L_0||_inf
  double complementarity = 0.0;     // sigma(y) ||S y||_inf
  double phi = 0.0;
  double kkt = 0.0;
  double comp_ratio_min = 0.0;  // min_i s_i y_i / mu
  double comp_ratio_max = 0.0;
  bool interior = true;

  /// ||s+ - (s + alpha_p d_s)||_inf and ||s||_inf before the step (accepted steps only).
  double slack_linear_deviation = 0.0;
  double slack_norm = 0.0;

  EvalCounters counters;
};

using SolveTrace = std::vector<TraceRecord>;

/// Quantities entering the three termination tests at the final iterate.
struct Certificate {
  double dual_infeasibility = 0.0;  // sigma(y) ||grad L_0||_inf
  double complementarity = 0.0;     // sigma(y) ||S y||_inf
  double constraint_violation = 0.0;  // ||a + s||_inf
  std::optional<double> gamma_far;
  std::optional<double> gamma_inf;
  double a_dot_y = 0.0;
  double x_norm = 0.0;
};

Certificate certificate_of(const Iterate& it);

struct SolveResult {
  Status status = Status::IterationLimit;
  Iterate iterate;
  SolveTrace trace;
  Certificate certificate;
  EvalCounters counters;
  int iterations = 0;
  int outer_iterations = 0;
  long hessian_evaluations = 0;
  double mu0 = 0.0;
  double w_norm = 0.0;
  double elapsed_seconds = 0.0;
  std::string message;
};

struct SolveControl {
  /// Called on the solving thread after every inner iteration.
  std::function<void(const TraceRecord&)> progress;
  /// Throw std::logic_error when an accepted iterate leaves the interior band or the
  /// residual bound; meant for tests.
  bool check_invariants = false;
};

/// Raised when the starting point cannot be made interior for the bound rows.
class InitializationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// x_start pushed into [l, u] away from the bounds by min(1e-2 max(1,|bound|), 1e-2 (u - l)).
Vector project_start(const NlpProblem& problem, const Vector& x_start);

/// Starting iterate from x_start. Throws InitializationError when a bound row is not strictly
/// satisfied after projection and EvaluationError on non-finite initial evaluations.
Iterate initialize(const NlpProblem& problem, const Vector& x_start, const SolverOptions& opts);

SolveResult solve(const NlpProblem& problem, const Vector& x_start, const SolverOptions& opts,
                  const SolveControl& control = {});

}  // namespace onephase
