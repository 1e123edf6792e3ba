#pragma once

#include <optional>
#include <vector>

#include "onephase/iterate.hpp"
#include "onephase/linear_core.hpp"

namespace onephase {

/// Right-hand side (b_D, b_P, b_C) for target reduction gamma.
struct Rhs {
  Vector dual;           // grad_x L_{gamma mu}(x, y)
  Vector primal;         // (1 - gamma) mu w
  Vector complementarity;  // S y - gamma mu e
};

struct Direction {
  Vector dx;
  Vector ds;
  Vector dy;
  double gamma = 1.0;
  Rhs rhs;
};

Rhs build_rhs(const Iterate& it, double gamma, double beta1);

/// Direction from a (possibly stale) factorization assembled at the hat point:
///   (M + delta I) d_x = -(b_D + J^^T S^^{-1} (Y b_P - b_C))
///   d_s = -(1 - gamma) mu w - J d_x
///   d_y =  S^^{-1} Y^^ (J^ d_x + b_P - Y^^{-1} b_C)
/// where ^ marks hat-point quantities and J is the current Jacobian.
Direction compute_direction(const FactorizedSystem& fs, const Iterate& it, double gamma,
                            double beta1);

/// ||d_x||_inf (delta + ||d_y||_inf + ||d_x||_inf^beta_exp): the cap used by both
/// fraction-to-boundary rules.
double boundary_cap(const Direction& dir, double delta, double beta_exp);

/// Largest alpha in [0,1] with s + alpha d_s >= theta_p .* min(s, cap).
double max_primal_step(const Vector& s, const Direction& dir, double delta,
                       const Vector& theta_p, double beta_exp);

/// Largest alpha in [0,1] with mu+ = (1 - (1 - gamma) alpha) mu >= theta min(mu, cap), so
/// that mu stays positive when the slacks allow a full step.
double max_barrier_step(double mu, double gamma, double cap, double theta);

/// s+ >= theta_b .* min(s, cap).
bool fraction_to_boundary_ok(const Vector& s_plus, const Vector& s, const Direction& dir,
                             double delta, const Vector& theta_b, double beta_exp);

struct DualInterval {
  double lo = 0.0;
  double hi = 1.0;
  bool empty = false;
};

/// Dual step sizes keeping s+_i (y + a d_y)_i / mu+ in [beta2, 1/beta2] and
/// y + a d_y >= theta_b y min(1, ||d_x||_inf).
DualInterval dual_interval(const Vector& s_plus, double mu_plus, const Vector& y,
                           const Vector& dy, double dx_norm, double beta2,
                           const Vector& theta_b);

/// Least-squares dual step on complementarity and classical dual feasibility at x+,
/// clipped to B and then raised towards alpha_p: min(max(zeta, alpha_p), sup B).
double dual_step_size(const Vector& s_plus, double mu_plus, const Vector& y, const Vector& dy,
                      const Vector& grad_f_plus, const Matrix& jac_plus,
                      const DualInterval& interval, double alpha_p);

/// Target reduction of the corrector from the predictor's maximal step: min(0.5, (1-a)^2).
double mehrotra_gamma(double alpha_max);

/// Minimum aggressive step length before the line search gives up.
double min_aggressive_step(double mu, const Vector& s, const Vector& w, double beta2,
                           double beta3, double beta6, const Vector& theta_b);

/// (phi, K) pairs of accepted iterates at the current primal residual level.
class Filter {
 public:
  struct Entry {
    double phi;
    double kkt;
  };

  void clear() { entries_.clear(); }
  void add(double phi, double kkt) { entries_.push_back({phi, kkt}); }
  const std::vector<Entry>& entries() const { return entries_; }

  /// True when the trial beats every entry on K by the factor (1 - beta_kkt alpha_p) while
  /// keeping phi within sqrt(K) of it. Empty filters accept nothing.
  bool accepts(double phi_plus, double kkt_plus, double alpha_p, double beta_kkt) const;

 private:
  std::vector<Entry> entries_;
};

enum class StepStatus { Success, Failure };

enum class StepFailure {
  None,
  NoDescent,         // directional pre-check rejected the direction
  StepTooSmall,      // backtracking reached the minimum step
  GuardLimit,        // aggressive dual-feasibility guard retried too often
};

/// Per-constraint fraction-to-boundary parameters derived from the options.
struct BoundaryParams {
  Vector theta_b;
  Vector theta_p;
};

BoundaryParams make_boundary_params(const NlpProblem& problem, const SolverOptions& opts);

struct StepResult {
  StepStatus status = StepStatus::Failure;
  StepFailure failure = StepFailure::None;
  std::optional<Iterate> next;
  Direction direction;
  double alpha_p = 0.0;
  double alpha_d = 0.0;
  int trials = 0;
  /// Accepted through the filter rather than sufficient decrease (stabilization only).
  bool filter_accept = false;
};

/// Predictor-corrector step with gamma chosen from the predictor's maximal step.
StepResult aggressive_step(const FactorizedSystem& fs, const Iterate& it, Evaluator& eval,
                           const SolverOptions& opts, const BoundaryParams& bp);

/// gamma = 1 step accepted on sufficient decrease of phi or by the filter.
StepResult stabilization_step(const FactorizedSystem& fs, const Iterate& it,
                              const Filter& filter, Evaluator& eval, const SolverOptions& opts,
                              const BoundaryParams& bp);

}  // namespace onephase
