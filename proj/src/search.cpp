#include "onephase/search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace onephase {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Evaluates Jacobian, objective and gradient at a trial point; y is left for the caller.
std::optional<Iterate> evaluate_trial(const Iterate& cur, PrimalTrial&& trial, Evaluator& eval) {
  Iterate next;
  next.mu = trial.mu;
  next.x = std::move(trial.x);
  next.a = std::move(trial.a);
  next.s = std::move(trial.s);
  next.w = cur.w;
  try {
    next.jac = eval.jacobian(next.x);
    next.f = eval.objective(next.x);
    next.grad_f = eval.gradient(next.x);
  } catch (const EvaluationError&) {
    return std::nullopt;
  }
  return next;
}

}  // namespace

Rhs build_rhs(const Iterate& it, double gamma, double beta1) {
  Rhs b;
  b.dual = lagrangian_gradient(it, gamma * it.mu, beta1);
  b.primal = (1.0 - gamma) * it.mu * it.w;
  b.complementarity = (it.s.cwiseProduct(it.y).array() - gamma * it.mu).matrix();
  return b;
}

Direction compute_direction(const FactorizedSystem& fs, const Iterate& it, double gamma,
                            double beta1) {
  const SchurMatrix& hat = fs.schur();
  Direction d;
  d.gamma = gamma;
  d.rhs = build_rhs(it, gamma, beta1);
  const Rhs& b = d.rhs;

  Vector rhs = -b.dual;
  if (it.m() > 0) {
    const Vector inner = (hat.y.cwiseProduct(b.primal) - b.complementarity).cwiseQuotient(hat.s);
    rhs.noalias() -= hat.jac.transpose() * inner;
  }
  d.dx = fs.solve(rhs);
  if (it.m() == 0) {
    d.ds = Vector(0);
    d.dy = Vector(0);
    return d;
  }
  d.ds = -b.primal - it.jac * d.dx;
  const Vector hat_jdx = hat.jac * d.dx;
  d.dy = hat.y.cwiseQuotient(hat.s).cwiseProduct(hat_jdx + b.primal) -
         b.complementarity.cwiseQuotient(hat.s);
  return d;
}

double boundary_cap(const Direction& dir, double delta, double beta_exp) {
  const double dxn = inf_norm(dir.dx);
  return dxn * (delta + inf_norm(dir.dy) + std::pow(dxn, beta_exp));
}

double max_primal_step(const Vector& s, const Direction& dir, double delta,
                       const Vector& theta_p, double beta_exp) {
  const double cap = boundary_cap(dir, delta, beta_exp);
  double alpha = 1.0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (dir.ds[i] >= 0.0) continue;
    const double floor = theta_p[i] * std::min(s[i], cap);
    alpha = std::min(alpha, (s[i] - floor) / (-dir.ds[i]));
  }
  return std::max(alpha, 0.0);
}

double max_barrier_step(double mu, double gamma, double cap, double theta) {
  if (gamma >= 1.0) return 1.0;
  const double floor = theta * std::min(mu, cap);
  return std::min(1.0, (1.0 - floor / mu) / (1.0 - gamma));
}

bool fraction_to_boundary_ok(const Vector& s_plus, const Vector& s, const Direction& dir,
                             double delta, const Vector& theta_b, double beta_exp) {
  const double cap = boundary_cap(dir, delta, beta_exp);
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (!(s_plus[i] >= theta_b[i] * std::min(s[i], cap))) return false;
  }
  return true;
}

DualInterval dual_interval(const Vector& s_plus, double mu_plus, const Vector& y,
                           const Vector& dy, double dx_norm, double beta2,
                           const Vector& theta_b) {
  DualInterval b;
  const double dual_floor = std::min(1.0, dx_norm);
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double lower = std::max(beta2 * mu_plus / s_plus[i], theta_b[i] * y[i] * dual_floor);
    const double upper = mu_plus / (beta2 * s_plus[i]);
    // lower <= y_i + alpha dy_i <= upper
    if (dy[i] > 0.0) {
      b.lo = std::max(b.lo, (lower - y[i]) / dy[i]);
      b.hi = std::min(b.hi, (upper - y[i]) / dy[i]);
    } else if (dy[i] < 0.0) {
      b.lo = std::max(b.lo, (upper - y[i]) / dy[i]);
      b.hi = std::min(b.hi, (lower - y[i]) / dy[i]);
    } else if (!(y[i] >= lower && y[i] <= upper)) {
      b.empty = true;
    }
  }
  if (!(b.lo <= b.hi)) b.empty = true;
  return b;
}

double dual_step_size(const Vector& s_plus, double mu_plus, const Vector& y, const Vector& dy,
                      const Vector& grad_f_plus, const Matrix& jac_plus,
                      const DualInterval& interval, double alpha_p) {
  // Residual r(zeta) = p + zeta q, stacked over complementarity and dual feasibility.
  const Vector p_comp = (s_plus.cwiseProduct(y).array() - mu_plus).matrix();
  const Vector q_comp = s_plus.cwiseProduct(dy);
  const Vector p_dual = grad_f_plus + jac_plus.transpose() * y;
  const Vector q_dual = jac_plus.transpose() * dy;

  const double qq = q_comp.squaredNorm() + q_dual.squaredNorm();
  double zeta;
  if (qq == 0.0) {
    zeta = interval.hi;
  } else {
    const double pq = p_comp.dot(q_comp) + p_dual.dot(q_dual);
    zeta = std::clamp(-pq / qq, interval.lo, interval.hi);
  }
  return std::min(std::max(zeta, alpha_p), interval.hi);
}

double mehrotra_gamma(double alpha_max) {
  return std::min(0.5, (1.0 - alpha_max) * (1.0 - alpha_max));
}

double min_aggressive_step(double mu, const Vector& s, const Vector& w, double beta2,
                           double beta3, double beta6, const Vector& theta_b) {
  double ratio = kInf;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (w[i] > 0.0) ratio = std::min(ratio, s[i] / w[i]);
  }
  if (!std::isfinite(ratio)) return 0.5;
  double factor = (beta3 - beta2) / beta3;
  if (theta_b.size() > 0) factor = std::min(factor, 1.0 - theta_b.maxCoeff());
  return std::min(0.5, beta6 / (4.0 * mu) * factor * ratio);
}

bool Filter::accepts(double phi_plus, double kkt_plus, double alpha_p, double beta_kkt) const {
  if (entries_.empty()) return false;
  for (const Entry& e : entries_) {
    if (!(kkt_plus <= (1.0 - beta_kkt * alpha_p) * e.kkt)) return false;
    if (!(phi_plus <= e.phi + std::sqrt(e.kkt))) return false;
  }
  return true;
}

BoundaryParams make_boundary_params(const NlpProblem& problem, const SolverOptions& opts) {
  BoundaryParams bp;
  bp.theta_b = Vector::Constant(problem.m, opts.theta_b);
  bp.theta_p.resize(problem.m);
  for (int i = 0; i < problem.m; ++i) {
    bp.theta_p[i] = problem.is_linear(i) ? opts.theta_p_linear : opts.theta_p_nonlinear;
  }
  return bp;
}

StepResult aggressive_step(const FactorizedSystem& fs, const Iterate& it, Evaluator& eval,
                           const SolverOptions& opts, const BoundaryParams& bp) {
  StepResult res;
  const double delta = fs.delta();

  // Predictor at gamma = 0 picks the corrector's target.
  const Direction predictor = compute_direction(fs, it, 0.0, opts.beta1);
  const double alpha_pred = max_primal_step(it.s, predictor, delta, bp.theta_p, opts.beta_exp);
  const double gamma = mehrotra_gamma(alpha_pred);

  res.direction = compute_direction(fs, it, gamma, opts.beta1);
  const Direction& dir = res.direction;

  // The direction must descend on the target barrier with multipliers
  // mu S^{-1} (gamma e + (1 - gamma) Y w).
  const Vector y_target =
      (it.mu * (gamma + (1.0 - gamma) * it.y.cwiseProduct(it.w).array()) / it.s.array())
          .matrix();
  Iterate probe_point = it;
  probe_point.y = y_target;
  const Vector probe = lagrangian_gradient(probe_point, gamma * it.mu, opts.beta1);
  // A zero d_x still moves mu and the slacks, so only ascent is rejected.
  if (!(probe.dot(dir.dx) < 0.0) && inf_norm(dir.dx) > 0.0) {
    res.failure = StepFailure::NoDescent;
    return res;
  }

  const double theta_bar =
      min_aggressive_step(it.mu, it.s, it.w, opts.beta2, opts.beta3, opts.beta6, bp.theta_b);
  const double dx_norm = inf_norm(dir.dx);
  double alpha = std::min(
      max_primal_step(it.s, dir, delta, bp.theta_p, opts.beta_exp),
      max_barrier_step(it.mu, gamma, boundary_cap(dir, delta, opts.beta_exp), opts.theta_b));
  int guard_retries = 0;

  while (true) {
    if (alpha <= theta_bar) {
      res.failure = StepFailure::StepTooSmall;
      return res;
    }
    ++res.trials;
    PrimalTrial trial = trial_primal(it, dir, alpha, eval);
    if (trial.status != UpdateStatus::Ok ||
        !fraction_to_boundary_ok(trial.s, it.s, dir, delta, bp.theta_b, opts.beta_exp)) {
      alpha *= opts.beta6;
      continue;
    }
    const DualInterval interval =
        dual_interval(trial.s, trial.mu, it.y, dir.dy, dx_norm, opts.beta2, bp.theta_b);
    if (interval.empty) {
      alpha *= opts.beta6;
      continue;
    }
    std::optional<Iterate> next = evaluate_trial(it, std::move(trial), eval);
    if (!next) {
      alpha *= opts.beta6;
      continue;
    }
    const double alpha_d = dual_step_size(next->s, next->mu, it.y, dir.dy, next->grad_f,
                                          next->jac, interval, alpha);
    next->y = it.y + alpha_d * dir.dy;
    if (!check_interior(*next, opts.beta2)) {
      alpha *= opts.beta6;
      continue;
    }
    if (next->mu / it.mu < 1.0 - opts.beta8) {
      const double dual_inf = inf_norm(lagrangian_gradient(*next, next->mu, opts.beta1));
      const double tau = next->mu / ((1.0 - opts.beta8) * sigma(next->y) * dual_inf);
      if (tau < 1.0) {
        if (++guard_retries > opts.max_guard_retries) {
          res.failure = StepFailure::GuardLimit;
          return res;
        }
        alpha = std::max(opts.beta8 * opts.beta8, alpha * tau * tau);
        continue;
      }
    }
    res.status = StepStatus::Success;
    res.alpha_p = alpha;
    res.alpha_d = alpha_d;
    res.next = std::move(next);
    return res;
  }
}

StepResult stabilization_step(const FactorizedSystem& fs, const Iterate& it,
                              const Filter& filter, Evaluator& eval, const SolverOptions& opts,
                              const BoundaryParams& bp) {
  StepResult res;
  const double delta = fs.delta();
  res.direction = compute_direction(fs, it, 1.0, opts.beta1);
  const Direction& dir = res.direction;

  const double slope = barrier_gradient(it, opts.beta1).dot(dir.dx);
  if (!(slope < 0.0) && inf_norm(dir.dx) > 0.0) {
    res.failure = StepFailure::NoDescent;
    return res;
  }

  const double phi = merit_phi(it, opts.beta1);
  const double dev = complementarity_deviation(it);
  const double comp_term = dev * dev * dev / (it.mu * it.mu);
  const double dx_sq = dir.dx.squaredNorm();
  const double dx_norm = inf_norm(dir.dx);
  double alpha = max_primal_step(it.s, dir, delta, bp.theta_p, opts.beta_exp);

  while (true) {
    if (alpha <= opts.beta5) {
      res.failure = StepFailure::StepTooSmall;
      return res;
    }
    ++res.trials;
    PrimalTrial trial = trial_primal(it, dir, alpha, eval);
    if (trial.status != UpdateStatus::Ok ||
        !fraction_to_boundary_ok(trial.s, it.s, dir, delta, bp.theta_b, opts.beta_exp)) {
      alpha *= opts.beta6;
      continue;
    }
    const DualInterval interval =
        dual_interval(trial.s, trial.mu, it.y, dir.dy, dx_norm, opts.beta2, bp.theta_b);
    if (interval.empty) {
      alpha *= opts.beta6;
      continue;
    }
    std::optional<Iterate> next = evaluate_trial(it, std::move(trial), eval);
    if (!next) {
      alpha *= opts.beta6;
      continue;
    }
    const double alpha_d = dual_step_size(next->s, next->mu, it.y, dir.dy, next->grad_f,
                                          next->jac, interval, alpha);
    next->y = it.y + alpha_d * dir.dy;
    if (!check_interior(*next, opts.beta2)) {
      alpha *= opts.beta6;
      continue;
    }

    const double phi_plus = merit_phi(*next, opts.beta1);
    const double predicted =
        alpha * opts.beta4 * (0.5 * (slope - 0.5 * delta * alpha * dx_sq) - comp_term);
    const bool sufficient = phi_plus <= phi + predicted;
    bool via_filter = false;
    if (!sufficient) {
      via_filter = filter.accepts(phi_plus, merit_kkt(*next, opts.beta1), alpha, opts.beta_kkt);
    }
    if (sufficient || via_filter) {
      res.status = StepStatus::Success;
      res.filter_accept = via_filter;
      res.alpha_p = alpha;
      res.alpha_d = alpha_d;
      res.next = std::move(next);
      return res;
    }
    alpha *= opts.beta6;
  }
}

}  // namespace onephase
