#include "onephase/iterate.hpp"

#include <algorithm>
#include <stdexcept>

#include "onephase/search.hpp"

namespace onephase {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

bool in_open_unit(double v) { return v > 0.0 && v < 1.0; }

}  // namespace

void SolverOptions::validate() const {
  require(eps_opt > 0.0, "eps_opt must be positive");
  require(in_open_unit(eps_far), "eps_far must lie in (0,1)");
  require(in_open_unit(eps_inf), "eps_inf must lie in (0,1)");
  require(in_open_unit(eps_unbd), "eps_unbd must lie in (0,1)");
  require(in_open_unit(beta1), "beta1 must lie in (0,1)");
  require(in_open_unit(beta2), "beta2 must lie in (0,1)");
  require(beta3 > beta2 && beta3 < 1.0, "beta3 must lie in (beta2,1)");
  require(in_open_unit(beta4), "beta4 must lie in (0,1)");
  require(in_open_unit(beta5), "beta5 must lie in (0,1)");
  require(in_open_unit(beta6), "beta6 must lie in (0,1)");
  require(in_open_unit(beta_kkt), "beta_kkt must lie in (0,1)");
  require(in_open_unit(beta_exp), "beta_exp must lie in (0,1)");
  require(beta8 > 0.5 && beta8 < 1.0, "beta8 must lie in (0.5,1)");
  require(in_open_unit(theta_b), "theta_b must lie in (0,1)");
  require(theta_p_linear >= theta_b && theta_p_linear < 1.0,
          "theta_p_linear must lie in [theta_b,1)");
  require(theta_p_nonlinear >= theta_b && theta_p_nonlinear < 1.0,
          "theta_p_nonlinear must lie in [theta_b,1)");
  delta.validate();
  require(j_max >= 1, "j_max must be at least 1");
  require(in_open_unit(beta10), "beta10 must lie in (0,1)");
  require(beta11 > 0.0, "beta11 must be positive");
  require(beta12 >= beta11, "beta12 must be at least beta11");
  require(mu_scale > 0.0, "mu_scale must be positive");
  require(max_iter >= 0, "max_iter must be nonnegative");
  require(max_time > 0.0, "max_time must be positive");
  require(max_guard_retries >= 0, "max_guard_retries must be nonnegative");
}

void evaluate_at(Iterate& it, Evaluator& eval) {
  it.a = eval.constraints(it.x);
  it.jac = eval.jacobian(it.x);
  it.f = eval.objective(it.x);
  it.grad_f = eval.gradient(it.x);
}

double primal_residual(const Iterate& it) {
  if (it.m() == 0) return 0.0;
  return inf_norm(it.a + it.s - it.mu * it.w);
}

std::string_view to_string(Status status) {
  switch (status) {
    case Status::Optimal:
      return "optimal";
    case Status::PrimalInfeasible:
      return "primal_infeasible";
    case Status::Unbounded:
      return "unbounded";
    case Status::MaxDelta:
      return "max_delta";
    case Status::IterationLimit:
      return "iteration_limit";
    case Status::TimeLimit:
      return "time_limit";
    case Status::EvaluationError:
      return "evaluation_error";
  }
  return "unknown";
}

PrimalTrial trial_primal(const Iterate& cur, const Direction& dir, double alpha_p,
                         Evaluator& eval) {
  PrimalTrial t;
  t.mu = (1.0 - (1.0 - dir.gamma) * alpha_p) * cur.mu;
  // gamma = 1 keeps mu bit-identical.
  if (dir.gamma == 1.0) t.mu = cur.mu;
  t.x = cur.x + alpha_p * dir.dx;
  try {
    t.a = eval.constraints(t.x);
  } catch (const EvaluationError&) {
    t.status = UpdateStatus::EvaluationFailure;
    return t;
  }
  t.s = t.mu * cur.w - t.a;
  if (!(t.mu > 0.0) || (t.s.size() > 0 && !(t.s.minCoeff() > 0.0))) {
    t.status = UpdateStatus::NonInterior;
  }
  return t;
}

UpdateResult complete_trial(const Iterate& cur, PrimalTrial trial, Vector y_plus,
                            Evaluator& eval) {
  UpdateResult r;
  if (trial.status != UpdateStatus::Ok) {
    r.status = trial.status;
    return r;
  }
  Iterate& next = r.next;
  next.mu = trial.mu;
  next.x = std::move(trial.x);
  next.a = std::move(trial.a);
  next.s = std::move(trial.s);
  next.y = std::move(y_plus);
  next.w = cur.w;
  if (next.y.size() > 0 && !(next.y.minCoeff() > 0.0)) {
    r.status = UpdateStatus::NonInterior;
    return r;
  }
  try {
    next.jac = eval.jacobian(next.x);
    next.f = eval.objective(next.x);
    next.grad_f = eval.gradient(next.x);
  } catch (const EvaluationError&) {
    r.status = UpdateStatus::EvaluationFailure;
  }
  return r;
}

UpdateResult update_iterate(const Iterate& cur, const Direction& dir, double alpha_p,
                            double alpha_d, Evaluator& eval) {
  PrimalTrial trial = trial_primal(cur, dir, alpha_p, eval);
  Vector y_plus = cur.y + alpha_d * dir.dy;
  return complete_trial(cur, std::move(trial), std::move(y_plus), eval);
}

bool check_interior(const Iterate& it, double beta2) {
  if (!(it.mu > 0.0)) return false;
  for (Eigen::Index i = 0; i < it.m(); ++i) {
    if (!(it.s[i] > 0.0) || !(it.y[i] > 0.0)) return false;
    const double ratio = it.s[i] * it.y[i] / it.mu;
    if (!(ratio >= beta2 && ratio <= 1.0 / beta2)) return false;
  }
  return true;
}

double sigma(const Vector& y) { return 100.0 / std::max(100.0, inf_norm(y)); }

Vector lagrangian_gradient(const Iterate& it, double mu_bar, double beta1) {
  return modified_lagrangian_gradient(it.grad_f, it.jac, it.y, mu_bar, beta1);
}

bool terminate_optimal(const Iterate& it, double eps_opt) {
  const double scale = sigma(it.y);
  if (scale * inf_norm(lagrangian_gradient(it, 0.0, 0.0)) > eps_opt) return false;
  if (it.m() == 0) return true;
  if (scale * inf_norm(it.s.cwiseProduct(it.y)) > eps_opt) return false;
  return inf_norm(it.a + it.s) <= eps_opt;
}

std::optional<double> gamma_far(const Iterate& it) {
  if (it.m() == 0) return std::nullopt;
  const double ay = it.a.dot(it.y);
  if (!(ay > 0.0)) return std::nullopt;
  return one_norm(it.jac.transpose() * it.y) / ay;
}

std::optional<double> gamma_inf(const Iterate& it) {
  const double ynorm = one_norm(it.y);
  if (!(ynorm > 0.0)) return std::nullopt;
  return (one_norm(it.jac.transpose() * it.y) + it.s.dot(it.y)) / ynorm;
}

bool terminate_infeasible(const Iterate& it, double eps_far, double eps_inf) {
  const auto far = gamma_far(it);
  if (!far || *far > eps_far) return false;
  const auto inf = gamma_inf(it);
  return inf && *inf <= eps_inf;
}

bool terminate_unbounded(const Iterate& it, double eps_unbd) {
  return inf_norm(it.x) >= 1.0 / eps_unbd;
}

bool aggressive_criterion(const Iterate& it, double beta1, double beta3) {
  if (it.m() == 0) return false;
  const Vector grad_lag = lagrangian_gradient(it, it.mu, beta1);
  if (sigma(it.y) * inf_norm(grad_lag) > it.mu) return false;
  const Vector shifted = it.grad_f - beta1 * it.mu * it.jac.transpose() * Vector::Ones(it.m());
  if (one_norm(grad_lag) > one_norm(shifted) + it.s.dot(it.y)) return false;
  for (Eigen::Index i = 0; i < it.m(); ++i) {
    const double ratio = it.s[i] * it.y[i] / it.mu;
    if (!(ratio >= beta3 && ratio <= 1.0 / beta3)) return false;
  }
  return true;
}

double merit_psi(const Iterate& it, double beta1) {
  double barrier = 0.0;
  for (Eigen::Index i = 0; i < it.m(); ++i) {
    const double gap = it.mu * it.w[i] - it.a[i];
    if (!(gap > 0.0)) return std::numeric_limits<double>::infinity();
    barrier += beta1 * it.a[i] + std::log(gap);
  }
  return it.f - it.mu * barrier;
}

double complementarity_deviation(const Iterate& it) {
  if (it.m() == 0) return 0.0;
  return inf_norm((it.s.cwiseProduct(it.y).array() - it.mu).matrix());
}

double merit_phi(const Iterate& it, double beta1) {
  const double psi = merit_psi(it, beta1);
  if (!std::isfinite(psi)) return psi;
  const double dev = complementarity_deviation(it);
  return psi + dev * dev * dev / (it.mu * it.mu);
}

double merit_kkt(const Iterate& it, double beta1) {
  const double dual = inf_norm(lagrangian_gradient(it, it.mu, beta1));
  return sigma(it.y) * std::max(dual, complementarity_deviation(it));
}

Vector barrier_gradient(const Iterate& it, double beta1) {
  if (it.m() == 0) return it.grad_f;
  const Vector inv_gap = (it.mu * it.w - it.a).cwiseInverse();
  const Vector weights = (it.mu * inv_gap.array() - it.mu * beta1).matrix();
  return it.grad_f + it.jac.transpose() * weights;
}

}  // namespace onephase
