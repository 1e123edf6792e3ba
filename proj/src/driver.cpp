#include "onephase/driver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>
#include <sstream>

namespace onephase {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPushOffRelative = 1e-2;
constexpr double kPushOffInterval = 1e-2;

struct VariableBounds {
  Vector lower;
  Vector upper;
};

// Recovers l <= x <= u from the rows flagged as bounds. A bound row is +-x_j + c, so its
// Jacobian row has a single entry of magnitude one and c = a_i(x) -+ x_j.
VariableBounds bounds_from_rows(const NlpProblem& problem, const Vector& x, const Vector& a,
                                const Matrix& jac) {
  VariableBounds b{Vector::Constant(problem.n, -kInf), Vector::Constant(problem.n, kInf)};
  for (int i : problem.bound_indices) {
    Eigen::Index j = 0;
    jac.row(i).cwiseAbs().maxCoeff(&j);
    const double coeff = jac(i, j);
    const double c = a[i] - coeff * x[j];
    if (coeff < 0.0) {
      b.lower[j] = std::max(b.lower[j], c);
    } else {
      b.upper[j] = std::min(b.upper[j], -c);
    }
  }
  return b;
}

Iterate initialize_with(Evaluator& eval, const Vector& x_start, const SolverOptions& opts) {
  const NlpProblem& problem = eval.problem();
  Iterate it;
  it.x = project_start(problem, x_start);
  evaluate_at(it, eval);

  const int m = problem.m;
  if (m == 0) {
    it.mu = opts.mu_scale;
    it.s = it.y = it.w = Vector(0);
    return it;
  }

  std::vector<bool> is_bound(m, false);
  for (int i : problem.bound_indices) {
    is_bound[i] = true;
    if (!(-it.a[i] > 0.0)) {
      std::ostringstream msg;
      msg << "bound row " << i << " is not strictly satisfied at the projected start";
      throw InitializationError(msg.str());
    }
  }

  const Vector s_raw = -it.a;
  Vector s_tilde = (s_raw.array() + std::max(-2.0 * s_raw.minCoeff(), opts.beta10)).matrix();
  Vector y_tilde = Vector::Ones(m);

  // One affine-scaling direction from (x0, s~, e) with mu = 0.
  {
    const Matrix hess = eval.hessian(it.x, y_tilde);
    auto schur = std::make_shared<const SchurMatrix>(
        assemble_schur(hess, it.jac, it.x, s_tilde, y_tilde, 0.0, opts.backend));
    DeltaState state{opts.delta, 0.0};
    FactorizeOutcome outcome = factorize_with_shift(schur, 0.0, state);
    if (outcome.system) {
      Iterate probe = it;
      probe.mu = 0.0;
      probe.s = s_tilde;
      probe.y = y_tilde;
      probe.w = Vector::Zero(m);
      const Direction dir = compute_direction(*outcome.system, probe, 0.0, opts.beta1);
      if (dir.dy.allFinite()) y_tilde += dir.dy;
    }
  }
  s_tilde = -it.a;

  y_tilde.array() += std::max(-2.0 * y_tilde.minCoeff(), 0.0);
  const Vector grad_lag0 = modified_lagrangian_gradient(it.grad_f, it.jac, y_tilde, 0.0, 0.0);
  const double eps_s = std::max(-2.0 * s_tilde.minCoeff(),
                                inf_norm(grad_lag0) / (y_tilde.norm() + 1.0));
  for (int i = 0; i < m; ++i) {
    if (!is_bound[i]) s_tilde[i] += eps_s;
  }

  const double s_sum = s_tilde.sum();
  if (s_sum > 0.0) y_tilde.array() += s_tilde.dot(y_tilde) / (2.0 * s_sum);
  y_tilde = y_tilde.cwiseMax(opts.beta11).cwiseMin(opts.beta12);
  const double s_shift = s_tilde.dot(y_tilde) / (2.0 * y_tilde.sum());
  for (int i = 0; i < m; ++i) {
    if (is_bound[i]) continue;
    s_tilde[i] += s_shift;
    if (!(s_tilde[i] > 0.0)) s_tilde[i] = opts.beta10;
  }

  const double mu_tilde = s_tilde.dot(y_tilde) / m;
  it.mu = opts.mu_scale * mu_tilde;
  it.s = s_tilde;
  it.w = (it.a + it.s) / it.mu;
  for (int i = 0; i < m; ++i) {
    if (is_bound[i]) it.w[i] = 0.0;
  }
  const Vector lo = (opts.beta3 * it.mu / it.s.array()).matrix();
  const Vector hi = (it.mu / (opts.beta3 * it.s.array())).matrix();
  it.y = y_tilde.cwiseMax(lo).cwiseMin(hi);
  return it;
}

void measure(TraceRecord& rec, const Iterate& it, const SolverOptions& opts) {
  const double scale = sigma(it.y);
  rec.mu = it.mu;
  rec.primal_residual = primal_residual(it);
  rec.dual_infeasibility = scale * inf_norm(lagrangian_gradient(it, 0.0, 0.0));
  rec.complementarity = it.m() > 0 ? scale * inf_norm(it.s.cwiseProduct(it.y)) : 0.0;
  rec.phi = merit_phi(it, opts.beta1);
  rec.kkt = merit_kkt(it, opts.beta1);
  if (it.m() > 0) {
    const Vector ratio = it.s.cwiseProduct(it.y) / it.mu;
    rec.comp_ratio_min = ratio.minCoeff();
    rec.comp_ratio_max = ratio.maxCoeff();
  } else {
    rec.comp_ratio_min = rec.comp_ratio_max = 1.0;
  }
  rec.interior = check_interior(it, opts.beta2);
}

void reset_filter(Filter& filter, const Iterate& it, const SolverOptions& opts) {
  filter.clear();
  filter.add(merit_phi(it, opts.beta1), merit_kkt(it, opts.beta1));
}

}  // namespace

std::string_view to_string(StepKind kind) {
  return kind == StepKind::Aggressive ? "aggressive" : "stabilization";
}

std::string_view to_string(StepFailure failure) {
  switch (failure) {
    case StepFailure::None:
      return "none";
    case StepFailure::NoDescent:
      return "no_descent";
    case StepFailure::StepTooSmall:
      return "step_too_small";
    case StepFailure::GuardLimit:
      return "guard_limit";
  }
  return "unknown";
}

Certificate certificate_of(const Iterate& it) {
  Certificate c;
  const double scale = sigma(it.y);
  c.dual_infeasibility = scale * inf_norm(lagrangian_gradient(it, 0.0, 0.0));
  if (it.m() > 0) {
    c.complementarity = scale * inf_norm(it.s.cwiseProduct(it.y));
    c.constraint_violation = inf_norm(it.a + it.s);
    c.a_dot_y = it.a.dot(it.y);
  }
  c.gamma_far = gamma_far(it);
  c.gamma_inf = gamma_inf(it);
  c.x_norm = inf_norm(it.x);
  return c;
}

Vector project_start(const NlpProblem& problem, const Vector& x_start) {
  if (x_start.size() != problem.n || !x_start.allFinite()) {
    throw std::invalid_argument("starting point must be finite with one entry per variable");
  }
  if (problem.bound_indices.empty()) return x_start;
  // Bound rows are affine, so derivatives at x_start describe them everywhere.
  const Vector a = problem.eval_a(x_start);
  const Matrix jac = problem.eval_jac(x_start);
  const VariableBounds b = bounds_from_rows(problem, x_start, a, jac);

  Vector x = x_start;
  for (int j = 0; j < problem.n; ++j) {
    const double l = b.lower[j];
    const double u = b.upper[j];
    const double width = u - l;
    if (std::isfinite(l)) {
      double push = kPushOffRelative * std::max(1.0, std::abs(l));
      if (std::isfinite(u)) push = std::min(push, kPushOffInterval * width);
      x[j] = std::max(x[j], l + push);
    }
    if (std::isfinite(u)) {
      double push = kPushOffRelative * std::max(1.0, std::abs(u));
      if (std::isfinite(l)) push = std::min(push, kPushOffInterval * width);
      x[j] = std::min(x[j], u - push);
    }
  }
  return x;
}

Iterate initialize(const NlpProblem& problem, const Vector& x_start, const SolverOptions& opts) {
  problem.validate();
  opts.validate();
  Evaluator eval(problem);
  return initialize_with(eval, x_start, opts);
}

SolveResult solve(const NlpProblem& problem, const Vector& x_start, const SolverOptions& opts,
                  const SolveControl& control) {
  problem.validate();
  opts.validate();
  using Clock = std::chrono::steady_clock;
  const auto started = Clock::now();
  const auto elapsed = [&] {
    return std::chrono::duration<double>(Clock::now() - started).count();
  };

  Evaluator eval(problem);
  SolveResult res;
  auto finish = [&](Status status, std::string message = {}) {
    res.status = status;
    res.message = std::move(message);
    res.counters = eval.counters();
    res.hessian_evaluations = eval.counters().hessian;
    res.certificate = certificate_of(res.iterate);
    res.elapsed_seconds = elapsed();
    return res;
  };

  Iterate& it = res.iterate;
  try {
    it = initialize_with(eval, x_start, opts);
  } catch (const EvaluationError& e) {
    res.status = Status::EvaluationError;
    res.message = e.what();
    res.counters = eval.counters();
    res.elapsed_seconds = elapsed();
    return res;
  }
  res.mu0 = it.mu;
  res.w_norm = inf_norm(it.w);
  const double residual_bound = 1e-8 * (1.0 + res.mu0 * res.w_norm);

  const BoundaryParams bp = make_boundary_params(problem, opts);
  Filter filter;
  reset_filter(filter, it, opts);
  DeltaState delta_state{opts.delta, 0.0};
  double delta = 0.0;

  try {
    while (true) {
      // New outer iteration: one Hessian evaluation, fresh Schur matrix at the hat point.
      ++res.outer_iterations;
      const Vector weights = (it.y.array() - it.mu * opts.beta1).matrix();
      const Matrix hess = eval.hessian(it.x, weights);
      auto schur = std::make_shared<const SchurMatrix>(
          assemble_schur(hess, it.jac, it.x, it.s, it.y, it.mu, opts.backend));
      FactorizeOutcome outcome = factorize_with_shift(schur, delta, delta_state);
      if (!outcome.system) return finish(Status::MaxDelta, "no admissible shift for the Schur matrix");
      std::optional<FactorizedSystem> fs = std::move(outcome.system);
      delta = fs->delta();

      int j = 1;
      while (j <= opts.j_max) {
        if (terminate_optimal(it, opts.eps_opt)) return finish(Status::Optimal);
        if (terminate_infeasible(it, opts.eps_far, opts.eps_inf)) {
          return finish(Status::PrimalInfeasible);
        }
        if (terminate_unbounded(it, opts.eps_unbd)) return finish(Status::Unbounded);
        if (res.iterations >= opts.max_iter) return finish(Status::IterationLimit);
        if (elapsed() >= opts.max_time) return finish(Status::TimeLimit);
        ++res.iterations;

        TraceRecord rec;
        rec.iteration = res.iterations;
        rec.outer = res.outer_iterations;
        rec.inner = j;
        rec.delta = delta;
        rec.mu_before = it.mu;
        const double dual_mu = inf_norm(lagrangian_gradient(it, it.mu, opts.beta1));
        rec.dispatch_ratio = sigma(it.y) * dual_mu / it.mu;

        const bool aggressive = aggressive_criterion(it, opts.beta1, opts.beta3);
        rec.kind = aggressive ? StepKind::Aggressive : StepKind::Stabilization;
        StepResult step = aggressive ? aggressive_step(*fs, it, eval, opts, bp)
                                     : stabilization_step(*fs, it, filter, eval, opts, bp);
        rec.gamma = step.direction.gamma;
        rec.trials = step.trials;
        rec.failure = step.failure;

        if (step.status == StepStatus::Success) {
          Iterate& next = *step.next;
          rec.accepted = true;
          rec.filter_accept = step.filter_accept;
          rec.alpha_p = step.alpha_p;
          rec.alpha_d = step.alpha_d;
          if (it.m() > 0) {
            rec.slack_norm = inf_norm(it.s);
            rec.slack_linear_deviation =
                inf_norm(next.s - (it.s + step.alpha_p * step.direction.ds));
          }
          it = std::move(next);
          if (aggressive) {
            reset_filter(filter, it, opts);
          } else {
            filter.add(merit_phi(it, opts.beta1), merit_kkt(it, opts.beta1));
          }
          measure(rec, it, opts);
          rec.counters = eval.counters();
          if (control.check_invariants &&
              (!rec.interior || rec.primal_residual > residual_bound)) {
            throw std::logic_error("accepted iterate violates the interior invariants");
          }
          if (control.progress) control.progress(rec);
          res.trace.push_back(rec);
          ++j;
          continue;
        }

        measure(rec, it, opts);
        rec.counters = eval.counters();
        if (control.progress) control.progress(rec);
        res.trace.push_back(rec);
        if (j > 1) break;

        // First inner iteration failed: raise the shift and retry with the same Schur matrix.
        const double dx_norm = inf_norm(step.direction.dx);
        while (true) {
          const std::optional<double> raised = escalate_delta(delta_state, delta, dual_mu, dx_norm);
          if (!raised) return finish(Status::MaxDelta, "shift exceeded its maximum");
          delta = *raised;
          std::optional<FactorizedSystem> refactored = FactorizedSystem::try_factorize(schur, delta);
          if (refactored) {
            fs = std::move(refactored);
            break;
          }
        }
      }
    }
  } catch (const EvaluationError& e) {
    return finish(Status::EvaluationError, e.what());
  }
}

}  // namespace onephase
