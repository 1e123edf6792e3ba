#include "onephase/problem.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>

namespace onephase {

namespace {

bool contains_sorted(const std::vector<int>& v, int value) {
  return std::binary_search(v.begin(), v.end(), value);
}

void check_index_set(const std::vector<int>& rows, int m, const char* what) {
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (rows[k] < 0 || rows[k] >= m) {
      throw std::invalid_argument(std::string(what) + " index out of range: " +
                                  std::to_string(rows[k]));
    }
    if (k > 0 && rows[k] <= rows[k - 1]) {
      throw std::invalid_argument(std::string(what) + " must be sorted and unique");
    }
  }
}

int first_non_finite(const Eigen::Ref<const Vector>& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) return static_cast<int>(i);
  }
  return -1;
}

void require_finite(const std::string& quantity, const Eigen::Ref<const Vector>& flat) {
  const int bad = first_non_finite(flat);
  if (bad >= 0) {
    std::ostringstream msg;
    msg << quantity << " is not finite at entry " << bad;
    throw EvaluationError(quantity, bad, msg.str());
  }
}

void require_size(const std::string& quantity, Eigen::Index got, Eigen::Index want) {
  if (got != want) {
    std::ostringstream msg;
    msg << quantity << " has size " << got << ", expected " << want;
    throw EvaluationError(quantity, -1, msg.str());
  }
}

}  // namespace

bool NlpProblem::is_bound(int row) const { return contains_sorted(bound_indices, row); }

bool NlpProblem::is_linear(int row) const { return contains_sorted(linear_indices, row); }

void NlpProblem::validate() const {
  if (n <= 0) throw std::invalid_argument("problem '" + name + "' needs n > 0");
  if (m < 0) throw std::invalid_argument("problem '" + name + "' has negative m");
  if (!eval_f || !eval_grad_f || !eval_hess_lag) {
    throw std::invalid_argument("problem '" + name + "' is missing objective callbacks");
  }
  if (m > 0 && (!eval_a || !eval_jac)) {
    throw std::invalid_argument("problem '" + name + "' is missing constraint callbacks");
  }
  check_index_set(bound_indices, m, "bound_indices");
  check_index_set(linear_indices, m, "linear_indices");
}

EvaluationError::EvaluationError(std::string quantity, int coordinate, const std::string& what)
    : std::runtime_error(what), quantity_(std::move(quantity)), coordinate_(coordinate) {}

double Evaluator::objective(const Vector& x) {
  ++counters_.objective;
  const double f = problem_->eval_f(x);
  if (!std::isfinite(f)) throw EvaluationError("objective", 0, "objective is not finite");
  return f;
}

Vector Evaluator::gradient(const Vector& x) {
  ++counters_.gradient;
  Vector g = problem_->eval_grad_f(x);
  require_size("gradient", g.size(), problem_->n);
  require_finite("gradient", g);
  return g;
}

Vector Evaluator::constraints(const Vector& x) {
  ++counters_.constraints;
  if (problem_->m == 0) return Vector(0);
  Vector a = problem_->eval_a(x);
  require_size("constraints", a.size(), problem_->m);
  require_finite("constraints", a);
  return a;
}

Matrix Evaluator::jacobian(const Vector& x) {
  ++counters_.jacobian;
  if (problem_->m == 0) return Matrix(0, problem_->n);
  Matrix jac = problem_->eval_jac(x);
  require_size("jacobian rows", jac.rows(), problem_->m);
  require_size("jacobian cols", jac.cols(), problem_->n);
  require_finite("jacobian", jac.reshaped());
  return jac;
}

Matrix Evaluator::hessian(const Vector& x, const Vector& weights) {
  ++counters_.hessian;
  Matrix h = problem_->eval_hess_lag(x, weights);
  require_size("hessian rows", h.rows(), problem_->n);
  require_size("hessian cols", h.cols(), problem_->n);
  require_finite("hessian", h.reshaped());
#ifndef NDEBUG
  const double scale = std::max(1.0, h.cwiseAbs().maxCoeff());
  if ((h - h.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw EvaluationError("hessian", -1, "hessian of the Lagrangian is not symmetric");
  }
#endif
  return h;
}

Vector modified_lagrangian_gradient(const Vector& grad_f, const Matrix& jac, const Vector& y,
                                   double mu, double beta1) {
  if (jac.rows() == 0) return grad_f;
  if (mu == 0.0) return grad_f + jac.transpose() * y;
  return grad_f + jac.transpose() * (y.array() - mu * beta1).matrix();
}

Vector modified_lagrangian_gradient(const NlpProblem& problem, const Vector& x, const Vector& y,
                                   double mu, double beta1) {
  Evaluator eval(problem);
  return modified_lagrangian_gradient(eval.gradient(x), eval.jacobian(x), y, mu, beta1);
}

ScalarFunction linear_function(Vector coeffs) {
  ScalarFunction fn;
  fn.linear = true;
  fn.value = [coeffs](const Vector& x) { return coeffs.dot(x); };
  fn.gradient = [coeffs](const Vector&) { return coeffs; };
  return fn;
}

std::vector<int> ProblemTransform::rows_of_constraint(int k) const {
  std::vector<int> out;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].source == RowSource::Constraint && rows[r].index == k) {
      out.push_back(static_cast<int>(r));
    }
  }
  return out;
}

InconsistentBoundsError::InconsistentBoundsError(int variable, double lower, double upper)
    : std::invalid_argument("inconsistent bounds on variable " + std::to_string(variable) +
                            ": lower " + std::to_string(lower) + " > upper " +
                            std::to_string(upper)),
      variable_(variable) {}

InequalityForm to_inequality_form(const MixedProblem& source) {
  const int n = source.n;
  if (n <= 0) throw std::invalid_argument("mixed problem needs n > 0");
  const bool has_lower = source.lower.size() != 0;
  const bool has_upper = source.upper.size() != 0;
  if ((has_lower && source.lower.size() != n) || (has_upper && source.upper.size() != n)) {
    throw std::invalid_argument("bound vectors must have size n");
  }
  for (int j = 0; j < n; ++j) {
    const double l = has_lower ? source.lower[j] : -std::numeric_limits<double>::infinity();
    const double u = has_upper ? source.upper[j] : std::numeric_limits<double>::infinity();
    if (std::isnan(l) || std::isnan(u) || l > u) throw InconsistentBoundsError(j, l, u);
  }

  InequalityForm out;
  ProblemTransform& tr = out.transform;
  NlpProblem& p = out.problem;

  // Rows for general constraints first, then bounds (lower before upper per variable).
  for (std::size_t k = 0; k < source.constraints.size(); ++k) {
    const auto& c = source.constraints[k];
    const int idx = static_cast<int>(k);
    tr.relations.push_back(c.relation);
    switch (c.relation) {
      case Relation::LessEqual:
        tr.rows.push_back({RowSource::Constraint, idx, 1.0});
        break;
      case Relation::GreaterEqual:
        tr.rows.push_back({RowSource::Constraint, idx, -1.0});
        break;
      case Relation::Equal:
        tr.rows.push_back({RowSource::Constraint, idx, 1.0});
        tr.rows.push_back({RowSource::Constraint, idx, -1.0});
        break;
    }
  }
  for (int j = 0; j < n; ++j) {
    if (has_lower && std::isfinite(source.lower[j])) {
      tr.rows.push_back({RowSource::LowerBound, j, -1.0});
    }
    if (has_upper && std::isfinite(source.upper[j])) {
      tr.rows.push_back({RowSource::UpperBound, j, 1.0});
    }
  }

  const int m = static_cast<int>(tr.rows.size());
  p.name = source.name;
  p.n = n;
  p.m = m;
  for (int r = 0; r < m; ++r) {
    const auto& row = tr.rows[r];
    if (row.source != RowSource::Constraint) {
      p.bound_indices.push_back(r);
      p.linear_indices.push_back(r);
    } else if (source.constraints[row.index].function.linear) {
      p.linear_indices.push_back(r);
    }
  }

  // The callbacks share one copy of the source description.
  auto src = std::make_shared<const MixedProblem>(source);
  auto rows = std::make_shared<const std::vector<TransformedRow>>(tr.rows);

  p.eval_f = [src](const Vector& x) { return src->objective.value(x); };
  p.eval_grad_f = [src](const Vector& x) { return src->objective.gradient(x); };
  p.eval_a = [src, rows](const Vector& x) {
    Vector a(static_cast<Eigen::Index>(rows->size()));
    for (std::size_t r = 0; r < rows->size(); ++r) {
      const auto& row = (*rows)[r];
      switch (row.source) {
        case RowSource::Constraint: {
          const auto& c = src->constraints[row.index];
          a[r] = row.sign * (c.function.value(x) - c.rhs);
          break;
        }
        case RowSource::LowerBound:
          a[r] = src->lower[row.index] - x[row.index];
          break;
        case RowSource::UpperBound:
          a[r] = x[row.index] - src->upper[row.index];
          break;
      }
    }
    return a;
  };
  p.eval_jac = [src, rows](const Vector& x) {
    Matrix jac = Matrix::Zero(static_cast<Eigen::Index>(rows->size()), src->n);
    for (std::size_t r = 0; r < rows->size(); ++r) {
      const auto& row = (*rows)[r];
      if (row.source == RowSource::Constraint) {
        jac.row(r) = row.sign * src->constraints[row.index].function.gradient(x).transpose();
      } else {
        jac(r, row.index) = row.sign;
      }
    }
    return jac;
  };
  p.eval_hess_lag = [src, rows](const Vector& x, const Vector& v) {
    Matrix h = src->objective.hessian ? src->objective.hessian(x) : Matrix::Zero(src->n, src->n);
    for (std::size_t r = 0; r < rows->size(); ++r) {
      const auto& row = (*rows)[r];
      if (row.source != RowSource::Constraint || v[r] == 0.0) continue;
      const auto& fn = src->constraints[row.index].function;
      if (fn.linear || !fn.hessian) continue;
      h += (row.sign * v[r]) * fn.hessian(x);
    }
    return h;
  };
  return out;
}

double DerivativeReport::max_error() const {
  return std::max({gradient_error, jacobian_error, hessian_error});
}

DerivativeReport check_derivatives(const NlpProblem& problem, const Vector& x, double h) {
  const int n = problem.n;
  const int m = problem.m;
  const Vector weights = Vector::Ones(m);
  auto rel = [](double fd, double exact) {
    return std::abs(fd - exact) / std::max(1.0, std::abs(fd));
  };
  auto lag_grad = [&](const Vector& z) {
    Vector g = problem.eval_grad_f(z);
    if (m > 0) g += problem.eval_jac(z).transpose() * weights;
    return g;
  };

  DerivativeReport report;
  const Vector g = problem.eval_grad_f(x);
  const Matrix jac = m > 0 ? problem.eval_jac(x) : Matrix(0, n);
  const Matrix hess = problem.eval_hess_lag(x, weights);

  for (int j = 0; j < n; ++j) {
    Vector xp = x;
    Vector xm = x;
    xp[j] += h;
    xm[j] -= h;
    // Divide by the step actually represented in floating point.
    const double step = xp[j] - xm[j];

    const double dfd = (problem.eval_f(xp) - problem.eval_f(xm)) / step;
    report.gradient_error = std::max(report.gradient_error, rel(dfd, g[j]));

    if (m > 0) {
      const Vector dad = (problem.eval_a(xp) - problem.eval_a(xm)) / step;
      for (int i = 0; i < m; ++i) {
        report.jacobian_error = std::max(report.jacobian_error, rel(dad[i], jac(i, j)));
      }
    }

    const Vector dld = (lag_grad(xp) - lag_grad(xm)) / step;
    for (int i = 0; i < n; ++i) {
      report.hessian_error = std::max(report.hessian_error, rel(dld[i], hess(i, j)));
    }
  }
  return report;
}

}  // namespace onephase
