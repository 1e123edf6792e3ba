#pragma once

#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "onephase/types.hpp"

namespace onephase {

/// Smooth nonlinear program  min f(x)  s.t.  a(x) <= 0.
///
/// All derivatives are supplied by the caller. The Hessian callback receives
/// the constraint weights v and must return the assembled matrix
/// grad^2 f(x) + sum_i v_i grad^2 a_i(x). Callbacks must be pure.
struct NlpProblem {
  std::string name;
  int n = 0;
  int m = 0;

  std::function<double(const Vector&)> eval_f;
  std::function<Vector(const Vector&)> eval_grad_f;
  std::function<Vector(const Vector&)> eval_a;
  std::function<Matrix(const Vector&)> eval_jac;
  std::function<Matrix(const Vector&, const Vector&)> eval_hess_lag;

  /// Rows of a that are simple variable bounds (+-x_j + c). Sorted, 0-based.
  std::vector<int> bound_indices;
  /// Rows of a that are affine in x. Sorted, 0-based.
  std::vector<int> linear_indices;

  bool is_bound(int row) const;
  bool is_linear(int row) const;

  /// Throws std::invalid_argument when sizes, callbacks or index sets are inconsistent.
  void validate() const;
};

/// Raised when a callback returns a non-finite value or a result of the wrong size.
class EvaluationError : public std::runtime_error {
 public:
  EvaluationError(std::string quantity, int coordinate, const std::string& what);

  const std::string& quantity() const { return quantity_; }
  /// Offending entry (flattened column-major for matrices), -1 for size errors.
  int coordinate() const { return coordinate_; }

 private:
  std::string quantity_;
  int coordinate_;
};

struct EvalCounters {
  long objective = 0;
  long gradient = 0;
  long constraints = 0;
  long jacobian = 0;
  long hessian = 0;
};

/// Checked, counted access to the callbacks of an NlpProblem.
class Evaluator {
 public:
  explicit Evaluator(const NlpProblem& problem) : problem_(&problem) {}

  double objective(const Vector& x);
  Vector gradient(const Vector& x);
  Vector constraints(const Vector& x);
  Matrix jacobian(const Vector& x);
  Matrix hessian(const Vector& x, const Vector& weights);

  const NlpProblem& problem() const { return *problem_; }
  const EvalCounters& counters() const { return counters_; }

 private:
  const NlpProblem* problem_;
  EvalCounters counters_;
};

/// grad f(x) + grad a(x)^T (y - mu * beta1 * e), from already evaluated derivatives.
Vector modified_lagrangian_gradient(const Vector& grad_f, const Matrix& jac, const Vector& y,
                                   double mu, double beta1);

/// Same, evaluating the derivatives through the problem callbacks.
Vector modified_lagrangian_gradient(const NlpProblem& problem, const Vector& x, const Vector& y,
                                   double mu, double beta1);

// ---------------------------------------------------------------------------
// Mixed-form problems and their reduction to a(x) <= 0.

enum class Relation { LessEqual, GreaterEqual, Equal };

/// Scalar function c(x) with derivatives. Linear functions may leave `hessian` empty.
struct ScalarFunction {
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> gradient;
  std::function<Matrix(const Vector&)> hessian;
  bool linear = false;
};

/// Builds c(x) = coeffs^T x (a constant-gradient linear function).
ScalarFunction linear_function(Vector coeffs);

struct GeneralConstraint {
  ScalarFunction function;
  Relation relation = Relation::LessEqual;
  double rhs = 0.0;
};

/// min f(x) subject to c_k(x) {<=,>=,==} b_k and lower <= x <= upper (infinite entries mean
/// "no bound").
struct MixedProblem {
  std::string name;
  int n = 0;
  ScalarFunction objective;
  std::vector<GeneralConstraint> constraints;
  Vector lower;  // size n, -inf where absent (empty means no bounds)
  Vector upper;  // size n, +inf where absent
  Vector start;  // size n (empty means the origin)
};

enum class RowSource { Constraint, LowerBound, UpperBound };

struct TransformedRow {
  RowSource source = RowSource::Constraint;
  int index = 0;     // constraint number or variable number
  double sign = 1.0;  // a_row(x) = sign * (c(x) - b), or sign * x_j + const for bounds
};

/// Maps each row of the inequality-form problem back to the source description.
struct ProblemTransform {
  std::vector<Relation> relations;  // relation of every source constraint
  std::vector<TransformedRow> rows;

  /// Rows generated from source constraint k.
  std::vector<int> rows_of_constraint(int k) const;
};

class InconsistentBoundsError : public std::invalid_argument {
 public:
  InconsistentBoundsError(int variable, double lower, double upper);
  int variable() const { return variable_; }

 private:
  int variable_;
};

struct InequalityForm {
  NlpProblem problem;
  ProblemTransform transform;
};

/// Rewrites a mixed problem as a(x) <= 0: equalities become two opposite rows, >= rows flip
/// sign, finite bounds become flagged bound rows. Throws InconsistentBoundsError on l > u.
InequalityForm to_inequality_form(const MixedProblem& source);

// ---------------------------------------------------------------------------

struct DerivativeReport {
  double gradient_error = 0.0;
  double jacobian_error = 0.0;
  double hessian_error = 0.0;

  double max_error() const;
};

/// Central finite differences of f, a and grad_x L(x, v) (v = e) against the callbacks.
/// Errors are |fd - exact| / max(1, |fd|), maximised over entries.
DerivativeReport check_derivatives(const NlpProblem& problem, const Vector& x, double h = 1e-6);

}  // namespace onephase
