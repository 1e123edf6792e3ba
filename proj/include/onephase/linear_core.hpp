#pragma once

#include <memory>
#include <optional>
#include <variant>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/SparseCholesky>

#include "onephase/problem.hpp"
#include "onephase/types.hpp"

namespace onephase {

enum class LinearBackend { Auto, Dense, Sparse };

/// Jacobian density below which the Auto backend switches to sparse Cholesky.
inline constexpr double kSparseDensityThreshold = 0.25;

/// Primal Schur complement  M = grad^2_xx L_mu(x,y) + J^T Y S^{-1} J  and the point it was
/// assembled at. Inner iterations reuse J, s and y from here.
struct SchurMatrix {
  Matrix M;
  double mu = 0.0;
  Vector x;
  Vector s;
  Vector y;
  Matrix jac;
  bool prefer_sparse = false;
};

/// Builds the Schur matrix from an already evaluated Lagrangian Hessian and Jacobian.
/// Requires s > 0 and y > 0 componentwise.
SchurMatrix assemble_schur(const Matrix& hess_lag, const Matrix& jac, const Vector& x,
                           const Vector& s, const Vector& y, double mu,
                           LinearBackend backend = LinearBackend::Auto);

/// Evaluates the Hessian at weights y - mu*beta1*e and the Jacobian, then assembles.
SchurMatrix assemble_schur(Evaluator& eval, const Vector& x, const Vector& s, const Vector& y,
                           double mu, double beta1, LinearBackend backend = LinearBackend::Auto);

struct DeltaParams {
  double min = 1e-8;
  double inc = 8.0;
  double dec = 3.14159265358979323846;
  double max = 1e50;

  void validate() const;
};

struct DeltaState {
  DeltaParams params;
  /// Shift in effect when the current outer iteration started.
  double delta_prev = 0.0;
};

/// Cholesky factor of M + delta*I. Immutable once built.
class FactorizedSystem {
 public:
  /// Attempts the factorization; nullopt when M + delta*I is not numerically positive definite.
  static std::optional<FactorizedSystem> try_factorize(std::shared_ptr<const SchurMatrix> schur,
                                                       double delta);

  double delta() const { return delta_; }
  const SchurMatrix& schur() const { return *schur_; }
  bool is_sparse() const { return std::holds_alternative<SparseFactor>(factor_); }

  /// Solves (M + delta*I) d = rhs with one refinement pass when the residual is large.
  Vector solve(const Vector& rhs) const;

  /// (M + delta*I) v using the stored matrix.
  Vector apply(const Vector& v) const;

  /// L L^T (with the fill-reducing permutation undone for the sparse backend).
  Matrix reconstruct() const;

 private:
  using DenseFactor = Eigen::LLT<Matrix>;
  using SparseFactor = std::shared_ptr<Eigen::SimplicialLLT<Eigen::SparseMatrix<double>>>;

  FactorizedSystem(std::shared_ptr<const SchurMatrix> schur, double delta,
                   std::variant<DenseFactor, SparseFactor> factor)
      : schur_(std::move(schur)), delta_(delta), factor_(std::move(factor)) {}

  Vector raw_solve(const Vector& rhs) const;

  std::shared_ptr<const SchurMatrix> schur_;
  double delta_;
  std::variant<DenseFactor, SparseFactor> factor_;
};

struct FactorizeOutcome {
  std::optional<FactorizedSystem> system;  // empty on max-delta failure
  std::vector<double> trial_deltas;        // every shift attempted, in order
};

/// Shift-selection strategy: try delta = 0 when diag(M) > 0, otherwise start from
/// max(delta_prev / dec, min - min_i M_ii) and multiply by inc until Cholesky succeeds.
/// Sets state.delta_prev = delta_in on entry.
FactorizeOutcome factorize_with_shift(std::shared_ptr<const SchurMatrix> schur, double delta_in,
                                      DeltaState& state);

/// Solves (M + delta*I) d = rhs.
inline Vector solve_shifted(const FactorizedSystem& fs, const Vector& rhs) {
  return fs.solve(rhs);
}

/// Shift increase after a failed first inner step:
/// max(inc*delta, min, delta_prev/dec, grad_norm/dx_norm). nullopt when it exceeds params.max.
std::optional<double> escalate_delta(const DeltaState& state, double delta, double grad_norm,
                                     double dx_norm);

}  // namespace onephase
