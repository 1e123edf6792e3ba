#include "onephase/linear_core.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <stdexcept>

namespace onephase {

namespace {

double jacobian_density(const Matrix& jac) {
  if (jac.size() == 0) return 1.0;
  const auto nnz = (jac.array() != 0.0).count();
  return static_cast<double>(nnz) / static_cast<double>(jac.size());
}

Eigen::SparseMatrix<double> to_sparse_lower(const Matrix& dense, double delta) {
  const Eigen::Index n = dense.rows();
  std::vector<Eigen::Triplet<double>> triplets;
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = j; i < n; ++i) {
      double v = dense(i, j);
      if (i == j) v += delta;
      if (v != 0.0 || i == j) triplets.emplace_back(i, j, v);
    }
  }
  Eigen::SparseMatrix<double> sp(n, n);
  sp.setFromTriplets(triplets.begin(), triplets.end());
  return sp;
}

}  // namespace

SchurMatrix assemble_schur(const Matrix& hess_lag, const Matrix& jac, const Vector& x,
                           const Vector& s, const Vector& y, double mu, LinearBackend backend) {
  assert(s.size() == y.size() && jac.rows() == s.size());
  if (s.size() > 0 && (s.minCoeff() <= 0.0 || y.minCoeff() <= 0.0)) {
    throw std::invalid_argument("assemble_schur requires s > 0 and y > 0");
  }
  SchurMatrix out;
  out.M = hess_lag;
  if (jac.rows() > 0) {
    const Vector ratio = y.cwiseQuotient(s);
    out.M.noalias() += jac.transpose() * ratio.asDiagonal() * jac;
  }
  // Symmetrize away roundoff from the product.
  out.M = 0.5 * (out.M + out.M.transpose());
  out.mu = mu;
  out.x = x;
  out.s = s;
  out.y = y;
  out.jac = jac;
  switch (backend) {
    case LinearBackend::Dense:
      out.prefer_sparse = false;
      break;
    case LinearBackend::Sparse:
      out.prefer_sparse = true;
      break;
    case LinearBackend::Auto:
      out.prefer_sparse = jac.rows() > 0 && jacobian_density(jac) < kSparseDensityThreshold;
      break;
  }
  return out;
}

SchurMatrix assemble_schur(Evaluator& eval, const Vector& x, const Vector& s, const Vector& y,
                           double mu, double beta1, LinearBackend backend) {
  const Vector weights = (y.array() - mu * beta1).matrix();
  const Matrix hess = eval.hessian(x, weights);
  const Matrix jac = eval.jacobian(x);
  return assemble_schur(hess, jac, x, s, y, mu, backend);
}

void DeltaParams::validate() const {
  if (!(min > 0.0) || !(max > min) || !(inc > 1.0) || !(dec > 1.0)) {
    throw std::invalid_argument("shift parameters need 0 < min < max and inc, dec > 1");
  }
}

std::optional<FactorizedSystem> FactorizedSystem::try_factorize(
    std::shared_ptr<const SchurMatrix> schur, double delta) {
  const Matrix& M = schur->M;
  if (M.rows() == 0) return std::nullopt;
  if (schur->prefer_sparse) {
    auto llt = std::make_shared<Eigen::SimplicialLLT<Eigen::SparseMatrix<double>>>();
    llt->compute(to_sparse_lower(M, delta));
    if (llt->info() != Eigen::Success) return std::nullopt;
    // A zero or non-finite pivot can slip through; reject it like a failed factorization.
    const Vector diag = Eigen::MatrixXd(llt->matrixL()).diagonal();
    if (!diag.allFinite() || diag.minCoeff() <= 0.0) return std::nullopt;
    return FactorizedSystem(std::move(schur), delta, SparseFactor(std::move(llt)));
  }
  Matrix shifted = M;
  shifted.diagonal().array() += delta;
  DenseFactor llt(shifted);
  if (llt.info() != Eigen::Success) return std::nullopt;
  const Matrix L = llt.matrixL();
  if (!L.allFinite() || L.diagonal().minCoeff() <= 0.0) return std::nullopt;
  return FactorizedSystem(std::move(schur), delta, std::move(llt));
}

Vector FactorizedSystem::raw_solve(const Vector& rhs) const {
  if (const auto* dense = std::get_if<DenseFactor>(&factor_)) return dense->solve(rhs);
  return std::get<SparseFactor>(factor_)->solve(rhs);
}

Vector FactorizedSystem::apply(const Vector& v) const {
  return schur_->M * v + delta_ * v;
}

Vector FactorizedSystem::solve(const Vector& rhs) const {
  Vector d = raw_solve(rhs);
  const Vector residual = rhs - apply(d);
  if (inf_norm(residual) > 1e-10 * (1.0 + inf_norm(rhs))) d += raw_solve(residual);
  return d;
}

Matrix FactorizedSystem::reconstruct() const {
  if (const auto* dense = std::get_if<DenseFactor>(&factor_)) {
    const Matrix L = dense->matrixL();
    return L * L.transpose();
  }
  const auto& llt = *std::get<SparseFactor>(factor_);
  const Matrix L = Matrix(llt.matrixL());
  const Matrix LLt = L * L.transpose();
  // The factor is of P A P^T; undo the permutation.
  return llt.permutationPinv() * LLt * llt.permutationP();
}

FactorizeOutcome factorize_with_shift(std::shared_ptr<const SchurMatrix> schur, double delta_in,
                                      DeltaState& state) {
  const DeltaParams& p = state.params;
  FactorizeOutcome out;
  state.delta_prev = delta_in;

  double tau = schur->M.rows() > 0 ? schur->M.diagonal().minCoeff() : 0.0;
  if (tau > 0.0) {
    out.trial_deltas.push_back(0.0);
    out.system = FactorizedSystem::try_factorize(schur, 0.0);
    if (out.system) return out;
    tau = 0.0;
  }
  double delta = std::max(state.delta_prev / p.dec, p.min - tau);
  while (true) {
    if (delta >= p.max) return out;
    out.trial_deltas.push_back(delta);
    out.system = FactorizedSystem::try_factorize(schur, delta);
    if (out.system) return out;
    delta *= p.inc;
  }
}

std::optional<double> escalate_delta(const DeltaState& state, double delta, double grad_norm,
                                     double dx_norm) {
  const DeltaParams& p = state.params;
  double next = std::max({p.inc * delta, p.min, state.delta_prev / p.dec});
  if (dx_norm > 0.0 && std::isfinite(grad_norm / dx_norm)) next = std::max(next, grad_norm / dx_norm);
  if (next > p.max) return std::nullopt;
  return next;
}

}  // namespace onephase
