#include "nilflow/hodge.hpp"

#include <algorithm>
#include <cmath>

namespace nilflow {

namespace {

double minor_det(const Matrix& m, std::span<const int> rows, std::span<const int> cols) {
  const auto k = static_cast<Eigen::Index>(rows.size());
  if (k == 0) return 1.0;
  Matrix sub(k, k);
  for (Eigen::Index r = 0; r < k; ++r)
    for (Eigen::Index c = 0; c < k; ++c) sub(r, c) = m(rows[r], cols[c]);
  return sub.determinant();
}

void require_dim(const Metric& g, const KForm& w) {
  if (g.dim() != w.dim()) throw ValidationError("dimension mismatch between metric and form");
}

}  // namespace

Metric::Metric(Matrix g) : g_(std::move(g)) {
  if (g_.rows() != g_.cols() || g_.rows() < 1) throw ValidationError("metric must be a nonempty square matrix");
  if (!g_.allFinite()) throw ValidationError("metric has non-finite entries");
  const double scale = std::max(1.0, g_.cwiseAbs().maxCoeff());
  if ((g_ - g_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) throw ValidationError("metric is not symmetric");
  g_ = 0.5 * (g_ + g_.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(g_, Eigen::EigenvaluesOnly);
  if (!(eig.eigenvalues().minCoeff() > 0.0)) throw ValidationError("metric is not positive definite");
  Eigen::LLT<Matrix> llt(g_);
  if (llt.info() != Eigen::Success) throw ValidationError("metric is not positive definite");
  inv_ = llt.solve(Matrix::Identity(g_.rows(), g_.cols()));
  inv_ = 0.5 * (inv_ + inv_.transpose());
  const auto& l = llt.matrixL();
  det_ = 1.0;
  for (Eigen::Index i = 0; i < g_.rows(); ++i) det_ *= l(i, i) * l(i, i);
}

Metric Metric::identity(int dim) { return Metric(Matrix::Identity(dim, dim)); }

Metric Metric::diagonal(std::span<const double> entries) {
  Matrix g = Matrix::Zero(static_cast<Eigen::Index>(entries.size()), static_cast<Eigen::Index>(entries.size()));
  for (std::size_t i = 0; i < entries.size(); ++i) g(i, i) = entries[i];
  return Metric(std::move(g));
}

KForm raise_indices(const Metric& g, const KForm& omega) {
  require_dim(g, omega);
  const Matrix& ginv = g.inverse();
  return KForm::generate(omega.dim(), omega.degree(), [&](std::span<const int> idx) {
    double s = 0.0;
    for (std::size_t p = 0; p < omega.size(); ++p)
      if (omega.packed(p) != 0.0) s += minor_det(ginv, idx, omega.tuple(p)) * omega.packed(p);
    return s;
  });
}

double form_inner(const Metric& g, const KForm& a, const KForm& b) {
  require_dim(g, a);
  if (a.degree() != b.degree() || a.dim() != b.dim()) throw ValidationError("form_inner needs forms of equal degree");
  const KForm raised = raise_indices(g, b);
  double s = 0.0;
  for (std::size_t p = 0; p < a.size(); ++p) s += a.packed(p) * raised.packed(p);
  return s;
}

KForm hodge_star(const Metric& g, Orientation o, const KForm& omega) {
  require_dim(g, omega);
  const int n = omega.dim();
  const int k = omega.degree();
  const KForm raised = raise_indices(g, omega);
  const double volume = sign_of(o) * std::sqrt(g.determinant());
  std::vector<int> order(n);
  return KForm::generate(n, n - k, [&](std::span<const int> out) {
    // complement of `out`, then the concatenation (complement, out)
    std::vector<bool> used(n, false);
    for (int j : out) used[j] = true;
    std::vector<int> comp;
    for (int i = 0; i < n; ++i)
      if (!used[i]) comp.push_back(i);
    std::copy(comp.begin(), comp.end(), order.begin());
    std::copy(out.begin(), out.end(), order.begin() + k);
    return volume * permutation_sign(order) * raised.packed(raised.rank(comp));
  });
}

KForm codifferential(const LieBracket& mu, const Metric& g, Orientation o, const KForm& omega) {
  require_dim(g, omega);
  const int n = omega.dim();
  const int k = omega.degree();
  if (k < 1) throw ValidationError("codifferential of a 0-form");
  const KForm inner = ce_differential(mu, hodge_star(g, o, omega));
  const double sign = ((n * (k + 1) + 1) % 2 == 0) ? 1.0 : -1.0;
  return hodge_star(g, o, inner).scaled(sign);
}

KForm hodge_laplacian(const LieBracket& mu, const Metric& g, Orientation o, const KForm& omega) {
  require_dim(g, omega);
  const int n = omega.dim();
  const int k = omega.degree();
  KForm out(n, k);
  if (k >= 1) out = out + ce_differential(mu, codifferential(mu, g, o, omega));
  if (k < n) out = out + codifferential(mu, g, o, ce_differential(mu, omega));
  return out;
}

Endo orthonormalize(const Metric& g) {
  Eigen::LLT<Matrix> llt(g.matrix());
  if (llt.info() != Eigen::Success) throw ValidationError("metric is not positive definite");
  return llt.matrixU();
}

}  // namespace nilflow
