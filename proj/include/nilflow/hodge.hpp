#pragma once

// Metric exterior algebra on left-invariant forms.

#include "nilflow/lie.hpp"

namespace nilflow {

/// Left-invariant Riemannian metric evaluated at the identity.
class Metric {
 public:
  Metric() = default;
  /// Throws ValidationError unless g is finite, symmetric to 1e-12 relative
  /// and positive definite.
  explicit Metric(Matrix g);

  static Metric identity(int dim);
  static Metric diagonal(std::span<const double> entries);

  int dim() const { return static_cast<int>(g_.rows()); }
  const Matrix& matrix() const { return g_; }
  const Matrix& inverse() const { return inv_; }
  double determinant() const { return det_; }
  double operator()(int i, int j) const { return g_(i, j); }

 private:
  Matrix g_;
  Matrix inv_;
  double det_ = 0.0;
};

enum class Orientation : int { positive = 1, negative = -1 };

inline double sign_of(Orientation o) { return static_cast<double>(static_cast<int>(o)); }

/// Induced inner product on k-forms (full contraction with k inverse-metric
/// factors, normalized so that orthonormal e^I have unit length).
double form_inner(const Metric& g, const KForm& a, const KForm& b);

/// Components of omega with all indices raised, on increasing tuples.
KForm raise_indices(const Metric& g, const KForm& omega);

/// Characterized by a ^ *b = <a, b>_g vol, vol = o sqrt(det g) e^{1..n}.
KForm hodge_star(const Metric& g, Orientation o, const KForm& omega);

/// d* w = (-1)^{n(k+1)+1} * d * w; the formal adjoint of d_mu on unimodular
/// algebras. Rejects 0-forms.
KForm codifferential(const LieBracket& mu, const Metric& g, Orientation o, const KForm& omega);

/// d d* + d* d.
KForm hodge_laplacian(const LieBracket& mu, const Metric& g, Orientation o, const KForm& omega);

/// Upper-triangular h with g = h^T h.
Endo orthonormalize(const Metric& g);

}  // namespace nilflow
