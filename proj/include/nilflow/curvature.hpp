#pragma once

// Curvature of left-invariant metrics on Lie groups given by structure
// constants. Bilinear forms are returned as n x n matrices B(i, j) = B(e_i, e_j).

#include "nilflow/hodge.hpp"

namespace nilflow {

/// Levi-Civita coefficients, nabla_{e_i} e_j = Gamma_ij^k e_k.
class Christoffels {
 public:
  explicit Christoffels(int dim) : n_(dim), c_(static_cast<std::size_t>(dim) * dim * dim, 0.0) {}
  int dim() const { return n_; }
  double operator()(int i, int j, int k) const { return c_[index(i, j, k)]; }
  double& operator()(int i, int j, int k) { return c_[index(i, j, k)]; }

 private:
  std::size_t index(int i, int j, int k) const { return (static_cast<std::size_t>(i) * n_ + j) * n_ + k; }
  int n_;
  std::vector<double> c_;
};

/// Ricci endomorphism for the standard inner product:
/// (Ric)_i^j = -1/2 mu_ik^l mu_jk^l + 1/4 mu_kl^i mu_kl^j.
/// Defined (and symmetric) for any skew bracket.
Endo ric_orthonormal(const LieBracket& mu);

/// Ricci tensor of (mu, g) via transport to a g-orthonormal frame:
/// h = orthonormalize(g), Rc_g = h^T Ric_{h.mu} h.
Matrix rc_metric(const LieBracket& mu, const Metric& g);

/// Same tensor computed from the Christoffel symbols and the curvature
/// operator R(X,Y)Z; independent of rc_metric.
Matrix rc_metric_koszul(const LieBracket& mu, const Metric& g);

/// (H o H)_ij = g^{rl} g^{st} H_irs H_jlt.
Matrix h_circ_h(const Metric& g, const KForm& h);

/// 2 g(nabla_i e_j, e_k) = g(mu(e_i,e_j),e_k) - g(mu(e_j,e_k),e_i) + g(mu(e_k,e_i),e_j).
Christoffels christoffels(const LieBracket& mu, const Metric& g);

/// (nabla^+ theta)_ij = -theta_k (Gamma_ij^k + 1/2 g^{kl} H_ijl), for the
/// Bismut connection nabla^g + 1/2 g^{-1} H. Not symmetric in general.
Matrix bismut_nabla_theta(const LieBracket& mu, const Metric& g, const KForm& h, const KForm& theta);

/// Rc^+ = Rc_g - 1/4 H o H - 1/2 d*H + 1/2 nabla^+ theta, with d*H embedded
/// as a skew matrix. Use symmetric_part / skew_part for the two halves.
/// Throws ValidationError when d_mu H != 0.
Matrix generalized_ricci_plus(const LieBracket& mu, const Metric& g, Orientation o, const KForm& h,
                              const KForm& theta, double tolerance = kZeroTolerance);

/// (H^2)_i^j = H_ikl H_jkl, contracted with the standard inner product.
Endo h_squared_neutral(const KForm& h);

}  // namespace nilflow
