#include "nilflow/soliton.hpp"

#include <cmath>

namespace nilflow {

namespace {

void require_lie(const LieBracket& mu, double tolerance) {
  const double r = jacobi_residual(mu);
  if (r > tolerance) throw ValidationError("not a Lie bracket: Jacobi residual " + std::to_string(r));
}

void require_closed(const LieBracket& mu, const KForm& h, double tolerance) {
  const double r = closedness_residual(mu, h);
  if (r > tolerance) throw ValidationError("H is not closed: |d_mu H| = " + std::to_string(r));
}

// Rows: coefficients of pi(phi) mu for i < j, all k, as a linear map of
// vec(phi) (column-major, phi(a, b) at a + n b).
Matrix derivation_constraints(const LieBracket& mu) {
  const int n = mu.dim();
  const int pairs = n * (n - 1) / 2;
  Matrix c = Matrix::Zero(static_cast<Eigen::Index>(pairs) * n, static_cast<Eigen::Index>(n) * n);
  Eigen::Index row = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (int k = 0; k < n; ++k, ++row)
        for (int l = 0; l < n; ++l) {
          // phi(k, l) mu_ij^l - phi(l, i) mu_lj^k - phi(l, j) mu_il^k
          c(row, k + n * l) += mu(i, j, l);
          c(row, l + n * i) -= mu(l, j, k);
          c(row, l + n * j) -= mu(i, l, k);
        }
  return c;
}

std::vector<Endo> null_space(const Matrix& constraints, int n, double tolerance) {
  const Eigen::Index unknowns = static_cast<Eigen::Index>(n) * n;
  std::vector<Endo> basis;
  if (constraints.rows() == 0) {
    for (Eigen::Index p = 0; p < unknowns; ++p) {
      Endo e = Endo::Zero(n, n);
      e(p % n, p / n) = 1.0;
      basis.push_back(e);
    }
    return basis;
  }
  Eigen::JacobiSVD<Matrix> svd(constraints, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  const double smax = s.size() > 0 ? s(0) : 0.0;
  Eigen::Index rank = 0;
  for (Eigen::Index p = 0; p < s.size(); ++p)
    if (s(p) > tolerance * std::max(1.0, smax)) ++rank;
  const Matrix& v = svd.matrixV();
  for (Eigen::Index c = rank; c < unknowns; ++c) {
    Endo e(n, n);
    for (Eigen::Index p = 0; p < unknowns; ++p) e(p % n, p / n) = v(p, c);
    basis.push_back(e);
  }
  return basis;
}

}  // namespace

std::vector<Endo> derivation_space(const LieBracket& mu, double tolerance) {
  require_lie(mu, tolerance);
  return null_space(derivation_constraints(mu), mu.dim(), tolerance);
}

std::vector<Endo> symmetric_derivations(const LieBracket& mu, const Metric& g, double tolerance) {
  require_lie(mu, tolerance);
  const int n = mu.dim();
  if (g.dim() != n) throw ValidationError("dimension mismatch between bracket and metric");
  const Matrix der = derivation_constraints(mu);
  // (phi^T g - g phi)(a, b) = 0 for a < b
  const int pairs = n * (n - 1) / 2;
  Matrix sym = Matrix::Zero(pairs, static_cast<Eigen::Index>(n) * n);
  Eigen::Index row = 0;
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b, ++row)
      for (int m = 0; m < n; ++m) {
        sym(row, m + n * a) += g(m, b);
        sym(row, m + n * b) -= g(a, m);
      }
  Matrix all(der.rows() + sym.rows(), der.cols());
  all << der, sym;
  return null_space(all, n, tolerance);
}

KForm soliton_omega(const LieBracket& mu, const Metric& g, Orientation o, const KForm& h, const KForm& theta) {
  const int n = mu.dim();
  const Vector theta_up = g.inverse() * Vector::Map(theta.coeffs().data(), n);
  KForm omega = codifferential(mu, g, o, h).scaled(-1.0);
  omega = omega + ce_differential(mu, theta).scaled(0.5);
  omega = omega - interior(theta_up, h).scaled(0.5);
  return omega;
}

namespace {

Matrix symmetric_target(const LieBracket& mu, const Metric& g, const KForm& h, const KForm& theta) {
  return rc_metric(mu, g) - 0.25 * h_circ_h(g, h) + 0.5 * symmetric_part(bismut_nabla_theta(mu, g, h, theta));
}

}  // namespace

SolitonResidual soliton_residual(const LieBracket& mu, const Metric& g, Orientation o, const KForm& h,
                                 const KForm& theta, double lambda, const Endo& derivation, const KForm& omega) {
  require_closed(mu, h, kZeroTolerance);
  const Matrix g_of_d = derivation.transpose() * g.matrix();
  const Matrix sym = symmetric_target(mu, g, h, theta) - lambda * g.matrix() - g_of_d;
  const KForm skew = omega - soliton_omega(mu, g, o, h, theta);
  return {sym.cwiseAbs().maxCoeff(), skew.max_abs()};
}

SolitonData soliton_fit(const LieBracket& mu, const Metric& g, Orientation o, const KForm& h, const KForm& theta,
                        double acceptance) {
  require_closed(mu, h, kZeroTolerance);
  const int n = mu.dim();
  const std::vector<Endo> basis = symmetric_derivations(mu, g);
  const Matrix target = symmetric_target(mu, g, h, theta);

  // Unknowns: lambda, then one coefficient per basis derivation; equations
  // are the n^2 entries of the symmetric residual.
  const auto unknowns = static_cast<Eigen::Index>(basis.size()) + 1;
  Matrix a(static_cast<Eigen::Index>(n) * n, unknowns);
  a.col(0) = Vector::Map(g.matrix().data(), static_cast<Eigen::Index>(n) * n);
  for (std::size_t m = 0; m < basis.size(); ++m) {
    const Matrix gd = basis[m].transpose() * g.matrix();
    a.col(static_cast<Eigen::Index>(m) + 1) = Vector::Map(gd.data(), static_cast<Eigen::Index>(n) * n);
  }
  const Vector rhs = Vector::Map(target.data(), static_cast<Eigen::Index>(n) * n);
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(a);
  cod.setThreshold(1e-12);
  const Vector x = cod.solve(rhs);

  SolitonData out;
  out.lambda = x(0);
  out.derivation = Endo::Zero(n, n);
  for (std::size_t m = 0; m < basis.size(); ++m) out.derivation += x(static_cast<Eigen::Index>(m) + 1) * basis[m];
  out.omega = soliton_omega(mu, g, o, h, theta);
  const SolitonResidual r = soliton_residual(mu, g, o, h, theta, out.lambda, out.derivation, out.omega);
  out.residual_norm = std::max(r.symmetric, r.skew);
  out.is_soliton = out.residual_norm <= acceptance;
  return out;
}

}  // namespace nilflow
