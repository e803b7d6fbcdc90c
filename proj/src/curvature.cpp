#include "nilflow/curvature.hpp"

#include <cmath>

namespace nilflow {

namespace {

void require_degree(const KForm& w, int degree, const char* what) {
  if (w.degree() != degree) throw ValidationError(std::string(what) + " has the wrong degree");
}

// Dense H_ijk.
std::vector<double> unpack3(const KForm& h) {
  const int n = h.dim();
  std::vector<double> t(static_cast<std::size_t>(n) * n * n, 0.0);
  for (std::size_t p = 0; p < h.size(); ++p) {
    const auto idx = h.tuple(p);
    const int a = idx[0], b = idx[1], c = idx[2];
    const double v = h.packed(p);
    auto put = [&](int i, int j, int k, double x) { t[(static_cast<std::size_t>(i) * n + j) * n + k] = x; };
    put(a, b, c, v);
    put(b, c, a, v);
    put(c, a, b, v);
    put(b, a, c, -v);
    put(a, c, b, -v);
    put(c, b, a, -v);
  }
  return t;
}

}  // namespace

Endo ric_orthonormal(const LieBracket& mu) {
  const int n = mu.dim();
  Matrix ric = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      double s = 0.0;
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) s += -0.5 * mu(i, k, l) * mu(j, k, l) + 0.25 * mu(k, l, i) * mu(k, l, j);
      ric(i, j) = ric(j, i) = s;
    }
  return ric;
}

Matrix rc_metric(const LieBracket& mu, const Metric& g) {
  if (g.dim() != mu.dim()) throw ValidationError("dimension mismatch between bracket and metric");
  const Endo h = orthonormalize(g);
  const Matrix rc = h.transpose() * ric_orthonormal(gl_action(h, mu)) * h;
  return symmetric_part(rc);
}

Christoffels christoffels(const LieBracket& mu, const Metric& g) {
  const int n = mu.dim();
  if (g.dim() != n) throw ValidationError("dimension mismatch between bracket and metric");
  // lowered[i][j][k] = g(mu(e_i, e_j), e_k)
  std::vector<double> lowered(static_cast<std::size_t>(n) * n * n, 0.0);
  auto low = [&](int i, int j, int k) -> double& { return lowered[(static_cast<std::size_t>(i) * n + j) * n + k]; };
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        double s = 0.0;
        for (int m = 0; m < n; ++m) s += mu(i, j, m) * g(m, k);
        low(i, j, k) = s;
      }
  Christoffels gamma(n);
  const Matrix& ginv = g.inverse();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int l = 0; l < n; ++l) {
        double s = 0.0;
        for (int k = 0; k < n; ++k) s += 0.5 * (low(i, j, k) - low(j, k, i) + low(k, i, j)) * ginv(k, l);
        gamma(i, j, l) = s;
      }
  return gamma;
}

Matrix rc_metric_koszul(const LieBracket& mu, const Metric& g) {
  const int n = mu.dim();
  const Christoffels gamma = christoffels(mu, g);
  // R(e_a, e_b) e_c = R_abc^m e_m; Rc(e_b, e_c) = sum_a R_abc^a
  Matrix rc = Matrix::Zero(n, n);
  for (int b = 0; b < n; ++b)
    for (int c = 0; c < n; ++c) {
      double s = 0.0;
      for (int a = 0; a < n; ++a) {
        double r = 0.0;
        for (int l = 0; l < n; ++l) r += gamma(b, c, l) * gamma(a, l, a) - gamma(a, c, l) * gamma(b, l, a);
        for (int p = 0; p < n; ++p) r -= mu(a, b, p) * gamma(p, c, a);
        s += r;
      }
      rc(b, c) = s;
    }
  return rc;
}

Matrix h_circ_h(const Metric& g, const KForm& h) {
  require_degree(h, 3, "H");
  const int n = h.dim();
  if (g.dim() != n) throw ValidationError("dimension mismatch between metric and H");
  const auto t = unpack3(h);
  auto H = [&](int i, int j, int k) { return t[(static_cast<std::size_t>(i) * n + j) * n + k]; };
  const Matrix& ginv = g.inverse();
  // raised_i^{lt} = g^{rl} g^{st} H_irs
  std::vector<double> raised(t.size(), 0.0);
  for (int i = 0; i < n; ++i)
    for (int l = 0; l < n; ++l)
      for (int u = 0; u < n; ++u) {
        double s = 0.0;
        for (int r = 0; r < n; ++r)
          for (int q = 0; q < n; ++q) s += ginv(r, l) * ginv(q, u) * H(i, r, q);
        raised[(static_cast<std::size_t>(i) * n + l) * n + u] = s;
      }
  Matrix out = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      double s = 0.0;
      for (int l = 0; l < n; ++l)
        for (int u = 0; u < n; ++u) s += raised[(static_cast<std::size_t>(i) * n + l) * n + u] * H(j, l, u);
      out(i, j) = out(j, i) = s;
    }
  return out;
}

Matrix bismut_nabla_theta(const LieBracket& mu, const Metric& g, const KForm& h, const KForm& theta) {
  require_degree(h, 3, "H");
  require_degree(theta, 1, "theta");
  const int n = mu.dim();
  if (h.dim() != n || theta.dim() != n) throw ValidationError("dimension mismatch in nabla^+ theta");
  const Christoffels gamma = christoffels(mu, g);
  const Matrix& ginv = g.inverse();
  // theta^l = g^{kl} theta_k
  Vector theta_up = Vector::Zero(n);
  for (int l = 0; l < n; ++l)
    for (int k = 0; k < n; ++k) theta_up(l) += ginv(k, l) * theta.packed(k);
  Matrix out = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double s = 0.0;
      for (int k = 0; k < n; ++k) s -= theta.packed(k) * gamma(i, j, k);
      for (int l = 0; l < n; ++l)
        if (theta_up(l) != 0.0 && i != j && i != l && j != l) s -= 0.5 * theta_up(l) * h.at({i, j, l});
      out(i, j) = s;
    }
  return out;
}

Matrix generalized_ricci_plus(const LieBracket& mu, const Metric& g, Orientation o, const KForm& h,
                              const KForm& theta, double tolerance) {
  require_degree(h, 3, "H");
  const double closed = closedness_residual(mu, h);
  if (closed > tolerance) throw ValidationError("H is not closed: |d_mu H| = " + std::to_string(closed));
  const Matrix dstar = two_form_matrix(codifferential(mu, g, o, h));
  return rc_metric(mu, g) - 0.25 * h_circ_h(g, h) - 0.5 * dstar + 0.5 * bismut_nabla_theta(mu, g, h, theta);
}

Endo h_squared_neutral(const KForm& h) {
  require_degree(h, 3, "H");
  return h_circ_h(Metric::identity(h.dim()), h);
}

}  // namespace nilflow
