#include "nilflow/dorfman.hpp"

#include <algorithm>
#include <cmath>

namespace nilflow {

GeneralizedVector GeneralizedVector::basis(int dim, int alpha) {
  if (alpha < 0 || alpha >= 2 * dim) throw ValidationError("generalized basis index out of range");
  GeneralizedVector z = zero(dim);
  if (alpha < dim)
    z.vec(alpha) = 1.0;
  else
    z.covec(alpha - dim) = 1.0;
  return z;
}

double GeneralizedVector::max_abs() const {
  double m = 0.0;
  if (vec.size() > 0) m = std::max(m, vec.cwiseAbs().maxCoeff());
  if (covec.size() > 0) m = std::max(m, covec.cwiseAbs().maxCoeff());
  return m;
}

GeneralizedVector operator+(const GeneralizedVector& a, const GeneralizedVector& b) {
  return {a.vec + b.vec, a.covec + b.covec};
}

GeneralizedVector operator-(const GeneralizedVector& a, const GeneralizedVector& b) {
  return {a.vec - b.vec, a.covec - b.covec};
}

double neutral_pairing(const GeneralizedVector& a, const GeneralizedVector& b) {
  return 0.5 * (b.covec.dot(a.vec) + a.covec.dot(b.vec));
}

DorfmanBracket::DorfmanBracket(LieBracket mu, KForm h) : mu_(std::move(mu)), h_(std::move(h)) {
  if (h_.degree() != 3) throw ValidationError("H must be a 3-form");
  if (h_.dim() != mu_.dim()) throw ValidationError("dimension mismatch between mu and H");
}

DorfmanBracket DorfmanBracket::make(LieBracket mu, KForm h, double tolerance) {
  DorfmanBracket b(std::move(mu), std::move(h));
  const double jac = jacobi_residual(b.mu_);
  if (jac > tolerance) throw ValidationError("mu is not a Lie bracket: Jacobi residual " + std::to_string(jac));
  const double closed = closedness_residual(b.mu_, b.h_);
  if (closed > tolerance) throw ValidationError("H is not closed: |d_mu H| = " + std::to_string(closed));
  return b;
}

DorfmanBracket DorfmanBracket::unchecked(LieBracket mu, KForm h) { return DorfmanBracket(std::move(mu), std::move(h)); }

GeneralizedVector dorfman_eval(const DorfmanBracket& b, const GeneralizedVector& z1, const GeneralizedVector& z2) {
  const int n = b.dim();
  if (z1.dim() != n || z2.dim() != n) throw ValidationError("dimension mismatch in Dorfman bracket");
  const LieBracket& mu = b.mu();
  GeneralizedVector out = GeneralizedVector::zero(n);
  out.vec = mu.apply(z1.vec, z2.vec);
  // covector part evaluated on e_m
  for (int m = 0; m < n; ++m) {
    const Vector em = Vector::Unit(n, m);
    double s = -z2.covec.dot(mu.apply(z1.vec, em)) + z1.covec.dot(mu.apply(z2.vec, em));
    for (int i = 0; i < n; ++i) {
      if (z1.vec(i) == 0.0) continue;
      for (int j = 0; j < n; ++j)
        if (z2.vec(j) != 0.0 && i != j && i != m && j != m) s += z1.vec(i) * z2.vec(j) * b.h().at({i, j, m});
    }
    out.covec(m) = s;
  }
  return out;
}

double dorfman_trilinear(const DorfmanBracket& b, const GeneralizedVector& z1, const GeneralizedVector& z2,
                         const GeneralizedVector& z3) {
  return neutral_pairing(dorfman_eval(b, z1, z2), z3);
}

StructureTable dorfman_structure_constants(const DorfmanBracket& b) {
  const int n = b.dim();
  StructureTable t(n);
  for (int a = 0; a < 2 * n; ++a)
    for (int c = 0; c < 2 * n; ++c) {
      const GeneralizedVector z = dorfman_eval(b, GeneralizedVector::basis(n, a), GeneralizedVector::basis(n, c));
      // 2 <z, e_k> = z.covec(k), 2 <z, e^k> = z.vec(k)
      for (int k = 0; k < n; ++k) {
        t(a, c, k) = z.covec(k);
        t(a, c, n + k) = z.vec(k);
      }
    }
  return t;
}

GeneralizedVector eval_from_table(const StructureTable& t, const GeneralizedVector& z1, const GeneralizedVector& z2) {
  const int n = t.dim();
  Vector c1(2 * n), c2(2 * n);
  c1 << z1.vec, z1.covec;
  c2 << z2.vec, z2.covec;
  GeneralizedVector out = GeneralizedVector::zero(n);
  for (int a = 0; a < 2 * n; ++a) {
    if (c1(a) == 0.0) continue;
    for (int b = 0; b < 2 * n; ++b) {
      const double w = c1(a) * c2(b);
      if (w == 0.0) continue;
      for (int k = 0; k < n; ++k) {
        out.vec(k) += w * t(a, b, n + k);
        out.covec(k) += w * t(a, b, k);
      }
    }
  }
  return out;
}

double dorfman_total_skew_residual(const StructureTable& t) {
  const int m = t.size();
  double worst = 0.0;
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      for (int c = 0; c < m; ++c) {
        const double v = t(a, b, c);
        worst = std::max({worst, std::abs(v + t(b, a, c)), std::abs(v + t(a, c, b)), std::abs(v + t(c, b, a))});
      }
  return worst;
}

double dorfman_total_skew_residual(const DorfmanBracket& b) {
  return dorfman_total_skew_residual(dorfman_structure_constants(b));
}

double dorfman_jacobi_residual(const DorfmanBracket& b) {
  const int n = b.dim();
  std::vector<GeneralizedVector> e;
  for (int a = 0; a < 2 * n; ++a) e.push_back(GeneralizedVector::basis(n, a));
  // brackets of basis pairs, reused below
  std::vector<GeneralizedVector> pair(static_cast<std::size_t>(4) * n * n);
  for (int a = 0; a < 2 * n; ++a)
    for (int c = 0; c < 2 * n; ++c) pair[a * 2 * n + c] = dorfman_eval(b, e[a], e[c]);
  auto br = [&](int a, int c) -> const GeneralizedVector& { return pair[a * 2 * n + c]; };
  double worst = 0.0;
  for (int x = 0; x < 2 * n; ++x)
    for (int y = 0; y < 2 * n; ++y)
      for (int z = 0; z < 2 * n; ++z) {
        const GeneralizedVector r = dorfman_eval(b, e[x], br(y, z)) - dorfman_eval(b, br(x, y), e[z]) -
                                    dorfman_eval(b, e[y], br(x, z));
        worst = std::max(worst, r.max_abs());
      }
  return worst;
}

DorfmanReport dorfman_report(const DorfmanBracket& b) {
  return {jacobi_residual(b.mu()), closedness_residual(b.mu(), b.h()), dorfman_total_skew_residual(b),
          dorfman_jacobi_residual(b)};
}

}  // namespace nilflow
