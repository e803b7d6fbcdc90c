#include "nilflow/lie.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <mutex>
#include <numeric>

namespace nilflow {

namespace {

void require_dim(int n) {
  if (n < 1 || n > kMaxDim)
    throw ValidationError("dimension must lie in 1.." + std::to_string(kMaxDim) + ", got " + std::to_string(n));
}

double max_abs_of(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

// Sorts idx in place and returns the permutation sign, 0 on repeats.
int sort_with_sign(std::vector<int>& idx) {
  int sign = 1;
  for (std::size_t a = 1; a < idx.size(); ++a)
    for (std::size_t b = a; b > 0 && idx[b - 1] >= idx[b]; --b) {
      if (idx[b - 1] == idx[b]) return 0;
      std::swap(idx[b - 1], idx[b]);
      sign = -sign;
    }
  return sign;
}

double minor_det(const Matrix& m, std::span<const int> rows, std::span<const int> cols) {
  const auto k = static_cast<Eigen::Index>(rows.size());
  if (k == 0) return 1.0;
  Matrix sub(k, k);
  for (Eigen::Index r = 0; r < k; ++r)
    for (Eigen::Index c = 0; c < k; ++c) sub(r, c) = m(rows[r], cols[c]);
  if (k == 1) return sub(0, 0);
  if (k == 2) return sub(0, 0) * sub(1, 1) - sub(0, 1) * sub(1, 0);
  return sub.partialPivLu().determinant();
}

Matrix checked_inverse(const Matrix& a) {
  if (a.rows() != a.cols()) throw ValidationError("matrix must be square");
  Eigen::JacobiSVD<Matrix> svd(a);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || !(s(s.size() - 1) > 0.0) || s(0) / s(s.size() - 1) > 1e12)
    throw ValidationError("matrix is singular or too ill-conditioned to invert");
  return a.inverse();
}

}  // namespace

// ---------------------------------------------------------------------------
// LieBracket

LieBracket::LieBracket(int dim) : n_(dim) {
  require_dim(dim);
  c_.assign(static_cast<std::size_t>(dim) * dim * dim, 0.0);
}

LieBracket LieBracket::from_entries(int dim, std::span<const TensorEntry> entries) {
  LieBracket b(dim);
  std::vector<bool> seen(b.c_.size(), false);
  for (const auto& e : entries) {
    if (e.index.size() != 3) throw ValidationError("bracket entries need three indices");
    const int i = e.index[0], j = e.index[1], k = e.index[2];
    for (int x : e.index)
      if (x < 0 || x >= dim) throw ValidationError("bracket index out of range");
    if (!std::isfinite(e.value)) throw ValidationError("bracket entry is not finite");
    if (i == j) {
      if (e.value != 0.0) throw ValidationError("mu_ii^k must vanish (skew-symmetry)");
      continue;
    }
    const auto p = b.offset(i, j, k);
    const auto q = b.offset(j, i, k);
    if (seen[p] && b.c_[p] != e.value)
      throw ValidationError("inconsistent entries for mu_" + std::to_string(i + 1) + std::to_string(j + 1) + "^" +
                            std::to_string(k + 1));
    b.c_[p] = e.value;
    b.c_[q] = -e.value;
    seen[p] = seen[q] = true;
  }
  return b;
}

LieBracket LieBracket::from_tensor(int dim, std::vector<double> coeffs) {
  LieBracket b(dim);
  if (coeffs.size() != b.c_.size()) throw ValidationError("bracket tensor has wrong size");
  const double scale = std::max(1.0, max_abs_of(coeffs));
  for (int i = 0; i < dim; ++i)
    for (int j = i; j < dim; ++j)
      for (int k = 0; k < dim; ++k) {
        const double a = coeffs[b.offset(i, j, k)];
        const double c = coeffs[b.offset(j, i, k)];
        if (std::abs(a + c) > 1e-12 * scale) throw ValidationError("bracket tensor is not skew-symmetric");
      }
  b.c_ = std::move(coeffs);
  b.check_finite();
  return b;
}

void LieBracket::check_finite() const {
  for (double x : c_)
    if (!std::isfinite(x)) throw ValidationError("bracket has non-finite structure constants");
}

Vector LieBracket::apply(const Vector& x, const Vector& y) const {
  Vector out = Vector::Zero(n_);
  for (int i = 0; i < n_; ++i) {
    if (x(i) == 0.0) continue;
    for (int j = 0; j < n_; ++j) {
      const double w = x(i) * y(j);
      if (w == 0.0) continue;
      for (int k = 0; k < n_; ++k) out(k) += w * (*this)(i, j, k);
    }
  }
  return out;
}

Matrix LieBracket::ad(const Vector& x) const {
  Matrix m = Matrix::Zero(n_, n_);
  for (int j = 0; j < n_; ++j)
    for (int i = 0; i < n_; ++i)
      for (int k = 0; k < n_; ++k) m(k, j) += x(i) * (*this)(i, j, k);
  return m;
}

LieBracket LieBracket::scaled(double c) const {
  LieBracket b = *this;
  for (double& x : b.c_) x *= c;
  return b;
}

double LieBracket::max_abs() const { return max_abs_of(c_); }

double LieBracket::distance(const LieBracket& other) const {
  if (other.n_ != n_) throw ValidationError("dimension mismatch");
  double m = 0.0;
  for (std::size_t p = 0; p < c_.size(); ++p) m = std::max(m, std::abs(c_[p] - other.c_[p]));
  return m;
}

// ---------------------------------------------------------------------------
// Index tables and KForm

std::shared_ptr<const detail::IndexTable> detail::IndexTable::get(int n, int k) {
  static std::mutex mutex;
  static std::map<std::pair<int, int>, std::shared_ptr<const IndexTable>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[{n, k}];
  if (!slot) {
    auto t = std::make_shared<IndexTable>();
    t->n = n;
    t->k = k;
    t->rank_of_mask.assign(std::size_t{1} << n, -1);
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
      if (std::popcount(mask) != k) continue;
      std::vector<int> tuple;
      for (int b = 0; b < n; ++b)
        if (mask & (1u << b)) tuple.push_back(b);
      t->tuples.push_back(std::move(tuple));
    }
    std::sort(t->tuples.begin(), t->tuples.end());
    for (std::size_t p = 0; p < t->tuples.size(); ++p) {
      unsigned mask = 0;
      for (int b : t->tuples[p]) mask |= 1u << b;
      t->rank_of_mask[mask] = static_cast<int>(p);
    }
    slot = std::move(t);
  }
  return slot;
}

int permutation_sign(std::span<const int> idx) {
  std::vector<int> v(idx.begin(), idx.end());
  return sort_with_sign(v);
}

KForm::KForm(int dim, int degree) : n_(dim), k_(degree) {
  require_dim(dim);
  if (degree < 0 || degree > dim)
    throw ValidationError("form degree " + std::to_string(degree) + " out of range for dimension " +
                          std::to_string(dim));
  table_ = detail::IndexTable::get(dim, degree);
  c_.assign(table_->tuples.size(), 0.0);
}

KForm KForm::from_entries(int dim, int degree, std::span<const TensorEntry> entries) {
  KForm w(dim, degree);
  std::vector<bool> seen(w.c_.size(), false);
  for (const auto& e : entries) {
    if (static_cast<int>(e.index.size()) != degree) throw ValidationError("form entry has wrong number of indices");
    for (int x : e.index)
      if (x < 0 || x >= dim) throw ValidationError("form index out of range");
    if (!std::isfinite(e.value)) throw ValidationError("form entry is not finite");
    std::vector<int> idx = e.index;
    const int s = sort_with_sign(idx);
    if (s == 0) {
      if (e.value != 0.0) throw ValidationError("form coefficient with repeated index must vanish");
      continue;
    }
    const auto p = w.rank(idx);
    const double v = s * e.value;
    if (seen[p] && w.c_[p] != v) throw ValidationError("inconsistent entries for a form coefficient");
    w.c_[p] = v;
    seen[p] = true;
  }
  return w;
}

KForm KForm::from_packed(int dim, int degree, std::vector<double> packed) {
  KForm w(dim, degree);
  if (packed.size() != w.c_.size()) throw ValidationError("packed form has wrong size");
  w.c_ = std::move(packed);
  w.check_finite();
  return w;
}

KForm KForm::basis(int dim, std::initializer_list<int> indices) {
  const TensorEntry e{std::vector<int>(indices), 1.0};
  return from_entries(dim, static_cast<int>(indices.size()), std::span(&e, 1));
}

KForm KForm::constant(int dim, double value) {
  KForm w(dim, 0);
  w.c_[0] = value;
  return w;
}

std::size_t KForm::rank(std::span<const int> increasing) const {
  unsigned mask = 0;
  for (int b : increasing) mask |= 1u << b;
  const int r = table_->rank_of_mask[mask];
  if (r < 0) throw ValidationError("index tuple is not a valid increasing tuple");
  return static_cast<std::size_t>(r);
}

double KForm::at(std::span<const int> idx) const {
  if (static_cast<int>(idx.size()) != k_) throw ValidationError("wrong number of indices for form");
  if (k_ == 0) return c_[0];
  std::vector<int> v(idx.begin(), idx.end());
  const int s = sort_with_sign(v);
  if (s == 0) return 0.0;
  return s * c_[rank(v)];
}

double KForm::evaluate(std::span<const Vector> vectors) const {
  if (static_cast<int>(vectors.size()) != k_) throw ValidationError("wrong number of arguments for form");
  if (k_ == 0) return c_[0];
  Matrix v(n_, k_);
  for (int c = 0; c < k_; ++c) v.col(c) = vectors[c];
  std::vector<int> cols(k_);
  std::iota(cols.begin(), cols.end(), 0);
  double sum = 0.0;
  for (std::size_t p = 0; p < c_.size(); ++p)
    if (c_[p] != 0.0) sum += c_[p] * minor_det(v, table_->tuples[p], cols);
  return sum;
}

KForm KForm::scaled(double c) const {
  KForm w = *this;
  for (double& x : w.c_) x *= c;
  return w;
}

void KForm::require_same_shape(const KForm& o) const {
  if (n_ != o.n_ || k_ != o.k_) throw ValidationError("form shape mismatch");
}

KForm KForm::operator+(const KForm& o) const {
  require_same_shape(o);
  KForm w = *this;
  for (std::size_t p = 0; p < c_.size(); ++p) w.c_[p] += o.c_[p];
  return w;
}

KForm KForm::operator-(const KForm& o) const {
  require_same_shape(o);
  KForm w = *this;
  for (std::size_t p = 0; p < c_.size(); ++p) w.c_[p] -= o.c_[p];
  return w;
}

double KForm::max_abs() const { return max_abs_of(c_); }

void KForm::check_finite() const {
  for (double x : c_)
    if (!std::isfinite(x)) throw ValidationError("form has non-finite coefficients");
}

// ---------------------------------------------------------------------------
// Operations

double jacobi_residual(const LieBracket& mu) {
  const int n = mu.dim();
  double worst = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (int k = j + 1; k < n; ++k)
        for (int m = 0; m < n; ++m) {
          // sum_l mu_ij^l mu_lk^m + mu_jk^l mu_li^m + mu_ki^l mu_lj^m
          double s = 0.0;
          for (int l = 0; l < n; ++l)
            s += mu(i, j, l) * mu(l, k, m) + mu(j, k, l) * mu(l, i, m) + mu(k, i, l) * mu(l, j, m);
          worst = std::max(worst, std::abs(s));
        }
  return worst;
}

std::optional<int> nilpotency_step(const LieBracket& mu, double tolerance) {
  const double res = jacobi_residual(mu);
  if (res > tolerance) throw ValidationError("not a Lie bracket: Jacobi residual " + std::to_string(res));
  const int n = mu.dim();
  Matrix span = Matrix::Identity(n, n);
  int current_rank = n;
  for (int step = 1; step <= n + 1; ++step) {
    // next = [g, current]
    Matrix next(n, n * span.cols());
    for (int i = 0; i < n; ++i)
      for (Eigen::Index c = 0; c < span.cols(); ++c)
        next.col(i * span.cols() + c) = mu.apply(Vector::Unit(n, i), span.col(c));
    Eigen::JacobiSVD<Matrix> svd(next, Eigen::ComputeThinU);
    const auto& s = svd.singularValues();
    const double smax = s.size() > 0 ? s(0) : 0.0;
    int r = 0;
    if (smax > tolerance)
      for (Eigen::Index p = 0; p < s.size(); ++p)
        if (s(p) > 1e-9 * smax) ++r;
    if (r == 0) return step;
    if (r >= current_rank) return std::nullopt;
    current_rank = r;
    span = svd.matrixU().leftCols(r);
  }
  return std::nullopt;
}

KForm ce_differential(const LieBracket& mu, const KForm& omega) {
  const int n = mu.dim();
  const int k = omega.degree();
  if (omega.dim() != n) throw ValidationError("dimension mismatch between bracket and form");
  if (k >= n) throw ValidationError("Chevalley-Eilenberg differential needs degree < dimension");
  std::vector<int> args(k);
  return KForm::generate(n, k + 1, [&](std::span<const int> idx) {
    double sum = 0.0;
    for (int p = 0; p <= k; ++p)
      for (int q = p + 1; q <= k; ++q) {
        // remaining indices with p and q removed, placed after the bracket slot
        int t = 1;
        for (int r = 0; r <= k; ++r)
          if (r != p && r != q) args[t++] = idx[r];
        const double sign = ((p + q) % 2 == 0) ? 1.0 : -1.0;
        for (int l = 0; l < n; ++l) {
          const double c = mu(idx[p], idx[q], l);
          if (c == 0.0) continue;
          args[0] = l;
          sum += sign * c * omega.at(args);
        }
      }
    return sum;
  });
}

double closedness_residual(const LieBracket& mu, const KForm& omega) {
  if (omega.degree() >= mu.dim()) return 0.0;
  return ce_differential(mu, omega).max_abs();
}

KForm wedge(const KForm& a, const KForm& b) {
  if (a.dim() != b.dim()) throw ValidationError("dimension mismatch in wedge product");
  const int n = a.dim();
  const int p = a.degree();
  const int q = b.degree();
  if (p + q > n) throw ValidationError("wedge product degree exceeds dimension");
  const auto splits = detail::IndexTable::get(p + q, p);
  return KForm::generate(n, p + q, [&](std::span<const int> idx) {
    double sum = 0.0;
    std::vector<int> left(p), right(q), order(p + q);
    for (const auto& chosen : splits->tuples) {
      int li = 0, ri = 0;
      std::vector<bool> in_left(p + q, false);
      for (int c : chosen) in_left[c] = true;
      for (int r = 0; r < p + q; ++r) {
        if (in_left[r])
          left[li++] = idx[r];
        else
          right[ri++] = idx[r];
      }
      // sign of the shuffle (chosen, rest) -> (0..p+q-1)
      int t = 0;
      for (int c : chosen) order[t++] = c;
      for (int r = 0; r < p + q; ++r)
        if (!in_left[r]) order[t++] = r;
      sum += permutation_sign(order) * a.at(left) * b.at(right);
    }
    return sum;
  });
}

KForm interior(const Vector& x, const KForm& omega) {
  const int n = omega.dim();
  const int k = omega.degree();
  if (k == 0) throw ValidationError("interior product of a 0-form");
  if (x.size() != n) throw ValidationError("dimension mismatch in interior product");
  std::vector<int> args(k);
  return KForm::generate(n, k - 1, [&](std::span<const int> idx) {
    std::copy(idx.begin(), idx.end(), args.begin() + 1);
    double s = 0.0;
    for (int l = 0; l < n; ++l) {
      if (x(l) == 0.0) continue;
      args[0] = l;
      s += x(l) * omega.at(args);
    }
    return s;
  });
}

KForm pullback(const KForm& omega, const Matrix& m) {
  const int n = omega.dim();
  if (m.rows() != n || m.cols() != n) throw ValidationError("dimension mismatch in pullback");
  return KForm::generate(n, omega.degree(), [&](std::span<const int> idx) {
    double s = 0.0;
    for (std::size_t p = 0; p < omega.size(); ++p)
      if (omega.packed(p) != 0.0) s += omega.packed(p) * minor_det(m, omega.tuple(p), idx);
    return s;
  });
}

LieBracket gl_action(const Matrix& a, const LieBracket& mu) {
  const int n = mu.dim();
  if (a.rows() != n) throw ValidationError("dimension mismatch in GL action");
  const Matrix inv = checked_inverse(a);
  std::vector<Vector> image(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) image[i * n + j] = a * mu.apply(inv.col(i), inv.col(j));
  return LieBracket::generate(n, [&](int i, int j, int k) { return image[i * n + j](k); });
}

KForm gl_action_form(const Matrix& a, const KForm& omega) {
  if (a.rows() != omega.dim()) throw ValidationError("dimension mismatch in GL action");
  return pullback(omega, checked_inverse(a));
}

LieBracket pi_mu(const Endo& phi, const LieBracket& mu) {
  const int n = mu.dim();
  if (phi.rows() != n || phi.cols() != n) throw ValidationError("dimension mismatch in pi(phi) mu");
  return LieBracket::generate(n, [&](int i, int j, int k) {
    double s = 0.0;
    for (int l = 0; l < n; ++l)
      s += phi(k, l) * mu(i, j, l) - phi(l, i) * mu(l, j, k) - phi(l, j) * mu(i, l, k);
    return s;
  });
}

KForm pi_form(const Endo& phi, const KForm& omega) {
  const int n = omega.dim();
  const int k = omega.degree();
  if (phi.rows() != n || phi.cols() != n) throw ValidationError("dimension mismatch in pi(phi) omega");
  std::vector<int> args(k);
  return KForm::generate(n, k, [&](std::span<const int> idx) {
    double s = 0.0;
    for (int p = 0; p < k; ++p) {
      std::copy(idx.begin(), idx.end(), args.begin());
      for (int l = 0; l < n; ++l) {
        if (phi(l, idx[p]) == 0.0) continue;
        args[p] = l;
        s -= phi(l, idx[p]) * omega.at(args);
      }
    }
    return s;
  });
}

Matrix two_form_matrix(const KForm& omega) {
  if (omega.degree() != 2) throw ValidationError("expected a 2-form");
  const int n = omega.dim();
  Matrix m = Matrix::Zero(n, n);
  for (std::size_t p = 0; p < omega.size(); ++p) {
    const auto t = omega.tuple(p);
    m(t[0], t[1]) = omega.packed(p);
    m(t[1], t[0]) = -omega.packed(p);
  }
  return m;
}

KForm two_form_from_matrix(const Matrix& m) {
  const auto n = static_cast<int>(m.rows());
  return KForm::generate(n, 2, [&](std::span<const int> idx) { return 0.5 * (m(idx[0], idx[1]) - m(idx[1], idx[0])); });
}

Matrix symmetric_part(const Matrix& m) { return 0.5 * (m + m.transpose()); }
Matrix skew_part(const Matrix& m) { return 0.5 * (m - m.transpose()); }

LieBracket heisenberg(double x) {
  return LieBracket::generate(3, [&](int i, int j, int k) { return (i == 0 && j == 1 && k == 2) ? x : 0.0; });
}

}  // namespace nilflow
