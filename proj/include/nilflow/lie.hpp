#pragma once

// Structure-constant tensor algebra on R^n.
//
// Conventions used throughout the library:
//   * indices are 0-based in code and 1-based in every external format;
//   * mu(e_i, e_j) = mu_ij^k e_k, stored densely as n^3 reals;
//   * an endomorphism is an Eigen matrix in the column convention, i.e.
//     column i holds the image of e_i, so phi(e_i) = phi_i^j e_j means
//     phi_i^j == M(j, i);
//   * k-forms are stored by their coefficients on strictly increasing index
//     tuples in lexicographic order, omega = sum_{I increasing} omega_I e^I.

#include <Eigen/Dense>

#include <cstddef>
#include <initializer_list>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace nilflow {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Endo = Matrix;

/// Raised when an input violates a documented invariant.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a numerical procedure cannot produce a valid result
/// (singular matrix, non-SPD metric reached by a flow, step underflow).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kZeroTolerance = 1e-9;
inline constexpr int kMaxDim = 16;

/// One structure constant or form coefficient read from an external listing.
struct TensorEntry {
  std::vector<int> index;  // 0-based
  double value = 0.0;
};

// ---------------------------------------------------------------------------

class LieBracket {
 public:
  LieBracket() = default;
  /// The zero (abelian) bracket on R^n.
  explicit LieBracket(int dim);

  /// Builds a bracket by calling f(i, j, k) for every i < j and every k;
  /// the (j, i) entries are filled by skew-symmetry.
  template <class F>
  static LieBracket generate(int dim, F&& f) {
    LieBracket b(dim);
    for (int i = 0; i < dim; ++i)
      for (int j = i + 1; j < dim; ++j)
        for (int k = 0; k < dim; ++k) {
          const double v = f(i, j, k);
          b.c_[b.offset(i, j, k)] = v;
          b.c_[b.offset(j, i, k)] = -v;
        }
    b.check_finite();
    return b;
  }

  /// Skew-completes a listing of (i, j, k) -> value. Entries given for both
  /// (i, j) and (j, i) must agree up to sign; i == j must carry zero.
  static LieBracket from_entries(int dim, std::span<const TensorEntry> entries);

  /// Validates skew-symmetry (to 1e-12 relative) of a dense n^3 tensor.
  static LieBracket from_tensor(int dim, std::vector<double> coeffs);

  int dim() const { return n_; }
  double operator()(int i, int j, int k) const { return c_[offset(i, j, k)]; }
  std::span<const double> coeffs() const& { return c_; }
  std::span<const double> coeffs() const&& = delete;

  /// mu(x, y) for coordinate vectors.
  Vector apply(const Vector& x, const Vector& y) const;
  /// ad_mu(x) as a matrix: y -> mu(x, y).
  Matrix ad(const Vector& x) const;

  LieBracket scaled(double c) const;
  double max_abs() const;
  double distance(const LieBracket& other) const;

  friend bool operator==(const LieBracket&, const LieBracket&) = default;

 private:
  std::size_t offset(int i, int j, int k) const {
    return (static_cast<std::size_t>(i) * n_ + j) * n_ + k;
  }
  void check_finite() const;

  int n_ = 0;
  std::vector<double> c_;
};

// ---------------------------------------------------------------------------

namespace detail {
/// Strictly increasing k-subsets of {0..n-1} in lexicographic order, with a
/// bitmask lookup for their rank.
struct IndexTable {
  int n = 0;
  int k = 0;
  std::vector<std::vector<int>> tuples;
  std::vector<int> rank_of_mask;  // -1 when popcount(mask) != k

  static std::shared_ptr<const IndexTable> get(int n, int k);
};
}  // namespace detail

class KForm {
 public:
  KForm() = default;
  /// Zero form of the given degree.
  KForm(int dim, int degree);

  /// f receives each increasing tuple (as std::span<const int>) and returns
  /// the packed coefficient.
  template <class F>
  static KForm generate(int dim, int degree, F&& f) {
    KForm w(dim, degree);
    for (std::size_t p = 0; p < w.c_.size(); ++p) w.c_[p] = f(std::span<const int>(w.table_->tuples[p]));
    w.check_finite();
    return w;
  }

  /// Coefficients listed on arbitrary index orders; repeated entries must be
  /// consistent with alternation.
  static KForm from_entries(int dim, int degree, std::span<const TensorEntry> entries);
  static KForm from_packed(int dim, int degree, std::vector<double> packed);
  /// e^{i1...ik} (0-based indices, any order; the sign of the sorting
  /// permutation is applied).
  static KForm basis(int dim, std::initializer_list<int> indices);
  static KForm constant(int dim, double value);

  int dim() const { return n_; }
  int degree() const { return k_; }
  std::size_t size() const { return c_.size(); }
  std::span<const double> coeffs() const& { return c_; }
  std::span<const double> coeffs() const&& = delete;
  double packed(std::size_t p) const { return c_[p]; }
  std::span<const int> tuple(std::size_t p) const { return table_->tuples[p]; }
  /// Packed position of an increasing tuple.
  std::size_t rank(std::span<const int> increasing) const;

  /// Coefficient omega(e_{i1}, ..., e_{ik}) for arbitrary indices.
  double at(std::span<const int> idx) const;
  double at(std::initializer_list<int> idx) const {
    return at(std::span<const int>(idx.begin(), idx.size()));
  }

  /// Evaluation on k vectors.
  double evaluate(std::span<const Vector> vectors) const;

  KForm scaled(double c) const;
  KForm operator+(const KForm& o) const;
  KForm operator-(const KForm& o) const;
  double max_abs() const;
  double distance(const KForm& other) const { return (*this - other).max_abs(); }

  bool operator==(const KForm& o) const { return n_ == o.n_ && k_ == o.k_ && c_ == o.c_; }

 private:
  void check_finite() const;
  void require_same_shape(const KForm& o) const;

  int n_ = 0;
  int k_ = 0;
  std::shared_ptr<const detail::IndexTable> table_;
  std::vector<double> c_;
};

/// Sign of the permutation sorting idx, or 0 if an index repeats.
int permutation_sign(std::span<const int> idx);

// ---------------------------------------------------------------------------
// Operations

/// Max over basis triples of the sup-norm of the Jacobiator.
double jacobi_residual(const LieBracket& mu);

/// Step of nilpotency from the lower central series, or nullopt if the series
/// stabilizes above zero. Throws ValidationError for non-Lie input.
std::optional<int> nilpotency_step(const LieBracket& mu, double tolerance = kZeroTolerance);

/// Chevalley-Eilenberg differential,
/// (d w)(X0..Xk) = sum_{p<q} (-1)^{p+q} w(mu(Xp,Xq), X0..^p..^q..Xk).
/// Rejects degree >= dim.
KForm ce_differential(const LieBracket& mu, const KForm& omega);

/// Sup-norm of d_mu omega; zero for top-degree forms.
double closedness_residual(const LieBracket& mu, const KForm& omega);

KForm wedge(const KForm& a, const KForm& b);
/// i_X omega.
KForm interior(const Vector& x, const KForm& omega);
/// (M^* omega)(X1..Xk) = omega(M X1, ..., M Xk).
KForm pullback(const KForm& omega, const Matrix& m);

/// (A . mu)(X, Y) = A mu(A^{-1} X, A^{-1} Y). Throws on (near-)singular A.
LieBracket gl_action(const Matrix& a, const LieBracket& mu);
/// A . omega = (A^{-1})^* omega.
KForm gl_action_form(const Matrix& a, const KForm& omega);

/// Differential of the GL_n action: phi mu(X,Y) - mu(phi X, Y) - mu(X, phi Y).
LieBracket pi_mu(const Endo& phi, const LieBracket& mu);
/// -sum over slots of omega(..., phi ., ...).
KForm pi_form(const Endo& phi, const KForm& omega);

/// Full antisymmetric matrix w_ij of a 2-form, and back.
Matrix two_form_matrix(const KForm& omega);
KForm two_form_from_matrix(const Matrix& m);

Matrix symmetric_part(const Matrix& m);
Matrix skew_part(const Matrix& m);

/// Heisenberg bracket scaled by x: mu(e1, e2) = x e3 (n = 3).
LieBracket heisenberg(double x = 1.0);

}  // namespace nilflow
