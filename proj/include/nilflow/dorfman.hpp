#pragma once

// Left-invariant Dorfman brackets on R^n + (R^n)^*, determined by a Lie
// bracket mu and a closed 3-form H:
//   [X + xi, Y + eta] = mu(X,Y) - eta(mu(X,.)) + xi(mu(Y,.)) + H(X,Y,.)

#include "nilflow/lie.hpp"

namespace nilflow {

struct GeneralizedVector {
  Vector vec;
  Vector covec;

  static GeneralizedVector zero(int dim) { return {Vector::Zero(dim), Vector::Zero(dim)}; }
  /// Basis element: 0..n-1 are e_i, n..2n-1 are e^i.
  static GeneralizedVector basis(int dim, int alpha);
  int dim() const { return static_cast<int>(vec.size()); }
  double max_abs() const;
};

GeneralizedVector operator+(const GeneralizedVector& a, const GeneralizedVector& b);
GeneralizedVector operator-(const GeneralizedVector& a, const GeneralizedVector& b);

/// <X + xi, Y + eta> = 1/2 (eta(X) + xi(Y)).
double neutral_pairing(const GeneralizedVector& a, const GeneralizedVector& b);

class DorfmanBracket {
 public:
  /// Validates that mu is a Lie bracket and d_mu H = 0.
  static DorfmanBracket make(LieBracket mu, KForm h, double tolerance = kZeroTolerance);
  /// No validation; used to probe the residuals of invalid pairs.
  static DorfmanBracket unchecked(LieBracket mu, KForm h);

  const LieBracket& mu() const { return mu_; }
  const KForm& h() const { return h_; }
  int dim() const { return mu_.dim(); }

 private:
  DorfmanBracket(LieBracket mu, KForm h);
  LieBracket mu_;
  KForm h_;
};

GeneralizedVector dorfman_eval(const DorfmanBracket& b, const GeneralizedVector& z1, const GeneralizedVector& z2);

/// Trilinear view <[z1, z2], z3>.
double dorfman_trilinear(const DorfmanBracket& b, const GeneralizedVector& z1, const GeneralizedVector& z2,
                         const GeneralizedVector& z3);

/// Structure constants T(a, b, c) = 2 <[e_a, e_b], e_c> over the 2n basis
/// vectors; a < n is the vector e_a, a >= n the covector e^{a-n}.
class StructureTable {
 public:
  explicit StructureTable(int dim) : n_(dim), t_(static_cast<std::size_t>(8) * dim * dim * dim, 0.0) {}
  int dim() const { return n_; }
  int size() const { return 2 * n_; }
  double operator()(int a, int b, int c) const { return t_[index(a, b, c)]; }
  double& operator()(int a, int b, int c) { return t_[index(a, b, c)]; }

 private:
  std::size_t index(int a, int b, int c) const {
    const std::size_t m = 2 * static_cast<std::size_t>(n_);
    return (a * m + b) * m + c;
  }
  int n_;
  std::vector<double> t_;
};

StructureTable dorfman_structure_constants(const DorfmanBracket& b);
/// Bracket reconstructed from a table.
GeneralizedVector eval_from_table(const StructureTable& t, const GeneralizedVector& z1, const GeneralizedVector& z2);

/// Max deviation of the table from full alternation.
double dorfman_total_skew_residual(const StructureTable& t);
double dorfman_total_skew_residual(const DorfmanBracket& b);

/// Max over basis triples of |[z1,[z2,z3]] - [[z1,z2],z3] - [z2,[z1,z3]]|.
double dorfman_jacobi_residual(const DorfmanBracket& b);

struct DorfmanReport {
  double lie_jacobi = 0.0;
  double closedness = 0.0;
  double total_skew = 0.0;
  double dorfman_jacobi = 0.0;
};

DorfmanReport dorfman_report(const DorfmanBracket& b);

}  // namespace nilflow
