#include "support.hpp"

#include <doctest.h>
#include <unsupported/Eigen/MatrixFunctions>

using namespace testing;

TEST_CASE("brackets are skew-completed and validated") {
  const LieBracket h = heisenberg();
  CHECK(h(0, 1, 2) == 1.0);
  CHECK(h(1, 0, 2) == -1.0);
  std::vector<TensorEntry> bad{{{0, 1, 2}, 1.0}, {{1, 0, 2}, 1.0}};
  CHECK_THROWS_AS(LieBracket::from_entries(3, bad), ValidationError);
  std::vector<TensorEntry> diag{{{1, 1, 2}, 1.0}};
  CHECK_THROWS_AS(LieBracket::from_entries(3, diag), ValidationError);
  std::vector<TensorEntry> consistent{{{0, 1, 2}, 2.0}, {{1, 0, 2}, -2.0}};
  CHECK(LieBracket::from_entries(3, consistent) == heisenberg(2.0));
  std::vector<double> dense(27, 0.0);
  dense[(0 * 3 + 1) * 3 + 2] = 1.0;
  CHECK_THROWS_AS(LieBracket::from_tensor(3, dense), ValidationError);
  dense[(1 * 3 + 0) * 3 + 2] = -1.0;
  CHECK(LieBracket::from_tensor(3, dense) == heisenberg());
}

TEST_CASE("jacobi_residual") {
  CHECK(jacobi_residual(heisenberg()) == 0.0);
  CHECK(jacobi_residual(LieBracket(4)) == 0.0);
  // mu(e1,e2) = e1, mu(e1,e3) = e3. On (e1,e2,e3):
  // [[e1,e2],e3] + [[e2,e3],e1] + [[e3,e1],e2] = [e1,e3] + 0 - [e3,e2] = e3.
  std::vector<TensorEntry> e{{{0, 1, 0}, 1.0}, {{0, 2, 2}, 1.0}};
  const LieBracket mu = LieBracket::from_entries(3, e);
  CHECK(jacobi_residual(mu) == doctest::Approx(1.0));
}

TEST_CASE("nilpotency_step") {
  CHECK(nilpotency_step(heisenberg()) == 2);
  CHECK(nilpotency_step(LieBracket(4)) == 1);
  std::vector<TensorEntry> sl2{{{0, 1, 1}, 2.0}, {{0, 2, 2}, -2.0}, {{1, 2, 0}, 1.0}};
  const LieBracket mu = LieBracket::from_entries(3, sl2);
  CHECK(jacobi_residual(mu) < 1e-14);
  CHECK_FALSE(nilpotency_step(mu).has_value());
  // oracle: [g,g] has full rank 3
  Matrix images(3, 9);
  int c = 0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) images.col(c++) = mu.apply(Vector::Unit(3, i), Vector::Unit(3, j));
  CHECK(Eigen::FullPivLU<Matrix>(images).rank() == 3);
  CHECK(nilpotency_step(bracket(5, {{0, 1, 2}, {0, 2, 3}, {0, 3, 4}})) == 4);
  std::vector<TensorEntry> nonlie{{{0, 1, 0}, 1.0}, {{0, 2, 2}, 1.0}};
  CHECK_THROWS_AS(nilpotency_step(LieBracket::from_entries(3, nonlie)), ValidationError);
}

TEST_CASE("Chevalley-Eilenberg differential") {
  const LieBracket mu = heisenberg();
  const KForm d = ce_differential(mu, KForm::basis(3, {2}));
  CHECK(d.distance(KForm::basis(3, {0, 1}).scaled(-1.0)) == 0.0);
  CHECK_THROWS_AS(ce_differential(mu, KForm::basis(3, {0, 1, 2})), ValidationError);
  CHECK(closedness_residual(mu, KForm::basis(3, {0, 1, 2})) == 0.0);
  CHECK(ce_differential(mu, KForm::basis(3, {0})).max_abs() == 0.0);
  CHECK(ce_differential(mu, KForm::constant(3, 5.0)).max_abs() == 0.0);
}

TEST_CASE("d squared vanishes exactly on Lie brackets") {
  for (int trial = 0; trial < 20; ++trial) {
    const LieBracket random = LieBracket::generate(3, [](int, int, int) { return uniform(); });
    double d2 = 0.0;
    for (int i = 0; i < 3; ++i) d2 = std::max(d2, ce_differential(random, ce_differential(random, KForm::basis(3, {i}))).max_abs());
    CHECK(jacobi_residual(random) > 1e-6);
    CHECK(d2 > 1e-6);

    const LieBracket lie = gl_action(random_invertible(3), trial % 2 ? heisenberg() : bracket(3, {{1, 2, 0}, {2, 0, 1}, {0, 1, 2}}));
    double d2_lie = 0.0;
    for (int i = 0; i < 3; ++i) d2_lie = std::max(d2_lie, ce_differential(lie, ce_differential(lie, KForm::basis(3, {i}))).max_abs());
    CHECK(jacobi_residual(lie) < 1e-12);
    CHECK(d2_lie < 1e-12);
  }
}

TEST_CASE("gl_action") {
  const LieBracket h = heisenberg();
  CHECK(gl_action(Matrix::Identity(3, 3), h).distance(h) == 0.0);
  CHECK(gl_action(2.5 * Matrix::Identity(3, 3), h).distance(h.scaled(1.0 / 2.5)) < 1e-15);
  CHECK(gl_action(Eigen::Vector3d(1, 1, 2).asDiagonal().toDenseMatrix(), h).distance(heisenberg(2.0)) < 1e-15);
  CHECK_THROWS_AS(gl_action(Matrix::Zero(3, 3), h), ValidationError);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 3 + trial % 3;
    const LieBracket mu = random_nilpotent(n);
    const Matrix a = random_invertible(n);
    const Matrix b = random_invertible(n);
    CHECK(gl_action(a * b, mu).distance(gl_action(a, gl_action(b, mu))) < 1e-12 * std::max(1.0, mu.max_abs()) * 10);
    CHECK(jacobi_residual(gl_action(a, mu)) < 1e-10);
    const KForm w = random_form(n, 2);
    CHECK(gl_action_form(a * b, w).distance(gl_action_form(a, gl_action_form(b, w))) < 1e-11);
  }
}

TEST_CASE("pi operators") {
  const LieBracket h = heisenberg();
  const KForm H = KForm::basis(3, {0, 1, 2}).scaled(0.7);
  const Matrix id = Matrix::Identity(3, 3);
  CHECK(pi_mu(id, h).distance(h.scaled(-1.0)) < 1e-15);
  CHECK(pi_form(id, H).distance(H.scaled(-3.0)) < 1e-15);
  CHECK(pi_mu(Matrix::Zero(3, 3), h).max_abs() == 0.0);
  CHECK(pi_form(Matrix::Zero(3, 3), H).max_abs() == 0.0);
  CHECK(pi_mu(Eigen::Vector3d(1, 1, 2).asDiagonal().toDenseMatrix(), h).max_abs() == 0.0);
}

TEST_CASE("pi is the derivative of the action") {
  auto bracket_gap = [](const LieBracket& moved, const LieBracket& mu, const LieBracket& lin, double s) {
    const int n = mu.dim();
    double e = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) e = std::max(e, std::abs((moved(i, j, k) - mu(i, j, k)) / s - lin(i, j, k)));
    return e;
  };
  for (int trial = 0; trial < 5; ++trial) {
    const int n = 3 + trial % 3;
    const LieBracket mu = random_nilpotent(n);
    const Matrix phi = random_matrix(n);
    const KForm w = random_form(n, 3);
    std::vector<double> mu_err, form_err;
    for (double s : {1e-3, 1e-4}) {
      const Matrix a = (s * phi).exp();
      mu_err.push_back(bracket_gap(gl_action(a, mu), mu, pi_mu(phi, mu), s));
      form_err.push_back(((gl_action_form(a, w) - w).scaled(1.0 / s) - pi_form(phi, w)).max_abs());
    }
    // first order: the error drops by about the step ratio
    CHECK(mu_err[1] < 0.2 * mu_err[0]);
    CHECK(form_err[1] < 0.2 * form_err[0]);
    CHECK(mu_err[1] < 1e-2);
  }
}

TEST_CASE("forms: wedge, interior, pullback") {
  const KForm e1 = KForm::basis(3, {0});
  const KForm e2 = KForm::basis(3, {1});
  CHECK(wedge(e1, e2).distance(KForm::basis(3, {0, 1})) == 0.0);
  CHECK(wedge(e2, e1).distance(KForm::basis(3, {0, 1}).scaled(-1.0)) == 0.0);
  CHECK(KForm::basis(3, {1, 0}).at({0, 1}) == -1.0);
  CHECK_THROWS_AS(wedge(KForm::basis(3, {0, 1}), KForm::basis(3, {1, 2})), ValidationError);
  const KForm vol = KForm::basis(3, {0, 1, 2});
  CHECK(interior(Vector::Unit(3, 0), vol).distance(KForm::basis(3, {1, 2})) == 0.0);
  const Matrix m = random_matrix(3);
  CHECK(std::abs(pullback(vol, m).packed(0) - m.determinant()) < 1e-14);
  std::vector<TensorEntry> clash{{{0, 1, 2}, 1.0}, {{1, 0, 2}, 1.0}};
  CHECK_THROWS_AS(KForm::from_entries(3, 3, clash), ValidationError);
}
