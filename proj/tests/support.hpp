#pragma once

#include "nilflow/lie.hpp"
#include "nilflow/config.hpp"

#include <cstdlib>
#include <random>

namespace testing {

using namespace nilflow;

inline std::mt19937_64& rng() {
  static std::mt19937_64 engine([] {
    const char* env = std::getenv("NILFLOW_SEED");
    return env ? std::strtoull(env, nullptr, 10) : defaults::seed;
  }());
  return engine;
}

inline double uniform(double lo = -1.0, double hi = 1.0) {
  return std::uniform_real_distribution<double>(lo, hi)(rng());
}

inline Matrix random_matrix(int n) {
  Matrix m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = uniform();
  return m;
}

inline Matrix random_invertible(int n) { return Matrix::Identity(n, n) + 0.4 * random_matrix(n); }

inline Matrix random_spd(int n) {
  const Matrix a = random_matrix(n);
  return a * a.transpose() + 0.5 * Matrix::Identity(n, n);
}

inline Matrix random_orthogonal(int n) {
  Eigen::HouseholderQR<Matrix> qr(random_matrix(n));
  return qr.householderQ();
}

inline KForm random_form(int n, int k) {
  return KForm::generate(n, k, [](std::span<const int>) { return uniform(); });
}

inline LieBracket bracket(int n, std::initializer_list<std::array<int, 3>> nonzero) {
  std::vector<TensorEntry> e;
  for (const auto& [i, j, k] : nonzero) e.push_back({{i, j, k}, 1.0});
  return LieBracket::from_entries(n, e);
}

/// A nilpotent algebra of the given dimension (3..6) in a random basis.
inline LieBracket random_nilpotent(int n) {
  std::vector<LieBracket> models;
  switch (n) {
    case 3:
      models = {bracket(3, {{0, 1, 2}})};
      break;
    case 4:
      models = {bracket(4, {{0, 1, 2}}), bracket(4, {{0, 1, 2}, {0, 2, 3}})};
      break;
    case 5:
      models = {bracket(5, {{0, 1, 4}, {2, 3, 4}}), bracket(5, {{0, 1, 2}, {0, 2, 3}, {0, 3, 4}}),
                bracket(5, {{0, 1, 2}, {0, 2, 3}, {0, 3, 4}, {1, 2, 4}})};
      break;
    default:
      models = {bracket(n, {{0, 1, 3}, {0, 2, 4}, {1, 2, 5}})};
  }
  const auto pick = std::uniform_int_distribution<std::size_t>(0, models.size() - 1)(rng());
  return gl_action(random_invertible(n), models[pick]);
}

inline double rel_err(double got, double want) { return std::abs(got - want) / std::max(1.0, std::abs(want)); }

}  // namespace testing
