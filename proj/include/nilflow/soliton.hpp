#pragma once

// Generalized Ricci solitons on Lie algebras:
//   Rc = lambda g + g(D) + 1/4 H o H - 1/2 S(nabla^+ theta)      (symmetric)
//   omega = -d*H + 1/2 d theta - 1/2 i_{g^{-1} theta} H            (skew)
// with D a g-symmetric derivation.

#include "nilflow/config.hpp"
#include "nilflow/curvature.hpp"

namespace nilflow {

struct SolitonData {
  double lambda = 0.0;
  Endo derivation;
  KForm omega;
  double residual_norm = 0.0;
  bool is_soliton = false;
};

struct SolitonResidual {
  double symmetric = 0.0;
  double skew = 0.0;
};

/// Basis of Der(mu) = ker(phi -> pi(phi) mu), via an SVD null space.
std::vector<Endo> derivation_space(const LieBracket& mu, double tolerance = kZeroTolerance);

/// Basis of the g-symmetric derivations, g(D X, Y) = g(X, D Y).
std::vector<Endo> symmetric_derivations(const LieBracket& mu, const Metric& g, double tolerance = kZeroTolerance);

/// Sup-norm residuals of the two soliton equations.
SolitonResidual soliton_residual(const LieBracket& mu, const Metric& g, Orientation o, const KForm& h,
                                 const KForm& theta, double lambda, const Endo& derivation, const KForm& omega);

/// omega from the skew equation, then (lambda, D) by minimum-norm least
/// squares in the Frobenius norm. residual_norm is the max of the two
/// sup-norm residuals; is_soliton when it is <= acceptance.
SolitonData soliton_fit(const LieBracket& mu, const Metric& g, Orientation o, const KForm& h, const KForm& theta,
                        double acceptance = defaults::soliton_acceptance);

/// The explicit omega solving the skew equation.
KForm soliton_omega(const LieBracket& mu, const Metric& g, Orientation o, const KForm& h, const KForm& theta);

}  // namespace nilflow
