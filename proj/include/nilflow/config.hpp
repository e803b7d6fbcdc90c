#pragma once

// Every numeric default of the library and the command-line tool.
// Command-line flags override these; nothing else hard-codes a tolerance.

#include <limits>

namespace nilflow::defaults {

// integrator
inline constexpr double rtol = 1e-9;
inline constexpr double atol = 1e-10;
inline constexpr double initial_step = 1e-3;
inline constexpr double min_step = 1e-13;
inline constexpr double max_step = std::numeric_limits<double>::infinity();
inline constexpr double norm_limit = 1e8;    // sup-norm of the state that counts as blowup
inline constexpr long max_steps = 50'000'000;

// structure checks
inline constexpr double structure_tolerance = 1e-7;   // Jacobi / closedness along bracket flows
inline constexpr double eigenvalue_floor = 1e-10;     // metric degeneracy along the Ricci flow
inline constexpr double decay_slack = 1e-9;

// solitons
inline constexpr double soliton_acceptance = 1e-8;

// blowup search and sweeps
inline constexpr double blowup_horizon = 1e3;
inline constexpr double bisection_tolerance = 1e-5;
inline constexpr double forward_horizon = 500.0;      // limit estimate of g_3 in tmin sweeps

// default t-span of the flow subcommands
inline constexpr double t_start = 0.0;
inline constexpr double t_end = 10.0;

// randomized tests; overridden by NILFLOW_SEED
inline constexpr unsigned long seed = 20240611UL;

}  // namespace nilflow::defaults
