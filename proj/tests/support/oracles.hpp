#pragma once

// Independent reference computations used by the unit and acceptance tests.
// None of these share code paths with the library routines they check.

#include <array>

#include "cascade/model.hpp"

namespace cascade::oracle {

// Classical rates transcribed directly from the equations of motion.
std::array<cplx, kModes> classical_rates(const std::array<cplx, kModes>& a, const SystemParams& p);

// Negated central-difference Jacobian of the doubled-basis drift at s.
Matrix6c fd_drift_matrix(const SystemParams& p, const FieldState& s, double h = 1e-5);

// Stationary amplitudes by damped Newton iteration on the real and imaginary
// parts of the three stationarity equations. The Jacobian is formed by finite
// differences and the pump is ramped from zero so the iteration follows the
// branch connected to the vacuum.
std::array<cplx, kModes> root_find_steady_state(const SystemParams& p, int ramp_steps = 20);

// Solution of A C + C A^T = D by eigen-decomposition of A.
Matrix6c lyapunov_by_eigenbasis(const Matrix6c& a, const Matrix6c& d);

// Trapezoidal integral of S(w) dw / 2pi over [-w_max, w_max].
Matrix6c integrated_spectrum(const Matrix6c& a, const Matrix6c& d, double w_max, int steps);

// First-order positive-P shift of the stationary means, A^{-1} g(C), where
// g collects the quadratic drift terms averaged over the covariance C.
Vector6c mean_shift(const SystemParams& p, const Matrix6c& a, const Matrix6c& c);

}  // namespace cascade::oracle
