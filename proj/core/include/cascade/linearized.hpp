#pragma once

// Ornstein-Uhlenbeck linearization about a stationary state: drift matrix A,
// diffusion matrix D, intracavity spectral matrix
//   S(w) = (A + i w)^-1 D (A^T - i w)^-1
// and the output quadrature spectra obtained from the input-output relations.
//
// The fluctuation basis is (da1, da1+, da2, da2+, da3, da3+); the quadrature
// basis is (X1, Y1, X2, Y2, X3, Y3).

#include <array>
#include <vector>

#include "cascade/model.hpp"

namespace cascade {

class EigenSolverFailure : public Error {
 public:
  using Error::Error;
};

// A + i w was numerically singular. Cannot happen when A is stable.
class SingularMatrix : public Error {
 public:
  using Error::Error;
};

// The output quadrature matrix carried an imaginary part above tolerance.
class NonHermitianResidue : public Error {
 public:
  using Error::Error;
};

struct DriftDiffusion {
  Matrix6c a_matrix;
  Matrix6c d_matrix;
  FieldState steady_state;
};

Matrix6c build_drift(const SystemParams& p, const FieldState& ss);
Matrix6c build_diffusion(const SystemParams& p, const FieldState& ss);
DriftDiffusion linearize(const SystemParams& p, const FieldState& ss);

std::array<cplx, 6> stability_eigenvalues(const Matrix6c& a);

// Smallest real part among the eigenvalues of A. The linearized spectra are
// meaningful only when this is strictly positive.
double stability_margin(const Matrix6c& a);

struct IntracavitySpectrum {
  Matrix6c s;
  // Reciprocal-condition based estimate of cond(A + i w).
  double condition_estimate = 1.0;
};

inline constexpr double kConditionWarning = 1e12;

IntracavitySpectrum intracavity_spectrum(const Matrix6c& a, const Matrix6c& d, double omega);

// T with (X, Y) = T (da, da+) per mode, block diagonal.
Matrix6c quadrature_transform();

inline constexpr double kImaginaryResidueTolerance = 1e-10;

// Output spectral covariance
//   S_out(i, j) = delta_ij + sqrt(g_i g_j) (S_ij + S_ji)
// with S taken in the quadrature basis.
QuadCovariance output_quad_spectrum(const SystemParams& p, const Matrix6c& a, const Matrix6c& d,
                                    double omega);

struct SpectrumResult {
  double omega = 0.0;
  Matrix6c s_alpha;
  QuadCovariance s_quad = QuadCovariance::vacuum();
  double condition_estimate = 1.0;
};

SpectrumResult spectrum_at(const SystemParams& p, const DriftDiffusion& dd, double omega);

// Evaluates the spectrum on every frequency of the grid. Work is split over
// `threads` workers (0 = hardware concurrency); results are in grid order.
std::vector<SpectrumResult> spectrum_grid(const SystemParams& p, const DriftDiffusion& dd,
                                          const std::vector<double>& omegas,
                                          unsigned threads = 0);

// Stationary intracavity fluctuation covariance C solving A C + C A^T = D.
Matrix6c stationary_covariance(const Matrix6c& a, const Matrix6c& d);

// Uniform grid of `steps` points on [min, max]. When the range straddles
// zero, w = 0 is always present (snapped if within rounding, else inserted).
std::vector<double> frequency_grid(double omega_min, double omega_max, int steps);

}  // namespace cascade
