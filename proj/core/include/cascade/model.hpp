#pragma once

// Parameters, phase-space states and quadrature conventions for the
// three-mode cascaded harmonic generator (fundamental, second harmonic,
// fourth harmonic). Mode numbers are 1-based throughout: 1 = fundamental,
// 2 = second harmonic, 3 = fourth harmonic.

#include <array>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace cascade {

using cplx = std::complex<double>;
using Matrix6c = Eigen::Matrix<cplx, 6, 6>;
using Matrix6d = Eigen::Matrix<double, 6, 6>;
using Vector6c = Eigen::Matrix<cplx, 6, 1>;
using Vector6d = Eigen::Matrix<double, 6, 1>;

inline constexpr int kModes = 3;

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// One or more rates/couplings were zero, negative or non-finite.
class NonPositiveRate : public Error {
 public:
  explicit NonPositiveRate(std::vector<std::string> fields);
  const std::vector<std::string>& fields() const { return fields_; }

 private:
  std::vector<std::string> fields_;
};

struct SystemParams {
  double kappa1 = 0.0;  // couples fundamental and second harmonic
  double kappa2 = 0.0;  // couples second and fourth harmonic
  cplx epsilon{0.0, 0.0};
  double gamma1 = 1.0;
  double gamma2 = 1.0;
  double gamma3 = 1.0;

  // Loss rate of mode 1..3.
  double gamma(int mode) const;

  bool operator==(const SystemParams&) const = default;
};

enum class Normalization {
  rescale,  // divide every rate and the pump by gamma1 (time in units of 1/gamma1)
  reject,   // throw unless gamma1 == 1 already
};

// Checks positivity of all rates and returns parameters in the gamma1 = 1
// normalization. Throws NonPositiveRate naming every offending field, or
// std::invalid_argument for a non-canonical gamma1 under Normalization::reject.
SystemParams validate_params(const SystemParams& p,
                             Normalization norm = Normalization::rescale);

// Parameter sets of the two reference regimes.
SystemParams regime_params(int regime);

// Six doubled phase-space amplitudes (alpha_i, alpha_i^+).
struct FieldState {
  std::array<cplx, kModes> alpha{};
  std::array<cplx, kModes> alpha_plus{};

  // State on the classical manifold: alpha_plus = conj(alpha).
  static FieldState classical(const std::array<cplx, kModes>& alpha);
  static FieldState from_doubled(const Vector6c& x);

  // Ordering (a1, a1+, a2, a2+, a3, a3+).
  Vector6c doubled() const;

  bool on_classical_manifold() const;

  bool operator==(const FieldState&) const = default;
};

// Mean quadratures X_i = a_i + a_i^+, Y_i = -i (a_i - a_i^+), ordered
// (X1, Y1, X2, Y2, X3, Y3). Real on the classical manifold.
Vector6c mean_quadratures(const FieldState& s);

// Index of X_mode / Y_mode in the (X1, Y1, X2, Y2, X3, Y3) basis.
constexpr int x_index(int mode) { return 2 * (mode - 1); }
constexpr int y_index(int mode) { return 2 * (mode - 1) + 1; }

// Output quadrature spectral covariance at one analysis frequency, vacuum
// normalized to unit diagonal.
class QuadCovariance {
 public:
  static constexpr double kSymmetryTolerance = 1e-10;

  QuadCovariance(double omega, const Matrix6d& matrix);

  static QuadCovariance vacuum(double omega = 0.0);

  double omega() const { return omega_; }
  const Matrix6d& matrix() const { return matrix_; }

  double operator()(int p, int q) const { return matrix_(p, q); }

  // Variance of the linear combination c . (X1, Y1, ..., Y3).
  double variance(const Vector6d& c) const { return c.dot(matrix_ * c); }
  // Covariance between two linear combinations.
  double covariance(const Vector6d& a, const Vector6d& b) const { return a.dot(matrix_ * b); }

  // V(X_i) V(Y_i) for one mode.
  double uncertainty_product(int mode) const;

 private:
  double omega_;
  Matrix6d matrix_;
};

}  // namespace cascade
