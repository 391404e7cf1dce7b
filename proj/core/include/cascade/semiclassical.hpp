#pragma once

// Noise-free (semiclassical) dynamics: stationary states by forward
// integration, and detection of the self-pulsing (Hopf) regime.

#include <optional>
#include <vector>

#include "cascade/model.hpp"

namespace cascade {

// Deterministic part of the positive-P drift in the doubled basis
// (a1, a1+, a2, a2+, a3, a3+). Valid for any doubled state.
Vector6c positive_p_drift(const Vector6c& x, const SystemParams& p);

// Time derivative of the state with noise removed. On the classical manifold
//   da1/dt = eps - g1 a1 + k1 a1* a2
//   da2/dt = -g2 a2 + k2 a2* a3 - (k1/2) a1^2
//   da3/dt = -g3 a3 - (k2/2) a2^2
// and the alpha_plus components are the conjugates.
FieldState semiclassical_derivative(const FieldState& s, const SystemParams& p);

// max_i |d alpha_i / dt| at s.
double stationarity_residual(const FieldState& s, const SystemParams& p);

// Sampled |alpha_1|^2 after the transient.
struct TimeSeries {
  std::vector<double> t;
  std::vector<double> intensity;
};

struct PulsingDiagnosis {
  bool is_pulsing = false;
  double period_estimate = 0.0;   // 0 when no oscillation was resolved
  double amplitude = 0.0;         // half peak-to-peak of |alpha_1|^2
  double relative_modulation = 0.0;  // peak-to-peak / mean
};

class InsufficientData : public Error {
 public:
  using Error::Error;
};

// Minimum tail span in cavity lifetimes (1/gamma1).
inline constexpr double kMinTailSpan = 20.0;
// Relative peak-to-peak modulation of |alpha_1|^2 regarded as sustained pulsing.
inline constexpr double kPulsingThreshold = 1e-6;

// Flags sustained oscillation over the last half of the tail and estimates
// its period from upward mean crossings.
PulsingDiagnosis detect_pulsing(const TimeSeries& tail, const SystemParams& p);

struct SteadyStateOptions {
  double tolerance = 1e-12;  // residual relative to max(1, |epsilon|)
  double t_max = 5000.0;
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  // Imaginary kick added to the vacuum start so that phase-quadrature
  // instabilities are excited; 0 keeps real-pump dynamics on the real subspace.
  // Not applied when the pump is off (the vacuum is then exactly stationary).
  double symmetry_breaking_seed = 1e-6;
  double transient = 50.0;    // discarded before tail analysis
  double tail_span = 200.0;   // retained tail length
  double sample_dt = 0.05;
};

struct SteadyStateResult {
  FieldState state;
  double residual = 0.0;
  bool converged = false;
  double t_final = 0.0;
  std::optional<TimeSeries> trajectory_tail;
  std::optional<PulsingDiagnosis> pulsing;
};

// The residual plateaued with a sustained oscillation: self-pulsing regime.
class NotStationary : public Error {
 public:
  NotStationary(const std::string& what, SteadyStateResult result)
      : Error(what), result_(std::move(result)) {}
  const SteadyStateResult& result() const { return result_; }

 private:
  SteadyStateResult result_;
};

class IntegrationFailure : public Error {
 public:
  using Error::Error;
};

// Integrates from the vacuum until the residual drops below the tolerance.
// Returns converged = false (tail populated) when t_max is reached without
// a detectable limit cycle; throws NotStationary when pulsing is detected.
SteadyStateResult find_steady_state(const SystemParams& p, const SteadyStateOptions& opts = {});

// Stationary point reached from the vacuum without symmetry breaking. For
// real pump this stays on the real subspace, so it exists even when the
// point is unstable to phase perturbations. Complex pumps are handled through
// the phase symmetry a1 -> a1 e^{i phi}, a2 -> a2 e^{2 i phi}, a3 -> a3 e^{4 i phi}.
FieldState invariant_stationary_point(const SystemParams& p, const SteadyStateOptions& opts = {});

struct ThresholdResult {
  double eps_crit = 0.0;
  double lower = 0.0;  // last stable epsilon
  double upper = 0.0;  // first unstable epsilon
};

class NoThresholdInRange : public Error {
 public:
  using Error::Error;
};

// Smallest |epsilon| in [eps_lo, eps_hi] at which the drift matrix acquires
// an eigenvalue with non-positive real part. A coarse scan of n_steps points
// brackets the crossing, then bisection refines it. The pump phase of p is kept.
ThresholdResult pulsing_threshold(const SystemParams& p, double eps_lo, double eps_hi, int n_steps);

}  // namespace cascade
