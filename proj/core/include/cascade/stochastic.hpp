#pragma once

// Positive-P ensemble integration with Euler-Maruyama steps. Each
// trajectory has its own random stream derived from (seed, trajectory index),
// and reductions run in a fixed chunk order, so results are bit-identical for
// a given seed regardless of the number of worker threads.

#include <array>
#include <concepts>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "cascade/model.hpp"

namespace cascade {

// A trajectory left the region |x| <= cap or produced NaN/Inf.
class NonFinite : public Error {
 public:
  using Error::Error;
};

// More than 1% of trajectories diverged.
class ExcessiveDivergence : public Error {
 public:
  using Error::Error;
};

inline constexpr double kDivergenceCap = 1e6;
inline constexpr double kMaxDivergedFraction = 0.01;

// One Euler-Maruyama step driven by four standard normal draws n:
//   a1  += drift dt + sqrt(k1 a2)  sqrt(dt) n0
//   a1+ += drift dt + sqrt(k1 a2+) sqrt(dt) n1
//   a2  += drift dt + sqrt(k2 a3)  sqrt(dt) n2
//   a2+ += drift dt + sqrt(k2 a3+) sqrt(dt) n3
//   a3, a3+ deterministic
// Square roots are principal-branch. Throws NonFinite past the cap.
FieldState step_trajectory(const FieldState& s, const SystemParams& p, double dt,
                           const std::array<double, 4>& noise, double cap = kDivergenceCap);

template <std::uniform_random_bit_generator Urbg>
FieldState step_trajectory(const FieldState& s, const SystemParams& p, double dt, Urbg& rng,
                           double cap = kDivergenceCap) {
  std::normal_distribution<double> normal;
  const std::array<double, 4> n{normal(rng), normal(rng), normal(rng), normal(rng)};
  return step_trajectory(s, p, dt, n, cap);
}

// Random stream of one trajectory.
std::mt19937_64 trajectory_stream(std::uint64_t seed, std::uint64_t trajectory);

struct MomentEstimate {
  cplx value{};
  double se_real = 0.0;
  double se_imag = 0.0;

  bool operator==(const MomentEstimate&) const = default;
};

// Index of <x_p x_q> (p <= q, doubled basis) in the 21-entry upper triangle.
int moment_index(int p, int q);
// Label of doubled component p: a1, a1+, a2, a2+, a3, a3+.
std::string component_name(int p);

struct EnsembleSettings {
  double dt = 1e-4;
  double t_end = 100.0;
  std::size_t n_traj = 1000;
  std::uint64_t seed = 1;
  std::optional<FieldState> initial;  // vacuum when empty
  int n_samples = 11;                 // sample times evenly spaced on [0, t_end]
  // Per-trajectory time averages are taken over [average_from, t_end]; a
  // negative value selects t_end / 2.
  double average_from = -1.0;
  double cap = kDivergenceCap;
  unsigned threads = 0;  // 0 = hardware concurrency
  bool allow_unreliable = false;
};

struct EnsembleMoments {
  std::size_t n_traj = 0;
  std::size_t n_diverged = 0;
  bool reliable = true;

  std::vector<double> t_grid;
  // Ensemble averages at each sample time over surviving trajectories.
  std::vector<std::array<MomentEstimate, 6>> means;
  std::vector<std::array<MomentEstimate, 21>> second_moments;

  // Stationary-window estimates: each trajectory contributes its time average
  // over [window_start, t_end], so errors are across independent trajectories.
  double window_start = 0.0;
  std::array<MomentEstimate, 6> window_means{};
  std::array<MomentEstimate, 21> window_second_moments{};
  // <x_p x_q> - <x_p><x_q>, errors by first-order propagation.
  std::array<MomentEstimate, 21> window_covariance{};

  bool operator==(const EnsembleMoments&) const = default;
};

EnsembleMoments run_ensemble(const SystemParams& p, const EnsembleSettings& settings);

}  // namespace cascade
