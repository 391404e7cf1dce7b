#include <gtest/gtest.h>

#include <cmath>

#include "cascade/linearized.hpp"
#include "cascade/semiclassical.hpp"
#include "cascade/stochastic.hpp"

using namespace cascade;

namespace {

SystemParams weak_pump() {
  auto p = regime_params(1);
  p.epsilon = 10.5;
  return p;
}

EnsembleSettings small_run() {
  EnsembleSettings s;
  s.dt = 0.01;
  s.t_end = 20.0;
  s.n_traj = 64;
  s.seed = 42;
  s.threads = 2;
  return s;
}

}  // namespace

TEST(Step, ZeroNoiseIsEulerStep) {
  const auto p = regime_params(1);
  FieldState s;
  s.alpha = {cplx{3.0, 0.1}, cplx{-1.0, 0.2}, cplx{0.5, 0.0}};
  s.alpha_plus = {cplx{2.9, -0.1}, cplx{-1.1, 0.0}, cplx{0.4, 0.3}};
  const double dt = 1e-3;
  const auto next = step_trajectory(s, p, dt, {0.0, 0.0, 0.0, 0.0});
  const Vector6c expected = s.doubled() + dt * positive_p_drift(s.doubled(), p);
  EXPECT_LT((next.doubled() - expected).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Step, NoiseEntersThroughPrincipalRoot) {
  const auto p = regime_params(1);
  FieldState s;
  s.alpha = {cplx{}, cplx{-4.0, 0.0}, cplx{}};
  s.alpha_plus = s.alpha;
  const double dt = 0.01;
  const auto a = step_trajectory(s, p, dt, {1.0, 0.0, 0.0, 0.0});
  const auto b = step_trajectory(s, p, dt, {0.0, 0.0, 0.0, 0.0});
  const cplx kick = a.alpha[0] - b.alpha[0];
  EXPECT_NEAR(std::abs(kick - std::sqrt(cplx{-4.0 * p.kappa1, 0.0}) * std::sqrt(dt)), 0.0, 1e-15);
  EXPECT_GT(kick.imag(), 0.0);
  EXPECT_EQ(a.alpha[2], b.alpha[2]);
  EXPECT_EQ(a.alpha_plus[2], b.alpha_plus[2]);
}

TEST(Step, CapBreachIsNonFinite) {
  FieldState s;
  s.alpha[0] = 10.0;
  EXPECT_THROW(step_trajectory(s, regime_params(1), 1e-3, {0.0, 0.0, 0.0, 0.0}, 5.0), NonFinite);
  EXPECT_THROW(step_trajectory(s, regime_params(1), 0.0, {0.0, 0.0, 0.0, 0.0}), std::invalid_argument);
}

TEST(Indexing, UpperTriangle) {
  EXPECT_EQ(moment_index(0, 0), 0);
  EXPECT_EQ(moment_index(0, 5), 5);
  EXPECT_EQ(moment_index(1, 1), 6);
  EXPECT_EQ(moment_index(5, 5), 20);
  EXPECT_EQ(moment_index(3, 2), moment_index(2, 3));
  EXPECT_EQ(component_name(3), "a2+");
  EXPECT_THROW(moment_index(0, 6), std::out_of_range);
}

TEST(Streams, DistinctPerTrajectory) {
  auto a = trajectory_stream(1, 0);
  auto b = trajectory_stream(1, 1);
  auto c = trajectory_stream(2, 0);
  auto a2 = trajectory_stream(1, 0);
  const auto x = a();
  EXPECT_NE(x, b());
  EXPECT_NE(x, c());
  EXPECT_EQ(x, a2());
}

TEST(Ensemble, UnpumpedMomentsVanishExactly) {
  auto p = regime_params(1);
  p.epsilon = 0.0;
  const auto m = run_ensemble(p, small_run());
  EXPECT_EQ(m.n_diverged, 0u);
  EXPECT_TRUE(m.reliable);
  for (const auto& row : m.means)
    for (const auto& e : row) EXPECT_EQ(e.value, cplx{});
  for (const auto& row : m.second_moments)
    for (const auto& e : row) EXPECT_EQ(e.value, cplx{});
  for (const auto& e : m.window_covariance) EXPECT_EQ(e.value, cplx{});
}

TEST(Ensemble, SeedDeterminesBitsRegardlessOfThreads) {
  const auto p = weak_pump();
  auto s = small_run();
  const auto a = run_ensemble(p, s);
  const auto b = run_ensemble(p, s);
  EXPECT_TRUE(a == b);
  s.threads = 5;
  EXPECT_TRUE(run_ensemble(p, s) == a);
  s.seed = 43;
  EXPECT_FALSE(run_ensemble(p, s) == a);
}

TEST(Ensemble, SampleGridAndWindow) {
  auto s = small_run();
  s.n_samples = 5;
  s.average_from = 8.0;
  const auto m = run_ensemble(weak_pump(), s);
  EXPECT_EQ(m.t_grid, (std::vector<double>{0.0, 5.0, 10.0, 15.0, 20.0}));
  EXPECT_EQ(m.means.size(), 5u);
  EXPECT_NEAR(m.window_start, 8.0, 1e-12);
  EXPECT_EQ(m.n_traj, 64u);
}

TEST(Ensemble, StandardErrorScalesWithTrajectoryCount) {
  const auto p = weak_pump();
  auto s = small_run();
  s.n_traj = 200;
  const auto few = run_ensemble(p, s);
  s.n_traj = 800;
  const auto many = run_ensemble(p, s);
  const int idx = moment_index(0, 0);
  const double ratio = many.window_covariance[idx].se_real / few.window_covariance[idx].se_real;
  EXPECT_NEAR(ratio, 0.5, 0.1);
  const double mean_ratio = many.window_means[0].se_imag / few.window_means[0].se_imag;
  EXPECT_NEAR(mean_ratio, 0.5, 0.1);
}

TEST(Ensemble, MeansApproachSteadyState) {
  const auto p = regime_params(1);
  auto s = small_run();
  s.n_traj = 128;
  s.t_end = 40.0;
  const auto m = run_ensemble(p, s);
  const auto ss = find_steady_state(p).state.doubled();
  for (int i = 0; i < 6; ++i) {
    EXPECT_LT(std::abs(m.means.back()[i].value - ss(i)), 0.05 * std::abs(ss(i))) << component_name(i);
  }
}

TEST(Ensemble, ExcessiveDivergenceIsFlagged) {
  // Strong nonlinearity: a few positive-P trajectories spike past the cap.
  const SystemParams p{1.0, 1.0, {5.0, 0.0}, 1.0, 1.0, 1.0};
  auto s = small_run();
  EXPECT_THROW(run_ensemble(p, s), ExcessiveDivergence);
  s.allow_unreliable = true;
  const auto m = run_ensemble(p, s);
  EXPECT_GT(m.n_diverged, 0u);
  EXPECT_LT(m.n_diverged, s.n_traj);
  EXPECT_FALSE(m.reliable);
  for (const auto& e : m.window_means) EXPECT_TRUE(std::isfinite(e.value.real()));
}

TEST(Ensemble, InvalidSettingsAreRejected) {
  auto s = small_run();
  s.n_traj = 1;
  EXPECT_THROW(run_ensemble(weak_pump(), s), std::invalid_argument);
  s = small_run();
  s.dt = -1.0;
  EXPECT_THROW(run_ensemble(weak_pump(), s), std::invalid_argument);
}

// Weak convergence: integrate every trajectory twice on the same Brownian
// path, once with dt and once with dt/2. The stationary covariance estimates
// must differ by less than one standard error.
TEST(Ensemble, HalvingTheStepLeavesMomentsWithinOneStandardError) {
  const auto p = weak_pump();
  const auto ss = find_steady_state(p).state;
  const double dt = 0.01;
  const int n_traj = 400;
  const int coarse_steps = 3000;
  const int window_from = 1000;

  std::vector<double> coarse_est, fine_est;
  for (int tr = 0; tr < n_traj; ++tr) {
    auto rng = trajectory_stream(9, tr);
    std::normal_distribution<double> normal;
    FieldState coarse = ss, fine = ss;
    double sc = 0.0, sf = 0.0, sc2 = 0.0, sf2 = 0.0;
    for (int n = 0; n < coarse_steps; ++n) {
      std::array<double, 4> w1{}, w2{}, w{};
      for (auto& v : w1) v = normal(rng);
      for (auto& v : w2) v = normal(rng);
      for (int k = 0; k < 4; ++k) w[k] = (w1[k] + w2[k]) / std::sqrt(2.0);
      fine = step_trajectory(fine, p, 0.5 * dt, w1);
      fine = step_trajectory(fine, p, 0.5 * dt, w2);
      coarse = step_trajectory(coarse, p, dt, w);
      if (n >= window_from) {
        const double xc = coarse.alpha[0].real(), xf = fine.alpha[0].real();
        sc += xc;
        sc2 += xc * xc;
        sf += xf;
        sf2 += xf * xf;
      }
    }
    const double count = coarse_steps - window_from;
    coarse_est.push_back(sc2 / count - (sc / count) * (sc / count));
    fine_est.push_back(sf2 / count - (sf / count) * (sf / count));
  }
  auto mean_se = [](const std::vector<double>& v) {
    double m = 0.0, m2 = 0.0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    for (double x : v) m2 += (x - m) * (x - m);
    return std::pair{m, std::sqrt(m2 / (v.size() - 1) / v.size())};
  };
  const auto [mc, sec] = mean_se(coarse_est);
  const auto [mf, sef] = mean_se(fine_est);
  EXPECT_LT(std::abs(mc - mf), std::min(sec, sef));
  EXPECT_GT(mc, 0.0);
}
