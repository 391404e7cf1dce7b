#include <gtest/gtest.h>

#include <cmath>

#include "cascade/linearized.hpp"
#include "cascade/semiclassical.hpp"
#include "oracles.hpp"

using namespace cascade;

namespace {

DriftDiffusion at_regime(int regime) {
  const auto p = regime_params(regime);
  return linearize(p, find_steady_state(p).state);
}

double max_abs(const Matrix6c& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST(Drift, VacuumIsDiagonalLoss) {
  const auto p = regime_params(2);
  const auto a = build_drift(p, FieldState{});
  Matrix6c expected = Matrix6c::Zero();
  expected.diagonal() << 1.0, 1.0, 2.0, 2.0, 0.25, 0.25;
  EXPECT_EQ(a, expected);
  EXPECT_EQ(build_diffusion(p, FieldState{}), Matrix6c::Zero());
  const auto ev = stability_eigenvalues(a);
  std::array<double, 6> re{};
  for (int n = 0; n < 6; ++n) re[n] = ev[n].real();
  std::sort(re.begin(), re.end());
  EXPECT_EQ(re, (std::array<double, 6>{0.25, 0.25, 1.0, 1.0, 2.0, 2.0}));
}

class LinearizedRegime : public ::testing::TestWithParam<int> {};

TEST_P(LinearizedRegime, DriftIsNegatedJacobian) {
  const auto p = regime_params(GetParam());
  const auto ss = find_steady_state(p).state;
  const auto a = build_drift(p, ss);
  const auto fd = oracle::fd_drift_matrix(p, ss);
  EXPECT_LT(max_abs(a - fd) / max_abs(a), 1e-6);
}

TEST_P(LinearizedRegime, DriftJacobianAwayFromClassicalManifold) {
  const auto p = regime_params(GetParam());
  FieldState s;
  s.alpha = {cplx{3.0, 1.0}, cplx{-2.0, 0.5}, cplx{0.7, -0.2}};
  s.alpha_plus = {cplx{2.0, -0.4}, cplx{-1.0, 0.3}, cplx{0.1, 0.9}};
  const auto a = build_drift(p, s);
  EXPECT_LT(max_abs(a - oracle::fd_drift_matrix(p, s)) / max_abs(a), 1e-6);
}

TEST_P(LinearizedRegime, StructureAtRealSteadyState) {
  const auto p = regime_params(GetParam());
  const auto dd = at_regime(GetParam());
  const auto& a = dd.a_matrix;
  const auto& d = dd.d_matrix;
  const auto& ss = dd.steady_state;
  EXPECT_EQ(a.diagonal(), (Vector6c() << p.gamma1, p.gamma1, p.gamma2, p.gamma2, p.gamma3, p.gamma3).finished());
  EXPECT_LT(a.imag().cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_GT(a(0, 1).real(), 0.0);
  EXPECT_EQ(a(0, 1), -p.kappa1 * ss.alpha[1]);

  Vector6c diag;
  diag << p.kappa1 * ss.alpha[1], p.kappa1 * ss.alpha_plus[1], p.kappa2 * ss.alpha[2],
      p.kappa2 * ss.alpha_plus[2], 0.0, 0.0;
  EXPECT_EQ(d.diagonal(), diag);
  EXPECT_EQ(Matrix6c(d.diagonal().asDiagonal()), d);
  EXPECT_LT(d(0, 0).real(), 0.0);
}

TEST_P(LinearizedRegime, OperatingPointIsStable) {
  EXPECT_GT(stability_margin(at_regime(GetParam()).a_matrix), 0.0);
}

TEST_P(LinearizedRegime, LyapunovSolutionMatchesEigenbasisOracle) {
  const auto dd = at_regime(GetParam());
  const auto c = stationary_covariance(dd.a_matrix, dd.d_matrix);
  const auto ref = oracle::lyapunov_by_eigenbasis(dd.a_matrix, dd.d_matrix);
  EXPECT_LT(max_abs(c - ref), 1e-12 * max_abs(ref) + 1e-15);
  const Matrix6c res = dd.a_matrix * c + c * dd.a_matrix.transpose() - dd.d_matrix;
  EXPECT_LT(max_abs(res), 1e-13);
}

TEST_P(LinearizedRegime, IntegratedSpectrumApproachesLyapunov) {
  const auto dd = at_regime(GetParam());
  const auto c = stationary_covariance(dd.a_matrix, dd.d_matrix);
  const auto integral = oracle::integrated_spectrum(dd.a_matrix, dd.d_matrix, 200.0, 40001);
  EXPECT_LT(max_abs(integral - c), 1e-3);
}

TEST_P(LinearizedRegime, IntracavitySpectrumAtZeroIsSandwich) {
  const auto dd = at_regime(GetParam());
  const auto s0 = intracavity_spectrum(dd.a_matrix, dd.d_matrix, 0.0).s;
  const Matrix6c ainv = dd.a_matrix.inverse();
  const Matrix6c ref = ainv * dd.d_matrix * ainv.transpose();
  EXPECT_LT(max_abs(s0 - ref), 1e-12 * max_abs(ref));
}

TEST_P(LinearizedRegime, OutputSpectrumStructure) {
  const auto p = regime_params(GetParam());
  const auto dd = at_regime(GetParam());
  for (double w : frequency_grid(-20.0, 20.0, 801)) {
    const auto plus = output_quad_spectrum(p, dd.a_matrix, dd.d_matrix, w);
    const auto minus = output_quad_spectrum(p, dd.a_matrix, dd.d_matrix, -w);
    EXPECT_LT((plus.matrix() - minus.matrix()).cwiseAbs().maxCoeff(), 1e-10) << "w " << w;
    for (int i = 1; i <= 3; ++i) {
      for (int j = 1; j <= 3; ++j) EXPECT_LT(std::abs(plus(x_index(i), y_index(j))), 1e-10);
      EXPECT_GE(plus(x_index(i), x_index(i)), 0.0);
      EXPECT_GE(plus.uncertainty_product(i), 1.0 - 1e-9) << "w " << w << " mode " << i;
    }
  }
}

TEST_P(LinearizedRegime, HighFrequencyIsVacuum) {
  const auto p = regime_params(GetParam());
  const auto dd = at_regime(GetParam());
  const auto s = intracavity_spectrum(dd.a_matrix, dd.d_matrix, 1e6).s;
  EXPECT_LE(max_abs(s), 1.01 * max_abs(dd.d_matrix) / 1e12);
  const auto out = output_quad_spectrum(p, dd.a_matrix, dd.d_matrix, 1e6);
  EXPECT_LT((out.matrix() - Matrix6d::Identity()).cwiseAbs().maxCoeff(), 1e-10);
}

INSTANTIATE_TEST_SUITE_P(Regimes, LinearizedRegime, ::testing::Values(1, 2));

TEST(Spectrum, ZeroDiffusionGivesZero) {
  const auto dd = at_regime(1);
  for (double w : {0.0, 1.0, -7.5}) {
    EXPECT_EQ(max_abs(intracavity_spectrum(dd.a_matrix, Matrix6c::Zero(), w).s), 0.0);
  }
}

TEST(Spectrum, VacuumOutputIsIdentity) {
  auto p = regime_params(1);
  p.epsilon = 0.0;
  const auto dd = linearize(p, FieldState{});
  for (double w : {0.0, 2.0}) {
    EXPECT_LT((output_quad_spectrum(p, dd.a_matrix, dd.d_matrix, w).matrix() - Matrix6d::Identity())
                  .cwiseAbs()
                  .maxCoeff(),
              1e-12);
  }
}

TEST(Spectrum, SingularDriftIsReported) {
  Matrix6c a = Matrix6c::Identity();
  a(2, 2) = 0.0;
  EXPECT_THROW(intracavity_spectrum(a, Matrix6c::Identity(), 0.0), SingularMatrix);
}

TEST(Spectrum, ComplexDiffusionResidueIsReported) {
  const auto p = regime_params(1);
  Matrix6c d = Matrix6c::Zero();
  d(0, 0) = cplx{0.0, 1.0};
  EXPECT_THROW(output_quad_spectrum(p, Matrix6c::Identity(), d, 0.0), NonHermitianResidue);
}

TEST(Spectrum, GridMatchesPointwiseAndIsThreadIndependent) {
  const auto p = regime_params(2);
  const auto dd = at_regime(2);
  const auto omegas = frequency_grid(-5.0, 5.0, 41);
  const auto one = spectrum_grid(p, dd, omegas, 1);
  const auto four = spectrum_grid(p, dd, omegas, 4);
  ASSERT_EQ(one.size(), omegas.size());
  for (size_t n = 0; n < omegas.size(); ++n) {
    EXPECT_EQ(one[n].omega, omegas[n]);
    EXPECT_EQ(one[n].s_quad.matrix(), four[n].s_quad.matrix());
    EXPECT_EQ(one[n].s_quad.matrix(), spectrum_at(p, dd, omegas[n]).s_quad.matrix());
  }
}

TEST(Grid, SymmetricWithExactZero) {
  const auto g = frequency_grid(-20.0, 20.0, 801);
  ASSERT_EQ(g.size(), 801u);
  EXPECT_EQ(g.front(), -20.0);
  EXPECT_EQ(g.back(), 20.0);
  EXPECT_EQ(g[400], 0.0);
  for (size_t n = 0; n < g.size(); ++n) EXPECT_EQ(g[n], -g[g.size() - 1 - n]);
}

TEST(Grid, ZeroInsertedWhenNotOnLattice) {
  const auto g = frequency_grid(-1.0, 2.0, 5);
  EXPECT_NE(std::find(g.begin(), g.end(), 0.0), g.end());
  EXPECT_TRUE(std::is_sorted(g.begin(), g.end()));
  EXPECT_EQ(g.size(), 6u);
}

TEST(Grid, BadRangesAreRejected) {
  EXPECT_THROW(frequency_grid(1.0, 1.0, 5), std::invalid_argument);
  EXPECT_THROW(frequency_grid(-1.0, 1.0, 1), std::invalid_argument);
  EXPECT_THROW(frequency_grid(2.0, 1.0, 5), std::invalid_argument);
}
