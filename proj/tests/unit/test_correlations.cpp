#include <gtest/gtest.h>

#include <random>

#include "cascade/correlations.hpp"
#include "cascade/linearized.hpp"
#include "cascade/semiclassical.hpp"

using namespace cascade;

namespace {

// Random physical-looking covariance: G G^T plus the identity.
QuadCovariance random_covariance(std::mt19937_64& rng, double omega = 0.0) {
  std::normal_distribution<double> n(0.0, 0.6);
  Matrix6d g;
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) g(i, j) = n(rng);
  return QuadCovariance(omega, Matrix6d::Identity() + g * g.transpose());
}

std::vector<CorrelationReport> regime_reports(int regime) {
  const auto p = regime_params(regime);
  const auto dd = linearize(p, find_steady_state(p).state);
  std::vector<CorrelationReport> out;
  for (const auto& s : spectrum_grid(p, dd, frequency_grid(-20.0, 20.0, 801))) {
    out.push_back(correlation_report(s.s_quad));
  }
  return out;
}

}  // namespace

TEST(Triple, MustBePermutation) {
  EXPECT_NO_THROW(ModeTriple(3, 1, 2));
  EXPECT_THROW(ModeTriple(1, 1, 2), std::invalid_argument);
  EXPECT_THROW(ModeTriple(0, 1, 2), std::invalid_argument);
  EXPECT_THROW(ModeTriple(1, 2, 4), std::invalid_argument);
}

TEST(Vacuum, CalibratedValues) {
  const auto v = QuadCovariance::vacuum(1.5);
  for (const auto& t : pair_triples()) {
    const auto pc = vlf_pair(v, t);
    EXPECT_EQ(pc.value, 4.0);
    EXPECT_EQ(pc.gain, 0.0);
  }
  for (const auto& t : triple_triples()) EXPECT_NEAR(vlf_triple(v, t), 4.0, 1e-12);
  for (const auto& t : obr_triples()) {
    const auto inf = obr_inferred(v, t);
    EXPECT_EQ(inf.x, 1.0);
    EXPECT_EQ(inf.y, 1.0);
    EXPECT_EQ(obr_product(v, t), 1.0);
  }
  const auto r = correlation_report(v);
  EXPECT_EQ(r.flags, CorrelationFlags{});
  EXPECT_EQ(r.omega, 1.5);
}

TEST(Pair, GainIsLocalMinimum) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const auto s = random_covariance(rng);
    for (const auto& t : pair_triples()) {
      const auto pc = vlf_pair(s, t);
      EXPECT_NEAR(vlf_pair_at_gain(s, t, pc.gain), pc.value, 1e-12);
      EXPECT_GE(vlf_pair_at_gain(s, t, pc.gain + 1e-3), pc.value);
      EXPECT_GE(vlf_pair_at_gain(s, t, pc.gain - 1e-3), pc.value);
    }
  }
}

TEST(Pair, ExpandsQuadratically) {
  std::mt19937_64 rng(11);
  const auto s = random_covariance(rng);
  const ModeTriple t(2, 3, 1);
  const double g = 0.37;
  const auto& m = s.matrix();
  const double vx = m(2, 2) + m(4, 4) - 2 * m(2, 4);
  const double vy = m(3, 3) + m(5, 5) + g * g * m(1, 1) + 2 * m(3, 5) + 2 * g * m(3, 1) + 2 * g * m(5, 1);
  EXPECT_NEAR(vlf_pair_at_gain(s, t, g), vx + vy, 1e-12);
}

TEST(Pair, DegenerateGainModeIsReported) {
  Matrix6d m = Matrix6d::Identity();
  m(y_index(3), y_index(3)) = 0.0;
  EXPECT_THROW(vlf_pair(QuadCovariance(0.0, m), ModeTriple(1, 2, 3)), DegenerateVariance);
}

TEST(Pair, UncorrelatedInflationKeepsZeroGain) {
  Matrix6d m = Matrix6d::Identity();
  m.diagonal() << 1.5, 2.0, 3.0, 1.2, 1.1, 4.0;
  const QuadCovariance s(0.0, m);
  for (const auto& t : pair_triples()) EXPECT_EQ(vlf_pair(s, t).gain, 0.0);
}

TEST(TripleV, SymmetricUnderSwapOfLastTwo) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const auto s = random_covariance(rng);
    EXPECT_NEAR(vlf_triple(s, ModeTriple(1, 2, 3)), vlf_triple(s, ModeTriple(1, 3, 2)), 1e-12);
    EXPECT_NEAR(vlf_triple(s, ModeTriple(2, 3, 1)), vlf_triple(s, ModeTriple(2, 1, 3)), 1e-12);
  }
}

TEST(Obr, ConditioningNeverIncreasesVariance) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const auto s = random_covariance(rng);
    for (const auto& t : obr_triples()) {
      for (auto sign : {InferenceSign::plus, InferenceSign::minus}) {
        const auto inf = obr_inferred(s, t, sign);
        EXPECT_LE(inf.x, s(x_index(t.i()), x_index(t.i())) + 1e-12);
        EXPECT_LE(inf.y, s(y_index(t.i()), y_index(t.i())) + 1e-12);
        EXPECT_GE(inf.x, 0.0);
      }
    }
  }
}

TEST(Obr, SignSelectsTheSteeringCombination) {
  Matrix6d m = Matrix6d::Identity();
  m(0, 2) = m(2, 0) = 0.5;
  m(0, 4) = m(4, 0) = 0.5;
  const QuadCovariance s(0.0, m);
  EXPECT_NEAR(obr_inferred(s, ModeTriple(1, 2, 3), InferenceSign::plus).x, 0.5, 1e-15);
  EXPECT_NEAR(obr_inferred(s, ModeTriple(1, 2, 3), InferenceSign::minus).x, 1.0, 1e-15);
}

TEST(Classify, FlagsFollowThresholds) {
  const auto r = classify(0.0, {3.9, 3.5, 4.1}, {0.1, 0.2, 0.3}, {1.9, 4.0, 4.2}, {0.3, 0.2, 1.2});
  EXPECT_TRUE(r.flags.inseparable_pairwise);
  EXPECT_TRUE(r.flags.inseparable_triple);
  EXPECT_FALSE(r.flags.tr_entangled_pairwise);
  EXPECT_FALSE(r.flags.tr_genuine_steer_pairwise);
  EXPECT_TRUE(r.flags.genuine_entangled_triple);
  EXPECT_FALSE(r.flags.genuine_steer_triple);
  EXPECT_EQ(r.flags.steer_i_by_jk, (std::array<bool, 3>{true, true, false}));
  EXPECT_FALSE(r.flags.genuine_tri_steer);
  EXPECT_DOUBLE_EQ(r.sum_obr, 1.7);

  const auto strong = classify(0.0, {1.0, 1.0, 1.0}, {}, {0.5, 5.0, 5.0}, {0.3, 0.3, 0.3});
  EXPECT_TRUE(strong.flags.tr_entangled_pairwise);
  EXPECT_TRUE(strong.flags.tr_genuine_steer_pairwise);
  EXPECT_TRUE(strong.flags.genuine_steer_triple);
  EXPECT_TRUE(strong.flags.genuine_tri_steer);
}

TEST(Classify, FlagsAreRederivableFromValues) {
  for (const auto& r : regime_reports(2)) {
    const auto again = classify(r.omega, r.v_pair, r.gains, r.v_triple, r.obr);
    EXPECT_EQ(again.flags, r.flags);
  }
}

TEST(Regimes, ValuesAreNonNegative) {
  for (int regime : {1, 2}) {
    for (const auto& r : regime_reports(regime)) {
      for (int n = 0; n < 3; ++n) {
        EXPECT_GE(r.v_pair[n], 0.0);
        EXPECT_GE(r.v_triple[n], 0.0);
        EXPECT_GE(r.obr[n], 0.0);
      }
    }
  }
}

TEST(Regimes, FirstRegimePattern) {
  const auto minima = grid_minima(regime_reports(1));
  ASSERT_EQ(minima.size(), 11u);
  for (int n = 0; n < 3; ++n) EXPECT_GT(minima[n].value, 4.0 - 1e-6) << minima[n].name;
  for (int n = 6; n < 9; ++n) EXPECT_LT(minima[n].value, 1.0 - 1e-6) << minima[n].name;
  EXPECT_EQ(minima[10].name, "sum_OBR");
  EXPECT_GT(minima[10].value, 1.0);
}

TEST(Regimes, SecondRegimeOnlyV12Violates) {
  const auto minima = grid_minima(regime_reports(2));
  EXPECT_LT(minima[0].value, 4.0);
  EXPECT_GE(minima[1].value, 4.0);
  EXPECT_GE(minima[2].value, 4.0);
  for (int n = 3; n < 6; ++n) EXPECT_GE(minima[n].value, 2.0) << minima[n].name;
  EXPECT_LT(minima[6].value, 1.0);
  EXPECT_GT(minima[6].value, 0.95);
  EXPECT_GE(minima[7].value, 1.0);
  EXPECT_GE(minima[8].value, 1.0);
}

TEST(Minima, EmptyInputIsRejected) {
  EXPECT_THROW(grid_minima({}), std::invalid_argument);
}
