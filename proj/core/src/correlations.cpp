#include "cascade/correlations.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace cascade {

namespace {

Vector6d unit(int index) {
  Vector6d v = Vector6d::Zero();
  v(index) = 1.0;
  return v;
}

}  // namespace

ModeTriple::ModeTriple(int i, int j, int k) : i_(i), j_(j), k_(k) {
  auto in_range = [](int m) { return m >= 1 && m <= 3; };
  if (!in_range(i) || !in_range(j) || !in_range(k) || i == j || j == k || i == k) {
    throw std::invalid_argument("mode triple must be a permutation of {1, 2, 3}");
  }
}

double vlf_pair_at_gain(const QuadCovariance& s, const ModeTriple& m, double gain) {
  const Vector6d x = unit(x_index(m.i())) - unit(x_index(m.j()));
  const Vector6d y = unit(y_index(m.i())) + unit(y_index(m.j())) + gain * unit(y_index(m.k()));
  return s.variance(x) + s.variance(y);
}

PairCorrelation vlf_pair(const QuadCovariance& s, const ModeTriple& m) {
  const int yi = y_index(m.i());
  const int yj = y_index(m.j());
  const int yk = y_index(m.k());
  const double vk = s(yk, yk);
  if (!(vk > kDegenerateVariance)) {
    throw DegenerateVariance("V(Y_k) vanishes; the vLF gain cannot be optimized");
  }
  PairCorrelation out;
  out.gain = -(s(yk, yi) + s(yk, yj)) / vk;
  out.value = vlf_pair_at_gain(s, m, out.gain);
  return out;
}

double vlf_triple(const QuadCovariance& s, const ModeTriple& m) {
  const double h = std::numbers::sqrt2 / 2.0;
  const Vector6d x = unit(x_index(m.i())) - h * (unit(x_index(m.j())) + unit(x_index(m.k())));
  const Vector6d y = unit(y_index(m.i())) + h * (unit(y_index(m.j())) + unit(y_index(m.k())));
  return s.variance(x) + s.variance(y);
}

InferredVariances obr_inferred(const QuadCovariance& s, const ModeTriple& m, InferenceSign sign) {
  const double sg = sign == InferenceSign::plus ? 1.0 : -1.0;
  auto inferred = [&](auto index) {
    const Vector6d target = unit(index(m.i()));
    const Vector6d probe = unit(index(m.j())) + sg * unit(index(m.k()));
    const double vp = s.variance(probe);
    if (!(vp > kDegenerateVariance)) {
      throw DegenerateVariance("variance of the steering combination vanishes");
    }
    const double c = s.covariance(target, probe);
    return s.variance(target) - c * c / vp;
  };
  return InferredVariances{inferred([](int mode) { return x_index(mode); }),
                           inferred([](int mode) { return y_index(mode); })};
}

double obr_product(const QuadCovariance& s, const ModeTriple& m, InferenceSign sign) {
  const auto v = obr_inferred(s, m, sign);
  return v.x * v.y;
}

std::array<ModeTriple, 3> pair_triples() {
  return {ModeTriple(1, 2, 3), ModeTriple(1, 3, 2), ModeTriple(2, 3, 1)};
}

std::array<ModeTriple, 3> triple_triples() {
  return {ModeTriple(1, 2, 3), ModeTriple(2, 3, 1), ModeTriple(3, 1, 2)};
}

std::array<ModeTriple, 3> obr_triples() {
  return {ModeTriple(1, 2, 3), ModeTriple(2, 1, 3), ModeTriple(3, 1, 2)};
}

CorrelationReport classify(double omega, const std::array<double, 3>& v_pair,
                           const std::array<double, 3>& gains,
                           const std::array<double, 3>& v_triple,
                           const std::array<double, 3>& obr) {
  CorrelationReport r;
  r.omega = omega;
  r.v_pair = v_pair;
  r.gains = gains;
  r.v_triple = v_triple;
  r.obr = obr;
  r.sum_v_pair = v_pair[0] + v_pair[1] + v_pair[2];
  r.sum_obr = obr[0] + obr[1] + obr[2];

  auto& f = r.flags;
  const auto below = [](const std::array<double, 3>& v, double bound) {
    return static_cast<int>(std::count_if(v.begin(), v.end(), [bound](double x) { return x < bound; }));
  };
  f.inseparable_pairwise = below(v_pair, 4.0) >= 2;
  f.inseparable_triple = below(v_triple, 4.0) >= 1;
  f.tr_entangled_pairwise = r.sum_v_pair < 8.0;
  f.tr_genuine_steer_pairwise = r.sum_v_pair < 4.0;
  f.genuine_entangled_triple = below(v_triple, 2.0) >= 1;
  f.genuine_steer_triple = below(v_triple, 1.0) >= 1;
  for (int n = 0; n < 3; ++n) f.steer_i_by_jk[n] = obr[n] < 1.0;
  f.genuine_tri_steer = r.sum_obr < 1.0;
  return r;
}

CorrelationReport correlation_report(const QuadCovariance& s) {
  std::array<double, 3> v_pair{}, gains{}, v_triple{}, obr{};
  const auto pt = pair_triples();
  const auto tt = triple_triples();
  const auto ot = obr_triples();
  for (int n = 0; n < 3; ++n) {
    const auto pc = vlf_pair(s, pt[n]);
    v_pair[n] = pc.value;
    gains[n] = pc.gain;
    v_triple[n] = vlf_triple(s, tt[n]);
    obr[n] = obr_product(s, ot[n]);
  }
  return classify(s.omega(), v_pair, gains, v_triple, obr);
}

std::vector<GridMinimum> grid_minima(const std::vector<CorrelationReport>& reports) {
  if (reports.empty()) throw std::invalid_argument("no correlation reports to summarize");

  std::vector<GridMinimum> out;
  auto track = [&](const std::string& name, auto get) {
    GridMinimum m{name, std::numeric_limits<double>::infinity(), 0.0};
    for (const auto& r : reports) {
      const double v = get(r);
      if (v < m.value) {
        m.value = v;
        m.omega = r.omega;
      }
    }
    out.push_back(m);
  };
  for (int n = 0; n < 3; ++n) track(kPairNames[n], [n](const auto& r) { return r.v_pair[n]; });
  for (int n = 0; n < 3; ++n) track(kTripleNames[n], [n](const auto& r) { return r.v_triple[n]; });
  for (int n = 0; n < 3; ++n) track(kObrNames[n], [n](const auto& r) { return r.obr[n]; });
  track("sum_V_pair", [](const auto& r) { return r.sum_v_pair; });
  track("sum_OBR", [](const auto& r) { return r.sum_obr; });
  return out;
}

}  // namespace cascade
