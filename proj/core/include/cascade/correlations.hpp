#pragma once

// Tripartite inseparability, entanglement and steering witnesses evaluated
// from an output quadrature covariance:
//
//   V_ij  = V(X_i - X_j) + V(Y_i + Y_j + g_k Y_k)           vacuum value 4
//   V_ijk = V(X_i - (X_j + X_k)/sqrt2) + V(Y_i + (Y_j + Y_k)/sqrt2)   vacuum 4
//   OBR_ijk = V_inf(X_i) V_inf(Y_i)                          vacuum value 1
//
// with V_inf(Z_i) = V(Z_i) - V(Z_i, Z_j + Z_k)^2 / V(Z_j + Z_k).

#include <array>
#include <string>
#include <vector>

#include "cascade/model.hpp"

namespace cascade {

class DegenerateVariance : public Error {
 public:
  using Error::Error;
};

// Ordered assignment of the three modes; must be a permutation of {1, 2, 3}.
class ModeTriple {
 public:
  ModeTriple(int i, int j, int k);

  int i() const { return i_; }
  int j() const { return j_; }
  int k() const { return k_; }

 private:
  int i_, j_, k_;
};

inline constexpr double kDegenerateVariance = 1e-12;

struct PairCorrelation {
  double value = 0.0;
  double gain = 0.0;  // optimal g_k
};

// V_ij with the gain on mode k chosen as
//   g_k = -[V(Y_k, Y_i) + V(Y_k, Y_j)] / V(Y_k).
PairCorrelation vlf_pair(const QuadCovariance& s, const ModeTriple& m);

// V_ij at an arbitrary gain.
double vlf_pair_at_gain(const QuadCovariance& s, const ModeTriple& m, double gain);

double vlf_triple(const QuadCovariance& s, const ModeTriple& m);

enum class InferenceSign { plus, minus };

struct InferredVariances {
  double x = 0.0;
  double y = 0.0;
};

InferredVariances obr_inferred(const QuadCovariance& s, const ModeTriple& m,
                               InferenceSign sign = InferenceSign::plus);

double obr_product(const QuadCovariance& s, const ModeTriple& m,
                   InferenceSign sign = InferenceSign::plus);

// Triples reported in a CorrelationReport, in array order.
//   v_pair:   V12 (gain on 3), V13 (gain on 2), V23 (gain on 1)
//   v_triple: V123, V231, V312
//   obr:      OBR123, OBR213, OBR312
std::array<ModeTriple, 3> pair_triples();
std::array<ModeTriple, 3> triple_triples();
std::array<ModeTriple, 3> obr_triples();

inline constexpr std::array<const char*, 3> kPairNames{"V12", "V13", "V23"};
inline constexpr std::array<const char*, 3> kGainNames{"g3", "g2", "g1"};
inline constexpr std::array<const char*, 3> kTripleNames{"V123", "V231", "V312"};
inline constexpr std::array<const char*, 3> kObrNames{"OBR123", "OBR213", "OBR312"};

struct CorrelationFlags {
  bool inseparable_pairwise = false;       // at least two V_ij < 4
  bool inseparable_triple = false;         // at least one V_ijk < 4
  bool tr_entangled_pairwise = false;      // sum V_ij < 8
  bool tr_genuine_steer_pairwise = false;  // sum V_ij < 4
  bool genuine_entangled_triple = false;   // some V_ijk < 2
  bool genuine_steer_triple = false;       // some V_ijk < 1
  std::array<bool, 3> steer_i_by_jk{};     // OBR_ijk < 1
  bool genuine_tri_steer = false;          // sum OBR < 1

  bool operator==(const CorrelationFlags&) const = default;
};

struct CorrelationReport {
  double omega = 0.0;
  std::array<double, 3> v_pair{};
  std::array<double, 3> gains{};
  std::array<double, 3> v_triple{};
  std::array<double, 3> obr{};
  double sum_v_pair = 0.0;
  double sum_obr = 0.0;
  CorrelationFlags flags;
};

// Sets the sums and flags from the component values.
CorrelationReport classify(double omega, const std::array<double, 3>& v_pair,
                           const std::array<double, 3>& gains,
                           const std::array<double, 3>& v_triple,
                           const std::array<double, 3>& obr);

CorrelationReport correlation_report(const QuadCovariance& s);

// Minimum of one reported quantity over a frequency grid.
struct GridMinimum {
  std::string name;
  double value = 0.0;
  double omega = 0.0;
};

// Minima of every V_ij, V_ijk, OBR_ijk and of both sums, in that order.
std::vector<GridMinimum> grid_minima(const std::vector<CorrelationReport>& reports);

}  // namespace cascade
