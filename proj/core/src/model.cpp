#include "cascade/model.hpp"

#include <cmath>
#include <sstream>

namespace cascade {

namespace {

std::string join_fields(const std::vector<std::string>& fields) {
  std::ostringstream os;
  os << "non-positive rate:";
  for (const auto& f : fields) os << ' ' << f;
  return os.str();
}

bool positive_finite(double v) { return std::isfinite(v) && v > 0.0; }

}  // namespace

NonPositiveRate::NonPositiveRate(std::vector<std::string> fields)
    : Error(join_fields(fields)), fields_(std::move(fields)) {}

double SystemParams::gamma(int mode) const {
  switch (mode) {
    case 1: return gamma1;
    case 2: return gamma2;
    case 3: return gamma3;
    default: throw std::out_of_range("mode index must be 1, 2 or 3");
  }
}

SystemParams validate_params(const SystemParams& p, Normalization norm) {
  std::vector<std::string> bad;
  if (!positive_finite(p.kappa1)) bad.emplace_back("kappa1");
  if (!positive_finite(p.kappa2)) bad.emplace_back("kappa2");
  if (!positive_finite(p.gamma1)) bad.emplace_back("gamma1");
  if (!positive_finite(p.gamma2)) bad.emplace_back("gamma2");
  if (!positive_finite(p.gamma3)) bad.emplace_back("gamma3");
  if (!std::isfinite(p.epsilon.real()) || !std::isfinite(p.epsilon.imag())) {
    bad.emplace_back("epsilon");
  }
  if (!bad.empty()) throw NonPositiveRate(std::move(bad));

  if (p.gamma1 == 1.0) return p;
  if (norm == Normalization::reject) {
    throw std::invalid_argument("gamma1 must be 1 in canonical normalization");
  }
  // Measuring time in units of 1/gamma1 scales every rate and the pump.
  const double s = p.gamma1;
  SystemParams q = p;
  q.kappa1 /= s;
  q.kappa2 /= s;
  q.epsilon /= s;
  q.gamma1 = 1.0;
  q.gamma2 /= s;
  q.gamma3 /= s;
  return q;
}

SystemParams regime_params(int regime) {
  SystemParams p;
  p.epsilon = 105.0;
  p.gamma1 = 1.0;
  if (regime == 1) {
    p.kappa1 = 5e-3;
    p.kappa2 = 4.0 * p.kappa1;
    p.gamma2 = 0.5;
    p.gamma3 = 0.5;
  } else if (regime == 2) {
    p.kappa1 = 1e-2;
    p.kappa2 = 0.5 * p.kappa1;
    p.gamma2 = 2.0;
    p.gamma3 = 0.25;
  } else {
    throw std::invalid_argument("regime must be 1 or 2");
  }
  return p;
}

FieldState FieldState::classical(const std::array<cplx, kModes>& alpha) {
  FieldState s;
  s.alpha = alpha;
  for (int i = 0; i < kModes; ++i) s.alpha_plus[i] = std::conj(alpha[i]);
  return s;
}

FieldState FieldState::from_doubled(const Vector6c& x) {
  FieldState s;
  for (int i = 0; i < kModes; ++i) {
    s.alpha[i] = x(2 * i);
    s.alpha_plus[i] = x(2 * i + 1);
  }
  return s;
}

Vector6c FieldState::doubled() const {
  Vector6c x;
  for (int i = 0; i < kModes; ++i) {
    x(2 * i) = alpha[i];
    x(2 * i + 1) = alpha_plus[i];
  }
  return x;
}

bool FieldState::on_classical_manifold() const {
  for (int i = 0; i < kModes; ++i) {
    if (alpha_plus[i] != std::conj(alpha[i])) return false;
  }
  return true;
}

Vector6c mean_quadratures(const FieldState& s) {
  const cplx minus_i{0.0, -1.0};
  Vector6c q;
  for (int i = 0; i < kModes; ++i) {
    q(2 * i) = s.alpha[i] + s.alpha_plus[i];
    q(2 * i + 1) = minus_i * (s.alpha[i] - s.alpha_plus[i]);
  }
  return q;
}

QuadCovariance::QuadCovariance(double omega, const Matrix6d& matrix) : omega_(omega) {
  if (!matrix.allFinite()) throw std::invalid_argument("quadrature covariance is not finite");
  const double scale = std::max(1.0, matrix.cwiseAbs().maxCoeff());
  const double asym = (matrix - matrix.transpose()).cwiseAbs().maxCoeff();
  if (asym > kSymmetryTolerance * scale) {
    throw std::invalid_argument("quadrature covariance is not symmetric");
  }
  matrix_ = 0.5 * (matrix + matrix.transpose());
}

QuadCovariance QuadCovariance::vacuum(double omega) {
  return QuadCovariance(omega, Matrix6d::Identity());
}

double QuadCovariance::uncertainty_product(int mode) const {
  return matrix_(x_index(mode), x_index(mode)) * matrix_(y_index(mode), y_index(mode));
}

}  // namespace cascade
