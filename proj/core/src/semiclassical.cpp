#include "cascade/semiclassical.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <limits>
#include <optional>

#include <boost/numeric/odeint.hpp>

#include "cascade/linearized.hpp"

namespace cascade {

namespace odeint = boost::numeric::odeint;

namespace {

constexpr double kPolishStart = 1e-6;

// (Re a1, Im a1, Re a2, Im a2, Re a3, Im a3)
using OdeState = std::array<double, 6>;

std::array<cplx, kModes> unpack(const OdeState& x) {
  return {cplx{x[0], x[1]}, cplx{x[2], x[3]}, cplx{x[4], x[5]}};
}

std::array<cplx, kModes> classical_rates(const std::array<cplx, kModes>& a, const SystemParams& p) {
  const double k1 = p.kappa1;
  const double k2 = p.kappa2;
  return {
      p.epsilon - p.gamma1 * a[0] + k1 * std::conj(a[0]) * a[1],
      -p.gamma2 * a[1] + k2 * std::conj(a[1]) * a[2] - 0.5 * k1 * a[0] * a[0],
      -p.gamma3 * a[2] - 0.5 * k2 * a[1] * a[1],
  };
}

double max_abs(const std::array<cplx, kModes>& v) {
  double m = 0.0;
  for (const auto& z : v) m = std::max(m, std::abs(z));
  return m;
}

bool finite(const OdeState& x) {
  return std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); });
}

// Newton iteration on the classical manifold, started from an ODE state that
// is already close to a fixed point.
std::optional<std::array<cplx, kModes>> polish(std::array<cplx, kModes> a, const SystemParams& p,
                                               double tol) {
  for (int it = 0; it < 30; ++it) {
    const auto r = classical_rates(a, p);
    if (max_abs(r) < tol) return a;
    const FieldState s = FieldState::classical(a);
    const Matrix6c drift = build_drift(p, s);
    Eigen::PartialPivLU<Matrix6c> lu(drift);
    const Vector6c step = lu.solve(positive_p_drift(s.doubled(), p));
    if (!step.allFinite()) return std::nullopt;
    for (int m = 0; m < kModes; ++m) a[m] += step(2 * m);
  }
  return max_abs(classical_rates(a, p)) < tol ? std::optional(a) : std::nullopt;
}

}  // namespace

Vector6c positive_p_drift(const Vector6c& x, const SystemParams& p) {
  const cplx a1 = x(0), a1p = x(1), a2 = x(2), a2p = x(3), a3 = x(4), a3p = x(5);
  const double k1 = p.kappa1;
  const double k2 = p.kappa2;
  Vector6c f;
  f(0) = p.epsilon - p.gamma1 * a1 + k1 * a1p * a2;
  f(1) = std::conj(p.epsilon) - p.gamma1 * a1p + k1 * a1 * a2p;
  f(2) = -p.gamma2 * a2 + k2 * a2p * a3 - 0.5 * k1 * a1 * a1;
  f(3) = -p.gamma2 * a2p + k2 * a2 * a3p - 0.5 * k1 * a1p * a1p;
  f(4) = -p.gamma3 * a3 - 0.5 * k2 * a2 * a2;
  f(5) = -p.gamma3 * a3p - 0.5 * k2 * a2p * a2p;
  return f;
}

FieldState semiclassical_derivative(const FieldState& s, const SystemParams& p) {
  return FieldState::from_doubled(positive_p_drift(s.doubled(), p));
}

double stationarity_residual(const FieldState& s, const SystemParams& p) {
  return max_abs(classical_rates(s.alpha, p));
}

PulsingDiagnosis detect_pulsing(const TimeSeries& tail, const SystemParams& p) {
  if (tail.t.size() != tail.intensity.size()) {
    throw InsufficientData("tail time and intensity arrays differ in length");
  }
  if (tail.t.size() < 4 || tail.t.back() - tail.t.front() < kMinTailSpan / p.gamma1) {
    throw InsufficientData("pulsing analysis needs a tail of at least 20 cavity lifetimes");
  }

  const double t_half = 0.5 * (tail.t.front() + tail.t.back());
  const auto first = static_cast<size_t>(
      std::lower_bound(tail.t.begin(), tail.t.end(), t_half) - tail.t.begin());

  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  double sum = 0.0;
  for (size_t n = first; n < tail.t.size(); ++n) {
    lo = std::min(lo, tail.intensity[n]);
    hi = std::max(hi, tail.intensity[n]);
    sum += tail.intensity[n];
  }
  const double mean = sum / static_cast<double>(tail.t.size() - first);

  PulsingDiagnosis d;
  d.amplitude = 0.5 * (hi - lo);
  if (mean > 0.0) {
    d.relative_modulation = (hi - lo) / mean;
  } else {
    d.relative_modulation = hi > lo ? std::numeric_limits<double>::infinity() : 0.0;
  }
  d.is_pulsing = d.relative_modulation > kPulsingThreshold;
  if (!d.is_pulsing) return d;

  // Upward crossings of the mean, located by linear interpolation.
  std::vector<double> crossings;
  for (size_t n = first + 1; n < tail.t.size(); ++n) {
    const double y0 = tail.intensity[n - 1] - mean;
    const double y1 = tail.intensity[n] - mean;
    if (y0 < 0.0 && y1 >= 0.0) {
      const double f = y0 / (y0 - y1);
      crossings.push_back(tail.t[n - 1] + f * (tail.t[n] - tail.t[n - 1]));
    }
  }
  if (crossings.size() >= 2) {
    d.period_estimate =
        (crossings.back() - crossings.front()) / static_cast<double>(crossings.size() - 1);
  }
  return d;
}

SteadyStateResult find_steady_state(const SystemParams& p, const SteadyStateOptions& opts) {
  const double seed = p.epsilon == cplx{} ? 0.0 : opts.symmetry_breaking_seed;
  OdeState x{0.0, seed, 0.0, seed, 0.0, seed};

  auto rhs = [&p](const OdeState& y, OdeState& dydt, double) {
    const auto r = classical_rates(unpack(y), p);
    for (int i = 0; i < kModes; ++i) {
      dydt[2 * i] = r[i].real();
      dydt[2 * i + 1] = r[i].imag();
    }
  };

  const double scale = std::max(1.0, std::abs(p.epsilon));
  const double tol = opts.tolerance * scale;

  SteadyStateResult result;
  auto finish = [&](const OdeState& y, double t) {
    result.state = FieldState::classical(unpack(y));
    result.residual = stationarity_residual(result.state, p);
    result.t_final = t;
  };

  finish(x, 0.0);
  if (result.residual < tol) {
    result.converged = true;
    return result;
  }

  auto stepper = odeint::make_dense_output(opts.abs_tol, opts.rel_tol,
                                           odeint::runge_kutta_dopri5<OdeState>());
  stepper.initialize(x, 0.0, 1e-3);

  std::deque<std::pair<double, double>> samples;
  bool polish_allowed = true;
  double next_sample = opts.transient;
  OdeState probe;

  try {
    while (stepper.current_time() < opts.t_max) {
      stepper.do_step(rhs);
      const double t = stepper.current_time();
      const OdeState& y = stepper.current_state();
      if (!finite(y)) throw IntegrationFailure("state became non-finite at t = " + std::to_string(t));
      if (stepper.current_time_step() < 1e-14 * std::max(1.0, t)) {
        throw IntegrationFailure("step size underflow at t = " + std::to_string(t));
      }

      while (next_sample <= t) {
        stepper.calc_state(next_sample, probe);
        samples.emplace_back(next_sample, std::norm(cplx{probe[0], probe[1]}));
        next_sample += opts.sample_dt;
      }
      while (!samples.empty() && samples.front().first < t - opts.tail_span) samples.pop_front();

      const double res = max_abs(classical_rates(unpack(y), p));
      if (res < tol) {
        finish(y, t);
        result.converged = true;
        return result;
      }
      if (polish_allowed && res < kPolishStart * scale) {
        const auto a = polish(unpack(y), p, tol);
        // Near a Hopf point a seeded trajectory lingers by the unstable
        // stationary point before the oscillation grows; only an attractor is
        // accepted. Unseeded real-pump runs never leave the real subspace.
        if (a && seed != 0.0 && stability_margin(build_drift(p, FieldState::classical(*a))) <= 0.0) {
          polish_allowed = false;
        } else if (a) {
          result.state = FieldState::classical(*a);
          result.residual = stationarity_residual(result.state, p);
          result.t_final = t;
          result.converged = true;
          return result;
        }
      }
    }
  } catch (const odeint::step_adjustment_error& e) {
    throw IntegrationFailure(e.what());
  } catch (const odeint::no_progress_error& e) {
    throw IntegrationFailure(e.what());
  }

  finish(stepper.current_state(), stepper.current_time());
  TimeSeries tail;
  for (const auto& [t, i] : samples) {
    tail.t.push_back(t);
    tail.intensity.push_back(i);
  }
  if (!tail.t.empty() && tail.t.back() - tail.t.front() >= kMinTailSpan / p.gamma1) {
    result.pulsing = detect_pulsing(tail, p);
  }
  result.trajectory_tail = std::move(tail);
  if (result.pulsing && result.pulsing->is_pulsing) {
    throw NotStationary("no stationary state: the cavity is in the self-pulsing regime "
                        "(relative intensity modulation " +
                            std::to_string(result.pulsing->relative_modulation) + ")",
                        std::move(result));
  }
  return result;
}

FieldState invariant_stationary_point(const SystemParams& p, const SteadyStateOptions& opts) {
  SystemParams real_pump = p;
  real_pump.epsilon = std::abs(p.epsilon);
  SteadyStateOptions o = opts;
  o.symmetry_breaking_seed = 0.0;
  const auto r = find_steady_state(real_pump, o);
  if (!r.converged) {
    throw IntegrationFailure("no stationary point on the real subspace within t_max");
  }
  const double phi = std::arg(p.epsilon);
  std::array<cplx, kModes> a = r.state.alpha;
  a[0] *= std::polar(1.0, phi);
  a[1] *= std::polar(1.0, 2.0 * phi);
  a[2] *= std::polar(1.0, 4.0 * phi);
  return FieldState::classical(a);
}

namespace {

bool stable_at(const SystemParams& p, double eps_abs) {
  SystemParams q = p;
  q.epsilon = p.epsilon == cplx{} ? cplx{eps_abs, 0.0} : std::polar(eps_abs, std::arg(p.epsilon));
  try {
    const auto ss = invariant_stationary_point(q);
    return stability_margin(build_drift(q, ss)) > 0.0;
  } catch (const NotStationary&) {
    return false;
  } catch (const IntegrationFailure&) {
    return false;
  }
}

}  // namespace

ThresholdResult pulsing_threshold(const SystemParams& p, double eps_lo, double eps_hi, int n_steps) {
  if (!(eps_lo >= 0.0 && eps_lo < eps_hi)) {
    throw std::invalid_argument("pump range must satisfy 0 <= eps_lo < eps_hi");
  }
  if (n_steps < 2) throw std::invalid_argument("threshold scan needs at least two points");

  double prev = eps_lo;
  if (!stable_at(p, prev)) {
    throw NoThresholdInRange("already unstable at the lower end of the pump range");
  }
  for (int n = 1; n < n_steps; ++n) {
    const double eps = eps_lo + (eps_hi - eps_lo) * n / (n_steps - 1);
    if (stable_at(p, eps)) {
      prev = eps;
      continue;
    }
    double lo = prev;
    double hi = eps;
    for (int it = 0; it < 200 && hi - lo > 1e-10 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      (stable_at(p, mid) ? lo : hi) = mid;
    }
    return ThresholdResult{0.5 * (lo + hi), lo, hi};
  }
  throw NoThresholdInRange("drift matrix stays stable over the whole pump range");
}

}  // namespace cascade
