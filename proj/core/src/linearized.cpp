#include "cascade/linearized.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include <Eigen/Eigenvalues>

namespace cascade {

Matrix6c build_drift(const SystemParams& p, const FieldState& ss) {
  const auto& a = ss.alpha;
  const auto& ap = ss.alpha_plus;
  const double k1 = p.kappa1;
  const double k2 = p.kappa2;

  Matrix6c m = Matrix6c::Zero();
  m(0, 0) = p.gamma1;
  m(0, 1) = -k1 * a[1];
  m(0, 2) = -k1 * ap[0];

  m(1, 0) = -k1 * ap[1];
  m(1, 1) = p.gamma1;
  m(1, 3) = -k1 * a[0];

  m(2, 0) = k1 * a[0];
  m(2, 2) = p.gamma2;
  m(2, 3) = -k2 * a[2];
  m(2, 4) = -k2 * ap[1];

  m(3, 1) = k1 * ap[0];
  m(3, 2) = -k2 * ap[2];
  m(3, 3) = p.gamma2;
  m(3, 5) = -k2 * a[1];

  m(4, 2) = k2 * a[1];
  m(4, 4) = p.gamma3;

  m(5, 3) = k2 * ap[1];
  m(5, 5) = p.gamma3;
  return m;
}

Matrix6c build_diffusion(const SystemParams& p, const FieldState& ss) {
  Matrix6c d = Matrix6c::Zero();
  d(0, 0) = p.kappa1 * ss.alpha[1];
  d(1, 1) = p.kappa1 * ss.alpha_plus[1];
  d(2, 2) = p.kappa2 * ss.alpha[2];
  d(3, 3) = p.kappa2 * ss.alpha_plus[2];
  return d;
}

DriftDiffusion linearize(const SystemParams& p, const FieldState& ss) {
  return DriftDiffusion{build_drift(p, ss), build_diffusion(p, ss), ss};
}

std::array<cplx, 6> stability_eigenvalues(const Matrix6c& a) {
  Eigen::ComplexEigenSolver<Matrix6c> solver(a, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) {
    throw EigenSolverFailure("eigenvalue iteration did not converge");
  }
  std::array<cplx, 6> out{};
  for (int i = 0; i < 6; ++i) out[i] = solver.eigenvalues()(i);
  return out;
}

double stability_margin(const Matrix6c& a) {
  const auto ev = stability_eigenvalues(a);
  double m = std::numeric_limits<double>::infinity();
  for (const auto& e : ev) m = std::min(m, e.real());
  return m;
}

IntracavitySpectrum intracavity_spectrum(const Matrix6c& a, const Matrix6c& d, double omega) {
  const cplx iw{0.0, omega};
  const Matrix6c id = Matrix6c::Identity();

  // S = (A + iw)^-1 D (A^T - iw)^-1. The right factor is applied through
  // S^T = (A - iw)^-1 [(A + iw)^-1 D]^T.
  Eigen::PartialPivLU<Matrix6c> left(a + iw * id);
  Eigen::PartialPivLU<Matrix6c> right(a - iw * id);
  const double rc = std::min(left.rcond(), right.rcond());
  if (!(rc > std::numeric_limits<double>::epsilon())) {
    throw SingularMatrix("A + i omega is singular at omega = " + std::to_string(omega));
  }
  const Matrix6c x = left.solve(d);
  IntracavitySpectrum out;
  out.s = right.solve(x.transpose()).transpose();
  out.condition_estimate = 1.0 / rc;
  return out;
}

Matrix6c quadrature_transform() {
  Matrix6c t = Matrix6c::Zero();
  const cplx i{0.0, 1.0};
  for (int m = 0; m < kModes; ++m) {
    t(2 * m, 2 * m) = 1.0;
    t(2 * m, 2 * m + 1) = 1.0;
    t(2 * m + 1, 2 * m) = -i;
    t(2 * m + 1, 2 * m + 1) = i;
  }
  return t;
}

namespace {

QuadCovariance to_output(const SystemParams& p, const Matrix6c& s_alpha, double omega) {
  static const Matrix6c t = quadrature_transform();
  const Matrix6c q = t * s_alpha * t.transpose();

  Matrix6c out;
  for (int r = 0; r < 6; ++r) {
    for (int c = 0; c < 6; ++c) {
      const double g = std::sqrt(p.gamma(r / 2 + 1) * p.gamma(c / 2 + 1));
      out(r, c) = (r == c ? 1.0 : 0.0) + g * (q(r, c) + q(c, r));
    }
  }
  const double scale = std::max(1.0, out.real().cwiseAbs().maxCoeff());
  const double residue = out.imag().cwiseAbs().maxCoeff();
  if (!(residue < kImaginaryResidueTolerance * scale)) {
    throw NonHermitianResidue("imaginary residue " + std::to_string(residue) +
                              " in output quadrature spectrum at omega = " +
                              std::to_string(omega));
  }
  return QuadCovariance(omega, out.real());
}

}  // namespace

QuadCovariance output_quad_spectrum(const SystemParams& p, const Matrix6c& a, const Matrix6c& d,
                                    double omega) {
  return to_output(p, intracavity_spectrum(a, d, omega).s, omega);
}

SpectrumResult spectrum_at(const SystemParams& p, const DriftDiffusion& dd, double omega) {
  const auto s = intracavity_spectrum(dd.a_matrix, dd.d_matrix, omega);
  return SpectrumResult{omega, s.s, to_output(p, s.s, omega), s.condition_estimate};
}

std::vector<SpectrumResult> spectrum_grid(const SystemParams& p, const DriftDiffusion& dd,
                                          const std::vector<double>& omegas, unsigned threads) {
  std::vector<SpectrumResult> out(omegas.size());
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max<size_t>(1, omegas.size())));

  auto work = [&](size_t begin, size_t end) {
    for (size_t n = begin; n < end; ++n) out[n] = spectrum_at(p, dd, omegas[n]);
  };
  if (threads <= 1) {
    work(0, omegas.size());
    return out;
  }

  std::vector<std::exception_ptr> errors(threads);
  {
    std::vector<std::jthread> pool;
    const size_t chunk = (omegas.size() + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
      const size_t begin = t * chunk;
      const size_t end = std::min(omegas.size(), begin + chunk);
      pool.emplace_back([&, t, begin, end] {
        try {
          work(begin, end);
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

Matrix6c stationary_covariance(const Matrix6c& a, const Matrix6c& d) {
  // Column-major vec: vec(A C) = (I kron A) vec(C), vec(C A^T) = (A kron I) vec(C).
  using Big = Eigen::Matrix<cplx, 36, 36>;
  Big k = Big::Zero();
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 6; ++j) {
      for (int r = 0; r < 6; ++r) {
        k(6 * j + i, 6 * j + r) += a(i, r);  // (A C)_ij = sum_r A_ir C_rj
        k(6 * j + i, 6 * r + i) += a(j, r);  // (C A^T)_ij = sum_r C_ir A_jr
      }
    }
  }
  Eigen::Matrix<cplx, 36, 1> rhs;
  for (int j = 0; j < 6; ++j)
    for (int i = 0; i < 6; ++i) rhs(6 * j + i) = d(i, j);

  Eigen::PartialPivLU<Big> lu(k);
  if (!(lu.rcond() > std::numeric_limits<double>::epsilon())) {
    throw SingularMatrix("Lyapunov operator is singular (A has eigenvalues summing to zero)");
  }
  const Eigen::Matrix<cplx, 36, 1> v = lu.solve(rhs);
  Matrix6c c;
  for (int j = 0; j < 6; ++j)
    for (int i = 0; i < 6; ++i) c(i, j) = v(6 * j + i);
  return c;
}

std::vector<double> frequency_grid(double omega_min, double omega_max, int steps) {
  if (!(omega_min < omega_max)) throw std::invalid_argument("omega_min must be below omega_max");
  if (steps < 2) throw std::invalid_argument("omega grid needs at least two points");

  // Weighted endpoints keep symmetric ranges exactly symmetric.
  const int last = steps - 1;
  const double h = (omega_max - omega_min) / last;
  std::vector<double> grid(static_cast<size_t>(steps));
  for (int n = 0; n <= last; ++n) {
    grid[n] = (static_cast<double>(last - n) * omega_min + static_cast<double>(n) * omega_max) / last;
  }

  if (omega_min < 0.0 && omega_max > 0.0) {
    auto nearest = std::min_element(grid.begin(), grid.end(),
                                    [](double x, double y) { return std::abs(x) < std::abs(y); });
    if (std::abs(*nearest) < 1e-9 * h) {
      *nearest = 0.0;
    } else {
      grid.insert(std::upper_bound(grid.begin(), grid.end(), 0.0), 0.0);
    }
  }
  return grid;
}

}  // namespace cascade
