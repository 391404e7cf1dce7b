#include "cascade/stochastic.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <thread>

#include "cascade/semiclassical.hpp"

namespace cascade {

namespace {

constexpr int kMoments = 21;
constexpr int kValues = 6 + kMoments;  // x_p then x_p x_q (p <= q)
constexpr std::size_t kChunk = 64;

using Values = std::array<cplx, kValues>;

Values observables(const Vector6c& x) {
  Values v;
  for (int p = 0; p < 6; ++p) v[p] = x(p);
  int n = 6;
  for (int p = 0; p < 6; ++p)
    for (int q = p; q < 6; ++q) v[n++] = x(p) * x(q);
  return v;
}

// Running mean and centered sums of squares (real and imaginary parts
// separately), mergeable in a fixed order.
struct Stat {
  double n = 0.0;
  cplx mean{};
  double m2_re = 0.0;
  double m2_im = 0.0;

  void add(cplx x) {
    n += 1.0;
    const cplx d = x - mean;
    mean += d / n;
    const cplx d2 = x - mean;
    m2_re += d.real() * d2.real();
    m2_im += d.imag() * d2.imag();
  }

  static Stat merge(const Stat& a, const Stat& b) {
    if (a.n == 0.0) return b;
    if (b.n == 0.0) return a;
    Stat r;
    r.n = a.n + b.n;
    const cplx d = b.mean - a.mean;
    r.mean = a.mean + d * (b.n / r.n);
    const double w = a.n * b.n / r.n;
    r.m2_re = a.m2_re + b.m2_re + d.real() * d.real() * w;
    r.m2_im = a.m2_im + b.m2_im + d.imag() * d.imag() * w;
    return r;
  }

  MomentEstimate estimate() const {
    MomentEstimate e;
    e.value = mean;
    if (n > 1.0) {
      e.se_real = std::sqrt(m2_re / (n - 1.0) / n);
      e.se_imag = std::sqrt(m2_im / (n - 1.0) / n);
    }
    return e;
  }
};

using StatBlock = std::vector<std::array<Stat, kValues>>;  // one row per sample time

StatBlock merge_blocks(const StatBlock& a, const StatBlock& b) {
  StatBlock r(a.size());
  for (std::size_t t = 0; t < a.size(); ++t)
    for (int v = 0; v < kValues; ++v) r[t][v] = Stat::merge(a[t][v], b[t][v]);
  return r;
}

// Pairwise reduction over [begin, end) keeps the summation tree fixed.
StatBlock reduce(const std::vector<StatBlock>& blocks, std::size_t begin, std::size_t end) {
  if (end - begin == 1) return blocks[begin];
  const std::size_t mid = begin + (end - begin) / 2;
  return merge_blocks(reduce(blocks, begin, mid), reduce(blocks, mid, end));
}

template <class Get>
cplx pairwise_mean(std::size_t n, Get get, std::size_t begin, std::size_t end) {
  if (end - begin <= 8) {
    cplx s{};
    for (std::size_t i = begin; i < end; ++i) s += get(i);
    return s;
  }
  const std::size_t mid = begin + (end - begin) / 2;
  return pairwise_mean(n, get, begin, mid) + pairwise_mean(n, get, mid, end);
}

template <class Get>
MomentEstimate sample_estimate(std::size_t n, Get get) {
  MomentEstimate e;
  e.value = pairwise_mean(n, get, 0, n) / static_cast<double>(n);
  if (n > 1) {
    auto sq_re = [&](std::size_t i) {
      const double d = get(i).real() - e.value.real();
      return cplx{d * d, 0.0};
    };
    auto sq_im = [&](std::size_t i) {
      const double d = get(i).imag() - e.value.imag();
      return cplx{d * d, 0.0};
    };
    const double nn = static_cast<double>(n);
    e.se_real = std::sqrt(pairwise_mean(n, sq_re, 0, n).real() / (nn - 1.0) / nn);
    e.se_imag = std::sqrt(pairwise_mean(n, sq_im, 0, n).real() / (nn - 1.0) / nn);
  }
  return e;
}

}  // namespace

FieldState step_trajectory(const FieldState& s, const SystemParams& p, double dt,
                           const std::array<double, 4>& noise, double cap) {
  if (!(dt > 0.0)) throw std::invalid_argument("time step must be positive");
  const Vector6c x = s.doubled();
  const Vector6c f = positive_p_drift(x, p);
  const double sdt = std::sqrt(dt);

  Vector6c next = x + f * dt;
  next(0) += std::sqrt(p.kappa1 * x(2)) * (sdt * noise[0]);
  next(1) += std::sqrt(p.kappa1 * x(3)) * (sdt * noise[1]);
  next(2) += std::sqrt(p.kappa2 * x(4)) * (sdt * noise[2]);
  next(3) += std::sqrt(p.kappa2 * x(5)) * (sdt * noise[3]);

  for (int i = 0; i < 6; ++i) {
    const cplx z = next(i);
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag()) || std::abs(z) > cap) {
      throw NonFinite("positive-P trajectory diverged");
    }
  }
  return FieldState::from_doubled(next);
}

std::mt19937_64 trajectory_stream(std::uint64_t seed, std::uint64_t trajectory) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(trajectory),
                    static_cast<std::uint32_t>(trajectory >> 32)};
  return std::mt19937_64(seq);
}

int moment_index(int p, int q) {
  if (p > q) std::swap(p, q);
  if (p < 0 || q > 5) throw std::out_of_range("doubled component index must be in 0..5");
  // Rows of the upper triangle hold 6, 5, ..., 1 entries.
  return p * 6 - p * (p - 1) / 2 + (q - p);
}

std::string component_name(int p) {
  static const std::array<const char*, 6> names{"a1", "a1+", "a2", "a2+", "a3", "a3+"};
  return names.at(static_cast<std::size_t>(p));
}

EnsembleMoments run_ensemble(const SystemParams& p, const EnsembleSettings& st) {
  if (!(st.dt > 0.0) || !(st.t_end > 0.0)) throw std::invalid_argument("dt and t_end must be positive");
  if (st.n_traj < 2) throw std::invalid_argument("ensemble needs at least two trajectories");
  if (st.n_samples < 2) throw std::invalid_argument("need at least two sample times");

  const auto n_steps = static_cast<std::size_t>(std::llround(st.t_end / st.dt));
  if (n_steps == 0) throw std::invalid_argument("t_end shorter than one time step");
  const double window_start = st.average_from < 0.0 ? 0.5 * st.t_end : st.average_from;
  const auto window_step =
      std::min(n_steps, static_cast<std::size_t>(std::ceil(window_start / st.dt - 1e-9)));

  std::vector<std::size_t> sample_steps(static_cast<std::size_t>(st.n_samples));
  for (int j = 0; j < st.n_samples; ++j) {
    sample_steps[j] = static_cast<std::size_t>(
        std::llround(static_cast<double>(j) * static_cast<double>(n_steps) / (st.n_samples - 1)));
  }

  const FieldState start = st.initial.value_or(FieldState{});
  const std::size_t n_chunks = (st.n_traj + kChunk - 1) / kChunk;
  std::vector<StatBlock> chunk_stats(n_chunks);
  std::vector<Values> window(st.n_traj);
  std::vector<char> survived(st.n_traj, 0);

  auto run_chunk = [&](std::size_t c) {
    StatBlock block(sample_steps.size());
    std::vector<Values> buffer(sample_steps.size());
    const std::size_t first = c * kChunk;
    const std::size_t last = std::min(st.n_traj, first + kChunk);
    for (std::size_t traj = first; traj < last; ++traj) {
      auto rng = trajectory_stream(st.seed, traj);
      std::normal_distribution<double> normal;
      FieldState s = start;
      Values acc{};
      std::size_t next_sample = 0;
      try {
        for (std::size_t k = 0;; ++k) {
          const Vector6c x = s.doubled();
          const bool sample_now = next_sample < sample_steps.size() && sample_steps[next_sample] == k;
          if (k >= window_step || sample_now) {
            const Values v = observables(x);
            while (next_sample < sample_steps.size() && sample_steps[next_sample] == k) {
              buffer[next_sample++] = v;
            }
            if (k >= window_step) {
              for (int i = 0; i < kValues; ++i) acc[i] += v[i];
            }
          }
          if (k == n_steps) break;
          const std::array<double, 4> draws{normal(rng), normal(rng), normal(rng), normal(rng)};
          s = step_trajectory(s, p, st.dt, draws, st.cap);
        }
      } catch (const NonFinite&) {
        continue;
      }
      survived[traj] = 1;
      const double count = static_cast<double>(n_steps - window_step + 1);
      for (int i = 0; i < kValues; ++i) window[traj][i] = acc[i] / count;
      for (std::size_t t = 0; t < sample_steps.size(); ++t)
        for (int i = 0; i < kValues; ++i) block[t][i].add(buffer[t][i]);
    }
    chunk_stats[c] = std::move(block);
  };

  unsigned threads = st.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : st.threads;
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n_chunks));
  if (threads <= 1) {
    for (std::size_t c = 0; c < n_chunks; ++c) run_chunk(c);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(threads);
    {
      std::vector<std::jthread> pool;
      for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&, t] {
          try {
            for (std::size_t c = next++; c < n_chunks; c = next++) run_chunk(c);
          } catch (...) {
            errors[t] = std::current_exception();
          }
        });
      }
    }
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  EnsembleMoments out;
  out.n_traj = st.n_traj;
  out.n_diverged = static_cast<std::size_t>(std::count(survived.begin(), survived.end(), 0));
  out.reliable = static_cast<double>(out.n_diverged) <= kMaxDivergedFraction * static_cast<double>(st.n_traj);
  if (!out.reliable && !st.allow_unreliable) {
    throw ExcessiveDivergence(std::to_string(out.n_diverged) + " of " + std::to_string(st.n_traj) +
                              " positive-P trajectories diverged");
  }
  std::vector<std::size_t> alive;
  for (std::size_t i = 0; i < st.n_traj; ++i)
    if (survived[i]) alive.push_back(i);
  if (alive.size() < 2) throw ExcessiveDivergence("fewer than two trajectories survived");

  const StatBlock total = reduce(chunk_stats, 0, n_chunks);
  out.t_grid.reserve(sample_steps.size());
  for (std::size_t t = 0; t < sample_steps.size(); ++t) {
    out.t_grid.push_back(static_cast<double>(sample_steps[t]) * st.dt);
    std::array<MomentEstimate, 6> m{};
    std::array<MomentEstimate, 21> s2{};
    for (int i = 0; i < 6; ++i) m[i] = total[t][i].estimate();
    for (int i = 0; i < kMoments; ++i) s2[i] = total[t][6 + i].estimate();
    out.means.push_back(m);
    out.second_moments.push_back(s2);
  }

  out.window_start = static_cast<double>(window_step) * st.dt;
  const std::size_t n = alive.size();
  for (int i = 0; i < 6; ++i) {
    out.window_means[i] = sample_estimate(n, [&](std::size_t a) { return window[alive[a]][i]; });
  }
  for (int pp = 0; pp < 6; ++pp) {
    for (int q = pp; q < 6; ++q) {
      const int idx = moment_index(pp, q);
      out.window_second_moments[idx] =
          sample_estimate(n, [&](std::size_t a) { return window[alive[a]][6 + idx]; });
      // Influence function of <xy> - <x><y>: z = xy - m_y x - m_x y.
      const cplx mx = out.window_means[pp].value;
      const cplx my = out.window_means[q].value;
      MomentEstimate cov = sample_estimate(n, [&](std::size_t a) {
        const Values& w = window[alive[a]];
        return w[6 + idx] - my * w[pp] - mx * w[q];
      });
      cov.value = out.window_second_moments[idx].value - mx * my;
      out.window_covariance[idx] = cov;
    }
  }
  return out;
}

}  // namespace cascade
