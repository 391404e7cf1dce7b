#pragma once

// Run configuration, config-file parsing and the orchestration behind the
// `cascade` command-line tool. Every artifact is UTF-8 CSV with LF endings,
// floats at 17 significant digits, and a leading `#` comment block recording
// the tool version and the full parameter set.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cascade/correlations.hpp"
#include "cascade/linearized.hpp"
#include "cascade/model.hpp"
#include "cascade/semiclassical.hpp"
#include "cascade/stochastic.hpp"

namespace cascade {

class ConfigParse : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

enum class RunMode { steady, spectra, correlations, stochastic, threshold, figures };

RunMode parse_mode(const std::string& name);
std::string mode_name(RunMode mode);

struct PumpScan {
  double min = 0.0;
  double max = 0.0;
  int steps = 0;
};

struct StochasticConfig {
  double dt = 1e-3;
  double t_end = 100.0;
  std::size_t n_traj = 1000;
  int n_samples = 11;
  double average_from = -1.0;
};

struct RunConfig {
  SystemParams params = regime_params(1);
  Normalization normalization = Normalization::rescale;
  std::optional<int> regime;  // restricts `figures` to one regime
  double omega_min = -20.0;
  double omega_max = 20.0;
  int omega_steps = 801;
  RunMode mode = RunMode::spectra;
  std::filesystem::path output_dir = ".";
  std::uint64_t seed = 1;
  StochasticConfig stochastic;
  std::optional<PumpScan> pump_scan;  // steady-state scan / threshold range
  bool gnuplot = false;
  unsigned threads = 0;
};

// Applies `key = value` lines (`#` starts a comment) on top of `base`.
// Unknown keys and malformed values raise ConfigParse with the line number.
RunConfig parse_config(std::istream& in, RunConfig base = {});
RunConfig load_config(const std::filesystem::path& path, RunConfig base = {});

// "MIN:MAX:STEPS"
PumpScan parse_range(const std::string& text);

// Checks grid and stochastic settings; throws ConfigParse.
void validate_config(const RunConfig& cfg);

struct RunOutcome {
  int exit_code = 0;
  std::vector<std::filesystem::path> artifacts;
  std::string message;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNotStationary = 3;
inline constexpr int kExitIo = 4;
inline constexpr int kExitNumerical = 5;

// Executes one run, writing artifacts into cfg.output_dir. Progress and
// diagnostics go to `log`.
RunOutcome run(const RunConfig& cfg, std::ostream& log);

// CSV writers used by `run`; exposed for tests and embedding.
std::string format_double(double v);
void write_header(std::ostream& os, const SystemParams& p, const std::string& what);
void write_steady_csv(std::ostream& os, const SystemParams& p,
                      const std::vector<std::pair<double, SteadyStateResult>>& rows);
void write_spectra_csv(std::ostream& os, const SystemParams& p,
                       const std::vector<SpectrumResult>& spectra);
void write_correlations_csv(std::ostream& os, const SystemParams& p,
                            const std::vector<CorrelationReport>& reports);
void write_summary_csv(std::ostream& os, const SystemParams& p,
                       const std::vector<GridMinimum>& minima);
void write_moments_csv(std::ostream& os, const SystemParams& p, const EnsembleMoments& m);
void write_window_csv(std::ostream& os, const SystemParams& p, const EnsembleMoments& m);

// Column labels of the 21 independent quadrature spectra, e.g. SX1X1, SX1Y1.
std::vector<std::string> spectrum_columns();

}  // namespace cascade
