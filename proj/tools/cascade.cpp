// Command-line front end: steady states, spectra, correlations, positive-P
// ensembles, pulsing thresholds and figure data.

#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "cascade/run.hpp"
#include "cascade/version.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Cascaded second/fourth-harmonic generation: spectra and tripartite correlations"};
  app.set_version_flag("--version", std::string(cascade::version()));

  std::string mode_arg;
  std::string mode_flag;
  std::string config_path;
  std::optional<int> regime;
  std::string omega_range;
  std::string eps_range;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::optional<double> epsilon, kappa1, kappa2, gamma2, gamma3;
  std::optional<double> dt, t_end;
  std::optional<std::size_t> n_traj;
  std::optional<unsigned> threads;
  bool gnuplot = false;

  app.add_option("run_mode", mode_arg, "steady | spectra | correlations | stochastic | threshold | figures");
  app.add_option("--mode", mode_flag, "Same as the positional mode");
  app.add_option("--config", config_path, "key = value configuration file")->check(CLI::ExistingFile);
  app.add_option("--regime", regime, "Reference parameter set")->check(CLI::IsMember({1, 2}));
  app.add_option("--omega-range", omega_range, "Frequency grid MIN:MAX:STEPS (units of gamma1)");
  app.add_option("--eps-range", eps_range, "Pump scan MIN:MAX:STEPS for steady / threshold");
  app.add_option("--seed", seed, "Stochastic seed");
  app.add_option("--out", out_dir, "Output directory");
  app.add_option("--epsilon", epsilon, "Pump amplitude (real)");
  app.add_option("--kappa1", kappa1, "Fundamental / second-harmonic coupling");
  app.add_option("--kappa2", kappa2, "Second / fourth-harmonic coupling");
  app.add_option("--gamma2", gamma2, "Second-harmonic loss rate");
  app.add_option("--gamma3", gamma3, "Fourth-harmonic loss rate");
  app.add_option("--dt", dt, "Stochastic time step");
  app.add_option("--t-end", t_end, "Stochastic integration time");
  app.add_option("--n-traj", n_traj, "Number of positive-P trajectories");
  app.add_option("--threads", threads, "Worker threads (0 = all cores)");
  app.add_flag("--gnuplot", gnuplot, "Also write a gnuplot script for figure data");

  CLI11_PARSE(app, argc, argv);

  try {
    cascade::RunConfig cfg;
    if (!config_path.empty()) cfg = cascade::load_config(config_path, cfg);
    if (!mode_flag.empty()) cfg.mode = cascade::parse_mode(mode_flag);
    if (!mode_arg.empty()) cfg.mode = cascade::parse_mode(mode_arg);
    if (regime) {
      cfg.regime = *regime;
      cfg.params = cascade::regime_params(*regime);
    }
    if (!omega_range.empty()) {
      const auto r = cascade::parse_range(omega_range);
      cfg.omega_min = r.min;
      cfg.omega_max = r.max;
      cfg.omega_steps = r.steps;
    }
    if (!eps_range.empty()) cfg.pump_scan = cascade::parse_range(eps_range);
    if (seed) cfg.seed = *seed;
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    if (epsilon) cfg.params.epsilon = cascade::cplx{*epsilon, 0.0};
    if (kappa1) cfg.params.kappa1 = *kappa1;
    if (kappa2) cfg.params.kappa2 = *kappa2;
    if (gamma2) cfg.params.gamma2 = *gamma2;
    if (gamma3) cfg.params.gamma3 = *gamma3;
    if (dt) cfg.stochastic.dt = *dt;
    if (t_end) cfg.stochastic.t_end = *t_end;
    if (n_traj) cfg.stochastic.n_traj = *n_traj;
    if (threads) cfg.threads = *threads;
    if (gnuplot) cfg.gnuplot = true;

    const auto outcome = cascade::run(cfg, std::cerr);
    for (const auto& path : outcome.artifacts) std::cout << path.string() << '\n';
    return outcome.exit_code;
  } catch (const cascade::ConfigParse& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cascade::kExitUsage;
  } catch (const cascade::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cascade::kExitIo;
  }
}
