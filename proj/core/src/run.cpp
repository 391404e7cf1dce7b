#include "cascade/run.hpp"

#include <cerrno>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>

#include "cascade/version.hpp"

namespace cascade {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& text, const std::string& what) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc{} || ptr != t.data() + t.size() || t.empty()) {
    throw ConfigParse("invalid number for " + what + ": '" + text + "'");
  }
  return v;
}

template <class Int>
Int to_int(const std::string& text, const std::string& what) {
  const std::string t = trim(text);
  Int v{};
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc{} || ptr != t.data() + t.size() || t.empty()) {
    throw ConfigParse("invalid integer for " + what + ": '" + text + "'");
  }
  return v;
}

bool to_bool(const std::string& text, const std::string& what) {
  const std::string t = trim(text);
  if (t == "1" || t == "true" || t == "yes" || t == "on") return true;
  if (t == "0" || t == "false" || t == "no" || t == "off") return false;
  throw ConfigParse("invalid boolean for " + what + ": '" + text + "'");
}

using Setter = std::function<void(RunConfig&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table{
      {"kappa1", [](RunConfig& c, const std::string& v) { c.params.kappa1 = to_double(v, "kappa1"); }},
      {"kappa2", [](RunConfig& c, const std::string& v) { c.params.kappa2 = to_double(v, "kappa2"); }},
      {"epsilon",
       [](RunConfig& c, const std::string& v) {
         c.params.epsilon = cplx{to_double(v, "epsilon"), c.params.epsilon.imag()};
       }},
      {"epsilon_imag",
       [](RunConfig& c, const std::string& v) {
         c.params.epsilon = cplx{c.params.epsilon.real(), to_double(v, "epsilon_imag")};
       }},
      {"gamma1", [](RunConfig& c, const std::string& v) { c.params.gamma1 = to_double(v, "gamma1"); }},
      {"gamma2", [](RunConfig& c, const std::string& v) { c.params.gamma2 = to_double(v, "gamma2"); }},
      {"gamma3", [](RunConfig& c, const std::string& v) { c.params.gamma3 = to_double(v, "gamma3"); }},
      {"normalization",
       [](RunConfig& c, const std::string& v) {
         const auto t = trim(v);
         if (t == "rescale") c.normalization = Normalization::rescale;
         else if (t == "reject") c.normalization = Normalization::reject;
         else throw ConfigParse("normalization must be 'rescale' or 'reject'");
       }},
      {"regime",
       [](RunConfig& c, const std::string& v) {
         const int r = to_int<int>(v, "regime");
         if (r != 1 && r != 2) throw ConfigParse("regime must be 1 or 2");
         c.regime = r;
         c.params = regime_params(r);
       }},
      {"omega_min", [](RunConfig& c, const std::string& v) { c.omega_min = to_double(v, "omega_min"); }},
      {"omega_max", [](RunConfig& c, const std::string& v) { c.omega_max = to_double(v, "omega_max"); }},
      {"omega_steps", [](RunConfig& c, const std::string& v) { c.omega_steps = to_int<int>(v, "omega_steps"); }},
      {"mode", [](RunConfig& c, const std::string& v) { c.mode = parse_mode(trim(v)); }},
      {"output", [](RunConfig& c, const std::string& v) { c.output_dir = trim(v); }},
      {"seed", [](RunConfig& c, const std::string& v) { c.seed = to_int<std::uint64_t>(v, "seed"); }},
      {"dt", [](RunConfig& c, const std::string& v) { c.stochastic.dt = to_double(v, "dt"); }},
      {"t_end", [](RunConfig& c, const std::string& v) { c.stochastic.t_end = to_double(v, "t_end"); }},
      {"n_traj", [](RunConfig& c, const std::string& v) { c.stochastic.n_traj = to_int<std::size_t>(v, "n_traj"); }},
      {"n_samples", [](RunConfig& c, const std::string& v) { c.stochastic.n_samples = to_int<int>(v, "n_samples"); }},
      {"average_from",
       [](RunConfig& c, const std::string& v) { c.stochastic.average_from = to_double(v, "average_from"); }},
      {"eps_range", [](RunConfig& c, const std::string& v) { c.pump_scan = parse_range(v); }},
      {"gnuplot", [](RunConfig& c, const std::string& v) { c.gnuplot = to_bool(v, "gnuplot"); }},
      {"threads", [](RunConfig& c, const std::string& v) { c.threads = to_int<unsigned>(v, "threads"); }},
  };
  return table;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
  return os;
}

void close_output(std::ofstream& os, const std::filesystem::path& path) {
  os.close();
  if (!os) throw IoError("failed writing '" + path.string() + "'");
}

std::string quad_label(int index) {
  return std::string(index % 2 == 0 ? "X" : "Y") + std::to_string(index / 2 + 1);
}

void write_flag(std::ostream& os, bool f) { os << ',' << (f ? 1 : 0); }

// Stationary state and its linearization, or an outcome explaining why the
// linearized spectra are unavailable.
struct Linearization {
  std::optional<DriftDiffusion> dd;
  RunOutcome failure;
};

Linearization linearize_or_fail(const SystemParams& p, std::ostream& log) {
  Linearization out;
  try {
    const auto ss = find_steady_state(p);
    if (!ss.converged) {
      out.failure = {kExitNumerical, {}, "steady state did not converge within t_max"};
      return out;
    }
    auto dd = linearize(p, ss.state);
    const double margin = stability_margin(dd.a_matrix);
    if (!(margin > 0.0)) {
      out.failure = {kExitNotStationary, {},
                     "drift matrix has an eigenvalue with non-positive real part (" +
                         format_double(margin) + "): self-pulsing regime, linearized spectra invalid"};
      return out;
    }
    out.dd = std::move(dd);
  } catch (const NotStationary& e) {
    out.failure = {kExitNotStationary, {}, e.what()};
  }
  if (!out.dd) log << "error: " << out.failure.message << '\n';
  return out;
}

std::vector<CorrelationReport> reports_for(const std::vector<SpectrumResult>& spectra) {
  std::vector<CorrelationReport> reports;
  reports.reserve(spectra.size());
  for (const auto& s : spectra) reports.push_back(correlation_report(s.s_quad));
  return reports;
}

void warn_conditioning(const std::vector<SpectrumResult>& spectra, std::ostream& log) {
  for (const auto& s : spectra) {
    if (s.condition_estimate > kConditionWarning) {
      log << "warning: A + i omega is ill-conditioned (cond ~ " << format_double(s.condition_estimate)
          << ") at omega = " << format_double(s.omega) << '\n';
      return;
    }
  }
}

void write_figure(const std::filesystem::path& path, const SystemParams& p, const std::string& what,
                  const std::vector<std::string>& columns, const std::vector<CorrelationReport>& reports,
                  const std::function<std::vector<double>(const CorrelationReport&)>& values) {
  auto os = open_output(path);
  write_header(os, p, what);
  os << "omega";
  for (const auto& c : columns) os << ',' << c;
  os << '\n';
  for (const auto& r : reports) {
    os << format_double(r.omega);
    for (double v : values(r)) os << ',' << format_double(v);
    os << '\n';
  }
  close_output(os, path);
}

struct PlotSpec {
  std::string file;
  std::string title;
  double bound;
  int last_column;
};

RunOutcome run_figures(const RunConfig& cfg, std::ostream& log) {
  RunOutcome out;
  const auto grid = frequency_grid(cfg.omega_min, cfg.omega_max, cfg.omega_steps);
  std::vector<int> regimes;
  if (cfg.regime) regimes.push_back(*cfg.regime);
  else regimes = {1, 2};

  std::vector<PlotSpec> plots;
  for (int regime : regimes) {
    const SystemParams p = regime_params(regime);
    auto lin = linearize_or_fail(p, log);
    if (!lin.dd) return lin.failure;
    const auto spectra = spectrum_grid(p, *lin.dd, grid, cfg.threads);
    warn_conditioning(spectra, log);
    const auto reports = reports_for(spectra);

    const auto obr_cols = std::vector<std::string>{kObrNames[0], kObrNames[1], kObrNames[2], "sum_OBR"};
    auto obr_values = [](const CorrelationReport& r) {
      return std::vector<double>{r.obr[0], r.obr[1], r.obr[2], r.sum_obr};
    };
    if (regime == 1) {
      const auto path = cfg.output_dir / "fig1_regime1_obr.csv";
      write_figure(path, p, "figure 1: OBR correlations, regime 1", obr_cols, reports, obr_values);
      out.artifacts.push_back(path);
      plots.push_back({"fig1_regime1_obr.csv", "OBR (regime 1)", 1.0, 4});
    } else {
      auto path = cfg.output_dir / "fig2_regime2_vij.csv";
      write_figure(path, p, "figure 2: V_ij correlations, regime 2",
                   {kPairNames[0], kPairNames[1], kPairNames[2], kGainNames[0], kGainNames[1], kGainNames[2]},
                   reports, [](const CorrelationReport& r) {
                     return std::vector<double>{r.v_pair[0], r.v_pair[1], r.v_pair[2],
                                                r.gains[0], r.gains[1], r.gains[2]};
                   });
      out.artifacts.push_back(path);
      plots.push_back({"fig2_regime2_vij.csv", "V_ij (regime 2)", 4.0, 4});

      path = cfg.output_dir / "fig3_regime2_vijk.csv";
      write_figure(path, p, "figure 3: V_ijk correlations, regime 2",
                   {kTripleNames[0], kTripleNames[1], kTripleNames[2]}, reports,
                   [](const CorrelationReport& r) {
                     return std::vector<double>{r.v_triple[0], r.v_triple[1], r.v_triple[2]};
                   });
      out.artifacts.push_back(path);
      plots.push_back({"fig3_regime2_vijk.csv", "V_ijk (regime 2)", 4.0, 4});

      path = cfg.output_dir / "fig4_regime2_obr.csv";
      write_figure(path, p, "figure 4: OBR correlations, regime 2", obr_cols, reports, obr_values);
      out.artifacts.push_back(path);
      plots.push_back({"fig4_regime2_obr.csv", "OBR (regime 2)", 1.0, 4});
    }
  }

  if (cfg.gnuplot) {
    const auto path = cfg.output_dir / "figures.gp";
    auto os = open_output(path);
    os << "# gnuplot script generated by cascade " << version() << "\n"
       << "set datafile separator ','\nset datafile commentschars '#'\n"
       << "set terminal pngcairo size 900,600\nset xlabel 'omega / gamma_1'\nset key autotitle columnhead\n";
    for (const auto& plot : plots) {
      const std::string png = plot.file.substr(0, plot.file.size() - 4) + ".png";
      os << "set output '" << png << "'\nset title '" << plot.title << "'\n"
         << "plot for [c=2:" << plot.last_column << "] '" << plot.file << "' using 1:c with lines, "
         << format_double(plot.bound) << " with lines dashtype 2 title 'bound'\n";
    }
    close_output(os, path);
    out.artifacts.push_back(path);
  }
  return out;
}

}  // namespace

RunMode parse_mode(const std::string& name) {
  if (name == "steady") return RunMode::steady;
  if (name == "spectra") return RunMode::spectra;
  if (name == "correlations") return RunMode::correlations;
  if (name == "stochastic") return RunMode::stochastic;
  if (name == "threshold") return RunMode::threshold;
  if (name == "figures") return RunMode::figures;
  throw ConfigParse("unknown mode '" + name + "'");
}

std::string mode_name(RunMode mode) {
  switch (mode) {
    case RunMode::steady: return "steady";
    case RunMode::spectra: return "spectra";
    case RunMode::correlations: return "correlations";
    case RunMode::stochastic: return "stochastic";
    case RunMode::threshold: return "threshold";
    case RunMode::figures: return "figures";
  }
  return "unknown";
}

PumpScan parse_range(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(trim(text));
  for (std::string item; std::getline(ss, item, ':');) parts.push_back(item);
  if (parts.size() != 3) throw ConfigParse("range must look like MIN:MAX:STEPS, got '" + text + "'");
  return PumpScan{to_double(parts[0], "range minimum"), to_double(parts[1], "range maximum"),
                  to_int<int>(parts[2], "range steps")};
}

RunConfig parse_config(std::istream& in, RunConfig base) {
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigParse("line " + std::to_string(number) + ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end()) {
      throw ConfigParse("line " + std::to_string(number) + ": unknown key '" + key + "'");
    }
    try {
      it->second(base, value);
    } catch (const ConfigParse& e) {
      throw ConfigParse("line " + std::to_string(number) + ": " + e.what());
    }
  }
  return base;
}

RunConfig load_config(const std::filesystem::path& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file '" + path.string() + "'");
  return parse_config(in, std::move(base));
}

void validate_config(const RunConfig& cfg) {
  if (!(cfg.omega_min < cfg.omega_max)) throw ConfigParse("omega_min must be below omega_max");
  if (cfg.omega_steps < 2) throw ConfigParse("omega_steps must be at least 2");
  if (!(cfg.stochastic.dt > 0.0) || !(cfg.stochastic.t_end > 0.0)) {
    throw ConfigParse("dt and t_end must be positive");
  }
  if (cfg.stochastic.n_traj < 2) throw ConfigParse("n_traj must be at least 2");
  if (cfg.pump_scan) {
    const auto& s = *cfg.pump_scan;
    if (!(s.min >= 0.0 && s.min <= s.max) || s.steps < 1) {
      throw ConfigParse("pump range needs 0 <= MIN <= MAX and STEPS >= 1");
    }
  }
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_header(std::ostream& os, const SystemParams& p, const std::string& what) {
  os << "# cascade " << version() << '\n'
     << "# " << what << '\n'
     << "# kappa1 = " << format_double(p.kappa1) << '\n'
     << "# kappa2 = " << format_double(p.kappa2) << '\n'
     << "# epsilon = " << format_double(p.epsilon.real()) << '\n'
     << "# epsilon_imag = " << format_double(p.epsilon.imag()) << '\n'
     << "# gamma1 = " << format_double(p.gamma1) << '\n'
     << "# gamma2 = " << format_double(p.gamma2) << '\n'
     << "# gamma3 = " << format_double(p.gamma3) << '\n';
}

void write_steady_csv(std::ostream& os, const SystemParams& p,
                      const std::vector<std::pair<double, SteadyStateResult>>& rows) {
  write_header(os, p, "semiclassical steady states");
  os << "eps,re_a1,im_a1,re_a2,im_a2,re_a3,im_a3,converged\n";
  for (const auto& [eps, r] : rows) {
    os << format_double(eps);
    for (const auto& a : r.state.alpha) os << ',' << format_double(a.real()) << ',' << format_double(a.imag());
    os << ',' << (r.converged ? 1 : 0) << '\n';
  }
}

std::vector<std::string> spectrum_columns() {
  std::vector<std::string> cols;
  for (int a = 0; a < 6; ++a) {
    for (int b = a; b < 6; ++b) {
      const bool a_is_x = a % 2 == 0;
      const bool b_is_x = b % 2 == 0;
      if (a_is_x != b_is_x) {
        const int x = a_is_x ? a : b;
        const int y = a_is_x ? b : a;
        cols.push_back("S" + quad_label(x) + quad_label(y));
      } else {
        cols.push_back("S" + quad_label(a) + quad_label(b));
      }
    }
  }
  return cols;
}

void write_spectra_csv(std::ostream& os, const SystemParams& p,
                       const std::vector<SpectrumResult>& spectra) {
  write_header(os, p, "output quadrature spectra (vacuum = 1)");
  os << "omega";
  for (const auto& c : spectrum_columns()) os << ',' << c;
  os << '\n';
  for (const auto& s : spectra) {
    os << format_double(s.omega);
    for (int a = 0; a < 6; ++a)
      for (int b = a; b < 6; ++b) os << ',' << format_double(s.s_quad(a, b));
    os << '\n';
  }
}

void write_correlations_csv(std::ostream& os, const SystemParams& p,
                            const std::vector<CorrelationReport>& reports) {
  write_header(os, p, "tripartite correlations");
  os << "omega";
  for (int n = 0; n < 3; ++n) os << ',' << kPairNames[n] << ',' << kGainNames[n];
  for (const char* name : kTripleNames) os << ',' << name;
  for (const char* name : kObrNames) os << ',' << name;
  os << ",sum_V_pair,sum_OBR"
     << ",inseparable_pairwise,inseparable_triple,tr_entangled_pairwise,tr_genuine_steer_pairwise"
     << ",genuine_entangled_triple,genuine_steer_triple,steer_1_by_23,steer_2_by_13,steer_3_by_12"
     << ",genuine_tri_steer\n";
  for (const auto& r : reports) {
    os << format_double(r.omega);
    for (int n = 0; n < 3; ++n) os << ',' << format_double(r.v_pair[n]) << ',' << format_double(r.gains[n]);
    for (double v : r.v_triple) os << ',' << format_double(v);
    for (double v : r.obr) os << ',' << format_double(v);
    os << ',' << format_double(r.sum_v_pair) << ',' << format_double(r.sum_obr);
    const auto& f = r.flags;
    write_flag(os, f.inseparable_pairwise);
    write_flag(os, f.inseparable_triple);
    write_flag(os, f.tr_entangled_pairwise);
    write_flag(os, f.tr_genuine_steer_pairwise);
    write_flag(os, f.genuine_entangled_triple);
    write_flag(os, f.genuine_steer_triple);
    for (bool b : f.steer_i_by_jk) write_flag(os, b);
    write_flag(os, f.genuine_tri_steer);
    os << '\n';
  }
}

void write_summary_csv(std::ostream& os, const SystemParams& p, const std::vector<GridMinimum>& minima) {
  write_header(os, p, "grid minima of the tripartite correlations");
  os << "quantity,min,omega_at_min\n";
  for (const auto& m : minima) os << m.name << ',' << format_double(m.value) << ',' << format_double(m.omega) << '\n';
}

void write_moments_csv(std::ostream& os, const SystemParams& p, const EnsembleMoments& m) {
  write_header(os, p, "positive-P ensemble moments");
  os << "time,moment,real,imag,stderr\n";
  auto row = [&os](double t, const std::string& name, const MomentEstimate& e) {
    os << format_double(t) << ',' << name << ',' << format_double(e.value.real()) << ','
       << format_double(e.value.imag()) << ','
       << format_double(std::hypot(e.se_real, e.se_imag)) << '\n';
  };
  for (std::size_t t = 0; t < m.t_grid.size(); ++t) {
    for (int i = 0; i < 6; ++i) row(m.t_grid[t], "<" + component_name(i) + ">", m.means[t][i]);
    for (int a = 0; a < 6; ++a)
      for (int b = a; b < 6; ++b)
        row(m.t_grid[t], "<" + component_name(a) + " " + component_name(b) + ">",
            m.second_moments[t][moment_index(a, b)]);
  }
  os << "# diverged " << m.n_diverged << " of " << m.n_traj << " trajectories"
     << (m.reliable ? "" : " (unreliable)") << '\n';
}

void write_window_csv(std::ostream& os, const SystemParams& p, const EnsembleMoments& m) {
  write_header(os, p, "positive-P time-averaged moments over the stationary window");
  os << "window_start,moment,real,imag,stderr\n";
  auto row = [&](const std::string& name, const MomentEstimate& e) {
    os << format_double(m.window_start) << ',' << name << ',' << format_double(e.value.real()) << ','
       << format_double(e.value.imag()) << ',' << format_double(std::hypot(e.se_real, e.se_imag)) << '\n';
  };
  for (int i = 0; i < 6; ++i) row("<" + component_name(i) + ">", m.window_means[i]);
  for (int a = 0; a < 6; ++a)
    for (int b = a; b < 6; ++b)
      row("<" + component_name(a) + " " + component_name(b) + ">", m.window_second_moments[moment_index(a, b)]);
  for (int a = 0; a < 6; ++a)
    for (int b = a; b < 6; ++b)
      row("cov(" + component_name(a) + "," + component_name(b) + ")", m.window_covariance[moment_index(a, b)]);
}

RunOutcome run(const RunConfig& cfg, std::ostream& log) {
  try {
    validate_config(cfg);
    std::error_code ec;
    std::filesystem::create_directories(cfg.output_dir, ec);
    if (ec) throw IoError("cannot create output directory '" + cfg.output_dir.string() + "': " + ec.message());

    if (cfg.mode == RunMode::figures) return run_figures(cfg, log);

    const SystemParams p = validate_params(cfg.params, cfg.normalization);
    RunOutcome out;

    switch (cfg.mode) {
      case RunMode::steady: {
        std::vector<double> pumps;
        if (cfg.pump_scan) {
          const auto& s = *cfg.pump_scan;
          for (int n = 0; n < s.steps; ++n) {
            pumps.push_back(s.steps == 1 ? s.min : s.min + (s.max - s.min) * n / (s.steps - 1));
          }
        } else {
          pumps.push_back(p.epsilon.real());
        }
        std::vector<std::pair<double, SteadyStateResult>> rows;
        for (double eps : pumps) {
          SystemParams q = p;
          q.epsilon = cplx{eps, p.epsilon.imag()};
          try {
            rows.emplace_back(eps, find_steady_state(q));
          } catch (const NotStationary& e) {
            log << "error: epsilon = " << format_double(eps) << ": " << e.what() << '\n';
            rows.emplace_back(eps, e.result());
            out.exit_code = kExitNotStationary;
            out.message = e.what();
          }
        }
        const auto path = cfg.output_dir / "steady.csv";
        auto os = open_output(path);
        write_steady_csv(os, p, rows);
        close_output(os, path);
        out.artifacts.push_back(path);
        return out;
      }
      case RunMode::spectra:
      case RunMode::correlations: {
        auto lin = linearize_or_fail(p, log);
        if (!lin.dd) return lin.failure;
        const auto grid = frequency_grid(cfg.omega_min, cfg.omega_max, cfg.omega_steps);
        const auto spectra = spectrum_grid(p, *lin.dd, grid, cfg.threads);
        warn_conditioning(spectra, log);
        if (cfg.mode == RunMode::spectra) {
          const auto path = cfg.output_dir / "spectra.csv";
          auto os = open_output(path);
          write_spectra_csv(os, p, spectra);
          close_output(os, path);
          out.artifacts.push_back(path);
        } else {
          const auto reports = reports_for(spectra);
          auto path = cfg.output_dir / "correlations.csv";
          auto os = open_output(path);
          write_correlations_csv(os, p, reports);
          close_output(os, path);
          out.artifacts.push_back(path);

          path = cfg.output_dir / "correlations_summary.csv";
          auto ss = open_output(path);
          write_summary_csv(ss, p, grid_minima(reports));
          close_output(ss, path);
          out.artifacts.push_back(path);
        }
        return out;
      }
      case RunMode::stochastic: {
        EnsembleSettings st;
        st.dt = cfg.stochastic.dt;
        st.t_end = cfg.stochastic.t_end;
        st.n_traj = cfg.stochastic.n_traj;
        st.n_samples = cfg.stochastic.n_samples;
        st.average_from = cfg.stochastic.average_from;
        st.seed = cfg.seed;
        st.threads = cfg.threads;
        st.allow_unreliable = true;
        const auto m = run_ensemble(p, st);
        log << "diverged " << m.n_diverged << " of " << m.n_traj << " trajectories\n";

        auto path = cfg.output_dir / "moments.csv";
        auto os = open_output(path);
        write_moments_csv(os, p, m);
        close_output(os, path);
        out.artifacts.push_back(path);

        path = cfg.output_dir / "moments_window.csv";
        auto ws = open_output(path);
        write_window_csv(ws, p, m);
        close_output(ws, path);
        out.artifacts.push_back(path);
        if (!m.reliable) {
          out.exit_code = kExitNumerical;
          out.message = "more than 1% of trajectories diverged; moments are unreliable";
          log << "warning: " << out.message << '\n';
        }
        return out;
      }
      case RunMode::threshold: {
        const PumpScan range = cfg.pump_scan.value_or(PumpScan{0.0, 1000.0, 101});
        const auto t = pulsing_threshold(p, range.min, range.max, range.steps);
        const auto path = cfg.output_dir / "threshold.csv";
        auto os = open_output(path);
        write_header(os, p, "self-pulsing threshold (drift-matrix eigenvalue crossing)");
        os << "eps_crit,eps_lower,eps_upper\n"
           << format_double(t.eps_crit) << ',' << format_double(t.lower) << ',' << format_double(t.upper) << '\n';
        close_output(os, path);
        out.artifacts.push_back(path);
        return out;
      }
      case RunMode::figures: break;
    }
    return out;
  } catch (const ConfigParse& e) {
    log << "error: " << e.what() << '\n';
    return {kExitUsage, {}, e.what()};
  } catch (const NonPositiveRate& e) {
    log << "error: " << e.what() << '\n';
    return {kExitUsage, {}, e.what()};
  } catch (const std::invalid_argument& e) {
    log << "error: " << e.what() << '\n';
    return {kExitUsage, {}, e.what()};
  } catch (const IoError& e) {
    log << "error: " << e.what() << '\n';
    return {kExitIo, {}, e.what()};
  } catch (const Error& e) {
    log << "error: " << e.what() << '\n';
    return {kExitNumerical, {}, e.what()};
  }
}

}  // namespace cascade
