#pragma once

// Command-line front end.  Each command reads a RunConfig, writes its artifacts into the
// output directory and echoes a short report.  Exit codes: 0 success, 2 configuration or
// usage error, 3 numerical failure (divergence where convergence was required).

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "fracppp/analysis.hpp"
#include "fracppp/config.hpp"
#include "fracppp/model.hpp"
#include "fracppp/simulation.hpp"
#include "fracppp/stability.hpp"

namespace fracppp::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

namespace fs = std::filesystem;

namespace detail {

inline void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
  if (!out) throw Error("cannot write '" + path.string() + "'");
}

inline std::string opt4(const std::optional<double>& v) {
  return v ? format_fixed(*v, 4) : std::string("-");
}

inline std::string opt_full(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string();
}

inline std::string pad(const std::string& text, std::size_t width) {
  return text.size() >= width ? text + " " : text + std::string(width - text.size(), ' ');
}

inline std::string state_csv(const State& st) {
  return format_double(st.x) + "," + format_double(st.y) + "," + format_double(st.z);
}

}  // namespace detail

inline int cmd_fixed_points(const RunConfig& cfg, const fs::path& out_dir, std::ostream& out) {
  using detail::pad;
  const auto fps = fixed_points(cfg.model);
  std::optional<Discretization> dsc;
  if (cfg.s) dsc.emplace(cfg.alpha, *cfg.s);

  std::ostringstream txt;
  std::ostringstream csv;
  txt << "R0 = " << format_fixed(basic_reproduction_number(cfg.model), 4) << '\n';
  txt << "theta1 = " << detail::opt4(theta_threshold(cfg.model)) << '\n';
  if (dsc) {
    txt << "alpha = " << format_double(dsc->alpha()) << ", s = " << format_double(dsc->s())
        << ", rho = " << format_double(dsc->rho()) << '\n';
  } else {
    txt << "alpha = " << format_double(cfg.alpha) << ", s not set: no classification\n";
  }
  txt << pad("point", 7) << pad("exists", 8) << pad("X", 14) << pad("Y", 14) << pad("Z", 14)
      << pad("class", 16) << pad("max|xi|", 12) << "note\n";
  csv << "point,exists,X,Y,Z,classification,spectral_radius,jury_agrees,theorem_disagrees\n";

  for (const auto& fp : fps) {
    std::string cls = "-";
    std::string radius = "-";
    std::string note = fp.existence_note;
    std::string csv_tail = ",,,";
    if (fp.exists && dsc) {
      const auto rep = classify(cfg.model, *dsc, fp);
      cls = std::string(label(rep.classification));
      const double rad = spectral_radius(rep.eigenvalues);
      radius = format_fixed(rad, 6);
      if (!rep.jury_agrees) note += "jury test disagrees with eigenvalues";
      if (rep.theorem_disagrees) {
        note += std::string(note.empty() ? "" : "; ") + "threshold window predicts " +
                (*rep.theorem_predicts_sink ? "stable" : "unstable");
      }
      csv_tail = cls + "," + format_double(rad) + "," + (rep.jury_agrees ? "true" : "false") +
                 "," + (rep.theorem_disagrees ? "true" : "false");
    }
    const bool show = fp.exists || fp.kind != FixedPointKind::Interior || cfg.model.theta != cfg.model.d;
    txt << pad(std::string(label(fp.kind)), 7) << pad(fp.exists ? "yes" : "no", 8)
        << pad(show ? format_fixed(fp.coords.x, 4) : "-", 14)
        << pad(show ? format_fixed(fp.coords.y, 4) : "-", 14)
        << pad(show ? format_fixed(fp.coords.z, 4) : "-", 14) << pad(cls, 16) << pad(radius, 12)
        << note << '\n';
    csv << label(fp.kind) << ',' << (fp.exists ? "true" : "false") << ','
        << detail::state_csv(fp.coords) << ',' << csv_tail << '\n';
  }
  detail::write_file(out_dir / "fixed_points.txt", txt.str());
  detail::write_file(out_dir / "fixed_points.csv", csv.str());
  out << txt.str();
  return kExitOk;
}

inline int cmd_thresholds(const RunConfig& cfg, const fs::path& out_dir, std::ostream& out) {
  using detail::opt4;
  using detail::pad;
  std::vector<ThresholdSet> rows;
  for (double alpha : cfg.threshold_alphas()) rows.push_back(thresholds(cfg.model, alpha, cfg.s9_max));

  std::ostringstream txt;
  const auto& first = rows.front();
  txt << "R0 = " << format_fixed(first.r0, 4) << ", theta1 = " << opt4(first.theta1)
      << ", d1 = " << opt4(first.d1) << '\n';
  const std::vector<std::string> names{"s2", "s3", "s4", "s5", "s6", "s7", "s8", "s9"};
  txt << pad("alpha", 8);
  for (const auto& n : names) txt << pad(n, 14);
  txt << '\n';

  std::ostringstream csv;
  csv << "alpha,R0,theta1,d1,s2,s3,s4,s5,s6,s7,s8,s9,s9_search_max\n";
  for (const auto& t : rows) {
    const std::vector<std::optional<double>> vals{t.s2, t.s3, t.s4, t.s5, t.s6, t.s7, t.s8, t.s9};
    txt << pad(format_fixed(t.alpha, 2), 8);
    for (std::size_t i = 0; i < vals.size(); ++i) {
      std::string cell = opt4(vals[i]);
      if (i == 7 && !t.s9 && t.s8) cell = "> " + format_fixed(t.s9_search_max, 4);
      txt << pad(cell, 14);
    }
    txt << '\n';
    csv << format_double(t.alpha) << ',' << format_double(t.r0) << ',' << detail::opt_full(t.theta1)
        << ',' << detail::opt_full(t.d1);
    for (const auto& v : vals) csv << ',' << detail::opt_full(v);
    csv << ',' << (t.s8 ? format_double(t.s9_search_max) : std::string()) << '\n';
  }
  for (const auto& t : rows) {
    txt << "alpha = " << format_fixed(t.alpha, 2) << ":\n";
    for (const auto& v : t.verdicts) txt << "  " << v << '\n';
  }
  detail::write_file(out_dir / "thresholds.txt", txt.str());
  detail::write_file(out_dir / "thresholds.csv", csv.str());
  out << txt.str();
  return kExitOk;
}

inline int cmd_simulate(const RunConfig& cfg, const fs::path& out_dir, std::ostream& out) {
  if (!cfg.s) throw ConfigError("simulate needs the step size 's'");
  const Discretization dsc(cfg.alpha, *cfg.s);
  const auto traj = simulate(cfg.model, dsc, cfg.init, cfg.sim);

  std::ostringstream csv;
  csv << "step,X,Y,Z\n";
  for (const auto& pt : traj.states) csv << pt.step << ',' << detail::state_csv(pt.state) << '\n';
  csv << "# outcome: " << describe(traj.outcome) << '\n';
  detail::write_file(out_dir / "trajectory.csv", csv.str());

  out << "rho = " << format_double(dsc.rho()) << '\n';
  out << "outcome: " << describe(traj.outcome) << '\n';
  out << "terminal state: " << detail::state_csv(traj.outcome.terminal) << '\n';
  if (cfg.require_convergence && traj.outcome.kind != OutcomeKind::ConvergedTo) {
    return kExitNumerical;
  }
  return kExitOk;
}

inline SweepOptions sweep_options(const RunConfig& cfg, unsigned jobs) {
  return {jobs, cfg.continuation};
}

inline double sweep_fixed_value(const RunConfig& cfg) {
  if (cfg.sweep_parameter == SweepParameter::StepSize) return cfg.alpha;
  if (!cfg.s) throw ConfigError("an alpha sweep needs the step size 's'");
  return *cfg.s;
}

inline int cmd_bifurcate(const RunConfig& cfg, const fs::path& out_dir, std::ostream& out,
                         unsigned jobs) {
  if (!cfg.sweep) throw ConfigError("bifurcate needs 'sweep_range'");
  const auto res = bifurcation_sweep(cfg.model, cfg.sweep_parameter, sweep_fixed_value(cfg),
                                     *cfg.sweep, cfg.init, cfg.sim, sweep_options(cfg, jobs));
  const std::string param(label(res.parameter));

  std::ostringstream csv;
  std::ostringstream dat;
  std::ostringstream summary;
  csv << param << ",X,Y,Z\n";
  dat << "# bifurcation diagram of X against " << param << '\n' << "# " << param << " X\n";
  summary << param << ",samples,spread,clusters,diverged\n";
  for (const auto& cell : res.points) {
    const std::string v = format_double(cell.value);
    for (const auto& st : cell.samples) {
      csv << v << ',' << detail::state_csv(st) << '\n';
      dat << v << ' ' << format_double(st.x) << '\n';
    }
    summary << v << ',' << cell.samples.size() << ','
            << (cell.diverged() ? std::string() : format_double(cell.spread())) << ','
            << cell.clusters << ',' << (cell.diverged() ? "true" : "false") << '\n';
  }
  detail::write_file(out_dir / "bifurcation.csv", csv.str());
  detail::write_file(out_dir / "bifurcation.dat", dat.str());
  detail::write_file(out_dir / "bifurcation_summary.csv", summary.str());

  std::size_t diverged = 0;
  for (const auto& cell : res.points) diverged += cell.diverged() ? 1 : 0;
  out << "cells: " << res.points.size() << " (" << diverged << " diverged)\n";
  out << "detected s*: "
      << (res.detected_s_star ? format_double(*res.detected_s_star) : std::string("none")) << '\n';
  return kExitOk;
}

inline int cmd_lyapunov(const RunConfig& cfg, const fs::path& out_dir, std::ostream& out,
                        unsigned jobs) {
  if (!cfg.sweep) throw ConfigError("lyapunov needs 'sweep_range'");
  const auto res =
      lyapunov_sweep(cfg.model, cfg.sweep_parameter, sweep_fixed_value(cfg), *cfg.sweep,
                     cfg.init, cfg.sim, {cfg.renorm_interval, cfg.lle_zero_tol},
                     sweep_options(cfg, jobs));
  const std::string param(label(res.parameter));

  std::ostringstream csv;
  std::ostringstream dat;
  csv << param << ",lle,status\n";
  dat << "# largest Lyapunov exponent per iteration against " << param << '\n'
      << "# " << param << " lle\n";
  for (const auto& cell : res.points) {
    const std::string v = format_double(cell.value);
    if (cell.lle) {
      csv << v << ',' << format_double(*cell.lle) << ",ok\n";
      dat << v << ' ' << format_double(*cell.lle) << '\n';
    } else {
      csv << v << ",,diverged at step " << *cell.diverged_at << '\n';
    }
  }
  detail::write_file(out_dir / "lyapunov.csv", csv.str());
  detail::write_file(out_dir / "lyapunov.dat", dat.str());

  out << "sign changes (lle >= -" << format_double(res.zero_tol) << " counts as non-negative):";
  if (res.sign_changes.empty()) out << " none";
  for (const auto& [lo, hi] : res.sign_changes) {
    out << " [" << format_double(lo) << ", " << format_double(hi) << "]";
  }
  out << '\n';
  if (const auto onset = res.onset_bracket()) {
    out << "onset bracket: [" << format_double(onset->first) << ", "
        << format_double(onset->second) << "]\n";
  }
  return kExitOk;
}

/// Parses the command line and dispatches.  Output and errors go to the given streams.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Discrete fractional-order predator-prey-parasite map: fixed points, step-size "
               "thresholds, trajectories, bifurcation and Lyapunov sweeps"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  unsigned jobs = 1;
  bool dump = false;
  std::vector<std::string> overrides;

  const std::vector<std::pair<std::string, std::string>> commands{
      {"fixed-points", "Report the four equilibria, their existence and classification"},
      {"thresholds", "Tabulate the step-size thresholds for each alpha"},
      {"simulate", "Iterate the map and write the trajectory"},
      {"bifurcate", "Sweep s (or alpha) and record post-transient samples"},
      {"lyapunov", "Sweep s (or alpha) and estimate the largest Lyapunov exponent"}};
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "Run configuration file")->required();
    sub->add_option("--out", out_dir, "Output directory (overrides output_dir)");
    sub->add_option("--jobs", jobs, "Worker threads for sweeps")->check(CLI::PositiveNumber);
    sub->add_flag("--dump-config", dump, "Print the resolved configuration and exit");
    sub->add_option("--set", overrides, "Override a config entry, KEY=VALUE (repeatable)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitConfig;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  RunConfig cfg;
  try {
    auto entries = read_config_entries(config_path);
    for (const auto& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw ConfigError("--set expects KEY=VALUE, got '" + kv + "'");
      auto patch = parse_config_entries(kv.substr(0, eq) + " = " + kv.substr(eq + 1));
      for (auto& [k, v] : patch) entries[k] = v;
    }
    cfg = build_config(entries);
    if (!out_dir.empty()) cfg.output_dir = out_dir;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  }

  if (dump) {
    out << dump_config(cfg);
    return kExitOk;
  }

  try {
    const fs::path dir(cfg.output_dir);
    fs::create_directories(dir);
    if (command == "fixed-points") return cmd_fixed_points(cfg, dir, out);
    if (command == "thresholds") return cmd_thresholds(cfg, dir, out);
    if (command == "simulate") return cmd_simulate(cfg, dir, out);
    if (command == "bifurcate") return cmd_bifurcate(cfg, dir, out, jobs);
    return cmd_lyapunov(cfg, dir, out, jobs);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DomainError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DivergedError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace fracppp::cli
