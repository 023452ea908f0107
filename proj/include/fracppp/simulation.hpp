#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "fracppp/errors.hpp"
#include "fracppp/model.hpp"

namespace fracppp {

struct SimConfig {
  std::size_t n_steps = 20000;
  std::size_t transient = 10000;
  std::size_t record_every = 1;
  double convergence_tol = 1e-6;    ///< relative change over the convergence window
  double divergence_bound = 1e12;

  friend bool operator==(const SimConfig&, const SimConfig&) = default;
};

inline void validate(const SimConfig& cfg) {
  if (cfg.n_steps == 0) throw ConfigError("n_steps must be positive");
  if (cfg.transient >= cfg.n_steps) throw ConfigError("transient must be smaller than n_steps");
  if (cfg.record_every == 0) throw ConfigError("record_every must be at least 1");
  if (!(cfg.convergence_tol > 0.0)) throw ConfigError("convergence_tol must be positive");
  if (!(cfg.divergence_bound > 0.0)) throw ConfigError("divergence_bound must be positive");
}

/// Steps between the two states compared by the convergence test.
inline constexpr std::size_t kConvergenceWindow = 100;
/// Relative distance within which a terminal state is identified with an equilibrium.
inline constexpr double kFixedPointMatchTol = 1e-6;

enum class OutcomeKind { ConvergedTo, Oscillatory, Diverged, MaxStepsReached };

struct Outcome {
  OutcomeKind kind = OutcomeKind::MaxStepsReached;
  /// ConvergedTo only: the equilibrium that was reached.
  std::optional<FixedPointKind> attractor;
  /// Last finite state.
  State terminal;
  /// ConvergedTo: first step from which the orbit stays within tolerance of the attractor.
  /// Diverged: step at which the bound was exceeded.  Otherwise n_steps.
  std::size_t step = 0;

  [[nodiscard]] bool converged_to(FixedPointKind kind_) const noexcept {
    return kind == OutcomeKind::ConvergedTo && attractor == kind_;
  }
};

inline std::string describe(const Outcome& o) {
  switch (o.kind) {
    case OutcomeKind::ConvergedTo:
      return "ConvergedTo(" + std::string(label(*o.attractor)) + ") from step " +
             std::to_string(o.step);
    case OutcomeKind::Oscillatory: return "Oscillatory";
    case OutcomeKind::Diverged: return "Diverged at step " + std::to_string(o.step);
    case OutcomeKind::MaxStepsReached: return "MaxStepsReached";
  }
  return "?";
}

struct TrajectoryPoint {
  std::size_t step = 0;
  State state;
};

struct Trajectory {
  std::vector<TrajectoryPoint> states;
  Outcome outcome;
};

inline bool exceeds(const State& st, double bound) noexcept {
  return !st.finite() || st.max_abs() > bound;
}

inline void check_initial_state(const State& init) {
  if (!init.finite()) throw DomainError("initial state must be finite");
  if (init.x < 0.0 || init.y < 0.0 || init.z < 0.0) {
    throw DomainError("initial state must be componentwise non-negative");
  }
}

/// Iterates the map for cfg.n_steps steps, recording every record_every-th state (step 0
/// included), and labels the run.  Convergence is only declared onto a known equilibrium.
inline Trajectory simulate(const ModelParams& p, const Discretization& dsc, const State& init,
                           const SimConfig& cfg) {
  validate(cfg);
  check_initial_state(init);
  const auto fps = fixed_points(p);

  Trajectory traj;
  traj.states.reserve(cfg.n_steps / cfg.record_every + 2);
  traj.states.push_back({0, init});

  // last step at which the orbit was outside the match tolerance of each equilibrium
  std::array<std::optional<std::size_t>, 4> last_outside{};
  auto track = [&](std::size_t n, const State& st) {
    for (std::size_t k = 0; k < fps.size(); ++k) {
      if (fps[k].exists && relative_distance(st, fps[k].coords) > kFixedPointMatchTol) {
        last_outside[k] = n;
      }
    }
  };

  std::array<State, kConvergenceWindow + 1> window{};
  window[0] = init;
  track(0, init);

  State st = init;
  for (std::size_t n = 1; n <= cfg.n_steps; ++n) {
    const State next = step(p, dsc, st);
    if (exceeds(next, cfg.divergence_bound)) {
      traj.outcome = {OutcomeKind::Diverged, std::nullopt, st, n};
      return traj;
    }
    st = next;
    window[n % window.size()] = st;
    track(n, st);
    if (n % cfg.record_every == 0) {
      traj.states.push_back({n, st});
    }
  }

  const std::size_t lag = std::min(cfg.n_steps, kConvergenceWindow);
  const State& earlier = window[(cfg.n_steps - lag) % window.size()];
  // the one-step test keeps even-period cycles, which repeat across the window, out
  const State& previous = window[(cfg.n_steps - 1) % window.size()];
  const bool settled = relative_distance(st, earlier) < cfg.convergence_tol &&
                       relative_distance(st, previous) < cfg.convergence_tol;

  traj.outcome.terminal = st;
  traj.outcome.step = cfg.n_steps;
  if (settled) {
    for (std::size_t k = 0; k < fps.size(); ++k) {
      if (fps[k].exists && relative_distance(st, fps[k].coords) <= kFixedPointMatchTol) {
        traj.outcome.kind = OutcomeKind::ConvergedTo;
        traj.outcome.attractor = fps[k].kind;
        traj.outcome.step = last_outside[k] ? *last_outside[k] + 1 : 0;
        return traj;
      }
    }
    traj.outcome.kind = OutcomeKind::MaxStepsReached;
  } else {
    traj.outcome.kind = OutcomeKind::Oscillatory;
  }
  return traj;
}

/// Post-transient states: steps transient+record_every, transient+2*record_every, ... up to
/// n_steps.  Empty when the orbit diverges.
inline std::vector<State> terminal_attractor_samples(const ModelParams& p,
                                                     const Discretization& dsc,
                                                     const State& init, const SimConfig& cfg) {
  validate(cfg);
  check_initial_state(init);
  std::vector<State> out;
  out.reserve((cfg.n_steps - cfg.transient) / cfg.record_every);
  State st = init;
  for (std::size_t n = 1; n <= cfg.n_steps; ++n) {
    st = step(p, dsc, st);
    if (exceeds(st, cfg.divergence_bound)) {
      return {};
    }
    if (n > cfg.transient && (n - cfg.transient) % cfg.record_every == 0) {
      out.push_back(st);
    }
  }
  return out;
}

}  // namespace fracppp
