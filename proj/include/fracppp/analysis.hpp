#pragma once

// Parameter sweeps: bifurcation diagrams over the step size (or the fractional order) and
// largest-Lyapunov-exponent curves from tangent-vector propagation.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "fracppp/errors.hpp"
#include "fracppp/model.hpp"
#include "fracppp/simulation.hpp"
#include "fracppp/stability.hpp"

namespace fracppp {

enum class SweepParameter { StepSize, Order };

inline std::string_view label(SweepParameter param) noexcept {
  return param == SweepParameter::StepSize ? "s" : "alpha";
}

struct SweepRange {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t n_points = 2;

  friend bool operator==(const SweepRange&, const SweepRange&) = default;

  [[nodiscard]] double at(std::size_t i) const noexcept {
    const auto last = static_cast<double>(n_points - 1);
    const auto k = static_cast<double>(i);
    return (lo * (last - k) + hi * k) / last;
  }
};

inline void validate(const SweepRange& range, SweepParameter param = SweepParameter::StepSize) {
  if (!(range.lo > 0.0) || !(range.hi > range.lo)) {
    throw ConfigError("sweep range needs 0 < lo < hi");
  }
  if (param == SweepParameter::Order && range.hi > 1.0) {
    throw ConfigError("alpha sweep range must stay within (0, 1]");
  }
  if (range.n_points < 2) {
    throw ConfigError("sweep needs at least 2 points");
  }
}

struct SweepOptions {
  unsigned jobs = 1;
  /// Start each cell from the previous cell's final state.  Forces sequential execution.
  bool continuation = false;
};

/// Runs body(i) for i in [0, n) on up to `jobs` threads.  Results must be written by index.
template <class Body>
void parallel_for(std::size_t n, unsigned jobs, Body&& body) {
  const unsigned workers = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(n)));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) body(i);
    });
  }
}

/// Number of groups left after splitting the sorted values wherever consecutive entries
/// differ by more than tol * (1 + |mean|).
inline std::size_t count_clusters(std::vector<double> values, double rel_tol) {
  if (values.empty()) return 0;
  std::sort(values.begin(), values.end());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  const double gap = rel_tol * (1.0 + std::abs(mean));
  std::size_t clusters = 1;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] - values[i - 1] > gap) ++clusters;
  }
  return clusters;
}

/// Relative spread above which a cell no longer collapses onto a single value.
inline constexpr double kCollapseTol = 1e-3;

struct BifurcationCell {
  double value = 0.0;
  std::vector<State> samples;  ///< empty when the orbit diverged
  std::size_t clusters = 0;

  [[nodiscard]] bool diverged() const noexcept { return samples.empty(); }

  /// max - min of the X samples.
  [[nodiscard]] double spread() const noexcept {
    if (samples.empty()) return INFINITY;
    auto [lo, hi] = std::minmax_element(samples.begin(), samples.end(),
                                        [](const State& u, const State& v) { return u.x < v.x; });
    return hi->x - lo->x;
  }
  [[nodiscard]] double mean() const noexcept {
    double acc = 0.0;
    for (const auto& st : samples) acc += st.x;
    return samples.empty() ? 0.0 : acc / static_cast<double>(samples.size());
  }
  [[nodiscard]] bool collapsed() const noexcept {
    return !samples.empty() && spread() <= kCollapseTol * (1.0 + std::abs(mean()));
  }
};

struct BifurcationResult {
  SweepParameter parameter = SweepParameter::StepSize;
  double fixed_value = 0.0;  ///< alpha for an s sweep, s for an alpha sweep
  std::vector<BifurcationCell> points;
  /// First parameter value whose X samples no longer collapse to one value.
  std::optional<double> detected_s_star;
};

namespace detail {

inline Discretization cell_discretization(SweepParameter param, double fixed, double value) {
  return param == SweepParameter::StepSize ? Discretization(fixed, value)
                                           : Discretization(value, fixed);
}

}  // namespace detail

inline BifurcationResult bifurcation_sweep(const ModelParams& p, SweepParameter param,
                                           double fixed_value, const SweepRange& range,
                                           const State& init, const SimConfig& cfg,
                                           const SweepOptions& opts = {}) {
  validate(p);
  validate(range, param);
  validate(cfg);
  (void)detail::cell_discretization(param, fixed_value, range.lo);
  check_initial_state(init);
  BifurcationResult res;
  res.parameter = param;
  res.fixed_value = fixed_value;
  res.points.resize(range.n_points);

  auto run_cell = [&](std::size_t i, const State& start) {
    auto& cell = res.points[i];
    cell.value = range.at(i);
    const auto dsc = detail::cell_discretization(param, fixed_value, cell.value);
    cell.samples = terminal_attractor_samples(p, dsc, start, cfg);
    std::vector<double> xs;
    xs.reserve(cell.samples.size());
    for (const auto& st : cell.samples) xs.push_back(st.x);
    cell.clusters = count_clusters(std::move(xs), kCollapseTol);
  };

  if (opts.continuation) {
    State start = init;
    for (std::size_t i = 0; i < range.n_points; ++i) {
      run_cell(i, start);
      const auto& samples = res.points[i].samples;
      // negative excursions cannot seed the next cell
      if (!samples.empty() && samples.back().x >= 0.0 && samples.back().y >= 0.0 &&
          samples.back().z >= 0.0) {
        start = samples.back();
      } else {
        start = init;
      }
    }
  } else {
    parallel_for(range.n_points, opts.jobs, [&](std::size_t i) { run_cell(i, init); });
  }

  for (const auto& cell : res.points) {
    if (!cell.collapsed()) {
      res.detected_s_star = cell.value;
      break;
    }
  }
  return res;
}

/// Step-size sweep at fixed alpha.
inline BifurcationResult bifurcation_sweep(const ModelParams& p, double alpha,
                                           const SweepRange& s_range, const State& init,
                                           const SimConfig& cfg, const SweepOptions& opts = {}) {
  return bifurcation_sweep(p, SweepParameter::StepSize, alpha, s_range, init, cfg, opts);
}

/// Largest Lyapunov exponent per map iteration by tangent-vector propagation through the
/// analytic Jacobian.  The first `transient` steps are iterated but not accumulated; the
/// tangent vector is renormalised every renorm_interval steps.
inline double largest_lyapunov(const ModelParams& p, const Discretization& dsc, const State& init,
                               std::size_t n_steps, std::size_t renorm_interval,
                               std::size_t transient = 0, double divergence_bound = 1e12) {
  if (renorm_interval == 0) throw ConfigError("renorm_interval must be at least 1");
  if (transient >= n_steps) throw ConfigError("transient must be smaller than n_steps");
  check_initial_state(init);

  State st = init;
  std::array<double, 3> v{1.0, 1.0, 1.0};
  auto normalise = [&v]() {
    const double norm = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    for (double& c : v) c /= norm;
    return norm;
  };
  normalise();

  double log_growth = 0.0;
  std::size_t since_renorm = 0;
  for (std::size_t n = 1; n <= n_steps; ++n) {
    const JacobianMatrix jac = jacobian(p, dsc, st);
    const auto& j = jac.entries;
    v = {j[0][0] * v[0] + j[0][1] * v[1], j[1][0] * v[0] + j[1][1] * v[1] + j[1][2] * v[2],
         j[2][1] * v[1] + j[2][2] * v[2]};
    st = step(p, dsc, st);
    if (exceeds(st, divergence_bound)) {
      throw DivergedError(n);
    }
    ++since_renorm;
    if (n == transient) {
      normalise();
      since_renorm = 0;
    } else if (since_renorm == renorm_interval || n == n_steps) {
      const double norm = normalise();
      if (!std::isfinite(norm) || norm == 0.0) {
        throw DivergedError(n);
      }
      if (n > transient) log_growth += std::log(norm);
      since_renorm = 0;
    }
  }
  return log_growth / static_cast<double>(n_steps - transient);
}

struct LyapunovOptions {
  std::size_t renorm_interval = 1;
  /// Estimates >= -zero_tol count as non-negative when locating sign changes.
  double zero_tol = 5e-5;
};

struct LyapunovCell {
  double value = 0.0;
  std::optional<double> lle;               ///< empty when the orbit diverged
  std::optional<std::size_t> diverged_at;
};

struct LyapunovResult {
  SweepParameter parameter = SweepParameter::StepSize;
  double fixed_value = 0.0;
  std::vector<LyapunovCell> points;
  std::size_t renorm_interval = 1;
  std::size_t n_steps = 0;
  std::size_t transient = 0;
  double zero_tol = 0.0;
  /// Consecutive finite cells (lo, hi) between which the banded sign of the LLE flips.
  std::vector<std::pair<double, double>> sign_changes;

  /// First negative -> non-negative transition, the LLE estimate of s*.
  [[nodiscard]] std::optional<std::pair<double, double>> onset_bracket() const {
    for (const auto& [lo, hi] : sign_changes) {
      const auto cell = std::find_if(points.begin(), points.end(),
                                     [lo = lo](const LyapunovCell& c) { return c.value == lo; });
      if (cell != points.end() && cell->lle && *cell->lle < -zero_tol) return std::pair{lo, hi};
    }
    return std::nullopt;
  }
};

inline LyapunovResult lyapunov_sweep(const ModelParams& p, SweepParameter param,
                                     double fixed_value, const SweepRange& range,
                                     const State& init, const SimConfig& cfg,
                                     const LyapunovOptions& lopts = {},
                                     const SweepOptions& opts = {}) {
  validate(p);
  validate(range, param);
  validate(cfg);
  (void)detail::cell_discretization(param, fixed_value, range.lo);
  check_initial_state(init);
  LyapunovResult res;
  res.parameter = param;
  res.fixed_value = fixed_value;
  res.renorm_interval = lopts.renorm_interval;
  res.n_steps = cfg.n_steps;
  res.transient = cfg.transient;
  res.zero_tol = lopts.zero_tol;
  res.points.resize(range.n_points);

  auto run_cell = [&](std::size_t i, const State& start) {
    auto& cell = res.points[i];
    cell.value = range.at(i);
    const auto dsc = detail::cell_discretization(param, fixed_value, cell.value);
    try {
      cell.lle = largest_lyapunov(p, dsc, start, cfg.n_steps, lopts.renorm_interval,
                                  cfg.transient, cfg.divergence_bound);
    } catch (const DivergedError& e) {
      cell.diverged_at = e.step();
    }
  };

  if (opts.continuation) {
    State start = init;
    for (std::size_t i = 0; i < range.n_points; ++i) {
      run_cell(i, start);
      if (res.points[i].lle) {
        State st = start;
        const auto dsc = detail::cell_discretization(param, fixed_value, res.points[i].value);
        for (std::size_t n = 0; n < cfg.n_steps; ++n) st = step(p, dsc, st);
        start = (st.x >= 0.0 && st.y >= 0.0 && st.z >= 0.0) ? st : init;
      } else {
        start = init;
      }
    }
  } else {
    parallel_for(range.n_points, opts.jobs, [&](std::size_t i) { run_cell(i, init); });
  }

  const LyapunovCell* prev = nullptr;
  for (const auto& cell : res.points) {
    if (!cell.lle) continue;
    if (prev != nullptr) {
      const bool was_negative = *prev->lle < -lopts.zero_tol;
      const bool is_negative = *cell.lle < -lopts.zero_tol;
      if (was_negative != is_negative) res.sign_changes.emplace_back(prev->value, cell.value);
    }
    prev = &cell;
  }
  return res;
}

/// Step-size sweep at fixed alpha.
inline LyapunovResult lyapunov_sweep(const ModelParams& p, double alpha, const SweepRange& s_range,
                                     const State& init, const SimConfig& cfg,
                                     const LyapunovOptions& lopts = {},
                                     const SweepOptions& opts = {}) {
  return lyapunov_sweep(p, SweepParameter::StepSize, alpha, s_range, init, cfg, lopts, opts);
}

}  // namespace fracppp
