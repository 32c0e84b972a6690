#pragma once

// Monte-Carlo harness: M dynamics per graph, L graphs per (c, n) cell,
// finite-size collapse estimates of the localisation / propagation
// thresholds, dynamical vs topological noise, and mean-field comparison.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mtsw/error.hpp"
#include "mtsw/graph.hpp"
#include "mtsw/meanfield.hpp"
#include "mtsw/parallel.hpp"
#include "mtsw/process.hpp"
#include "mtsw/rng.hpp"
#include "mtsw/stats.hpp"

namespace mtsw {

/// Fixed seed vertex, or a fresh uniform draw per run when empty.
struct SeedVertexPolicy {
  std::optional<Vertex> fixed;
};

struct ExperimentConfig {
  std::uint32_t k = 1;
  std::vector<double> c_grid;
  std::vector<std::uint32_t> sizes;
  std::uint32_t runs_per_graph = 1000;  // M
  std::uint32_t graphs = 10;            // L
  std::uint64_t master_seed = 0;
  SeedVertexPolicy seed_vertex;
  unsigned workers = 0;  // 0: resolve_workers()

  /// Full-scale protocol: M = 1e5, L = 10, n up to 25600.
  static ExperimentConfig full_preset(std::uint32_t k, std::vector<double> c_grid, std::uint64_t seed) {
    ExperimentConfig cfg;
    cfg.k = k;
    cfg.c_grid = std::move(c_grid);
    cfg.sizes = {3200, 6400, 12800, 25600};
    cfg.runs_per_graph = 100000;
    cfg.graphs = 10;
    cfg.master_seed = seed;
    return cfg;
  }

  /// Desk-scale defaults: M = 1e3, L = 10, n in {800, ..., 12800}.
  static ExperimentConfig desk_preset(std::uint32_t k, std::vector<double> c_grid, std::uint64_t seed) {
    ExperimentConfig cfg;
    cfg.k = k;
    cfg.c_grid = std::move(c_grid);
    cfg.sizes = {800, 1600, 3200, 6400, 12800};
    cfg.master_seed = seed;
    return cfg;
  }

  void validate() const {
    if (runs_per_graph < 1) throw InvalidParams("M must be >= 1");
    if (graphs < 1) throw InvalidParams("L must be >= 1");
    if (c_grid.empty()) throw InvalidParams("c grid is empty");
    if (sizes.empty()) throw InvalidParams("size list is empty");
    for (double c : c_grid) {
      for (std::uint32_t n : sizes) (void)GraphParams::make(n, k, c);
    }
    if (seed_vertex.fixed) {
      for (std::uint32_t n : sizes) {
        if (*seed_vertex.fixed >= n) throw InvalidParams("fixed seed vertex out of range");
      }
    }
  }
};

struct SweepRow {
  std::uint32_t k = 0;
  double c = 0.0;
  std::uint32_t n = 0;
  double mean_R = 0.0;
  double std_R = 0.0;
  double mean_R_over_n = 0.0;
  double std_R_over_n = 0.0;
  std::uint64_t samples = 0;
  std::uint64_t seed = 0;

  [[nodiscard]] double se_R() const noexcept {
    return samples ? std_R / std::sqrt(static_cast<double>(samples)) : 0.0;
  }
  [[nodiscard]] double se_R_over_n() const noexcept {
    return samples ? std_R_over_n / std::sqrt(static_cast<double>(samples)) : 0.0;
  }
};

struct SweepTable {
  std::vector<SweepRow> rows;
  std::uint64_t identity_checks = 0;
  std::uint64_t identity_failures = 0;
};

struct CellSamples {
  std::vector<std::uint32_t> final_removed;  // graph-major: [g * M + trial]
  std::uint64_t identity_failures = 0;
};

namespace detail {

enum StreamTag : std::uint64_t { kGraphStream = 1, kRunStream = 2, kTopoStream = 3 };

// Streams are keyed by the cell's parameter values, so a cell yields the same
// samples whatever grid it appears in.
inline std::uint64_t key_of(double c) noexcept { return std::bit_cast<std::uint64_t>(c); }

}  // namespace detail

/// All M*L outcomes for one (k, c, n) cell. Graphs are built in order; runs
/// on each graph are distributed over workers with per-run substreams.
inline CellSamples monte_carlo_cell(std::uint32_t k, double c, std::uint32_t n,
                                    std::uint32_t runs_per_graph, std::uint32_t graphs,
                                    std::uint64_t master_seed, const SeedVertexPolicy& policy = {},
                                    unsigned workers = 0) {
  const GraphParams params = GraphParams::make(n, k, c);
  workers = resolve_workers(workers);
  CellSamples cell;
  cell.final_removed.resize(static_cast<std::size_t>(runs_per_graph) * graphs);
  std::vector<Runner> runners(workers);
  std::vector<std::uint64_t> failures(workers, 0);
  for (std::uint32_t g = 0; g < graphs; ++g) {
    Rng graph_rng = substream(master_seed, {detail::kGraphStream, k, detail::key_of(c), n, g});
    const Graph graph = build(params, graph_rng);
    parallel_for(runs_per_graph, workers, [&](unsigned worker, std::size_t trial) {
      Rng rng = substream(master_seed, {detail::kRunStream, k, detail::key_of(c), n, g, trial});
      const Vertex seed_vertex =
          policy.fixed ? *policy.fixed : static_cast<Vertex>(uniform_below(rng, n));
      const RunOutcome out = runners[worker].run(graph, seed_vertex, rng);
      if (!verify_absorption_identity(out)) ++failures[worker];
      cell.final_removed[static_cast<std::size_t>(g) * runs_per_graph + trial] = out.final_removed;
    });
  }
  for (std::uint64_t f : failures) cell.identity_failures += f;
  return cell;
}

inline SweepRow summarize_cell(std::uint32_t k, double c, std::uint32_t n, const CellSamples& cell,
                               std::uint64_t seed) {
  const Summary raw = summarize(cell.final_removed);
  SweepRow row;
  row.k = k;
  row.c = c;
  row.n = n;
  row.mean_R = raw.mean;
  row.std_R = raw.stddev;
  row.mean_R_over_n = raw.mean / n;
  row.std_R_over_n = raw.stddev / n;
  row.samples = raw.count;
  row.seed = seed;
  return row;
}

/// Rows are ordered c-major, then by size in the order given.
inline SweepTable monte_carlo(const ExperimentConfig& config) {
  config.validate();
  SweepTable table;
  for (double c : config.c_grid) {
    for (std::uint32_t n : config.sizes) {
      CellSamples cell;
      try {
        cell = monte_carlo_cell(config.k, c, n, config.runs_per_graph, config.graphs,
                                config.master_seed, config.seed_vertex, config.workers);
      } catch (const std::exception& e) {
        throw std::runtime_error("cell (k=" + std::to_string(config.k) + ", c=" + std::to_string(c) +
                                 ", n=" + std::to_string(n) + "): " + e.what());
      }
      table.identity_checks += cell.final_removed.size();
      table.identity_failures += cell.identity_failures;
      table.rows.push_back(summarize_cell(config.k, c, n, cell, config.master_seed));
    }
  }
  return table;
}

enum class HistogramMode { RawR, RatioR };

inline const char* to_string(HistogramMode m) { return m == HistogramMode::RawR ? "raw" : "ratio"; }

struct Histogram {
  HistogramMode mode = HistogramMode::RawR;
  std::vector<double> edges;  // bins + 1 edges
  std::vector<std::uint64_t> counts;
  std::uint64_t sample_count = 0;

  [[nodiscard]] std::size_t bins() const noexcept { return counts.size(); }
  [[nodiscard]] double mass(std::size_t i) const {
    return static_cast<double>(counts.at(i)) / static_cast<double>(sample_count);
  }
  [[nodiscard]] std::vector<double> masses() const {
    std::vector<double> out(counts.size());
    for (std::size_t i = 0; i < counts.size(); ++i) out[i] = mass(i);
    return out;
  }
  /// Lower edge of the most populated bin (first one on ties).
  [[nodiscard]] double mode_value() const {
    const auto it = std::max_element(counts.begin(), counts.end());
    return edges[static_cast<std::size_t>(it - counts.begin())];
  }
};

/// RawR: unit-width bins [r, r+1) spanning the sample range; samples must be
/// integers. RatioR: `bins` equal-width bins on [0, 1], 1.0 in the last bin.
inline Histogram histogram(std::span<const double> samples, HistogramMode mode, std::size_t bins = 100) {
  if (samples.empty()) throw EmptyInput("histogram of an empty sample");
  Histogram h;
  h.mode = mode;
  h.sample_count = samples.size();
  if (mode == HistogramMode::RawR) {
    const auto [lo_it, hi_it] = std::minmax_element(samples.begin(), samples.end());
    const double lo = std::floor(*lo_it);
    const double hi = std::floor(*hi_it);
    const auto width = static_cast<std::size_t>(hi - lo) + 1;
    h.counts.assign(width, 0);
    for (std::size_t i = 0; i <= width; ++i) h.edges.push_back(lo + static_cast<double>(i));
    for (double s : samples) {
      if (s != std::floor(s)) throw DomainError("raw histogram needs integer samples");
      ++h.counts[static_cast<std::size_t>(s - lo)];
    }
  } else {
    if (bins == 0) throw DomainError("bins must be > 0");
    h.counts.assign(bins, 0);
    for (std::size_t i = 0; i <= bins; ++i) {
      h.edges.push_back(static_cast<double>(i) / static_cast<double>(bins));
    }
    for (double s : samples) {
      if (!(s >= 0.0 && s <= 1.0)) throw DomainError("ratio histogram needs samples in [0, 1]");
      const auto idx = std::min(bins - 1, static_cast<std::size_t>(s * static_cast<double>(bins)));
      ++h.counts[idx];
    }
  }
  return h;
}

/// Samples of R (RawR) or R/n (RatioR) from a cell, ready for histogram().
inline std::vector<double> cell_values(const CellSamples& cell, std::uint32_t n, HistogramMode mode) {
  std::vector<double> out;
  out.reserve(cell.final_removed.size());
  for (std::uint32_t r : cell.final_removed) {
    out.push_back(mode == HistogramMode::RawR ? static_cast<double>(r) : static_cast<double>(r) / n);
  }
  return out;
}

struct CollapsePoint {
  double c = 0.0;
  double raw_spread = 0.0;    // max_n |R(n) - R(n_ref)| / R(n_ref)
  double ratio_spread = 0.0;  // same for R/n
};

struct ThresholdEstimate {
  std::uint32_t k = 0;
  double c1_hat = 0.0;
  double c2_hat = 0.0;
  std::vector<CollapsePoint> grid;
};

/// Collapse-based threshold estimates from a sweep over >= 3 sizes.
///
/// c1_hat is the largest grid value at which raw means collapse (relative
/// spread < tol_lower); c2_hat is the smallest grid value at which R/n means
/// collapse (spread < tol_upper). n_ref is the smallest size.
inline ThresholdEstimate estimate_thresholds(const SweepTable& table, std::uint32_t k,
                                             double tol_lower = 0.10, double tol_upper = 0.05) {
  std::map<double, std::map<std::uint32_t, const SweepRow*>> by_c;
  for (const SweepRow& row : table.rows) {
    if (row.k == k) by_c[row.c][row.n] = &row;
  }
  if (by_c.empty()) throw NoCollapseFound("no rows for k=" + std::to_string(k));

  ThresholdEstimate est;
  est.k = k;
  for (const auto& [c, sizes] : by_c) {
    if (sizes.size() < 3) {
      throw NoCollapseFound("c=" + std::to_string(c) + " covers fewer than 3 sizes");
    }
    const SweepRow& ref = *sizes.begin()->second;
    CollapsePoint point{c, 0.0, 0.0};
    for (const auto& [n, row] : sizes) {
      point.raw_spread = std::max(point.raw_spread, std::abs(row->mean_R - ref.mean_R) / ref.mean_R);
      point.ratio_spread = std::max(
          point.ratio_spread, std::abs(row->mean_R_over_n - ref.mean_R_over_n) / ref.mean_R_over_n);
    }
    est.grid.push_back(point);
  }

  std::optional<double> c1;
  std::optional<double> c2;
  for (const CollapsePoint& p : est.grid) {
    if (p.raw_spread < tol_lower) c1 = p.c;
    if (p.ratio_spread < tol_upper && !c2) c2 = p.c;
  }
  if (!c1) throw NoCollapseFound("raw R collapses nowhere on the grid");
  if (!c2) throw NoCollapseFound("R/n collapses nowhere on the grid");
  if (*c1 > *c2) {
    throw NoCollapseFound("collapse regions overlap: c1_hat=" + std::to_string(*c1) +
                          " > c2_hat=" + std::to_string(*c2));
  }
  est.c1_hat = *c1;
  est.c2_hat = *c2;
  return est;
}

struct NoiseConfig {
  std::uint32_t k = 1;
  double c = 2.0;
  std::uint32_t n = 3200;
  std::uint32_t runs = 1000;    // M, dynamical route
  std::uint32_t graphs = 1000;  // L, topological route
  std::uint64_t master_seed = 0;
  unsigned workers = 0;
};

struct NoiseReport {
  Summary dynamical;    // M runs on one fixed graph
  Summary topological;  // one run on each of L graphs

  [[nodiscard]] double variance_ratio() const noexcept {
    return dynamical.variance() > 0.0 ? topological.variance() / dynamical.variance() : INFINITY;
  }
  [[nodiscard]] double combined_se() const noexcept {
    return std::hypot(dynamical.std_error(), topological.std_error());
  }
  [[nodiscard]] bool means_agree(double sigmas = 3.0) const noexcept {
    return std::abs(dynamical.mean - topological.mean) <= sigmas * combined_se();
  }
};

inline NoiseReport compare_noise_sources(const NoiseConfig& cfg) {
  const GraphParams params = GraphParams::make(cfg.n, cfg.k, cfg.c);
  if (cfg.runs < 2 || cfg.graphs < 2) throw InvalidParams("noise comparison needs M, L >= 2");
  const unsigned workers = resolve_workers(cfg.workers);

  std::vector<std::uint32_t> dyn(cfg.runs);
  {
    Rng graph_rng = substream(cfg.master_seed, {detail::kGraphStream, cfg.k, detail::key_of(cfg.c), cfg.n, 0});
    const Graph graph = build(params, graph_rng);
    std::vector<Runner> runners(workers);
    parallel_for(cfg.runs, workers, [&](unsigned w, std::size_t t) {
      Rng rng = substream(cfg.master_seed, {detail::kRunStream, cfg.k, detail::key_of(cfg.c), cfg.n, 0, t});
      dyn[t] = runners[w].run(graph, static_cast<Vertex>(uniform_below(rng, cfg.n)), rng).final_removed;
    });
  }
  std::vector<std::uint32_t> topo(cfg.graphs);
  {
    std::vector<Runner> runners(workers);
    parallel_for(cfg.graphs, workers, [&](unsigned w, std::size_t g) {
      Rng rng = substream(cfg.master_seed, {detail::kTopoStream, cfg.k, detail::key_of(cfg.c), cfg.n, g});
      const Graph graph = build(params, rng);
      topo[g] = runners[w].run(graph, static_cast<Vertex>(uniform_below(rng, cfg.n)), rng).final_removed;
    }, 8);
  }
  return {summarize(dyn), summarize(topo)};
}

struct MeanFieldComparisonRow {
  double c = 0.0;
  std::uint32_t n = 0;
  double mean_R_over_n = 0.0;
  double se = 0.0;
  double z_inf = 0.0;
  double gap = 0.0;  // z_inf - mean_R_over_n
  bool violation = false;
};

/// Pairs each c's largest-n row with z_inf(k, c). A violation is a simulated
/// mean exceeding z_inf by more than `sigmas` standard errors.
inline std::vector<MeanFieldComparisonRow> meanfield_comparison(const SweepTable& table, std::uint32_t k,
                                                                double sigmas = 3.0) {
  std::map<double, const SweepRow*> largest;
  for (const SweepRow& row : table.rows) {
    if (row.k != k) continue;
    auto& slot = largest[row.c];
    if (!slot || row.n > slot->n) slot = &row;
  }
  std::vector<MeanFieldComparisonRow> out;
  for (const auto& [c, row] : largest) {
    MeanFieldComparisonRow r;
    r.c = c;
    r.n = row->n;
    r.mean_R_over_n = row->mean_R_over_n;
    r.se = row->se_R_over_n();
    r.z_inf = z_infinity(k, c);
    r.gap = r.z_inf - r.mean_R_over_n;
    r.violation = r.mean_R_over_n > r.z_inf + sigmas * r.se;
    out.push_back(r);
  }
  return out;
}

}  // namespace mtsw
