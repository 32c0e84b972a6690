#pragma once

// Command-line driver. dispatch() returns 0 on success, 2 on a usage or
// validation error (one-line diagnostic naming the flag), 1 on a runtime
// failure. Every numeric flag is validated before any simulation starts.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "mtsw/branching.hpp"
#include "mtsw/experiments.hpp"
#include "mtsw/graph.hpp"
#include "mtsw/io.hpp"
#include "mtsw/meanfield.hpp"
#include "mtsw/process.hpp"

namespace mtsw::cli {

struct UsageError : std::runtime_error {
  UsageError(const std::string& flag, const std::string& what) : std::runtime_error(flag + ": " + what) {}
};

namespace detail {

struct Output {
  std::ostream& stream() { return file ? *file : *console; }
  std::ostream* console = nullptr;
  std::unique_ptr<std::ofstream> file;
};

// Opens --out before any work starts so an unwritable path fails fast.
inline Output open_output(const std::string& path, std::ostream& console, const std::string& flag = "--out") {
  Output out;
  out.console = &console;
  if (!path.empty() && path != "-") {
    out.file = std::make_unique<std::ofstream>(path, std::ios::binary | std::ios::trunc);
    if (!*out.file) throw UsageError(flag, "cannot open '" + path + "' for writing");
  }
  return out;
}

inline std::uint64_t resolve_seed(const std::optional<std::uint64_t>& seed, std::ostream& err) {
  if (seed) return *seed;
  std::random_device rd;
  const std::uint64_t s = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
  err << "seed: " << s << '\n';
  return s;
}

inline GraphParams graph_params(std::uint64_t n, std::uint64_t k, double c) {
  try {
    return GraphParams::make(n, k, c);
  } catch (const InvalidParams& e) {
    throw UsageError("--n/--k/--c", e.what());
  }
}

template <typename T>
T guarded(const std::string& flag, auto&& fn) {
  try {
    return fn();
  } catch (const InvalidParams& e) {
    throw UsageError(flag, e.what());
  } catch (const DomainError& e) {
    throw UsageError(flag, e.what());
  }
}

inline void finish_json(Output& out, const nlohmann::ordered_json& j) { out.stream() << j.dump(2) << '\n'; }

}  // namespace detail

inline int dispatch(int argc, const char* const* argv, std::ostream& out = std::cout,
                    std::ostream& err = std::cerr) {
  CLI::App app{"Maki-Thompson rumour spreading on Newman-Watts small-world graphs"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  // Shared flag storage; each subcommand registers the ones it uses.
  std::uint64_t n = 1000;
  std::uint64_t k = 1;
  double c = 0.0;
  std::optional<std::uint64_t> seed;
  std::string out_path;
  unsigned workers = 0;
  std::uint64_t m = 1000;
  std::uint64_t l = 10;
  std::optional<std::uint64_t> seed_vertex;

  auto add_graph_flags = [&](CLI::App* sub) {
    sub->add_option("--n", n, "Number of vertices")->check(CLI::Range(3ULL, 1ULL << 31));
    sub->add_option("--k", k, "Ring half-degree")->check(CLI::Range(1ULL, 1ULL << 30));
    sub->add_option("--c", c, "Shortcut intensity (mean shortcut degree)")->check(CLI::NonNegativeNumber);
  };
  auto add_seed = [&](CLI::App* sub) {
    sub->add_option("--seed", seed, "Master seed (drawn from entropy and printed when omitted)");
  };
  auto add_workers = [&](CLI::App* sub) {
    sub->add_option("--workers", workers, std::string("Worker threads (default: $") + kWorkersEnv +
                                              " or hardware concurrency)")
        ->check(CLI::PositiveNumber);
  };

  // graph
  auto* graph_cmd = app.add_subcommand("graph", "Sample a graph and write it as JSON");
  add_graph_flags(graph_cmd);
  add_seed(graph_cmd);
  graph_cmd->add_option("--out", out_path, "Output file (default stdout)");

  // run
  bool coupled = false;
  std::string trajectory_path;
  auto* run_cmd = app.add_subcommand("run", "Run the rumour dynamics once and print the outcome as JSON");
  add_graph_flags(run_cmd);
  add_seed(run_cmd);
  run_cmd->add_option("--seed-vertex", seed_vertex, "Initial spreader (default: uniform random)");
  run_cmd->add_flag("--coupled", coupled, "Reveal shortcuts lazily while the rumour spreads");
  run_cmd->add_option("--trajectory", trajectory_path, "Write t,I,S,R to this CSV file");
  run_cmd->add_option("--out", out_path, "Output file (default stdout)");

  // sweep
  std::string c_grid_text = "0.1:3:0.1";
  std::string sizes_text = "800,1600,3200";
  auto* sweep_cmd = app.add_subcommand("sweep", "Monte-Carlo sweep over a c grid and sizes; writes CSV");
  sweep_cmd->add_option("--k", k, "Ring half-degree")->check(CLI::Range(1ULL, 1ULL << 30));
  sweep_cmd->add_option("--c", c_grid_text, "c grid: lo:hi:step, a comma list, or one value");
  sweep_cmd->add_option("--sizes", sizes_text, "Comma-separated list of n");
  sweep_cmd->add_option("--m", m, "Dynamics repetitions per graph (M)")->check(CLI::Range(1ULL, 1ULL << 32));
  sweep_cmd->add_option("--l", l, "Graph realisations per cell (L)")->check(CLI::Range(1ULL, 1ULL << 32));
  sweep_cmd->add_option("--seed-vertex", seed_vertex, "Fixed initial spreader (default: uniform random)");
  add_seed(sweep_cmd);
  add_workers(sweep_cmd);
  sweep_cmd->add_option("--out", out_path, "Output CSV (default stdout)");

  // hist
  std::string mode_text = "raw";
  std::uint64_t bins = 100;
  auto* hist_cmd = app.add_subcommand("hist", "Histogram of R (raw) or R/n (ratio) for one cell; writes CSV");
  add_graph_flags(hist_cmd);
  hist_cmd->add_option("--m", m, "Dynamics repetitions per graph (M)")->check(CLI::Range(1ULL, 1ULL << 32));
  hist_cmd->add_option("--l", l, "Graph realisations (L)")->check(CLI::Range(1ULL, 1ULL << 32));
  hist_cmd->add_option("--mode", mode_text, "raw or ratio")->check(CLI::IsMember({"raw", "ratio"}));
  hist_cmd->add_option("--bins", bins, "Bins for ratio mode")->check(CLI::Range(1ULL, 1ULL << 24));
  add_seed(hist_cmd);
  add_workers(hist_cmd);
  hist_cmd->add_option("--out", out_path, "Output CSV (default stdout)");

  // meanfield
  bool ode = false;
  std::optional<double> alpha_override;
  std::optional<double> dt;
  std::optional<double> t_max;
  double n_ref = 1e4;
  std::uint64_t stride = 1000;
  auto* mf_cmd = app.add_subcommand("meanfield", "Mean-field alpha, lambda and z_inf as JSON");
  mf_cmd->add_option("--k", k, "Ring half-degree")->check(CLI::Range(1ULL, 1ULL << 30));
  mf_cmd->add_option("--c", c, "Shortcut intensity")->check(CLI::NonNegativeNumber);
  mf_cmd->add_option("--alpha-override", alpha_override, "Use this alpha instead of E[1/(X+2k)]")
      ->check(CLI::Range(0.0, 1.0));
  mf_cmd->add_flag("--ode", ode, "Also integrate the ODE system and report z(t_max)");
  mf_cmd->add_option("--dt", dt, "RK4 step (default 1e-3/(2k+c)^2)")->check(CLI::PositiveNumber);
  mf_cmd->add_option("--t-max", t_max, "Integration horizon (default: until y < 1e-10)")
      ->check(CLI::PositiveNumber);
  mf_cmd->add_option("--n-ref", n_ref, "Initial spreader mass is 1/n_ref")->check(CLI::Range(1.0, 1e300));
  mf_cmd->add_option("--trajectory", trajectory_path, "Write t,x,y,z to this CSV file (with --ode)");
  mf_cmd->add_option("--stride", stride, "Record every stride-th ODE step")->check(CLI::PositiveNumber);

  // thresholds
  bool lemma_variant = false;
  std::string sweep_path;
  double tol_lower = 0.10;
  double tol_upper = 0.05;
  auto* thr_cmd = app.add_subcommand("thresholds",
                                     "Theoretical critical c from the branching means; with --sweep also "
                                     "collapse-based estimates");
  thr_cmd->add_option("--k", k, "Ring half-degree")->check(CLI::Range(1ULL, 1ULL << 30));
  thr_cmd->add_flag("--lemma-variant", lemma_variant, "Use the (alpha^-k + 1) form of the subcritical mean");
  thr_cmd->add_option("--sweep", sweep_path, "Sweep CSV to estimate c1_hat and c2_hat from")
      ->check(CLI::ExistingFile);
  thr_cmd->add_option("--tol-lower", tol_lower, "Raw-R collapse tolerance")->check(CLI::PositiveNumber);
  thr_cmd->add_option("--tol-upper", tol_upper, "R/n collapse tolerance")->check(CLI::PositiveNumber);
  thr_cmd->add_option("--out", out_path, "Output JSON (default stdout)");

  // noise
  auto* noise_cmd = app.add_subcommand("noise", "Dynamical vs topological noise comparison as JSON");
  add_graph_flags(noise_cmd);
  noise_cmd->add_option("--m", m, "Runs on one fixed graph (M)")->check(CLI::Range(2ULL, 1ULL << 32));
  noise_cmd->add_option("--l", l, "Graphs, one run each (L)")->check(CLI::Range(2ULL, 1ULL << 32));
  add_seed(noise_cmd);
  add_workers(noise_cmd);
  noise_cmd->add_option("--out", out_path, "Output JSON (default stdout)");

  // blocked
  std::uint64_t centers = 1000;
  std::optional<std::uint64_t> scan_limit;
  auto* blocked_cmd = app.add_subcommand("blocked", "Blocked clusters around random centers; writes CSV");
  add_graph_flags(blocked_cmd);
  blocked_cmd->add_option("--centers", centers, "Number of distinct centers")->check(CLI::PositiveNumber);
  blocked_cmd->add_option("--scan-limit", scan_limit, "Scan bound (default ceil(n^0.45))")
      ->check(CLI::PositiveNumber);
  add_seed(blocked_cmd);
  blocked_cmd->add_option("--out", out_path, "Output CSV (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }

  try {
    if (graph_cmd->parsed()) {
      const GraphParams params = detail::graph_params(n, k, c);
      auto sink = detail::open_output(out_path, out);
      const std::uint64_t s = detail::resolve_seed(seed, err);
      detail::finish_json(sink, io::to_json(build(params, s)));
      return 0;
    }

    if (run_cmd->parsed()) {
      const GraphParams params = detail::graph_params(n, k, c);
      if (seed_vertex && *seed_vertex >= params.n) throw UsageError("--seed-vertex", "must be < n");
      auto sink = detail::open_output(out_path, out);
      std::unique_ptr<std::ofstream> traj;
      if (!trajectory_path.empty()) {
        traj = std::make_unique<std::ofstream>(trajectory_path, std::ios::binary | std::ios::trunc);
        if (!*traj) throw UsageError("--trajectory", "cannot open '" + trajectory_path + "' for writing");
      }
      const std::uint64_t s = detail::resolve_seed(seed, err);
      Rng rng = substream(s, {mtsw::detail::kRunStream});
      const auto v0 = seed_vertex ? static_cast<Vertex>(*seed_vertex)
                                  : static_cast<Vertex>(uniform_below(rng, params.n));
      RunOutcome outcome;
      if (coupled) {
        outcome = run_coupled(params, v0, rng, traj != nullptr).first;
      } else {
        Rng graph_rng = substream(s, {mtsw::detail::kGraphStream});
        const Graph g = build(params, graph_rng, s);
        outcome = run(g, v0, rng, traj != nullptr);
      }
      auto j = io::run_to_json(params, outcome);
      j["seed"] = s;
      detail::finish_json(sink, j);
      if (traj) io::write_trajectory_csv(*traj, outcome);
      return 0;
    }

    if (sweep_cmd->parsed()) {
      ExperimentConfig cfg;
      cfg.k = static_cast<std::uint32_t>(k);
      cfg.c_grid = detail::guarded<std::vector<double>>("--c", [&] { return io::parse_c_grid(c_grid_text); });
      cfg.sizes = detail::guarded<std::vector<std::uint32_t>>("--sizes", [&] { return io::parse_sizes(sizes_text); });
      cfg.runs_per_graph = static_cast<std::uint32_t>(m);
      cfg.graphs = static_cast<std::uint32_t>(l);
      cfg.workers = workers;
      if (seed_vertex) cfg.seed_vertex.fixed = static_cast<Vertex>(*seed_vertex);
      detail::guarded<int>("--k/--c/--sizes", [&] {
        cfg.validate();
        return 0;
      });
      auto sink = detail::open_output(out_path, out);
      cfg.master_seed = detail::resolve_seed(seed, err);
      const SweepTable table = monte_carlo(cfg);
      io::write_sweep_csv(sink.stream(), table);
      if (table.identity_failures != 0) {
        err << "error: tau = 2R - 1 failed in " << table.identity_failures << " runs\n";
        return 1;
      }
      return 0;
    }

    if (hist_cmd->parsed()) {
      const GraphParams params = detail::graph_params(n, k, c);
      auto sink = detail::open_output(out_path, out);
      const std::uint64_t s = detail::resolve_seed(seed, err);
      const HistogramMode mode = mode_text == "raw" ? HistogramMode::RawR : HistogramMode::RatioR;
      const CellSamples cell = monte_carlo_cell(params.k, params.c, params.n, static_cast<std::uint32_t>(m),
                                                static_cast<std::uint32_t>(l), s, {}, workers);
      const auto values = cell_values(cell, params.n, mode);
      io::write_histogram_csv(sink.stream(), histogram(values, mode, bins));
      return 0;
    }

    if (mf_cmd->parsed()) {
      const auto kk = static_cast<std::uint32_t>(k);
      if (alpha_override && !(*alpha_override > 0.0)) throw UsageError("--alpha-override", "must be > 0");
      const MeanFieldParams params =
          detail::guarded<MeanFieldParams>("--alpha-override", [&] { return MeanFieldParams::make(kk, c, alpha_override); });
      std::unique_ptr<std::ofstream> traj;
      if (!trajectory_path.empty()) {
        if (!ode) throw UsageError("--trajectory", "requires --ode");
        traj = std::make_unique<std::ofstream>(trajectory_path, std::ios::binary | std::ios::trunc);
        if (!*traj) throw UsageError("--trajectory", "cannot open '" + trajectory_path + "' for writing");
      }
      nlohmann::ordered_json j;
      j["k"] = kk;
      j["c"] = c;
      j["alpha"] = params.alpha;
      j["lambda"] = params.lambda;
      j["z_inf"] = z_infinity(params);
      if (ode) {
        const double step = dt ? *dt : default_dt(params);
        const MeanFieldState y0 = initial_state(n_ref);
        const auto trajectory = t_max ? integrate(params, y0, *t_max, step, stride)
                                      : integrate_until_quiescent(params, y0, step, 1e-10, stride);
        j["dt"] = step;
        j["t_max"] = trajectory.back().t;
        j["z_ode"] = trajectory.back().state.z;
        if (traj) io::write_meanfield_trajectory_csv(*traj, trajectory);
      }
      out << j.dump(2) << '\n';
      return 0;
    }

    if (thr_cmd->parsed()) {
      const auto kk = static_cast<std::uint32_t>(k);
      auto sink = detail::open_output(out_path, out);
      const SubcriticalVariant variant = lemma_variant ? SubcriticalVariant::Lemma : SubcriticalVariant::Cluster;
      nlohmann::ordered_json j;
      j["k"] = kk;
      std::optional<SweepTable> table;
      if (!sweep_path.empty()) {
        std::ifstream in(sweep_path);
        if (!in) throw UsageError("--sweep", "cannot read '" + sweep_path + "'");
        table = detail::guarded<SweepTable>("--sweep", [&] { return io::read_sweep_csv(in); });
      }
      std::optional<ThresholdEstimate> est;
      if (table) {
        est = estimate_thresholds(*table, kk, tol_lower, tol_upper);
        j["c1_hat"] = est->c1_hat;
        j["c2_hat"] = est->c2_hat;
      }
      j["c1_theory"] = subcritical_threshold(kk, variant);
      j["c2_theory"] = supercritical_threshold(kk);
      j["variant"] = to_string(variant);
      j["c1_theory_cluster"] = subcritical_threshold(kk, SubcriticalVariant::Cluster);
      j["c1_theory_lemma"] = subcritical_threshold(kk, SubcriticalVariant::Lemma);
      if (est) {
        auto grid = nlohmann::ordered_json::array();
        for (const CollapsePoint& p : est->grid) {
          grid.push_back({{"c", p.c}, {"raw_spread", p.raw_spread}, {"ratio_spread", p.ratio_spread}});
        }
        j["grid"] = std::move(grid);
        j["tol_lower"] = tol_lower;
        j["tol_upper"] = tol_upper;
        if (!table->rows.empty()) j["seed"] = table->rows.front().seed;
      }
      detail::finish_json(sink, j);
      return 0;
    }

    if (noise_cmd->parsed()) {
      const GraphParams params = detail::graph_params(n, k, c);
      auto sink = detail::open_output(out_path, out);
      NoiseConfig cfg;
      cfg.k = params.k;
      cfg.c = params.c;
      cfg.n = params.n;
      cfg.runs = static_cast<std::uint32_t>(m);
      cfg.graphs = static_cast<std::uint32_t>(l);
      cfg.workers = workers;
      cfg.master_seed = detail::resolve_seed(seed, err);
      const NoiseReport rep = compare_noise_sources(cfg);
      nlohmann::ordered_json j;
      j["n"] = params.n;
      j["k"] = params.k;
      j["c"] = params.c;
      j["M"] = cfg.runs;
      j["L"] = cfg.graphs;
      j["mean_dynamical"] = rep.dynamical.mean;
      j["se_dynamical"] = rep.dynamical.std_error();
      j["var_dynamical"] = rep.dynamical.variance();
      j["mean_topological"] = rep.topological.mean;
      j["se_topological"] = rep.topological.std_error();
      j["var_topological"] = rep.topological.variance();
      j["variance_ratio"] = rep.variance_ratio();
      j["agree_3sigma"] = rep.means_agree();
      j["seed"] = cfg.master_seed;
      detail::finish_json(sink, j);
      return 0;
    }

    if (blocked_cmd->parsed()) {
      const GraphParams params = detail::graph_params(n, k, c);
      if (centers > params.n) throw UsageError("--centers", "must not exceed n");
      auto sink = detail::open_output(out_path, out);
      const std::uint64_t s = detail::resolve_seed(seed, err);
      Rng rng(s);
      const Graph g = build(params, rng);
      const BlockingProfile profile = classify_blocking(g, rng);
      std::vector<Vertex> all(params.n);
      for (Vertex v = 0; v < params.n; ++v) all[v] = v;
      // Partial Fisher-Yates for distinct centers.
      for (std::uint64_t i = 0; i < centers; ++i) {
        const auto j = i + uniform_below(rng, params.n - i);
        std::swap(all[i], all[j]);
      }
      all.resize(centers);
      const std::uint32_t limit =
          scan_limit ? static_cast<std::uint32_t>(*scan_limit) : default_scan_limit(params.n);
      const ClusterSample sample = sample_blocked_clusters(profile, all, limit);
      auto& os = sink.stream();
      os << "v,j_minus,j_plus\n";
      for (const BlockedCluster& b : sample.clusters) {
        os << b.center << ',' << b.j_minus << ',' << b.j_plus << '\n';
      }
      err << "exceedances: " << sample.exceedances << '\n';
      return 0;
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace mtsw::cli
