#pragma once

// Maki-Thompson rumour dynamics on a Newman-Watts graph.
//
// Each step picks a spreader uniformly at random and a target uniformly from
// its full neighbourhood. An ignorant target becomes a spreader; otherwise the
// initiating spreader becomes a stifler. The run stops at the first step with
// no spreaders.

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mtsw/error.hpp"
#include "mtsw/graph.hpp"
#include "mtsw/rng.hpp"

namespace mtsw {

enum class NodeState : std::uint8_t { Ignorant = 0, Spreader = 1, Stifler = 2 };

struct Counts {
  std::uint32_t ignorant = 0;
  std::uint32_t spreaders = 0;
  std::uint32_t removed = 0;

  friend bool operator==(const Counts&, const Counts&) = default;
};

struct RunOutcome {
  std::uint32_t final_removed = 0;
  std::uint32_t final_ignorant = 0;
  std::uint64_t absorption_time = 0;
  Vertex seed_vertex = 0;
  // (I, S, R) at t = 0, 1, ..., absorption_time when recorded.
  std::vector<Counts> trajectory;

  friend bool operator==(const RunOutcome&, const RunOutcome&) = default;
};

/// tau = 2R - 1.
constexpr bool verify_absorption_identity(const RunOutcome& outcome) noexcept {
  return outcome.final_removed >= 1 &&
         outcome.absorption_time == 2ULL * outcome.final_removed - 1;
}

/// Reusable state buffers for repeated runs on graphs of the same size.
/// A Runner is not thread-safe; give each worker its own.
class Runner {
 public:
  /// Runs the dynamics on a fixed graph from the given seed vertex.
  RunOutcome run(const Graph& g, Vertex seed_vertex, Rng& rng, bool record_trajectory = false) {
    const std::uint32_t n = g.n();
    if (seed_vertex >= n) {
      throw std::out_of_range("seed vertex " + std::to_string(seed_vertex) + " out of range");
    }
    reset(n, seed_vertex);
    RunOutcome out;
    out.seed_vertex = seed_vertex;
    if (record_trajectory) out.trajectory.push_back(counts_);

    std::uint64_t t = 0;
    while (!spreaders_.empty()) {
      const auto slot = static_cast<std::uint32_t>(uniform_below(rng, spreaders_.size()));
      const Vertex from = spreaders_[slot];
      const Vertex to = g.neighbor_at(from, static_cast<std::uint32_t>(uniform_below(rng, g.degree(from))));
      transmit(from, to);
      ++t;
      if (record_trajectory) out.trajectory.push_back(counts_);
    }
    out.absorption_time = t;
    out.final_removed = counts_.removed;
    out.final_ignorant = counts_.ignorant;
    return out;
  }

  /// Grows the graph together with the dynamics: a vertex's shortcut
  /// neighbourhood is sampled the first time it is selected to transmit.
  /// Pairs never examined are completed after absorption, so the returned
  /// graph is a G(n, k, p) sample and the run has the same law as run() on it.
  std::pair<RunOutcome, Graph> run_coupled(const GraphParams& params, Vertex seed_vertex, Rng& rng,
                                           bool record_trajectory = false) {
    const std::uint32_t n = params.n;
    const std::uint32_t k = params.k;
    if (seed_vertex >= n) {
      throw std::out_of_range("seed vertex " + std::to_string(seed_vertex) + " out of range");
    }
    reset(n, seed_vertex);
    std::vector<std::vector<Vertex>> adjacency(n);
    std::vector<std::uint8_t> revealed(n, 0);

    auto reveal = [&](Vertex v) {
      // Pairs with an already-revealed partner were decided when that partner
      // was revealed; only the undecided ones are drawn here.
      detail::for_each_bernoulli_partner(v, n, k, params.p, rng, [&](Vertex u) {
        if (!revealed[u]) {
          adjacency[v].push_back(u);
          adjacency[u].push_back(v);
        }
      });
      revealed[v] = 1;
    };

    RunOutcome out;
    out.seed_vertex = seed_vertex;
    if (record_trajectory) out.trajectory.push_back(counts_);

    std::uint64_t t = 0;
    while (!spreaders_.empty()) {
      const auto slot = static_cast<std::uint32_t>(uniform_below(rng, spreaders_.size()));
      const Vertex from = spreaders_[slot];
      if (!revealed[from]) reveal(from);
      const auto& sc = adjacency[from];
      const std::uint64_t degree = 2ULL * k + sc.size();
      const auto idx = static_cast<std::uint32_t>(uniform_below(rng, degree));
      Vertex to;
      if (idx < 2 * k) {
        to = idx < k ? (from + idx + 1) % n : (from + n - (idx - k + 1)) % n;
      } else {
        to = sc[idx - 2 * k];
      }
      transmit(from, to);
      ++t;
      if (record_trajectory) out.trajectory.push_back(counts_);
    }
    out.absorption_time = t;
    out.final_removed = counts_.removed;
    out.final_ignorant = counts_.ignorant;

    std::vector<Edge> pairs;
    for (Vertex v = 0; v < n; ++v) {
      for (Vertex u : adjacency[v]) {
        if (v < u) pairs.emplace_back(v, u);
      }
    }
    detail::for_each_bernoulli_pair(n, k, params.p, rng, [&](Vertex i, Vertex j) {
      if (!revealed[i] && !revealed[j]) pairs.emplace_back(i, j);
    });
    return {std::move(out), Graph::from_shortcuts(params, std::move(pairs))};
  }

 private:
  void reset(std::uint32_t n, Vertex seed_vertex) {
    state_.assign(n, NodeState::Ignorant);
    position_.resize(n);
    spreaders_.clear();
    counts_ = Counts{n, 0, 0};
    make_spreader(seed_vertex);
  }

  void make_spreader(Vertex v) {
    state_[v] = NodeState::Spreader;
    position_[v] = static_cast<std::uint32_t>(spreaders_.size());
    spreaders_.push_back(v);
    --counts_.ignorant;
    ++counts_.spreaders;
  }

  void transmit(Vertex from, Vertex to) {
    if (state_[to] == NodeState::Ignorant) {
      make_spreader(to);
      return;
    }
    // from stops spreading: swap-remove from the dense spreader index.
    state_[from] = NodeState::Stifler;
    const std::uint32_t pos = position_[from];
    const Vertex last = spreaders_.back();
    spreaders_[pos] = last;
    position_[last] = pos;
    spreaders_.pop_back();
    --counts_.spreaders;
    ++counts_.removed;
  }

  std::vector<NodeState> state_;
  std::vector<std::uint32_t> position_;
  std::vector<Vertex> spreaders_;
  Counts counts_{};
};

inline RunOutcome run(const Graph& g, Vertex seed_vertex, Rng& rng, bool record_trajectory = false) {
  Runner runner;
  return runner.run(g, seed_vertex, rng, record_trajectory);
}

/// Seed vertex drawn uniformly from [n] before the dynamics start.
inline RunOutcome run_random_seed(const Graph& g, Rng& rng, bool record_trajectory = false) {
  const auto seed_vertex = static_cast<Vertex>(uniform_below(rng, g.n()));
  return run(g, seed_vertex, rng, record_trajectory);
}

inline std::pair<RunOutcome, Graph> run_coupled(const GraphParams& params, Vertex seed_vertex,
                                                Rng& rng, bool record_trajectory = false) {
  Runner runner;
  return runner.run_coupled(params, seed_vertex, rng, record_trajectory);
}

}  // namespace mtsw
