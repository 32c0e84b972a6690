#pragma once

// Exact law of the final number of stiflers on a small explicit graph, by
// exhaustive recursion over the Markov chain of configurations. Shares no
// code with the simulator: the graph is a plain adjacency list and the
// dynamics are re-derived here from the transition rule.

#include <algorithm>
#include <cstdint>
#include <map>
#include <unordered_map>
#include <utility>
#include <vector>

namespace oracle {

using Adjacency = std::vector<std::vector<int>>;
using Law = std::map<int, double>;  // final R -> probability

class MarkovEnumerator {
 public:
  explicit MarkovEnumerator(Adjacency adj) : adj_(std::move(adj)) {}

  /// Law of R at absorption when the rumour starts at `seed`.
  Law final_removed_law(int seed) {
    std::vector<int> state(adj_.size(), 0);
    state[static_cast<std::size_t>(seed)] = 1;
    return solve(state);
  }

  /// Seed vertex drawn uniformly.
  Law final_removed_law_uniform_seed() {
    Law total;
    const double w = 1.0 / static_cast<double>(adj_.size());
    for (int v = 0; v < static_cast<int>(adj_.size()); ++v) {
      for (const auto& [r, p] : final_removed_law(v)) total[r] += w * p;
    }
    return total;
  }

 private:
  static std::uint64_t encode(const std::vector<int>& s) {
    std::uint64_t code = 0;
    for (int x : s) code = code * 3 + static_cast<std::uint64_t>(x);
    return code;
  }

  Law solve(std::vector<int>& state) {
    const std::uint64_t code = encode(state);
    if (auto it = memo_.find(code); it != memo_.end()) return it->second;

    std::vector<int> spreaders;
    int removed = 0;
    for (int v = 0; v < static_cast<int>(state.size()); ++v) {
      if (state[static_cast<std::size_t>(v)] == 1) spreaders.push_back(v);
      if (state[static_cast<std::size_t>(v)] == 2) ++removed;
    }
    Law law;
    if (spreaders.empty()) {
      law[removed] = 1.0;
      memo_[code] = law;
      return law;
    }
    const double pick = 1.0 / static_cast<double>(spreaders.size());
    for (int i : spreaders) {
      const auto& nbrs = adj_[static_cast<std::size_t>(i)];
      const double aim = pick / static_cast<double>(nbrs.size());
      for (int j : nbrs) {
        auto& target = state[static_cast<std::size_t>(j)];
        auto& source = state[static_cast<std::size_t>(i)];
        Law sub;
        if (target == 0) {
          target = 1;
          sub = solve(state);
          target = 0;
        } else {
          source = 2;
          sub = solve(state);
          source = 1;
        }
        for (const auto& [r, p] : sub) law[r] += aim * p;
      }
    }
    memo_[code] = law;
    return law;
  }

  Adjacency adj_;
  std::unordered_map<std::uint64_t, Law> memo_;
};

/// Ring of n vertices with half-degree k plus the given extra edges.
inline Adjacency ring_with_shortcuts(int n, int k, const std::vector<std::pair<int, int>>& extra) {
  Adjacency adj(static_cast<std::size_t>(n));
  for (int v = 0; v < n; ++v) {
    for (int d = 1; d <= k; ++d) {
      adj[static_cast<std::size_t>(v)].push_back((v + d) % n);
      adj[static_cast<std::size_t>(v)].push_back((v - d + n) % n);
    }
  }
  for (auto [a, b] : extra) {
    adj[static_cast<std::size_t>(a)].push_back(b);
    adj[static_cast<std::size_t>(b)].push_back(a);
  }
  return adj;
}

/// Law of R averaged over the random-graph law: every non-local pair of the
/// ring carries an edge independently with probability p. Enumerates all
/// 2^(pairs) graphs, so only for tiny n.
inline Law averaged_over_graphs(int n, int k, double p, int seed) {
  std::vector<std::pair<int, int>> slots;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const int d = std::min(j - i, n - (j - i));
      if (d > k) slots.emplace_back(i, j);
    }
  }
  Law total;
  const std::uint64_t count = 1ULL << slots.size();
  for (std::uint64_t mask = 0; mask < count; ++mask) {
    std::vector<std::pair<int, int>> chosen;
    double weight = 1.0;
    for (std::size_t b = 0; b < slots.size(); ++b) {
      if (mask >> b & 1ULL) {
        chosen.push_back(slots[b]);
        weight *= p;
      } else {
        weight *= 1.0 - p;
      }
    }
    MarkovEnumerator e(ring_with_shortcuts(n, k, chosen));
    for (const auto& [r, q] : e.final_removed_law(seed)) total[r] += weight * q;
  }
  return total;
}

inline double mean_of(const Law& law) {
  double m = 0.0;
  for (const auto& [r, p] : law) m += r * p;
  return m;
}

}  // namespace oracle
