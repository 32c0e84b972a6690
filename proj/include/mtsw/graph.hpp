#pragma once

// Newman-Watts small-world graphs G(n, k, p): a ring where every vertex is
// joined to its k nearest neighbours on each side, plus independent
// Bernoulli(p) shortcuts between every pair that is not already local.
//
// Vertices are 0-indexed. Local adjacency is never stored; it is computed
// from the ring rule. Shortcuts are kept in a CSR layout with each vertex's
// list sorted ascending.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mtsw/error.hpp"
#include "mtsw/rng.hpp"

namespace mtsw {

using Vertex = std::uint32_t;
using Edge = std::pair<Vertex, Vertex>;

/// p = c / (n - 2k - 1), the per-pair shortcut probability that keeps the
/// expected shortcut degree equal to c.
inline double shortcut_probability(std::uint64_t n, std::uint64_t k, double c) {
  if (k < 1) throw InvalidParams("k must be >= 1");
  if (!(c >= 0.0) || !std::isfinite(c)) throw InvalidParams("c must be a finite value >= 0");
  if (n <= 2 * k + 1) {
    throw InvalidParams("n must exceed 2k+1 (n=" + std::to_string(n) +
                        ", k=" + std::to_string(k) + ")");
  }
  const double p = c / static_cast<double>(n - 2 * k - 1);
  if (p >= 1.0) {
    throw InvalidParams("shortcut probability c/(n-2k-1) must be < 1 (got " +
                        std::to_string(p) + ")");
  }
  return p;
}

struct GraphParams {
  std::uint32_t n = 0;
  std::uint32_t k = 0;
  double c = 0.0;
  double p = 0.0;

  /// Validates and derives p. n == 2k+1 (the complete graph) is accepted only
  /// with c == 0, since it has no shortcut slots.
  static GraphParams make(std::uint64_t n, std::uint64_t k, double c) {
    if (k < 1) throw InvalidParams("k must be >= 1");
    if (!(c >= 0.0) || !std::isfinite(c)) throw InvalidParams("c must be a finite value >= 0");
    if (n > (1ULL << 31)) throw InvalidParams("n too large");
    if (n < 2 * k + 1) {
      throw InvalidParams("n must be at least 2k+1 (n=" + std::to_string(n) +
                          ", k=" + std::to_string(k) + ")");
    }
    GraphParams params;
    params.n = static_cast<std::uint32_t>(n);
    params.k = static_cast<std::uint32_t>(k);
    params.c = c;
    if (n == 2 * k + 1) {
      if (c != 0.0) {
        throw InvalidParams("n == 2k+1 leaves no shortcut slots; c must be 0");
      }
      params.p = 0.0;
    } else {
      params.p = shortcut_probability(n, k, c);
    }
    return params;
  }

  /// Non-local partners per vertex, n - 2k - 1.
  [[nodiscard]] std::uint32_t shortcut_slots() const noexcept { return n - 2 * k - 1; }

  friend bool operator==(const GraphParams&, const GraphParams&) = default;
};

/// Ring distance min(|i-j|, n-|i-j|).
constexpr std::uint32_t ring_distance(Vertex i, Vertex j, std::uint32_t n) noexcept {
  const std::uint32_t d = i > j ? i - j : j - i;
  return std::min(d, n - d);
}

class Graph {
 public:
  Graph() = default;

  /// Assembles a graph from an explicit shortcut list. Every pair must be
  /// non-local, in range, and distinct. Pair orientation is normalised.
  static Graph from_shortcuts(const GraphParams& params, std::vector<Edge> pairs,
                              std::optional<std::uint64_t> seed = std::nullopt) {
    const std::uint32_t n = params.n;
    for (auto& [a, b] : pairs) {
      if (a >= n || b >= n) throw InvalidParams("shortcut endpoint out of range");
      if (a > b) std::swap(a, b);
      if (ring_distance(a, b, n) <= params.k) {
        throw InvalidParams("shortcut {" + std::to_string(a) + "," + std::to_string(b) +
                            "} duplicates a local edge or is a self-loop");
      }
    }
    std::sort(pairs.begin(), pairs.end());
    if (std::adjacent_find(pairs.begin(), pairs.end()) != pairs.end()) {
      throw InvalidParams("duplicate shortcut");
    }

    Graph g;
    g.params_ = params;
    g.seed_ = seed;
    g.shortcut_count_ = pairs.size();
    g.offsets_.assign(static_cast<std::size_t>(n) + 1, 0);
    for (const auto& [a, b] : pairs) {
      ++g.offsets_[a + 1];
      ++g.offsets_[b + 1];
    }
    for (std::uint32_t v = 0; v < n; ++v) g.offsets_[v + 1] += g.offsets_[v];
    g.targets_.resize(g.offsets_[n]);
    std::vector<std::uint64_t> cursor(g.offsets_.begin(), g.offsets_.end() - 1);
    for (const auto& [a, b] : pairs) {
      g.targets_[cursor[a]++] = b;
      g.targets_[cursor[b]++] = a;
    }
    for (std::uint32_t v = 0; v < n; ++v) {
      std::sort(g.targets_.begin() + static_cast<std::ptrdiff_t>(g.offsets_[v]),
                g.targets_.begin() + static_cast<std::ptrdiff_t>(g.offsets_[v + 1]));
    }
    return g;
  }

  [[nodiscard]] const GraphParams& params() const noexcept { return params_; }
  [[nodiscard]] std::uint32_t n() const noexcept { return params_.n; }
  [[nodiscard]] std::uint32_t k() const noexcept { return params_.k; }
  [[nodiscard]] std::optional<std::uint64_t> seed() const noexcept { return seed_; }
  [[nodiscard]] std::size_t shortcut_count() const noexcept { return shortcut_count_; }
  [[nodiscard]] std::size_t local_edge_count() const noexcept {
    return static_cast<std::size_t>(params_.n) * params_.k;
  }

  [[nodiscard]] std::span<const Vertex> shortcuts(Vertex v) const {
    check_vertex(v);
    return {targets_.data() + offsets_[v], targets_.data() + offsets_[v + 1]};
  }

  [[nodiscard]] std::uint32_t shortcut_degree(Vertex v) const noexcept {
    return static_cast<std::uint32_t>(offsets_[v + 1] - offsets_[v]);
  }

  [[nodiscard]] std::uint32_t degree(Vertex v) const noexcept {
    return 2 * params_.k + shortcut_degree(v);
  }

  /// The idx-th neighbour of v, idx < degree(v). Indices [0, k) are
  /// v+1..v+k, [k, 2k) are v-1..v-k, the rest are shortcuts in sorted order.
  [[nodiscard]] Vertex neighbor_at(Vertex v, std::uint32_t idx) const noexcept {
    const std::uint32_t n = params_.n;
    const std::uint32_t k = params_.k;
    if (idx < k) {
      const std::uint32_t u = v + idx + 1;
      return u >= n ? u - n : u;
    }
    if (idx < 2 * k) {
      const std::uint32_t back = idx - k + 1;
      return v >= back ? v - back : v + n - back;
    }
    return targets_[offsets_[v] + (idx - 2 * k)];
  }

  /// N(v) = local neighbours followed by shortcut neighbours.
  [[nodiscard]] std::vector<Vertex> neighbors(Vertex v) const {
    check_vertex(v);
    std::vector<Vertex> out(degree(v));
    for (std::uint32_t i = 0; i < out.size(); ++i) out[i] = neighbor_at(v, i);
    return out;
  }

  [[nodiscard]] bool is_local_pair(Vertex u, Vertex v) const noexcept {
    const std::uint32_t d = ring_distance(u, v, params_.n);
    return d > 0 && d <= params_.k;
  }

  [[nodiscard]] bool has_shortcut(Vertex u, Vertex v) const {
    const auto list = shortcuts(u);
    return std::binary_search(list.begin(), list.end(), v);
  }

  [[nodiscard]] bool has_edge(Vertex u, Vertex v) const {
    return is_local_pair(u, v) || has_shortcut(u, v);
  }

  /// Shortcut pairs {i, j} with i < j in lexicographic order.
  [[nodiscard]] std::vector<Edge> shortcut_pairs() const {
    std::vector<Edge> out;
    out.reserve(shortcut_count_);
    for (Vertex v = 0; v < params_.n; ++v) {
      for (Vertex u : shortcuts(v)) {
        if (v < u) out.emplace_back(v, u);
      }
    }
    return out;
  }

 private:
  void check_vertex(Vertex v) const {
    if (v >= params_.n) {
      throw std::out_of_range("vertex " + std::to_string(v) + " out of range [0, " +
                              std::to_string(params_.n) + ")");
    }
  }

  GraphParams params_{};
  std::optional<std::uint64_t> seed_;
  std::size_t shortcut_count_ = 0;
  std::vector<std::uint64_t> offsets_{0};
  std::vector<Vertex> targets_;
};

namespace detail {

// Walks the eligible pairs i < j (ring distance > k) in lexicographic order and
// calls fn(i, j) for each pair whose Bernoulli(p) trial succeeds. Trials are
// realised by geometric jumps, so the cost is O(n + hits) rather than O(n^2).
template <typename Fn>
void for_each_bernoulli_pair(std::uint32_t n, std::uint32_t k, double p, Rng& rng, Fn&& fn) {
  if (p <= 0.0 || n <= 2 * k + 1) return;
  std::uint64_t skip = geometric_skip(rng, p);
  for (std::uint32_t i = 0; i < n; ++i) {
    // Row i: j in [i+k+1, min(n-1, i+n-k-1)].
    const std::uint64_t first = static_cast<std::uint64_t>(i) + k + 1;
    const std::uint64_t last = std::min<std::uint64_t>(n - 1, static_cast<std::uint64_t>(i) + n - k - 1);
    if (first > last) continue;
    std::uint64_t len = last - first + 1;
    std::uint64_t pos = 0;
    while (skip < len - pos) {
      pos += skip;
      fn(i, static_cast<Vertex>(first + pos));
      ++pos;
      skip = geometric_skip(rng, p);
      if (pos >= len) break;
    }
    if (pos < len) skip -= len - pos;
  }
}

// Bernoulli(p) trials over the n-2k-1 non-local partners of v, visited in
// ring order v+k+1, ..., v+n-k-1.
template <typename Fn>
void for_each_bernoulli_partner(Vertex v, std::uint32_t n, std::uint32_t k, double p, Rng& rng,
                                Fn&& fn) {
  if (p <= 0.0 || n <= 2 * k + 1) return;
  const std::uint64_t len = n - 2 * k - 1;
  std::uint64_t pos = geometric_skip(rng, p);
  while (pos < len) {
    std::uint64_t u = static_cast<std::uint64_t>(v) + k + 1 + pos;
    if (u >= n) u -= n;
    fn(static_cast<Vertex>(u));
    const std::uint64_t skip = geometric_skip(rng, p);
    if (skip >= len) break;
    pos += skip + 1;
  }
}

}  // namespace detail

/// Samples G(n, k, p). Each eligible pair carries a shortcut independently
/// with probability p.
inline Graph build(const GraphParams& params, Rng& rng,
                   std::optional<std::uint64_t> seed_tag = std::nullopt) {
  std::vector<Edge> pairs;
  pairs.reserve(static_cast<std::size_t>(params.c * params.n / 2.0 * 1.1) + 16);
  detail::for_each_bernoulli_pair(params.n, params.k, params.p, rng,
                                  [&](Vertex i, Vertex j) { pairs.emplace_back(i, j); });
  return Graph::from_shortcuts(params, std::move(pairs), seed_tag);
}

/// Seeded convenience overload; the seed is recorded on the graph.
inline Graph build(const GraphParams& params, std::uint64_t seed) {
  Rng rng(seed);
  return build(params, rng, seed);
}

struct DegreeStats {
  double mean = 0.0;
  double variance = 0.0;
  double shortcut_mean = 0.0;
  double shortcut_variance = 0.0;
  // shortcut_histogram[d] = number of vertices with d shortcuts
  std::vector<std::size_t> shortcut_histogram;
};

/// Population mean/variance over all vertices.
inline DegreeStats degree_stats(const Graph& g) {
  DegreeStats stats;
  const std::uint32_t n = g.n();
  double sum = 0.0;
  double sum_sq = 0.0;
  for (Vertex v = 0; v < n; ++v) {
    const std::uint32_t d = g.shortcut_degree(v);
    if (d >= stats.shortcut_histogram.size()) stats.shortcut_histogram.resize(d + 1, 0);
    ++stats.shortcut_histogram[d];
    sum += d;
    sum_sq += static_cast<double>(d) * d;
  }
  stats.shortcut_mean = sum / n;
  stats.shortcut_variance = std::max(0.0, sum_sq / n - stats.shortcut_mean * stats.shortcut_mean);
  stats.mean = stats.shortcut_mean + 2.0 * g.k();
  stats.variance = stats.shortcut_variance;
  return stats;
}

/// log P(Binomial(trials, p) = x)
inline double binomial_log_pmf(std::uint64_t trials, double p, std::uint64_t x) {
  if (x > trials) return -INFINITY;
  if (p <= 0.0) return x == 0 ? 0.0 : -INFINITY;
  const double t = static_cast<double>(trials);
  const double xd = static_cast<double>(x);
  return std::lgamma(t + 1) - std::lgamma(xd + 1) - std::lgamma(t - xd + 1) + xd * std::log(p) +
         (t - xd) * std::log1p(-p);
}

struct ChiSquare {
  double statistic = 0.0;
  std::size_t dof = 0;
};

/// Pearson chi-square of the shortcut-degree histogram against
/// Binomial(n-2k-1, p). Adjacent degrees are pooled until each cell expects
/// at least 5 vertices; the upper tail is pooled into the last cell.
inline ChiSquare shortcut_degree_chi_square(const Graph& g) {
  const DegreeStats stats = degree_stats(g);
  const std::uint64_t trials = g.params().shortcut_slots();
  const double p = g.params().p;
  const double n = g.n();

  std::vector<double> observed;
  std::vector<double> expected;
  double obs_acc = 0.0;
  double exp_acc = 0.0;
  double exp_total = 0.0;
  for (std::uint64_t d = 0; d <= trials; ++d) {
    const double e = n * std::exp(binomial_log_pmf(trials, p, d));
    obs_acc += d < stats.shortcut_histogram.size() ? stats.shortcut_histogram[d] : 0.0;
    exp_acc += e;
    exp_total += e;
    if (exp_acc >= 5.0 && n - exp_total >= 5.0) {
      observed.push_back(obs_acc);
      expected.push_back(exp_acc);
      obs_acc = exp_acc = 0.0;
    }
    if (n - exp_total < 5.0) break;
  }
  // Everything not yet assigned goes to the final tail cell.
  double assigned_obs = 0.0;
  for (double o : observed) assigned_obs += o;
  double assigned_exp = 0.0;
  for (double e : expected) assigned_exp += e;
  observed.push_back(n - assigned_obs);
  expected.push_back(n - assigned_exp);

  ChiSquare out;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    if (expected[i] <= 0.0) continue;
    const double diff = observed[i] - expected[i];
    out.statistic += diff * diff / expected[i];
  }
  out.dof = observed.size() > 1 ? observed.size() - 1 : 0;
  return out;
}

}  // namespace mtsw
