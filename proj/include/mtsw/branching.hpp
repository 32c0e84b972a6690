#pragma once

// Branching-process quantities behind the localisation / propagation bounds:
// blocking vertices, blocked clusters, the run-length law X_k (flips of an
// alpha-coin until k consecutive heads), and the offspring means whose
// crossing of 1 gives theoretical critical intensities.

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "mtsw/error.hpp"
#include "mtsw/graph.hpp"
#include "mtsw/meanfield.hpp"
#include "mtsw/rng.hpp"

namespace mtsw {

enum class Blocking : std::uint8_t { None = 0, Left = 1, Right = 2 };

/// Per-vertex classification from each vertex's first neighbour choice:
/// right-blocking if it first picks v-1, left-blocking if it picks v+1.
struct BlockingProfile {
  std::uint32_t n = 0;
  std::uint32_t k = 0;
  std::vector<Blocking> flags;

  [[nodiscard]] bool is_rbv(Vertex v) const { return flags.at(v) == Blocking::Right; }
  [[nodiscard]] bool is_lbv(Vertex v) const { return flags.at(v) == Blocking::Left; }
};

inline BlockingProfile classify_blocking(const Graph& g, Rng& rng) {
  const std::uint32_t n = g.n();
  BlockingProfile profile{n, g.k(), std::vector<Blocking>(n, Blocking::None)};
  for (Vertex v = 0; v < n; ++v) {
    const Vertex u = g.neighbor_at(v, static_cast<std::uint32_t>(uniform_below(rng, g.degree(v))));
    if (u == (v + n - 1) % n) {
      profile.flags[v] = Blocking::Right;
    } else if (u == (v + 1) % n) {
      profile.flags[v] = Blocking::Left;
    }
  }
  return profile;
}

struct BlockedCluster {
  Vertex center = 0;
  std::uint32_t j_minus = 0;
  std::uint32_t j_plus = 0;

  [[nodiscard]] std::uint64_t size() const noexcept { return 1ULL + j_minus + j_plus; }
  /// First vertex of the interval center - j_minus (mod n).
  [[nodiscard]] Vertex first(std::uint32_t n) const noexcept {
    return static_cast<Vertex>((static_cast<std::uint64_t>(center) + n - j_minus % n) % n);
  }
};

/// ceil(n^0.45), the default scan bound for blocked clusters.
inline std::uint32_t default_scan_limit(std::uint32_t n) {
  return static_cast<std::uint32_t>(std::ceil(std::pow(static_cast<double>(n), 0.45)));
}

/// J- is the first distance i >= k at which v-i, ..., v-i+k-1 are all
/// left-blocking; J+ mirrors it on the right with right-blocking vertices.
/// Scanning starts next to v, so J+- count the flips until k consecutive
/// successes and are always >= k.
inline BlockedCluster blocked_cluster(const BlockingProfile& profile, Vertex v,
                                      std::uint32_t scan_limit) {
  const std::uint32_t n = profile.n;
  if (v >= n) throw std::out_of_range("center out of range");
  if (scan_limit == 0) throw DomainError("scan_limit must be > 0");
  const std::uint32_t limit = std::min(scan_limit, n - 1);

  auto scan = [&](int direction, Blocking wanted) -> std::uint32_t {
    std::uint32_t run = 0;
    for (std::uint32_t i = 1; i <= limit; ++i) {
      const Vertex u = direction > 0 ? static_cast<Vertex>((static_cast<std::uint64_t>(v) + i) % n)
                                     : static_cast<Vertex>((static_cast<std::uint64_t>(v) + n - i) % n);
      run = profile.flags[u] == wanted ? run + 1 : 0;
      if (run == profile.k) return i;
    }
    throw ScanLimitExceeded("no run of " + std::to_string(profile.k) +
                            " blocking vertices within " + std::to_string(limit) +
                            " of vertex " + std::to_string(v));
  };

  BlockedCluster cluster;
  cluster.center = v;
  cluster.j_minus = scan(-1, Blocking::Left);
  cluster.j_plus = scan(+1, Blocking::Right);
  return cluster;
}

struct ClusterSample {
  std::vector<BlockedCluster> clusters;
  std::size_t exceedances = 0;  // centers whose scan hit the limit
};

/// Blocked clusters around the given centers. Scan-limit exceedances are
/// counted rather than thrown.
inline ClusterSample sample_blocked_clusters(const BlockingProfile& profile,
                                             const std::vector<Vertex>& centers,
                                             std::uint32_t scan_limit) {
  ClusterSample out;
  out.clusters.reserve(centers.size());
  for (Vertex v : centers) {
    try {
      out.clusters.push_back(blocked_cluster(profile, v, scan_limit));
    } catch (const ScanLimitExceeded&) {
      ++out.exceedances;
    }
  }
  return out;
}

/// E[X_k] = (alpha^-k - 1) / (1 - alpha); k at alpha == 1.
inline double expected_run_length(double alpha_value, std::uint32_t k) {
  if (!(alpha_value > 0.0 && alpha_value <= 1.0)) {
    throw DomainError("alpha must lie in (0, 1]");
  }
  if (k < 1) throw DomainError("k must be >= 1");
  if (alpha_value == 1.0) return static_cast<double>(k);
  // (1 + a + ... + a^(k-1)) / a^k, stable for a near 1.
  double geometric = 0.0;
  double power = 1.0;
  for (std::uint32_t i = 0; i < k; ++i) {
    geometric += power;
    power *= alpha_value;
  }
  return geometric / power;
}

/// Number of flips of an alpha-coin until k consecutive heads.
inline std::uint64_t sample_run_length(Rng& rng, double alpha_value, std::uint32_t k) {
  std::uint64_t flips = 0;
  std::uint32_t run = 0;
  while (run < k) {
    ++flips;
    run = bernoulli(rng, alpha_value) ? run + 1 : 0;
  }
  return flips;
}

/// E|B_v| = 1 + 2 E[X_k] with alpha = alpha(k, c).
inline double expected_blocked_cluster_size(std::uint32_t k, double c) {
  return 1.0 + 2.0 * expected_run_length(alpha(k, c), k);
}

enum class SubcriticalVariant {
  Cluster,  // E|B_0| c, using alpha^-k - 1
  Lemma,    // the alpha^-k + 1 form
};

inline const char* to_string(SubcriticalVariant v) {
  return v == SubcriticalVariant::Cluster ? "cluster" : "lemma";
}

/// Mean offspring of the dominating branching process: one blocked cluster
/// of local spread, each member reaching Poisson(c) shortcut partners.
inline double subcritical_mean(std::uint32_t k, double c,
                               SubcriticalVariant variant = SubcriticalVariant::Cluster) {
  if (!(c >= 0.0) || !std::isfinite(c)) throw DomainError("c must be finite and >= 0");
  if (c == 0.0) return 0.0;
  const double a = alpha(k, c);
  if (variant == SubcriticalVariant::Cluster) return expected_blocked_cluster_size(k, c) * c;
  const double ak = std::pow(a, -static_cast<double>(k));
  return (1.0 + 2.0 * (ak + 1.0) / (1.0 - a)) * c;
}

/// Mean offspring of the dominated process:
/// E[X/(X+2k+1)^2] + 2 E[X(X-1)/(X+2k+1)^2], X ~ Poisson(c).
inline double supercritical_mean(std::uint32_t k, double c) {
  if (k < 1) throw DomainError("k must be >= 1");
  if (!(c >= 0.0) || !std::isfinite(c)) throw DomainError("c must be finite and >= 0");
  if (c == 0.0) return 0.0;
  const double shift = 2.0 * k + 1.0;
  return poisson_expectation(
      c,
      [shift](double x) {
        const double d = (x + shift) * (x + shift);
        return x / d + 2.0 * x * (x - 1.0) / d;
      },
      3.0);
}

/// Bisection root of mean_fn(c) = 1. The bracket starts at [0, 1] and the
/// upper end doubles until mean_fn exceeds 1 or passes c_ceiling.
inline double critical_c(const std::function<double(double)>& mean_fn, double tol = 1e-12,
                         double c_ceiling = 1e6) {
  if (!(tol > 0.0)) throw DomainError("tol must be > 0");
  double lo = 0.0;
  double hi = 1.0;
  if (mean_fn(lo) >= 1.0) throw NoRootFound("mean is already >= 1 at c = 0");
  while (mean_fn(hi) <= 1.0) {
    lo = hi;
    hi *= 2.0;
    if (hi > c_ceiling) {
      throw NoRootFound("mean stays <= 1 up to c = " + std::to_string(c_ceiling));
    }
  }
  while (hi - lo > tol * std::max(1.0, hi)) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (mean_fn(mid) > 1.0 ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

inline double subcritical_threshold(std::uint32_t k,
                                    SubcriticalVariant variant = SubcriticalVariant::Cluster,
                                    double tol = 1e-12) {
  return critical_c([=](double c) { return subcritical_mean(k, c, variant); }, tol);
}

inline double supercritical_threshold(std::uint32_t k, double tol = 1e-12) {
  return critical_c([=](double c) { return supercritical_mean(k, c); }, tol);
}

}  // namespace mtsw
