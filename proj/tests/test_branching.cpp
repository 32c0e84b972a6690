#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "mtsw/branching.hpp"
#include "mtsw/stats.hpp"

using namespace mtsw;

namespace {

double fraction(const BlockingProfile& profile, Blocking which) {
  std::size_t count = 0;
  for (Blocking b : profile.flags) count += b == which;
  return static_cast<double>(count) / static_cast<double>(profile.flags.size());
}

std::vector<Vertex> distinct_centers(std::uint32_t n, std::uint32_t count, Rng& rng) {
  std::vector<Vertex> all(n);
  for (Vertex v = 0; v < n; ++v) all[v] = v;
  for (std::uint32_t i = 0; i < count; ++i) std::swap(all[i], all[i + uniform_below(rng, n - i)]);
  all.resize(count);
  return all;
}

}  // namespace

TEST(ClassifyBlocking, RingK1HalvesEachSide) {
  const Graph g = build(GraphParams::make(100000, 1, 0.0), 0);
  Rng rng(1);
  const BlockingProfile profile = classify_blocking(g, rng);
  const double sigma = std::sqrt(0.25 / 100000.0);
  EXPECT_NEAR(fraction(profile, Blocking::Right), 0.5, 3.0 * sigma);
  EXPECT_NEAR(fraction(profile, Blocking::Left), 0.5, 3.0 * sigma);
  EXPECT_EQ(fraction(profile, Blocking::None), 0.0);
}

TEST(ClassifyBlocking, RingK2Quarter) {
  const Graph g = build(GraphParams::make(100000, 2, 0.0), 0);
  Rng rng(2);
  const BlockingProfile profile = classify_blocking(g, rng);
  EXPECT_NEAR(fraction(profile, Blocking::Right), 0.25, 3.0 * std::sqrt(0.25 * 0.75 / 100000.0));
}

TEST(ClassifyBlocking, ShortcutsGiveAlpha) {
  const Graph g = build(GraphParams::make(100000, 1, 1.0), 3);
  Rng rng(3);
  const BlockingProfile profile = classify_blocking(g, rng);
  const double a = alpha(1, 1.0);
  EXPECT_NEAR(fraction(profile, Blocking::Right), a, 3.0 * std::sqrt(a * (1.0 - a) / 100000.0));
}

TEST(BlockedCluster, MinimalCluster) {
  for (std::uint32_t k = 1; k <= 3; ++k) {
    BlockingProfile profile{40, k, std::vector<Blocking>(40, Blocking::None)};
    const Vertex v = 20;
    for (std::uint32_t i = 1; i <= k; ++i) {
      profile.flags[v - i] = Blocking::Left;
      profile.flags[v + i] = Blocking::Right;
    }
    const BlockedCluster b = blocked_cluster(profile, v, 30);
    EXPECT_EQ(b.j_minus, k);
    EXPECT_EQ(b.j_plus, k);
    EXPECT_EQ(b.size(), 2u * k + 1);
    EXPECT_EQ(b.first(40), v - k);
  }
}

TEST(BlockedCluster, RunMustBeConsecutive) {
  BlockingProfile profile{20, 2, std::vector<Blocking>(20, Blocking::None)};
  // left side: v-1 lbv, v-2 not, v-3 and v-4 lbv -> J- = 4
  profile.flags[9] = Blocking::Left;
  profile.flags[7] = Blocking::Left;
  profile.flags[6] = Blocking::Left;
  // right side wraps around the ring: 0 and 1 rbv
  profile.flags[0] = Blocking::Right;
  profile.flags[1] = Blocking::Right;
  const BlockedCluster b = blocked_cluster(profile, 10, 15);
  EXPECT_EQ(b.j_minus, 4u);
  EXPECT_EQ(b.j_plus, 11u);
  EXPECT_THROW(blocked_cluster(profile, 10, 5), ScanLimitExceeded);
  EXPECT_THROW(blocked_cluster(profile, 10, 0), DomainError);
}

TEST(BlockedCluster, MeanRightRunOnRing) {
  const std::uint32_t n = 100000;
  const Graph g = build(GraphParams::make(n, 1, 0.0), 5);
  Rng rng(5);
  const BlockingProfile profile = classify_blocking(g, rng);
  const ClusterSample sample = sample_blocked_clusters(profile, distinct_centers(n, 10000, rng), default_scan_limit(n));
  std::vector<double> j_plus;
  for (const auto& b : sample.clusters) j_plus.push_back(b.j_plus);
  const Summary s = summarize(j_plus);
  EXPECT_NEAR(s.mean, 2.0, 3.0 * s.std_error());
  EXPECT_LE(sample.exceedances, 2u);
}

TEST(BlockedCluster, RingReproducesRunLengthLaw) {
  const std::uint32_t n = 100000;
  const Graph g = build(GraphParams::make(n, 2, 0.0), 6);
  Rng rng(6);
  const BlockingProfile profile = classify_blocking(g, rng);
  const ClusterSample sample = sample_blocked_clusters(profile, distinct_centers(n, 5000, rng), n / 2);
  ASSERT_EQ(sample.exceedances, 0u);
  std::vector<std::uint64_t> j_minus;
  for (const auto& b : sample.clusters) j_minus.push_back(b.j_minus);
  std::vector<std::uint64_t> coin;
  for (int i = 0; i < 50000; ++i) coin.push_back(sample_run_length(rng, 0.25, 2));
  EXPECT_LT(ks_statistic(j_minus, coin), ks_critical_value(j_minus.size(), coin.size(), 0.01));
}

TEST(BlockedCluster, SizeMatchesRunLengthFormulaWithShortcuts) {
  const std::uint32_t n = 100000;
  const Graph g = build(GraphParams::make(n, 1, 1.0), 7);
  Rng rng(7);
  const BlockingProfile profile = classify_blocking(g, rng);
  const ClusterSample sample = sample_blocked_clusters(profile, distinct_centers(n, 10000, rng), default_scan_limit(n));
  std::vector<double> sizes;
  for (const auto& b : sample.clusters) sizes.push_back(static_cast<double>(b.size()));
  const Summary s = summarize(sizes);
  EXPECT_NEAR(s.mean, expected_blocked_cluster_size(1, 1.0), 3.0 * s.std_error());
}

TEST(ExpectedRunLength, Examples) {
  EXPECT_DOUBLE_EQ(expected_run_length(0.5, 1), 2.0);
  EXPECT_DOUBLE_EQ(expected_run_length(0.5, 2), 6.0);
  EXPECT_DOUBLE_EQ(expected_run_length(1.0, 4), 4.0);
  EXPECT_THROW(expected_run_length(0.0, 1), DomainError);
  EXPECT_THROW(expected_run_length(1.1, 1), DomainError);
}

TEST(ExpectedRunLength, MatchesCoinFlipOracle) {
  Rng rng(11);
  for (double a : {0.1, 0.25, 0.5, 0.9}) {
    for (std::uint32_t k = 1; k <= 3; ++k) {
      const int draws = a < 0.2 && k == 3 ? 20000 : 100000;
      std::vector<double> flips;
      for (int i = 0; i < draws; ++i) {
        // independent coin-flip oracle, not sample_run_length
        int run = 0;
        int count = 0;
        while (run < static_cast<int>(k)) {
          ++count;
          run = uniform01(rng) < a ? run + 1 : 0;
        }
        flips.push_back(count);
      }
      const Summary s = summarize(flips);
      EXPECT_NEAR(expected_run_length(a, k), s.mean, 3.0 * s.std_error()) << "alpha=" << a << " k=" << k;
    }
  }
}

TEST(ExpectedClusterSize, Examples) {
  EXPECT_DOUBLE_EQ(expected_blocked_cluster_size(1, 0.0), 5.0);
  EXPECT_DOUBLE_EQ(expected_blocked_cluster_size(2, 0.0), 41.0);
}

TEST(SubcriticalMean, Basics) {
  for (std::uint32_t k = 1; k <= 4; ++k) {
    EXPECT_EQ(subcritical_mean(k, 0.0), 0.0);
    EXPECT_EQ(subcritical_mean(k, 0.0, SubcriticalVariant::Lemma), 0.0);
  }
  const double m = subcritical_mean(1, 0.01);
  EXPECT_DOUBLE_EQ(m, expected_blocked_cluster_size(1, 0.01) * 0.01);
  EXPECT_GT(m, 0.0);
  EXPECT_LT(m, 1.0);
  EXPECT_GT(subcritical_mean(1, 0.3, SubcriticalVariant::Lemma), subcritical_mean(1, 0.3));
}

TEST(BranchingMeans, MonotoneInC) {
  for (std::uint32_t k = 1; k <= 3; ++k) {
    double prev_sub = 0.0;
    double prev_super = 0.0;
    for (double c = 0.1; c <= 5.0 + 1e-9; c += 0.1) {
      const double sub = subcritical_mean(k, c);
      const double super = supercritical_mean(k, c);
      EXPECT_GT(sub, prev_sub);
      EXPECT_GE(super, prev_super);
      prev_sub = sub;
      prev_super = super;
    }
  }
}

TEST(SupercriticalMean, MatchesMonteCarlo) {
  EXPECT_EQ(supercritical_mean(1, 0.0), 0.0);
  EXPECT_EQ(supercritical_mean(3, 0.0), 0.0);
  std::mt19937_64 gen(99);
  std::poisson_distribution<int> poisson(10.0);
  constexpr int kDraws = 10'000'000;
  double sum = 0.0;
  double sq = 0.0;
  for (int i = 0; i < kDraws; ++i) {
    const double x = poisson(gen);
    const double d = (x + 3.0) * (x + 3.0);
    const double v = x / d + 2.0 * x * (x - 1.0) / d;
    sum += v;
    sq += v * v;
  }
  const double mean = sum / kDraws;
  const double se = std::sqrt((sq / kDraws - mean * mean) / kDraws);
  EXPECT_NEAR(supercritical_mean(1, 10.0), mean, 3.0 * se);
}

TEST(CriticalC, RootsAndOrdering) {
  const double r1 = subcritical_threshold(1);
  const double r2 = subcritical_threshold(2);
  EXPECT_GT(r1, 0.0);
  EXPECT_NEAR(subcritical_mean(1, r1), 1.0, 1e-6);
  EXPECT_NEAR(subcritical_mean(2, r2), 1.0, 1e-6);
  EXPECT_LT(r2, r1);

  const double s1 = supercritical_threshold(1);
  EXPECT_NEAR(supercritical_mean(1, s1), 1.0, 1e-6);
  EXPECT_GT(s1, r1);

  const double lemma = subcritical_threshold(1, SubcriticalVariant::Lemma);
  EXPECT_NEAR(subcritical_mean(1, lemma, SubcriticalVariant::Lemma), 1.0, 1e-6);
  EXPECT_LT(lemma, r1);
}

TEST(CriticalC, ReportsMissingRoot) {
  EXPECT_THROW(critical_c([](double) { return 0.5; }, 1e-9, 100.0), NoRootFound);
  EXPECT_THROW(critical_c([](double) { return 2.0; }), NoRootFound);
}
