#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

#include "mtsw/experiments.hpp"
#include "mtsw/io.hpp"

using namespace mtsw;

namespace {

SweepRow row(std::uint32_t k, double c, std::uint32_t n, double mean_r, double std_r = 1.0,
             std::uint64_t samples = 10000) {
  SweepRow r;
  r.k = k;
  r.c = c;
  r.n = n;
  r.mean_R = mean_r;
  r.std_R = std_r;
  r.mean_R_over_n = mean_r / n;
  r.std_R_over_n = std_r / n;
  r.samples = samples;
  return r;
}

}  // namespace

TEST(MonteCarlo, TriangleMean) {
  ExperimentConfig cfg;
  cfg.k = 1;
  cfg.c_grid = {0.0};
  cfg.sizes = {3};
  cfg.runs_per_graph = 100000;
  cfg.graphs = 1;
  cfg.master_seed = 3;
  const SweepTable t = monte_carlo(cfg);
  ASSERT_EQ(t.rows.size(), 1u);
  EXPECT_NEAR(t.rows[0].mean_R, 2.75, 3.0 * t.rows[0].se_R());
  EXPECT_EQ(t.identity_failures, 0u);
  EXPECT_EQ(t.identity_checks, 100000u);
}

TEST(MonteCarlo, RowInvariants) {
  ExperimentConfig cfg;
  cfg.k = 2;
  cfg.c_grid = {0.0, 0.7, 3.0};
  cfg.sizes = {60, 250};
  cfg.runs_per_graph = 40;
  cfg.graphs = 5;
  cfg.master_seed = 9;
  const SweepTable t = monte_carlo(cfg);
  ASSERT_EQ(t.rows.size(), 6u);
  for (const SweepRow& r : t.rows) {
    EXPECT_EQ(r.samples, 200u);
    EXPECT_GE(r.mean_R, 2.0);
    EXPECT_LE(r.mean_R, r.n);
    EXPECT_GT(r.mean_R_over_n, 0.0);
    EXPECT_LE(r.mean_R_over_n, 1.0);
    EXPECT_EQ(r.seed, 9u);
  }
  EXPECT_EQ(t.rows[0].c, 0.0);
  EXPECT_EQ(t.rows[1].n, 250u);
  EXPECT_EQ(t.identity_failures, 0u);
}

TEST(MonteCarlo, ReproducibleAndWorkerIndependent) {
  ExperimentConfig cfg;
  cfg.k = 1;
  cfg.c_grid = {0.5, 2.0};
  cfg.sizes = {300, 600};
  cfg.runs_per_graph = 300;
  cfg.graphs = 3;
  cfg.master_seed = 42;
  auto csv = [](const ExperimentConfig& c) {
    std::ostringstream os;
    io::write_sweep_csv(os, monte_carlo(c));
    return os.str();
  };
  cfg.workers = 1;
  const std::string one = csv(cfg);
  EXPECT_EQ(one, csv(cfg));
  cfg.workers = 4;
  EXPECT_EQ(one, csv(cfg));
  cfg.master_seed = 43;
  EXPECT_NE(one, csv(cfg));
}

TEST(MonteCarlo, CellDoesNotDependOnGrid) {
  const CellSamples a = monte_carlo_cell(1, 1.0, 400, 50, 2, 7);
  ExperimentConfig cfg;
  cfg.k = 1;
  cfg.c_grid = {0.2, 1.0};
  cfg.sizes = {400};
  cfg.runs_per_graph = 50;
  cfg.graphs = 2;
  cfg.master_seed = 7;
  const SweepTable t = monte_carlo(cfg);
  EXPECT_DOUBLE_EQ(t.rows[1].mean_R, summarize(a.final_removed).mean);
}

TEST(MonteCarlo, InvalidConfig) {
  ExperimentConfig cfg;
  cfg.k = 2;
  cfg.c_grid = {1.0};
  cfg.sizes = {5};
  EXPECT_THROW(monte_carlo(cfg), InvalidParams);
  cfg.sizes = {100};
  cfg.runs_per_graph = 0;
  EXPECT_THROW(monte_carlo(cfg), InvalidParams);
}

TEST(Histogram, ConstantSampleIsOneBin) {
  const std::vector<double> same(50, 7.0);
  const Histogram h = histogram(same, HistogramMode::RawR);
  ASSERT_EQ(h.bins(), 1u);
  EXPECT_EQ(h.mass(0), 1.0);
  EXPECT_EQ(h.edges[0], 7.0);
  EXPECT_EQ(h.edges[1], 8.0);
}

TEST(Histogram, MassesSumToOne) {
  Rng rng(4);
  std::vector<double> raw;
  std::vector<double> ratio;
  for (int i = 0; i < 12345; ++i) {
    raw.push_back(static_cast<double>(2 + uniform_below(rng, 400)));
    ratio.push_back(uniform01(rng));
  }
  ratio.push_back(1.0);
  ratio.push_back(0.0);
  for (const Histogram& h : {histogram(raw, HistogramMode::RawR), histogram(ratio, HistogramMode::RatioR, 37)}) {
    const auto m = h.masses();
    EXPECT_NEAR(std::accumulate(m.begin(), m.end(), 0.0), 1.0, 1e-12);
    EXPECT_EQ(std::accumulate(h.counts.begin(), h.counts.end(), std::uint64_t{0}), h.sample_count);
    EXPECT_EQ(h.edges.size(), h.bins() + 1);
  }
  EXPECT_EQ(histogram(ratio, HistogramMode::RatioR, 37).bins(), 37u);
}

TEST(Histogram, Errors) {
  EXPECT_THROW(histogram(std::vector<double>{}, HistogramMode::RawR), EmptyInput);
  EXPECT_THROW(histogram(std::vector<double>{1.5}, HistogramMode::RawR), DomainError);
  EXPECT_THROW(histogram(std::vector<double>{1.5}, HistogramMode::RatioR), DomainError);
}

TEST(Histogram, SubcriticalRawLawIsSizeIndependent) {
  const CellSamples small = monte_carlo_cell(1, 0.1, 3200, 2000, 10, 100);
  const CellSamples large = monte_carlo_cell(1, 0.1, 6400, 2000, 10, 100);
  const double d = ks_statistic(small.final_removed, large.final_removed);
  EXPECT_LT(d, ks_critical_value(small.final_removed.size(), large.final_removed.size(), 0.01));
}

TEST(Histogram, SubcriticalRawLawDecaysExponentially) {
  const CellSamples cell = monte_carlo_cell(1, 0.1, 3200, 100000, 10, 5);
  const Histogram h = histogram(cell_values(cell, 3200, HistogramMode::RawR), HistogramMode::RawR);
  std::vector<double> xs;
  std::vector<double> ys;
  for (std::size_t i = 0; i < h.bins(); ++i) {
    if (h.counts[i] == 0) continue;
    xs.push_back(h.edges[i]);
    ys.push_back(std::log(h.mass(i)));
  }
  ASSERT_GT(xs.size(), 10u);
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / ys.size();
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  const double r2 = sxy * sxy / (sxx * syy);
  EXPECT_LT(sxy / sxx, 0.0);
  EXPECT_GT(r2, 0.9);
}

TEST(EstimateThresholds, SyntheticCollapse) {
  SweepTable t;
  const std::vector<std::uint32_t> sizes{100, 200, 400};
  // raw collapse for c <= 0.4, ratio collapse for c >= 1.0
  for (double c : {0.2, 0.4, 0.6, 0.8, 1.0, 1.2}) {
    for (std::uint32_t n : sizes) {
      double mean;
      if (c <= 0.4) {
        mean = 10.0 * (1.0 + 0.01 * (n / 100.0));
      } else if (c >= 1.0) {
        mean = 0.5 * n * (1.0 + 0.001 * (n / 100.0));
      } else {
        mean = std::sqrt(static_cast<double>(n)) * c * 5.0;
      }
      t.rows.push_back(row(1, c, n, mean));
    }
  }
  const ThresholdEstimate est = estimate_thresholds(t, 1);
  EXPECT_DOUBLE_EQ(est.c1_hat, 0.4);
  EXPECT_DOUBLE_EQ(est.c2_hat, 1.0);
  ASSERT_EQ(est.grid.size(), 6u);
  EXPECT_NEAR(est.grid[0].raw_spread, 0.03 / 1.01, 1e-12);
}

TEST(EstimateThresholds, Errors) {
  SweepTable t;
  t.rows.push_back(row(1, 0.1, 100, 5.0));
  t.rows.push_back(row(1, 0.1, 200, 5.0));
  EXPECT_THROW(estimate_thresholds(t, 1), NoCollapseFound);  // < 3 sizes
  EXPECT_THROW(estimate_thresholds(t, 2), NoCollapseFound);  // no rows

  SweepTable never;
  for (std::uint32_t n : {100u, 200u, 400u}) never.rows.push_back(row(1, 0.5, n, std::sqrt(n) * 3.0));
  EXPECT_THROW(estimate_thresholds(never, 1), NoCollapseFound);
}

TEST(NoiseSources, NoTopologicalRandomnessAtZeroIntensity) {
  NoiseConfig cfg;
  cfg.k = 1;
  cfg.c = 0.0;
  cfg.n = 200;
  cfg.runs = 2000;
  cfg.graphs = 2000;
  cfg.master_seed = 12;
  const NoiseReport rep = compare_noise_sources(cfg);
  EXPECT_TRUE(rep.means_agree(3.0)) << rep.dynamical.mean << " vs " << rep.topological.mean;
  EXPECT_EQ(rep.dynamical.count, 2000u);
  EXPECT_EQ(rep.topological.count, 2000u);
}

TEST(MeanFieldComparison, FlagsViolationsOnSyntheticTable) {
  SweepTable t;
  t.rows.push_back(row(1, 2.0, 100, 40.0, 5.0));
  t.rows.push_back(row(1, 2.0, 200, 100.0, 5.0));  // largest n, mean 0.5
  t.rows.push_back(row(1, 10.0, 200, 199.0, 1.0));  // mean 0.995 > z_inf
  const auto rows = meanfield_comparison(t, 1);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].n, 200u);
  EXPECT_DOUBLE_EQ(rows[0].mean_R_over_n, 0.5);
  EXPECT_DOUBLE_EQ(rows[0].gap, z_infinity(1, 2.0) - 0.5);
  EXPECT_FALSE(rows[0].violation);
  EXPECT_TRUE(rows[1].violation);
}

TEST(MeanFieldComparison, UpperBoundImprovesWithIntensity) {
  ExperimentConfig cfg;
  cfg.k = 1;
  cfg.c_grid = {2.0, 10.0};
  cfg.sizes = {6400};
  cfg.runs_per_graph = 100;
  cfg.graphs = 5;
  cfg.master_seed = 77;
  const auto rows = meanfield_comparison(monte_carlo(cfg), 1);
  ASSERT_EQ(rows.size(), 2u);
  for (const auto& r : rows) EXPECT_FALSE(r.violation) << "c=" << r.c;
  EXPECT_LT(rows[1].gap, rows[0].gap);
}

TEST(MeanFieldComparison, SaturationNearCompleteGraphValue) {
  for (std::uint32_t k = 1; k <= 4; ++k) EXPECT_NEAR(z_infinity(k, 50.0), 0.7968, 0.02);
}
