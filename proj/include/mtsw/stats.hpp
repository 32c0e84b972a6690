#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "mtsw/error.hpp"

namespace mtsw {

struct Summary {
  std::size_t count = 0;
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation (n - 1)

  [[nodiscard]] double std_error() const noexcept {
    return count > 0 ? stddev / std::sqrt(static_cast<double>(count)) : 0.0;
  }
  [[nodiscard]] double variance() const noexcept { return stddev * stddev; }
};

/// Two-pass mean and sample standard deviation, summed in index order.
template <typename T>
Summary summarize(std::span<const T> values) {
  Summary s;
  s.count = values.size();
  if (values.empty()) return s;
  double sum = 0.0;
  for (const T& v : values) sum += static_cast<double>(v);
  s.mean = sum / static_cast<double>(s.count);
  if (s.count > 1) {
    double sq = 0.0;
    for (const T& v : values) {
      const double d = static_cast<double>(v) - s.mean;
      sq += d * d;
    }
    s.stddev = std::sqrt(sq / static_cast<double>(s.count - 1));
  }
  return s;
}

template <typename T>
Summary summarize(const std::vector<T>& values) {
  return summarize(std::span<const T>(values));
}

/// Two-sample Kolmogorov-Smirnov statistic sup |F_a - F_b|. Ties are handled
/// by stepping past every copy of a value before comparing.
template <typename T>
double ks_statistic(std::vector<T> a, std::vector<T> b) {
  if (a.empty() || b.empty()) throw EmptyInput("ks_statistic needs two non-empty samples");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const T x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == x) ++i;
    while (j < b.size() && b[j] == x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

/// Asymptotic critical value of the two-sample KS statistic at level
/// `level` (0.01 -> 1.628). Conservative for discrete distributions.
inline double ks_critical_value(std::size_t na, std::size_t nb, double level = 0.01) {
  const double c = std::sqrt(-0.5 * std::log(level / 2.0));
  const double a = static_cast<double>(na);
  const double b = static_cast<double>(nb);
  return c * std::sqrt((a + b) / (a * b));
}

}  // namespace mtsw
