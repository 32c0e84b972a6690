#pragma once

// Text formats: graph and run JSON, sweep / histogram / trajectory CSV, and
// the c-grid and size-list flag syntax. Numbers are written with
// std::to_chars, so output never depends on the global locale.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "json.hpp"
#include "mtsw/error.hpp"
#include "mtsw/experiments.hpp"
#include "mtsw/graph.hpp"
#include "mtsw/meanfield.hpp"
#include "mtsw/process.hpp"

namespace mtsw::io {

/// Shortest representation that round-trips.
inline std::string format_number(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return {buf, res.ptr};
}

inline std::string format_number(std::uint64_t value) { return std::to_string(value); }

inline double parse_double(std::string_view text, std::string_view what) {
  double value = 0.0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  const auto res = std::from_chars(first, last, value);
  if (res.ec != std::errc{} || res.ptr != last) {
    throw InvalidParams(std::string(what) + ": cannot parse '" + std::string(text) + "' as a number");
  }
  return value;
}

inline std::uint64_t parse_uint(std::string_view text, std::string_view what) {
  std::uint64_t value = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
    throw InvalidParams(std::string(what) + ": cannot parse '" + std::string(text) + "' as an integer");
  }
  return value;
}

inline std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = text.find(sep, start);
    parts.push_back(text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

/// "lo:hi:step" (lo + i*step for every value below hi + step/2, so hi is
/// included when it lies on the grid), a comma list, or a single value.
/// Grid points are rounded to 12 significant digits.
inline std::vector<double> parse_c_grid(std::string_view text) {
  std::vector<double> out;
  auto tidy = [](double v) {
    if (v == 0.0) return 0.0;
    const double scale = std::pow(10.0, 11 - static_cast<int>(std::floor(std::log10(std::abs(v)))));
    return std::round(v * scale) / scale;
  };
  if (text.find(':') != std::string_view::npos) {
    const auto parts = split(text, ':');
    if (parts.size() != 3) throw InvalidParams("--c: range must be lo:hi:step");
    const double lo = parse_double(parts[0], "--c");
    const double hi = parse_double(parts[1], "--c");
    const double step = parse_double(parts[2], "--c");
    if (!(step > 0.0)) throw InvalidParams("--c: step must be > 0");
    if (hi < lo) throw InvalidParams("--c: hi must be >= lo");
    for (std::uint64_t i = 0;; ++i) {
      const double v = lo + static_cast<double>(i) * step;
      if (!(v < hi + step / 2.0)) break;
      out.push_back(tidy(v));
      if (out.size() > 1000000) throw InvalidParams("--c: grid too large");
    }
  } else {
    for (auto part : split(text, ',')) out.push_back(parse_double(part, "--c"));
  }
  for (double c : out) {
    if (!(c >= 0.0) || !std::isfinite(c)) throw InvalidParams("--c: values must be finite and >= 0");
  }
  return out;
}

inline std::vector<std::uint32_t> parse_sizes(std::string_view text) {
  std::vector<std::uint32_t> out;
  for (auto part : split(text, ',')) {
    const std::uint64_t n = parse_uint(part, "--sizes");
    if (n == 0 || n > (1ULL << 31)) throw InvalidParams("--sizes: out of range value");
    out.push_back(static_cast<std::uint32_t>(n));
  }
  return out;
}

inline nlohmann::ordered_json to_json(const Graph& g) {
  nlohmann::ordered_json j;
  j["n"] = g.n();
  j["k"] = g.k();
  j["c"] = g.params().c;
  j["p"] = g.params().p;
  if (g.seed()) {
    j["seed"] = *g.seed();
  } else {
    j["seed"] = nullptr;
  }
  auto arr = nlohmann::ordered_json::array();
  for (const auto& [a, b] : g.shortcut_pairs()) arr.push_back({a, b});
  j["shortcuts"] = std::move(arr);
  return j;
}

inline Graph graph_from_json(const nlohmann::json& j) {
  try {
    const GraphParams params =
        GraphParams::make(j.at("n").get<std::uint64_t>(), j.at("k").get<std::uint64_t>(), j.at("c").get<double>());
    std::vector<Edge> pairs;
    for (const auto& e : j.at("shortcuts")) {
      if (!e.is_array() || e.size() != 2) throw InvalidParams("shortcut entries must be [i, j] pairs");
      pairs.emplace_back(e[0].get<Vertex>(), e[1].get<Vertex>());
    }
    std::optional<std::uint64_t> seed;
    if (j.contains("seed") && !j["seed"].is_null()) seed = j["seed"].get<std::uint64_t>();
    return Graph::from_shortcuts(params, std::move(pairs), seed);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidParams(std::string("malformed graph JSON: ") + e.what());
  }
}

inline nlohmann::ordered_json run_to_json(const GraphParams& params, const RunOutcome& out) {
  nlohmann::ordered_json j;
  j["n"] = params.n;
  j["k"] = params.k;
  j["c"] = params.c;
  j["seed_vertex"] = out.seed_vertex;
  j["R"] = out.final_removed;
  j["tau"] = out.absorption_time;
  j["I_final"] = out.final_ignorant;
  return j;
}

inline void write_trajectory_csv(std::ostream& os, const RunOutcome& out) {
  os << "t,I,S,R\n";
  for (std::size_t t = 0; t < out.trajectory.size(); ++t) {
    const Counts& c = out.trajectory[t];
    os << t << ',' << c.ignorant << ',' << c.spreaders << ',' << c.removed << '\n';
  }
}

inline constexpr std::string_view kSweepHeader =
    "k,c,n,mean_R,std_R,mean_R_over_n,std_R_over_n,samples,seed";

inline void write_sweep_csv(std::ostream& os, const SweepTable& table) {
  os << kSweepHeader << '\n';
  for (const SweepRow& r : table.rows) {
    os << r.k << ',' << format_number(r.c) << ',' << r.n << ',' << format_number(r.mean_R) << ','
       << format_number(r.std_R) << ',' << format_number(r.mean_R_over_n) << ','
       << format_number(r.std_R_over_n) << ',' << r.samples << ',' << r.seed << '\n';
  }
}

inline SweepTable read_sweep_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw InvalidParams("sweep CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kSweepHeader) throw InvalidParams("sweep CSV header mismatch: '" + line + "'");
  SweepTable table;
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 9) throw InvalidParams("sweep CSV line " + std::to_string(line_no) + ": expected 9 fields");
    SweepRow r;
    r.k = static_cast<std::uint32_t>(parse_uint(f[0], "k"));
    r.c = parse_double(f[1], "c");
    r.n = static_cast<std::uint32_t>(parse_uint(f[2], "n"));
    r.mean_R = parse_double(f[3], "mean_R");
    r.std_R = parse_double(f[4], "std_R");
    r.mean_R_over_n = parse_double(f[5], "mean_R_over_n");
    r.std_R_over_n = parse_double(f[6], "std_R_over_n");
    r.samples = parse_uint(f[7], "samples");
    r.seed = parse_uint(f[8], "seed");
    table.rows.push_back(r);
  }
  return table;
}

inline void write_histogram_csv(std::ostream& os, const Histogram& h) {
  os << "bin_lo,bin_hi,mass\n";
  for (std::size_t i = 0; i < h.bins(); ++i) {
    os << format_number(h.edges[i]) << ',' << format_number(h.edges[i + 1]) << ','
       << format_number(h.mass(i)) << '\n';
  }
}

inline void write_meanfield_trajectory_csv(std::ostream& os, const std::vector<TimedState>& traj) {
  os << "t,x,y,z\n";
  for (const TimedState& s : traj) {
    os << format_number(s.t) << ',' << format_number(s.state.x) << ',' << format_number(s.state.y) << ','
       << format_number(s.state.z) << '\n';
  }
}

}  // namespace mtsw::io
