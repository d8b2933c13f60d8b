// Copyright 2026 The HRNet Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "hrnet/evaluate.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <numeric>
#include <set>
#include <utility>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"
#include "absl/strings/str_split.h"
#include "hrnet/geo.h"
#include "hrnet/rng.h"
#include "hrnet/status_macros.h"

namespace hrnet::evaluate {
namespace {

std::vector<double> Normalize(const std::vector<double>& counts) {
  const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
  std::vector<double> out(counts.size(), 0.0);
  if (total > 0.0) {
    for (size_t i = 0; i < counts.size(); ++i) out[i] = counts[i] / total;
  }
  return out;
}

double Js(std::span<const double> p, std::span<const double> q) {
  double total = 0.0;
  for (size_t i = 0; i < p.size(); ++i) {
    const double m = 0.5 * (p[i] + q[i]);
    if (p[i] > 0.0) total += 0.5 * p[i] * std::log2(p[i] / m);
    if (q[i] > 0.0) total += 0.5 * q[i] * std::log2(q[i] / m);
  }
  return std::clamp(total, 0.0, 1.0);
}

double BernoulliJs(double a, double b) {
  const double p[2] = {a, 1.0 - a};
  const double q[2] = {b, 1.0 - b};
  return Js(p, q);
}

std::vector<geo::LatLng> Centers(const geo::GridSpec& grid) {
  std::vector<geo::LatLng> out;
  out.reserve(grid.num_cells());
  for (int64_t c = 0; c < grid.num_cells(); ++c) {
    out.push_back(*geo::CellCenter(grid, geo::CellId(c, grid.depth())));
  }
  return out;
}

// Mean of per-start values with the skip / penalty rules.
struct StartAverage {
  double sum = 0.0;
  int used = 0;
  int skipped = 0;
  int penalized = 0;
  double mean() const { return used == 0 ? 0.0 : sum / used; }
};

StartAverage CompareStarts(const Dataset& real, const Dataset& gen, StartMetric metric,
                           std::span<const int32_t> starts) {
  const auto r = StartConditioned(real, metric, starts);
  const auto g = StartConditioned(gen, metric, starts);
  const bool presence = metric == StartMetric::kWaypoint || metric == StartMetric::kRoute;
  StartAverage avg;
  for (size_t s = 0; s < starts.size(); ++s) {
    if (!r[s]) {
      ++avg.skipped;
      continue;
    }
    ++avg.used;
    if (!g[s]) {
      ++avg.penalized;
      avg.sum += 1.0;
      continue;
    }
    if (presence) {
      double per_cell = 0.0;
      for (size_t l = 0; l < r[s]->size(); ++l) {
        per_cell += BernoulliJs((*r[s])[l], (*g[s])[l]);
      }
      avg.sum += per_cell / static_cast<double>(r[s]->size());
    } else {
      avg.sum += Js(*r[s], *g[s]);
    }
  }
  return avg;
}

double HistogramJs(const std::vector<double>& real, const std::vector<double>& gen,
                   const HistogramSpec& spec) {
  if (gen.empty() || real.empty()) return gen.empty() == real.empty() ? 0.0 : 1.0;
  return Js(Histogram(real, spec), Histogram(gen, spec));
}

std::vector<double> Scaled(std::vector<double> counts, double factor) {
  for (double& c : counts) c *= factor;
  return counts;
}

}  // namespace

absl::StatusOr<double> JsDivergence(std::span<const double> p,
                                    std::span<const double> q) {
  if (p.size() != q.size() || p.empty()) {
    return absl::InvalidArgumentError(
        absl::StrCat("distributions have sizes ", p.size(), " and ", q.size()));
  }
  for (const auto& d : {p, q}) {
    double total = 0.0;
    for (const double v : d) {
      if (!(v >= 0.0)) return absl::InvalidArgumentError("negative probability");
      total += v;
    }
    if (std::abs(total - 1.0) > 1e-9) {
      return absl::InvalidArgumentError(absl::StrCat("distribution sums to ", total));
    }
  }
  return Js(p, q);
}

absl::StatusOr<double> AverageRelativeError(std::span<const double> real,
                                            std::span<const double> gen, double phi) {
  if (real.size() != gen.size()) {
    return absl::InvalidArgumentError("count vectors differ in length");
  }
  if (!(phi > 0.0)) return absl::InvalidArgumentError("phi must be > 0");
  if (real.empty()) return 0.0;
  double total = 0.0;
  for (size_t i = 0; i < real.size(); ++i) {
    total += std::abs(real[i] - gen[i]) / std::max(real[i], phi);
  }
  return total / static_cast<double>(real.size());
}

int HistogramSpec::Bin(double x) const {
  if (!(d_max > 0.0)) return 0;
  const double b = std::floor(x / d_max * n_bin);
  return static_cast<int>(std::clamp(b, 0.0, static_cast<double>(n_bin - 1)));
}

std::vector<int32_t> LineCells(int w, int32_t a, int32_t b) {
  int r0 = a / w, c0 = a % w;
  const int r1 = b / w, c1 = b % w;
  const int dc = std::abs(c1 - c0), dr = -std::abs(r1 - r0);
  const int sc = c0 < c1 ? 1 : -1, sr = r0 < r1 ? 1 : -1;
  int err = dc + dr;
  std::vector<int32_t> out;
  while (true) {
    out.push_back(r0 * w + c0);
    if (r0 == r1 && c0 == c1) return out;
    const int e2 = 2 * err;
    if (e2 >= dr) {
      err += dr;
      c0 += sc;
    }
    if (e2 <= dc) {
      err += dc;
      r0 += sr;
    }
  }
}

std::vector<int32_t> RouteCells(int w, const Trajectory& trajectory) {
  std::vector<int32_t> cells;
  if (trajectory.empty()) return cells;
  cells.push_back(trajectory[0].cell);
  for (size_t i = 0; i + 1 < trajectory.size(); ++i) {
    const std::vector<int32_t> seg = LineCells(w, trajectory[i].cell, trajectory[i + 1].cell);
    cells.insert(cells.end(), seg.begin(), seg.end());
  }
  std::sort(cells.begin(), cells.end());
  cells.erase(std::unique(cells.begin(), cells.end()), cells.end());
  return cells;
}

std::vector<std::optional<std::vector<double>>> StartConditioned(
    const Dataset& data, StartMetric metric, std::span<const int32_t> starts) {
  const int64_t n = data.grid.num_cells();
  const int w = data.grid.width();
  std::map<int32_t, size_t> index;
  for (size_t s = 0; s < starts.size(); ++s) index.emplace(starts[s], s);
  std::vector<std::vector<double>> counts(starts.size(), std::vector<double>(n, 0.0));
  std::vector<int> matched(starts.size(), 0);
  std::vector<int32_t> cells;
  for (const Trajectory& t : data.trajectories) {
    if (t.empty()) continue;
    const auto it = index.find(t[0].cell);
    if (it == index.end()) continue;
    const size_t s = it->second;
    switch (metric) {
      case StartMetric::kDestination:
        counts[s][t.back().cell] += 1.0;
        break;
      case StartMetric::kTransition:
        if (t.size() < 2) continue;
        counts[s][t[1].cell] += 1.0;
        break;
      case StartMetric::kWaypoint:
        cells.clear();
        for (const Visit& v : t) cells.push_back(v.cell);
        std::sort(cells.begin(), cells.end());
        cells.erase(std::unique(cells.begin(), cells.end()), cells.end());
        for (const int32_t c : cells) counts[s][c] += 1.0;
        break;
      case StartMetric::kRoute:
        for (const int32_t c : RouteCells(w, t)) counts[s][c] += 1.0;
        break;
    }
    ++matched[s];
  }
  std::vector<std::optional<std::vector<double>>> out(starts.size());
  const auto first_index = [&](size_t s) { return index.at(starts[s]); };
  const bool presence = metric == StartMetric::kWaypoint || metric == StartMetric::kRoute;
  for (size_t s = 0; s < starts.size(); ++s) {
    if (first_index(s) != s) {
      out[s] = out[first_index(s)];  // repeated start
      continue;
    }
    if (matched[s] == 0) continue;
    if (presence) {
      for (double& c : counts[s]) c /= matched[s];
      out[s] = std::move(counts[s]);
    } else {
      out[s] = Normalize(counts[s]);
    }
  }
  return out;
}

std::vector<double> ScalarValues(const Dataset& data, ScalarMetric metric) {
  const std::vector<geo::LatLng> centers = Centers(data.grid);
  std::vector<double> out;
  out.reserve(data.size());
  for (const Trajectory& t : data.trajectories) {
    double value = 0.0;
    if (metric == ScalarMetric::kTravelDistance) {
      for (size_t i = 0; i + 1 < t.size(); ++i) {
        value += geo::DistanceMeters(centers[t[i].cell], centers[t[i + 1].cell]);
      }
    } else {
      for (size_t i = 0; i < t.size(); ++i) {
        for (size_t j = i + 1; j < t.size(); ++j) {
          value = std::max(value, geo::DistanceMeters(centers[t[i].cell], centers[t[j].cell]));
        }
      }
    }
    out.push_back(value);
  }
  return out;
}

std::vector<double> Histogram(std::span<const double> values, const HistogramSpec& spec) {
  std::vector<double> h(spec.n_bin, 0.0);
  for (const double v : values) h[spec.Bin(v)] += 1.0;
  return Normalize(h);
}

std::vector<std::optional<std::vector<double>>> DensityAtT(const Dataset& data) {
  const int64_t n = data.grid.num_cells();
  std::vector<std::vector<double>> counts(data.n_time, std::vector<double>(n, 0.0));
  std::vector<bool> any(data.n_time, false);
  for (const Trajectory& t : data.trajectories) {
    for (size_t i = 0; i < t.size(); ++i) {
      const int end = i + 1 < t.size() ? t[i + 1].slot : t[i].slot + 1;
      for (int k = t[i].slot; k < std::min(end, data.n_time); ++k) {
        counts[k][t[i].cell] += 1.0;
        any[k] = true;
      }
    }
  }
  std::vector<std::optional<std::vector<double>>> out(data.n_time);
  for (int k = 0; k < data.n_time; ++k) {
    if (any[k]) out[k] = Normalize(counts[k]);
  }
  return out;
}

std::vector<double> CountDensityQueries(const Dataset& data,
                                        std::span<const std::vector<int32_t>> queries) {
  const int64_t n = data.grid.num_cells();
  // membership[c] lists the queries containing cell c.
  std::vector<std::vector<int>> membership(n);
  for (size_t q = 0; q < queries.size(); ++q) {
    for (const int32_t c : queries[q]) {
      if (c >= 0 && c < n) membership[c].push_back(static_cast<int>(q));
    }
  }
  std::vector<double> counts(queries.size(), 0.0);
  std::vector<int64_t> last_seen(queries.size(), -1);
  for (size_t i = 0; i < data.size(); ++i) {
    for (const Visit& v : data.trajectories[i]) {
      for (const int q : membership[v.cell]) {
        if (last_seen[q] != static_cast<int64_t>(i)) {
          last_seen[q] = static_cast<int64_t>(i);
          counts[q] += 1.0;
        }
      }
    }
  }
  return counts;
}

std::vector<double> CountPatterns(const Dataset& data,
                                  std::span<const std::vector<int32_t>> patterns) {
  std::map<std::vector<int32_t>, size_t> index;
  size_t min_len = SIZE_MAX, max_len = 0;
  for (size_t p = 0; p < patterns.size(); ++p) {
    index.emplace(patterns[p], p);
    min_len = std::min(min_len, patterns[p].size());
    max_len = std::max(max_len, patterns[p].size());
  }
  std::vector<double> counts(patterns.size(), 0.0);
  std::set<size_t> found;
  std::vector<int32_t> key;
  for (const Trajectory& t : data.trajectories) {
    found.clear();
    for (size_t i = 0; i < t.size(); ++i) {
      key.clear();
      for (size_t j = i; j < t.size() && j - i < max_len; ++j) {
        key.push_back(t[j].cell);
        if (key.size() < min_len) continue;
        const auto it = index.find(key);
        if (it != index.end()) found.insert(it->second);
      }
    }
    for (const size_t p : found) counts[p] += 1.0;
  }
  return counts;
}

absl::StatusOr<std::vector<std::vector<int32_t>>> ParseCellLists(absl::string_view text) {
  std::vector<std::vector<int32_t>> out;
  for (absl::string_view line : absl::StrSplit(text, '\n', absl::SkipWhitespace())) {
    std::vector<int32_t> cells;
    for (absl::string_view tok : absl::StrSplit(line, ' ', absl::SkipWhitespace())) {
      ASSIGN_OR_RETURN(const int64_t c, ParseInt(tok));
      cells.push_back(static_cast<int32_t>(c));
    }
    out.push_back(std::move(cells));
  }
  return out;
}

absl::StatusOr<QuerySet> BuildQuerySet(const Dataset& real, const EvalConfig& config) {
  if (config.n_bin < 1 || config.n_starts < 1 || config.n_density_queries < 0 ||
      config.max_patterns < 0 || config.min_pattern_length < 1) {
    return absl::InvalidArgumentError("evaluation config out of range");
  }
  QuerySet qs;
  const int64_t n = real.grid.num_cells();

  std::map<int32_t, int64_t> start_counts;
  for (const Trajectory& t : real.trajectories) {
    if (!t.empty()) ++start_counts[t[0].cell];
  }
  std::vector<std::pair<int64_t, int32_t>> ranked;
  for (const auto& [cell, count] : start_counts) ranked.emplace_back(-count, cell);
  std::sort(ranked.begin(), ranked.end());
  for (size_t i = 0; i < ranked.size() && static_cast<int>(i) < config.n_starts; ++i) {
    qs.starts.push_back(ranked[i].second);
  }

  Rng rng(DeriveSeed(config.query_seed, "density-queries"));
  const int64_t max_size = std::max<int64_t>(1, n / 20);
  std::vector<int32_t> cells(n);
  for (int q = 0; q < config.n_density_queries; ++q) {
    const int64_t size = 1 + static_cast<int64_t>(rng.Uniform() * max_size);
    std::iota(cells.begin(), cells.end(), 0);
    for (int64_t i = 0; i < size; ++i) {
      const int64_t j = i + static_cast<int64_t>(rng.Uniform() * (n - i));
      std::swap(cells[i], cells[j]);
    }
    std::vector<int32_t> query(cells.begin(), cells.begin() + size);
    std::sort(query.begin(), query.end());
    qs.density_queries.push_back(std::move(query));
  }

  std::map<std::vector<int32_t>, int64_t> pattern_counts;
  std::set<std::vector<int32_t>> seen;
  for (const Trajectory& t : real.trajectories) {
    seen.clear();
    for (size_t i = 0; i < t.size(); ++i) {
      std::vector<int32_t> key;
      for (size_t j = i; j < t.size(); ++j) {
        key.push_back(t[j].cell);
        if (static_cast<int>(key.size()) >= config.min_pattern_length) seen.insert(key);
      }
    }
    for (const auto& p : seen) ++pattern_counts[p];
  }
  std::vector<std::pair<int64_t, const std::vector<int32_t>*>> by_count;
  for (const auto& [p, count] : pattern_counts) by_count.emplace_back(-count, &p);
  std::stable_sort(by_count.begin(), by_count.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  for (size_t i = 0; i < by_count.size() && static_cast<int>(i) < config.max_patterns; ++i) {
    qs.patterns.push_back(*by_count[i].second);
  }

  for (const auto& [spec, metric] :
       {std::pair{&qs.travel_distance, ScalarMetric::kTravelDistance},
        std::pair{&qs.diameter, ScalarMetric::kDiameter}}) {
    const std::vector<double> v = ScalarValues(real, metric);
    spec->n_bin = config.n_bin;
    spec->d_max = v.empty() ? 0.0 : *std::max_element(v.begin(), v.end());
  }
  return qs;
}

std::vector<std::string> MetricReport::MetricNames() {
  return {"waypoint", "destination", "transition", "travel_distance", "diameter",
          "route",    "density_t",   "traj_density", "traj_pattern"};
}

std::vector<double> MetricReport::Values() const {
  return {waypoint, destination, transition, travel_distance, diameter,
          route,    density_t,   traj_density, traj_pattern};
}

KeyValueBlock MetricReport::ToKeyValue() const {
  KeyValueBlock kv;
  kv.Set("aggregation", "mean_js_base2_and_are");
  const std::vector<std::string> names = MetricNames();
  const std::vector<double> values = Values();
  for (size_t i = 0; i < names.size(); ++i) kv.SetDouble(names[i], values[i]);
  kv.SetInt("skipped_starts", skipped_starts);
  kv.SetInt("penalized_starts", penalized_starts);
  kv.SetInt("skipped_slots", skipped_slots);
  kv.SetInt("penalized_slots", penalized_slots);
  kv.SetInt("num_patterns", num_patterns);
  return kv;
}

std::string MetricReport::CsvHeader() { return absl::StrJoin(MetricNames(), ","); }

std::string MetricReport::CsvRow() const {
  return absl::StrJoin(Values(), ",", [](std::string* out, double v) {
    out->append(FormatDouble(v));
  });
}

absl::StatusOr<MetricReport> FullReport(const Dataset& real, const Dataset& gen,
                                        const EvalConfig& config, const QuerySet* queries) {
  if (!(real.grid == gen.grid)) {
    return absl::InvalidArgumentError("real and generated datasets use different grids");
  }
  if (real.n_time != gen.n_time) {
    return absl::InvalidArgumentError("real and generated datasets use different slot counts");
  }
  if (real.size() == 0) return absl::InvalidArgumentError("real dataset is empty");
  if (!(config.phi > 0.0)) return absl::InvalidArgumentError("phi must be > 0");
  QuerySet built;
  if (queries == nullptr) {
    ASSIGN_OR_RETURN(built, BuildQuerySet(real, config));
    queries = &built;
  }

  MetricReport report;
  const auto starts = std::span<const int32_t>(queries->starts);
  double* start_fields[] = {&report.waypoint, &report.destination, &report.transition,
                            &report.route};
  const StartMetric start_metrics[] = {StartMetric::kWaypoint, StartMetric::kDestination,
                                       StartMetric::kTransition, StartMetric::kRoute};
  for (int m = 0; m < 4; ++m) {
    const StartAverage avg = CompareStarts(real, gen, start_metrics[m], starts);
    *start_fields[m] = avg.mean();
    report.skipped_starts += avg.skipped;
    report.penalized_starts += avg.penalized;
  }

  report.travel_distance =
      HistogramJs(ScalarValues(real, ScalarMetric::kTravelDistance),
                  ScalarValues(gen, ScalarMetric::kTravelDistance), queries->travel_distance);
  report.diameter = HistogramJs(ScalarValues(real, ScalarMetric::kDiameter),
                                ScalarValues(gen, ScalarMetric::kDiameter), queries->diameter);

  const auto real_t = DensityAtT(real);
  const auto gen_t = DensityAtT(gen);
  double sum = 0.0;
  int used = 0;
  for (int k = 0; k < real.n_time; ++k) {
    if (!real_t[k]) {
      ++report.skipped_slots;
      continue;
    }
    ++used;
    if (!gen_t[k]) {
      ++report.penalized_slots;
      sum += 1.0;
    } else {
      sum += Js(*real_t[k], *gen_t[k]);
    }
  }
  report.density_t = used == 0 ? 0.0 : sum / used;

  const double scale = gen.size() == 0 ? 0.0
                                       : static_cast<double>(real.size()) /
                                             static_cast<double>(gen.size());
  ASSIGN_OR_RETURN(report.traj_density,
                   AverageRelativeError(
                       CountDensityQueries(real, queries->density_queries),
                       Scaled(CountDensityQueries(gen, queries->density_queries), scale),
                       config.phi));
  ASSIGN_OR_RETURN(report.traj_pattern,
                   AverageRelativeError(CountPatterns(real, queries->patterns),
                                        Scaled(CountPatterns(gen, queries->patterns), scale),
                                        config.phi));
  report.num_patterns = static_cast<int>(queries->patterns.size());
  return report;
}

std::string FormatSweepCsv(std::span<const SweepRow> rows) {
  std::string out = absl::StrCat("arm,epsilon,seed,", MetricReport::CsvHeader(), "\n");
  for (const SweepRow& row : rows) {
    absl::StrAppend(&out, row.arm, ",", FormatDouble(row.epsilon), ",", row.seed, ",",
                    row.report.CsvRow(), "\n");
  }
  return out;
}

}  // namespace hrnet::evaluate
