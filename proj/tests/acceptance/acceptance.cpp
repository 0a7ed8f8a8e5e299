// Copyright 2026 The delaysim Authors. Licensed under the Apache License,
// Version 2.0. See http://www.apache.org/licenses/LICENSE-2.0

// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// fails. Oracles here are written independently of the library code.

#include <algorithm>
#include <cmath>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <thread>

#include "support/fixtures.hpp"

using namespace delaysim;

namespace {

int failures = 0;

void report(char const* name, bool pass, std::string const& detail) {
  std::printf("%s %-22s %s\n", pass ? "PASS" : "FAIL", name, detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(char const* f, double a, double b = 0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

struct Instance {
  Timetable tt;
  DelayConfig cfg;
  std::size_t runs;
  std::uint64_t seed;
};

Instance random_instance(std::mt19937_64& rng) {
  Instance in{fixtures::random_timetable(rng), fixtures::random_config(rng),
              std::uniform_int_distribution<std::size_t>(1, 20)(rng), rng()};
  return in;
}

bool cell_is_zero(MetricCell const& cell) {
  return std::visit(
      [](auto const& c) {
        using C = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<C, ScalarMetricCell>) {
          return std::all_of(c.per_run_values.begin(), c.per_run_values.end(), [](double v) { return v == 0; });
        } else if constexpr (std::is_same_v<C, ProfileMetricCell>) {
          for (auto const& run : c.per_run_series) {
            for (auto const& p : run) {
              if (p.lateness != 0) return false;
            }
          }
          return std::all_of(c.binned_average.begin(), c.binned_average.end(), [](double v) { return v == 0; });
        } else if constexpr (std::is_same_v<C, FrequencyMetricCell>) {
          // Zero lateness everywhere: every stop lands in the on-time band.
          for (auto const& counts : c.per_run_counts) {
            for (std::size_t k = 0; k < counts.size(); ++k) {
              if (k != static_cast<std::size_t>(LatenessCategory::min0_1) && counts[k] != 0) return false;
            }
          }
          return true;
        } else {
          return std::all_of(c.per_run_breakdown.begin(), c.per_run_breakdown.end(),
                             [](auto const& run) { return run.empty(); });
        }
      },
      cell);
}

void baseline_zero() {
  auto tt = fixtures::corridor({.trains = 200, .stops = 10, .lines = 4, .spacing = 300, .loads = true});
  auto t0 = std::chrono::steady_clock::now();
  auto e = fixtures::ensemble(tt, fixtures::no_delays(), 50, 11);
  bool ok = true;
  for (auto const& run : e.runs) {
    ok &= run.attributions.empty() && run.primary_events.empty();
    for (std::size_t t = 0; t < tt.trains.size(); ++t) {
      for (std::size_t i = 0; i < tt.trains[t].stops.size(); ++i) {
        ok &= run.times[t][i].arrival == tt.trains[t].stops[i].arrival();
        ok &= run.times[t][i].departure == tt.trains[t].stops[i].sched_departure;
      }
    }
  }
  std::vector<std::string> train_metrics, station_metrics;
  for (auto const& m : kMetricCatalog) {
    train_metrics.emplace_back(m.id);
    if (m.station_case) station_metrics.emplace_back(m.id);
  }
  std::size_t cells = 0;
  for (auto const& table : {build_metric_table(e, CaseKind::train, train_metrics),
                            build_metric_table(e, CaseKind::station, station_metrics)}) {
    for (auto const& row : table.cells) {
      for (auto const& cell : row) {
        ok &= cell_is_zero(cell);
        ++cells;
      }
    }
  }
  double secs = seconds_since(t0);
  report("baseline_zero", ok && secs < 1.0,
         fmt("50 runs x 2000 stops, %.0f cells all zero, %.3f s (limit 1 s)", double(cells), secs));
}

void conservation() {
  std::mt19937_64 rng(101);
  bool ok = true;
  std::size_t runs = 0;
  std::int64_t seconds = 0;
  for (int trial = 0; trial < 100; ++trial) {
    auto in = random_instance(rng);
    auto e = fixtures::ensemble(in.tt, in.cfg, in.runs, in.seed);
    EnsembleIndex idx(e);
    auto stations = aggregate_by_station(e);
    std::vector<std::int64_t> caused(e.n_runs()), suffered(e.n_runs()), st_caused(e.n_runs()),
        st_suffered(e.n_runs());
    for (auto const& t : in.tt.trains) {
      auto c = scalar_metric(idx, ScalarKind::reactionary_caused, t.train_id).per_run_values;
      auto s = scalar_metric(idx, ScalarKind::reactionary_suffered, t.train_id).per_run_values;
      for (std::size_t r = 0; r < e.n_runs(); ++r) {
        caused[r] += static_cast<std::int64_t>(c[r]);
        suffered[r] += static_cast<std::int64_t>(s[r]);
      }
    }
    for (std::size_t s = 0; s < stations.case_ids.size(); ++s) {
      for (std::size_t r = 0; r < e.n_runs(); ++r) {
        st_caused[r] += stations.caused[s][r];
        st_suffered[r] += stations.suffered[s][r];
      }
    }
    for (std::size_t r = 0; r < e.n_runs(); ++r) {
      std::int64_t ledger = 0;
      for (auto const& a : e.runs[r].attributions) ledger += a.seconds;
      ok &= caused[r] == ledger && suffered[r] == ledger && st_caused[r] == ledger && st_suffered[r] == ledger;
      seconds += ledger;
      ++runs;
    }
  }
  report("conservation", ok,
         fmt("100 instances, %.0f runs, %.0f ledger seconds; train and station sums exact", double(runs),
             double(seconds)));
}

void determinism() {
  std::mt19937_64 rng(202);
  auto tt = std::make_shared<Timetable const>(
      fixtures::corridor({.trains = 120, .stops = 10, .lines = 3, .spacing = 200, .loads = true}));
  auto cfg = fixtures::random_config(rng);
  SimParams params;
  params.runtime_jitter = 20;
  std::string first;
  bool ok = true;
  for (int rep = 0; rep < 20; ++rep) {
    auto e = run_ensemble(tt, cfg, params, 25, 4242, {.ensemble_id = {}, .threads = unsigned(rep % 4)});
    auto bytes = io::write_ensemble(e);
    if (rep == 0) first = bytes;
    ok &= bytes == first;
  }
  report("determinism", ok, fmt("20 repetitions, %.0f bytes each, thread counts 0..3", double(first.size())));
}

void monotonicity() {
  std::mt19937_64 rng(303);
  int trials = 0, attempts = 0;
  bool ok = true;
  while (trials < 500 && attempts < 5000) {
    ++attempts;
    auto in = random_instance(rng);
    auto plan = build_resource_plan(in.tt);
    CompiledSchedule schedule(in.tt, plan);
    auto run = std::uniform_int_distribution<std::size_t>(0, in.runs - 1)(rng);
    auto events = sample_primary_delays(in.tt, in.cfg, run, in.seed);
    if (events.empty()) continue;
    auto base = simulate_run(schedule, events, {}, run, in.seed);
    events[std::uniform_int_distribution<std::size_t>(0, events.size() - 1)(rng)].delay += 60;
    auto more = simulate_run(schedule, events, {}, run, in.seed);
    for (std::size_t t = 0; t < base.times.size(); ++t) {
      for (std::size_t i = 0; i < base.times[t].size(); ++i) {
        ok &= more.times[t][i].arrival >= base.times[t][i].arrival;
      }
    }
    ++trials;
  }
  report("monotonicity", ok && trials == 500, fmt("%.0f trials with +60 s on one primary event", trials));
}

void hand_traces() {
  auto run = [](Seconds offset) {
    auto tt = fixtures::two_trains(offset);
    return simulate_run(tt, build_resource_plan(tt), {{"A", 0, 300, 0}}, {}, 0);
  };
  Seconds const k0800 = 8 * 3600;
  auto wait = run(360);
  bool ok = wait.attributions.size() == 1 && wait.attributions[0].causer == "A" &&
            wait.attributions[0].sufferer == "B" && wait.attributions[0].resource_id == "SEG1" &&
            wait.attributions[0].seconds == 60 && wait.times[1][0].departure == k0800 + 420 &&
            wait.times[0][0].departure == k0800 + 300;
  auto none = run(480);
  ok &= none.attributions.empty() && none.times[1][0].departure == k0800 + 480;
  report("hand_traces", ok, "B offset 360 s waits 60 s on SEG1 charged to A; offset 480 s no wait");
}

// Row index where the running total first reaches k/10 of the total, for
// k = 1..9, deduplicated. Values below zero count as zero.
std::vector<std::size_t> decile_oracle(std::vector<double> const& desc) {
  std::vector<double> prefix(desc.size());
  double run = 0;
  for (std::size_t i = 0; i < desc.size(); ++i) prefix[i] = run += std::max(0.0, desc[i]);
  std::vector<std::size_t> out;
  if (run <= 0) return out;
  for (int k = 1; k <= 9; ++k) {
    std::size_t i = 0;
    while (prefix[i] * 10 < run * k) ++i;
    if (out.empty() || out.back() != i) out.push_back(i);
  }
  return out;
}

void deciles() {
  std::mt19937_64 rng(404);
  bool ok = true;
  int zeros = 0, dominant = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    auto n = std::uniform_int_distribution<std::size_t>(1, 60)(rng);
    std::vector<double> v(n);
    int shape = trial % 4;
    for (auto& x : v) x = std::uniform_int_distribution<int>(0, 3600)(rng);
    if (shape == 0) {
      std::fill(v.begin(), v.end(), 0);
      ++zeros;
    } else if (shape == 1) {
      v[0] = 1e7;
      ++dominant;
    } else if (shape == 2) {
      for (auto& x : v) x = std::uniform_int_distribution<int>(0, 3)(rng) * 60;  // many ties
    }
    std::sort(v.rbegin(), v.rend());
    auto got = decile_boundaries(v);
    ok &= got == decile_oracle(v);
    if (shape == 0) ok &= got.empty();
    if (shape == 1) ok &= got == std::vector<std::size_t>{0};
    // "Top 20% of delay-causing trains": the minimal prefix holding >= 20%.
    double total = std::accumulate(v.begin(), v.end(), 0.0);
    if (total > 0) {
      std::size_t top = 0;
      double held = v[0];
      while (held * 5 < total) held += v[++top];
      ok &= std::find(got.begin(), got.end(), top) != got.end();
    }
  }
  report("deciles", ok, fmt("1000 vectors (%.0f all-zero, %.0f single-dominant) match cumulative-sum oracle",
                            zeros, dominant));
}

double rank_oracle(std::vector<double> v, int percent) {
  std::sort(v.begin(), v.end());
  std::size_t k = 1;
  while (k * 100 < static_cast<std::size_t>(percent) * v.size()) ++k;
  return v[k - 1];
}

double stat_oracle(std::vector<double> v, Statistic s) {
  switch (s) {
    case Statistic::median: {
      std::sort(v.begin(), v.end());
      return v[(v.size() - 1) / 2];
    }
    case Statistic::mean:
      return std::accumulate(v.begin(), v.end(), 0.0) / double(v.size());
    case Statistic::std_dev: {
      double m = std::accumulate(v.begin(), v.end(), 0.0) / double(v.size());
      double ss = 0;
      for (double x : v) ss += (x - m) * (x - m);
      return std::sqrt(ss / double(v.size()));
    }
    case Statistic::p80:
      return rank_oracle(v, 80);
  }
  return 0;
}

void percentiles_and_sort() {
  std::mt19937_64 rng(505);
  bool ok = true;
  std::size_t compared = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    auto rows = std::uniform_int_distribution<std::size_t>(1, 30)(rng);
    auto runs = std::uniform_int_distribution<std::size_t>(1, 40)(rng);
    auto hi = trial % 3 == 0 ? 5 : 2000;  // low range forces ties
    MetricTable table;
    table.columns.push_back({"m", MetricFamily::scalar, {}});
    table.n_runs = runs;
    std::vector<std::vector<double>> values;
    for (std::size_t r = 0; r < rows; ++r) {
      std::vector<double> v(runs);
      for (auto& x : v) x = std::uniform_int_distribution<int>(0, hi)(rng);
      values.push_back(v);
      ok &= stats::nearest_rank(v, 95) == rank_oracle(v, 95);
      ok &= stats::nearest_rank(v, 80) == rank_oracle(v, 80);
      ok &= stats::median(v) == stat_oracle(v, Statistic::median);
      auto cell = make_scalar_cell(v);
      ok &= cell.summary.p80 == rank_oracle(v, 80) && cell.summary.median == stat_oracle(v, Statistic::median);
      ok &= std::abs(cell.summary.mean - stat_oracle(v, Statistic::mean)) <= 1e-9 * (1 + hi);
      ok &= std::abs(cell.summary.std_dev - stat_oracle(v, Statistic::std_dev)) <= 1e-9 * (1 + hi);
      table.cases.push_back({fixtures::id("C", std::uniform_int_distribution<int>(0, 9999)(rng) * 100 + int(r)), {"x"}, {}});
      table.cells.push_back({std::move(cell)});
      compared += 5;
    }
    for (auto s : {Statistic::median, Statistic::mean, Statistic::std_dev, Statistic::p80}) {
      for (auto order : {SortOrder::ascending, SortOrder::descending}) {
        std::vector<std::size_t> idx(rows);
        std::iota(idx.begin(), idx.end(), 0);
        // Exchange sort on (key, id); ids break ties ascending in both orders.
        // Values are whole numbers and every row has the same run count, so
        // mean and spread order exactly as the integer sum and n*sum_sq - sum^2.
        auto exact_key = [&](std::vector<double> const& v) -> double {
          std::int64_t sum = 0, sum_sq = 0;
          for (double x : v) {
            sum += std::int64_t(x);
            sum_sq += std::int64_t(x) * std::int64_t(x);
          }
          if (s == Statistic::mean) return double(sum);
          if (s == Statistic::std_dev) return double(std::int64_t(v.size()) * sum_sq - sum * sum);
          return stat_oracle(v, s);
        };
        auto before = [&](std::size_t a, std::size_t b) {
          double ka = exact_key(values[a]), kb = exact_key(values[b]);
          if (ka != kb) return order == SortOrder::descending ? ka > kb : ka < kb;
          return table.cases[a].id < table.cases[b].id;
        };
        for (std::size_t i = 0; i < rows; ++i) {
          for (std::size_t j = i + 1; j < rows; ++j) {
            if (before(idx[j], idx[i])) std::swap(idx[i], idx[j]);
          }
        }
        std::vector<std::string> expect;
        for (auto i : idx) expect.push_back(table.cases[i].id);
        bool same = sort_cases(table, "m", s, order) == expect;
        if (!same && std::getenv("ACCEPTANCE_VERBOSE")) {
          std::fprintf(stderr, "sort mismatch: trial %d statistic %s\n", trial, std::string(to_string(s)).c_str());
        }
        ok &= same;
      }
    }
  }
  report("percentile_median_sort", ok,
         fmt("1000 columns, %.0f statistic checks, p95/p80/median/mean/std_dev and 8 sort modes", double(compared)));
}

void frequency_closure() {
  bool ok = classify_lateness(-1) == LatenessCategory::early && classify_lateness(0) == LatenessCategory::min0_1 &&
            classify_lateness(59) == LatenessCategory::min0_1 && classify_lateness(60) == LatenessCategory::min1_3;
  bool boundaries = ok;
  std::mt19937_64 rng(606);
  std::size_t checked = 0;
  for (int trial = 0; trial < 100; ++trial) {
    auto in = random_instance(rng);
    SimParams p;
    p.runtime_jitter = trial % 2 ? 0 : 60;  // jitter makes early arrivals possible
    auto e = fixtures::ensemble(in.tt, in.cfg, in.runs, in.seed, p);
    EnsembleIndex idx(e);
    for (auto const& t : in.tt.trains) {
      for (auto const& counts : lateness_frequencies(idx, t.train_id).per_run_counts) {
        ok &= std::accumulate(counts.begin(), counts.end(), std::size_t{0}) == t.stops.size();
        ++checked;
      }
    }
    auto view = aggregate_by_station(e);
    for (std::size_t s = 0; s < view.case_ids.size(); ++s) {
      for (auto const& counts : view.frequency[s]) {
        ok &= std::accumulate(counts.begin(), counts.end(), std::size_t{0}) == view.calls[s].size();
        ++checked;
      }
    }
  }
  report("frequency_closure", ok,
         fmt("%.0f per-run count vectors close; boundaries -1/0/59/60 s ", double(checked)) +
             (boundaries ? "classify early/0-1/0-1/1-3" : "misclassified"));
}

void scale() {
  auto tt = std::make_shared<Timetable const>(fixtures::corridor(
      {.trains = 1000, .stops = 15, .lines = 20, .spacing = 600, .runtime = 240, .headway = 150, .loads = true}));
  DelayConfig cfg{{{"*", 0.05, ExponentialDelay{180}}}};
  auto t0 = std::chrono::steady_clock::now();
  auto e = run_ensemble(tt, cfg, {}, 200, 77);
  double sim = seconds_since(t0);
  std::vector<std::string> metrics;
  for (auto const& m : kMetricCatalog) metrics.emplace_back(m.id);
  auto t1 = std::chrono::steady_clock::now();
  auto table = build_metric_table(e, CaseKind::train, metrics);
  table = sorted(std::move(table), "reactionary_caused", Statistic::median, SortOrder::descending);
  double tab = seconds_since(t1);
  unsigned cores = std::max(1u, std::thread::hardware_concurrency());
  std::int64_t attributed = 0;
  for (auto const& r : e.runs) attributed += r.total_attribution_seconds();
  bool ok = e.n_runs() == 200 && table.cases.size() == 1000 && attributed > 0 && sim + tab <= 30.0;
  char buf[200];
  std::snprintf(buf, sizeof buf, "200 runs x 1000 trains x 15 stops: simulate %.2f s + table %.2f s = %.2f s on %u core(s), %lld s attributed (limit 30 s)",
                sim, tab, sim + tab, cores, static_cast<long long>(attributed));
  report("scale", ok, buf);
}

void round_trips() {
  std::mt19937_64 rng(707);
  bool ok = true;
  for (int trial = 0; trial < 100; ++trial) {
    auto tt = fixtures::random_timetable(rng, {.loads = trial % 2 == 0});
    ok &= io::parse_timetable(io::write_timetable(tt)) == tt;
  }
  for (int trial = 0; trial < 30; ++trial) {
    auto in = random_instance(rng);
    auto e = fixtures::ensemble(in.tt, in.cfg, in.runs, in.seed);
    auto bytes = io::write_ensemble(e);
    auto back = io::read_ensemble(bytes);
    ok &= back == e && io::write_ensemble(back) == bytes;
  }
  for (int trial = 0; trial < 10; ++trial) {
    auto tt = fixtures::corridor({.trains = 30, .stops = 6, .lines = 2, .spacing = 200, .loads = true});
    auto e = fixtures::ensemble(tt, {{{"*", 0.2, LognormalDelay{4.5, 0.8}}}}, 6, rng());
    std::vector<std::string> all, station;
    for (auto const& m : kMetricCatalog) {
      all.emplace_back(m.id);
      if (m.station_case) station.emplace_back(m.id);
    }
    for (auto const& table : {build_metric_table(e, CaseKind::train, all), build_metric_table(e, CaseKind::station, station)}) {
      ok &= io::import_table(io::export_table(table, io::TableFormat::structured)) == table;
    }
  }
  report("round_trips", ok, "100 timetables, 30 ensembles, 20 structured tables re-import identical");
}

}  // namespace

int main() {
  baseline_zero();
  conservation();
  determinism();
  monotonicity();
  hand_traces();
  deciles();
  percentiles_and_sort();
  frequency_closure();
  scale();
  round_trips();
  std::printf("%s: %d failing\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
