// Copyright 2026 The delaysim Authors. Licensed under the Apache License,
// Version 2.0. See http://www.apache.org/licenses/LICENSE-2.0

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "delaysim/delaysim.hpp"
#include "delaysim/service/http.hpp"

namespace {

std::string read_file(std::string const& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(std::string const& path, std::string const& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << bytes;
  if (!out) throw std::runtime_error("write failed: " + path);
}

struct SortSpec {
  std::string column;
  delaysim::Statistic statistic = delaysim::Statistic::median;
  delaysim::SortOrder order = delaysim::SortOrder::descending;
};

// COLUMN[:STATISTIC[:asc|desc]]
SortSpec parse_sort(std::string const& s) {
  SortSpec spec;
  std::vector<std::string> parts;
  std::stringstream ss(s);
  for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
  if (parts.empty() || parts.size() > 3 || parts[0].empty()) {
    throw std::invalid_argument("--sort expects COLUMN[:STATISTIC[:asc|desc]]");
  }
  spec.column = parts[0];
  if (parts.size() > 1) spec.statistic = delaysim::parse_statistic(parts[1]);
  if (parts.size() > 2) spec.order = delaysim::parse_sort_order(parts[2]);
  return spec;
}

int cmd_simulate(std::string const& timetable_path, std::string const& resources_path,
                 std::string const& config_path, std::string const& params_path, long long runs,
                 std::uint64_t seed, std::string const& out_path, unsigned threads) {
  if (runs < 1) {
    std::cerr << "error: --runs must be at least 1\n";
    return 2;
  }
  auto sidecar = resources_path.empty() ? std::string{} : read_file(resources_path);
  auto tt = std::make_shared<delaysim::Timetable const>(
      delaysim::io::parse_timetable(read_file(timetable_path), sidecar));
  auto cfg = delaysim::io::parse_delay_config(read_file(config_path));
  auto params = params_path.empty() ? delaysim::SimParams{}
                                    : delaysim::io::parse_sim_params(read_file(params_path));
  auto t0 = std::chrono::steady_clock::now();
  auto e = delaysim::run_ensemble(tt, cfg, params, static_cast<std::size_t>(runs), seed,
                                  {.ensemble_id = {}, .threads = threads});
  auto t1 = std::chrono::steady_clock::now();
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + out_path);
  delaysim::io::write_ensemble(e, out);
  out.close();
  if (!out) throw std::runtime_error("write failed: " + out_path);

  std::int64_t attributed = 0;
  for (auto const& r : e.runs) attributed += r.total_attribution_seconds();
  std::cout << "ensemble " << e.ensemble_id << ": " << e.n_runs() << " runs, "
            << tt->trains.size() << " trains, " << tt->stop_count() << " stops\n"
            << "total attributed reactionary delay: " << attributed << " s\n"
            << "simulation wall time: " << std::fixed << std::setprecision(3)
            << std::chrono::duration<double>(t1 - t0).count() << " s\n";
  return 0;
}

int cmd_table(std::string const& ensemble_path, std::string const& case_kind,
              std::vector<std::string> const& metrics, std::string const& sort,
              std::string const& format, std::size_t bins, std::string const& out_path) {
  auto e = delaysim::io::read_ensemble(read_file(ensemble_path));
  auto kind = delaysim::parse_case_kind(case_kind);
  auto fmt = delaysim::io::parse_table_format(format);
  delaysim::TableOptions opts;
  opts.profile_bins = bins;
  auto table = delaysim::build_metric_table(e, kind, metrics, opts);
  if (!sort.empty()) {
    auto s = parse_sort(sort);
    table = delaysim::sorted(std::move(table), s.column, s.statistic, s.order);
  }
  auto bytes = delaysim::io::export_table(table, fmt);
  if (out_path.empty() || out_path == "-") {
    std::cout << bytes;
  } else {
    write_file(out_path, bytes);
  }
  return 0;
}

int cmd_serve(int port, std::string const& host, std::vector<std::string> const& preload) {
  delaysim::service::Service service;
  for (auto const& path : preload) {
    auto e = std::make_shared<delaysim::Ensemble const>(delaysim::io::read_ensemble(read_file(path)));
    std::cout << "loaded " << service.store_ensemble(e) << " from " << path << "\n";
  }
  httplib::Server server;
  delaysim::service::bind_routes(server, service);
  std::cout << "listening on " << host << ":" << port << std::endl;
  if (!server.listen(host, port)) {
    std::cerr << "error: cannot listen on " << host << ":" << port << "\n";
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte Carlo delay propagation over a train timetable"};
  app.require_subcommand(1);

  auto* sim = app.add_subcommand("simulate", "run an ensemble and save it");
  std::string timetable, resources, config, params, sim_out;
  long long runs = 0;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  sim->add_option("--timetable", timetable, "timetable file")->required()->check(CLI::ExistingFile);
  sim->add_option("--resources", resources, "resource sidecar file")->check(CLI::ExistingFile);
  sim->add_option("--config", config, "delay config JSON")->required()->check(CLI::ExistingFile);
  sim->add_option("--params", params, "simulation parameters JSON")->check(CLI::ExistingFile);
  sim->add_option("--runs", runs, "number of runs")->required();
  sim->add_option("--seed", seed, "master seed");
  sim->add_option("--threads", threads, "worker threads, 0 = all cores");
  sim->add_option("--out", sim_out, "ensemble output file")->required();

  auto* tab = app.add_subcommand("table", "compute a metric table from a saved ensemble");
  std::string ensemble, case_kind = "train", sort, format = "delimited", tab_out;
  std::vector<std::string> metrics;
  std::size_t bins = delaysim::kDefaultProfileBins;
  tab->add_option("--ensemble", ensemble, "ensemble file")->required()->check(CLI::ExistingFile);
  tab->add_option("--case", case_kind, "train or station");
  tab->add_option("--metrics", metrics, "comma-separated metric ids")->required()->delimiter(',');
  tab->add_option("--sort", sort, "COLUMN[:STATISTIC[:asc|desc]]");
  tab->add_option("--format", format, "delimited or structured");
  tab->add_option("--profile-bins", bins, "bins for lateness profiles")->check(CLI::PositiveNumber);
  tab->add_option("--out", tab_out, "output file, default stdout");

  auto* srv = app.add_subcommand("serve", "serve the HTTP API");
  int port = 8080;
  if (char const* env = std::getenv("DELAYSIM_PORT")) port = std::atoi(env);
  std::string host = "127.0.0.1";
  std::vector<std::string> preload;
  srv->add_option("--port", port, "listen port (default DELAYSIM_PORT or 8080)");
  srv->add_option("--host", host, "listen address");
  srv->add_option("--ensemble", preload, "ensemble files to load at start");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*sim) return cmd_simulate(timetable, resources, config, params, runs, seed, sim_out, threads);
    if (*tab) return cmd_table(ensemble, case_kind, metrics, sort, format, bins, tab_out);
    if (*srv) return cmd_serve(port, host, preload);
  } catch (std::exception const& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
