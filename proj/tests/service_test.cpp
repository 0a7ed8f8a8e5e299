// Copyright 2026 The delaysim Authors. Licensed under the Apache License,
// Version 2.0. See http://www.apache.org/licenses/LICENSE-2.0

#include <thread>

#include <gtest/gtest.h>

#include "delaysim/service/http.hpp"
#include "support/fixtures.hpp"

using namespace delaysim;
using namespace delaysim::service;
using nlohmann::json;

namespace {

json const kAtoB = {{"rules",
                     {{{"selector", "express"},
                       {"per_stop_probability", 1.0},
                       {"magnitude", {{"distribution", "empirical"}, {"points", {{300, 1.0}}}}}},
                      {{"selector", "*"},
                       {"per_stop_probability", 0.0},
                       {"magnitude", {{"distribution", "exponential"}, {"mean_seconds", 60}}}}}}};

json const kNone = {{"rules",
                     {{{"selector", "*"},
                       {"per_stop_probability", 0.0},
                       {"magnitude", {{"distribution", "exponential"}, {"mean_seconds", 60}}}}}}};

struct ServiceTest : ::testing::Test {
  Service svc;

  Response post(std::string const& path, std::string const& body) { return svc.handle("POST", path, {}, body); }
  Response get(std::string const& path, Query q = {}) { return svc.handle("GET", path, q, ""); }

  std::string add_timetable(Timetable const& tt) {
    auto r = post("/timetables", io::write_timetable(tt));
    EXPECT_EQ(r.status, 201) << r.body;
    return json::parse(r.body).at("timetable_id");
  }

  std::string simulate(std::string const& tt_id, json const& cfg, int runs, json extra = json::object()) {
    json req = {{"timetable_id", tt_id}, {"config", cfg}, {"n_runs", runs}, {"seed", 7}};
    req.update(extra);
    auto r = post("/simulations", req.dump());
    EXPECT_EQ(r.status, 201) << r.body;
    return json::parse(r.body).at("ensemble_id");
  }
};

}  // namespace

TEST_F(ServiceTest, TimetableUploadStatuses) {
  EXPECT_EQ(add_timetable(fixtures::two_trains()), "tt-1");
  EXPECT_EQ(add_timetable(fixtures::two_trains()), "tt-2");

  auto text = io::write_timetable(fixtures::two_trains());
  auto bad_time = text;
  bad_time.replace(bad_time.find("08:10:00"), 8, "31:00:00");
  auto r = post("/timetables", bad_time);
  EXPECT_EQ(r.status, 400);
  auto body = json::parse(r.body);
  EXPECT_EQ(body["diagnostics"][0]["column"], "sched_arrival");
  EXPECT_GT(body["diagnostics"][0]["line"].get<int>(), 0);

  auto dangling = text;
  dangling.replace(dangling.find(",SEG1,"), 6, ",SEG_X,");
  r = post("/timetables", dangling);
  EXPECT_EQ(r.status, 422) << r.body;
  EXPECT_NE(r.body.find("SEG_X"), std::string::npos);
  EXPECT_NE(json::parse(r.body)["diagnostics"][0]["line"], 0);
}

TEST_F(ServiceTest, SimulationStatuses) {
  auto tt = add_timetable(fixtures::corridor());
  auto req = [&](json j) { return post("/simulations", j.dump()); };
  EXPECT_EQ(req({{"timetable_id", "tt-99"}, {"config", kNone}, {"n_runs", 1}}).status, 404);
  EXPECT_EQ(req({{"timetable_id", tt}, {"config", kNone}, {"n_runs", 0}}).status, 422);
  EXPECT_EQ(req({{"timetable_id", tt}, {"config", {{"rules", json::array({{{"selector", "*"}}})}}}, {"n_runs", 1}}).status, 422);
  EXPECT_EQ(req({{"timetable_id", tt}, {"config", kNone}, {"n_runs", 1}, {"params", {{"recovery_allowance", 0.9}}}}).status, 422);
  EXPECT_EQ(req({{"timetable_id", tt}, {"n_runs", 1}}).status, 400);
  EXPECT_EQ(post("/simulations", "{nope").status, 400);
  EXPECT_EQ(post("/simulations", "[1,2]").status, 400);
  EXPECT_EQ(simulate(tt, kNone, 2), "ens-1");
  EXPECT_EQ(simulate(tt, kNone, 2, {{"params", {{"runtime_jitter", 10}}}}), "ens-2");
  EXPECT_NE(*svc.ensemble("ens-1"), *svc.ensemble("ens-2"));
}

TEST(ServiceCap, LargeSimulationsAreRefused) {
  Service svc({.event_cap = 100, .threads = 1});
  auto tt = json::parse(svc.handle("POST", "/timetables", {}, io::write_timetable(fixtures::corridor())).body);
  json req = {{"timetable_id", tt["timetable_id"]}, {"config", kNone}, {"n_runs", 3}};
  auto r = svc.handle("POST", "/simulations", {}, req.dump());
  EXPECT_EQ(r.status, 413) << r.body;  // 3 runs x 50 stops
  req["n_runs"] = 2;
  EXPECT_EQ(svc.handle("POST", "/simulations", {}, req.dump()).status, 201);
}

TEST_F(ServiceTest, TableDefaultsOnBaseline) {
  auto ens = simulate(add_timetable(fixtures::corridor({.loads = true})), kNone, 5);
  auto r = post("/tables", json{{"ensemble_id", ens}}.dump());
  ASSERT_EQ(r.status, 200) << r.body;
  auto body = json::parse(r.body);
  EXPECT_TRUE(body["deciles"].empty());
  EXPECT_EQ(body["columns"].size(), kMetricCatalog.size());
  EXPECT_FALSE(body.contains("detail"));
  for (auto const& row : body["rows"]) {
    for (std::size_t c = 0; c < row["cells"].size(); ++c) {
      auto const& cell = row["cells"][c];
      auto family = body["columns"][c]["family"];
      if (family == "scalar") {
        for (auto k : {"median", "mean", "std_dev", "p80"}) EXPECT_EQ(cell[k], 0);
      } else if (family == "profile") {
        EXPECT_EQ(cell["mean"], 0);
        for (auto const& b : cell["binned_average"]) EXPECT_EQ(b, 0);
      } else if (family == "affect") {
        EXPECT_TRUE(cell["median_contributions"].empty());
        EXPECT_EQ(cell["total"]["median"], 0);
      } else {
        auto const& counts = cell["average_counts"];
        for (std::size_t k = 0; k < counts.size(); ++k) EXPECT_EQ(counts[k], k == 1 ? 5 : 0);
      }
    }
  }
  for (auto const& col : body["columns"]) {
    if (col["family"] == "frequency") continue;
    EXPECT_TRUE(col["degenerate"].get<bool>());
    EXPECT_EQ(col["display_range"], json::array({0, 1}));
  }
  auto no_loads = simulate(add_timetable(fixtures::corridor()), kNone, 1);
  body = json::parse(post("/tables", json{{"ensemble_id", no_loads}}.dump()).body);
  EXPECT_EQ(body["columns"].size(), kMetricCatalog.size() - 2);
  body = json::parse(post("/tables", json{{"ensemble_id", no_loads}, {"case_kind", "station"}}.dump()).body);
  EXPECT_EQ(body["case_kind"], "station");
  for (auto const& col : body["columns"]) EXPECT_TRUE(find_metric(col["metric_id"].get<std::string>()).station_case);
}

TEST_F(ServiceTest, TableMatchesEngineAndIsByteStable) {
  auto tt = fixtures::corridor({.trains = 40, .stops = 6, .lines = 2, .spacing = 200});
  auto ens = simulate(add_timetable(tt), {{"rules", {{{"selector", "*"}, {"per_stop_probability", 0.2},
                                                      {"magnitude", {{"distribution", "exponential"}, {"mean_seconds", 200}}}}}}},
                      9);
  json req = {{"ensemble_id", ens},
              {"metric_ids", {"reactionary_caused", "lateness_frequency", "delay_caused_to"}},
              {"sort", {{"column", "reactionary_caused"}, {"statistic", "p80"}, {"order", "desc"}}},
              {"scale_overrides", {{"lateness_frequency", {0, 3}}}}};
  auto a = post("/tables", req.dump());
  auto b = post("/tables", req.dump());
  ASSERT_EQ(a.status, 200) << a.body;
  EXPECT_EQ(a.body, b.body);

  auto const& e = *svc.ensemble(ens);
  auto table = build_metric_table(e, CaseKind::train, {"reactionary_caused", "lateness_frequency", "delay_caused_to"});
  auto order = sort_cases(table, "reactionary_caused", Statistic::p80, SortOrder::descending);
  auto body = json::parse(a.body);
  EXPECT_EQ(body["case_order"].get<std::vector<std::string>>(), order);
  auto deciles = decile_boundaries(table, "reactionary_caused", Statistic::p80);
  EXPECT_EQ(body["deciles"].get<std::vector<std::size_t>>(), deciles);
  EXPECT_FALSE(deciles.empty());
  EXPECT_EQ(body["columns"][0]["axis_range"][1], table.columns[0].axis_range.upper);
  EXPECT_EQ(body["columns"][1]["axis_range"], json::array({0, 3}));
  auto sorted_table = apply_order(table, order);
  for (std::size_t r = 0; r < order.size(); ++r) {
    auto const& s = std::get<ScalarMetricCell>(sorted_table.cells[r][0]).summary;
    EXPECT_EQ(body["rows"][r]["cells"][0]["p80"], s.p80);
    EXPECT_EQ(body["rows"][r]["id"], order[r]);
  }

  req["sort"]["order"] = "asc";
  body = json::parse(post("/tables", req.dump()).body);
  EXPECT_TRUE(body["deciles"].empty());
}

TEST_F(ServiceTest, TableFilterAndSample) {
  auto tt = fixtures::corridor({.trains = 30, .stops = 4, .lines = 3, .spacing = 300});
  auto ens = simulate(add_timetable(tt), {{"rules", {{{"selector", "*"}, {"per_stop_probability", 0.3},
                                                      {"magnitude", {{"distribution", "exponential"}, {"mean_seconds", 300}}}}}}},
                      10);
  json base = {{"ensemble_id", ens},
               {"metric_ids", {"reactionary_suffered", "lateness_profile"}},
               {"sort", {{"column", "reactionary_suffered"}, {"statistic", "median"}, {"order", "desc"}}}};
  auto full = json::parse(post("/tables", base.dump()).body);

  auto filtered_req = base;
  filtered_req["filter"] = {{"categories", {"express"}}, {"time_window", {"06:00:00", "07:00:00"}}};
  auto filtered = json::parse(post("/tables", filtered_req.dump()).body);
  std::vector<std::string> expect;
  for (auto const& id : full["case_order"]) {
    auto const& t = tt.trains[tt.train_index().at(id.get<std::string>())];
    bool active = std::any_of(t.stops.begin(), t.stops.end(), [](auto const& s) {
      return s.arrival() < 7 * 3600 && std::max(s.sched_departure, s.arrival() + 1) > 6 * 3600;
    });
    if (t.category == "express" && active) expect.push_back(id);
  }
  EXPECT_EQ(filtered["case_order"].get<std::vector<std::string>>(), expect);
  EXPECT_EQ(filtered["columns"], full["columns"]);
  filtered_req["filter"]["time_window"] = {6 * 3600, 7 * 3600};
  EXPECT_EQ(json::parse(post("/tables", filtered_req.dump()).body)["case_order"], filtered["case_order"]);

  auto sampled_req = base;
  sampled_req["sample"] = {{"max_rows", 10}, {"max_runs", 4}};
  auto sampled = json::parse(post("/tables", sampled_req.dump()).body);
  EXPECT_EQ(sampled["sampling"]["row_stride"], 3);
  EXPECT_EQ(sampled["sampling"]["run_stride"], 3);
  EXPECT_EQ(sampled["sampling"]["runs"], json::array({0, 3, 6, 9}));
  ASSERT_EQ(sampled["detail"].size(), 10u);
  EXPECT_EQ(sampled["detail"][1][0]["per_run_values"].size(), 4u);
  EXPECT_EQ(sampled["rows"], full["rows"]);

  auto bad = base;
  bad["sort"]["column"] = "primary_delay";
  EXPECT_EQ(post("/tables", bad.dump()).status, 422);
  bad = base;
  bad["metric_ids"] = {"nonsense"};
  EXPECT_EQ(post("/tables", bad.dump()).status, 422);
  bad = base;
  bad["case_kind"] = "station";
  EXPECT_EQ(post("/tables", bad.dump()).status, 422);
  bad = base;
  bad["sort"]["statistic"] = "mode";
  EXPECT_EQ(post("/tables", bad.dump()).status, 422);
  bad = base;
  bad["sample"] = {{"max_rows", 0}, {"max_runs", 1}};
  EXPECT_EQ(post("/tables", bad.dump()).status, 422);
  bad = base;
  bad["filter"] = {{"time_window", {"bad"}}};
  EXPECT_EQ(post("/tables", bad.dump()).status, 400);
  bad = base;
  bad["ensemble_id"] = "ens-404";
  EXPECT_EQ(post("/tables", bad.dump()).status, 404);
  EXPECT_EQ(post("/tables", "{").status, 400);
}

TEST_F(ServiceTest, CellHistogramAndAffecting) {
  auto ens = simulate(add_timetable(fixtures::two_trains(360)), kAtoB, 1);
  auto r = get("/ensembles/" + ens + "/cases/B/affecting", {{"direction", "suffers_delay_from"}});
  ASSERT_EQ(r.status, 200) << r.body;
  auto body = json::parse(r.body);
  EXPECT_EQ(body["involved"], (json{{"A", {{{"run", 0}, {"seconds", 60}}}}}));
  EXPECT_EQ(body["highlight"], json::array({"B", "A"}));
  r = get("/ensembles/" + ens + "/cases/A/affecting", {{"direction", "causes_delay_to"}});
  EXPECT_EQ(json::parse(r.body)["involved"], (json{{"B", {{{"run", 0}, {"seconds", 60}}}}}));
  EXPECT_EQ(get("/ensembles/" + ens + "/cases/A/affecting", {{"direction", "sideways"}}).status, 422);
  EXPECT_EQ(get("/ensembles/" + ens + "/cases/Q/affecting").status, 404);

  r = get("/ensembles/" + ens + "/cases/B/metrics/reactionary_suffered");
  ASSERT_EQ(r.status, 200) << r.body;
  body = json::parse(r.body);
  EXPECT_EQ(body["cell"]["per_run_values"], json::array({60}));
  EXPECT_EQ(body["family"], "scalar");
  r = get("/ensembles/" + ens + "/cases/Y/metrics/reactionary_suffered", {{"case_kind", "station"}});
  EXPECT_EQ(json::parse(r.body)["cell"]["per_run_values"], json::array({0}));
  r = get("/ensembles/" + ens + "/cases/X/metrics/reactionary_suffered", {{"case_kind", "station"}});
  EXPECT_EQ(json::parse(r.body)["cell"]["per_run_values"], json::array({60}));
  EXPECT_EQ(get("/ensembles/" + ens + "/cases/Q/metrics/reactionary_suffered").status, 404);
  EXPECT_EQ(get("/ensembles/" + ens + "/cases/B/metrics/bogus").status, 422);
  EXPECT_EQ(get("/ensembles/" + ens + "/cases/X/metrics/delay_caused_to", {{"case_kind", "station"}}).status, 422);

  r = get("/ensembles/" + ens + "/histogram");
  ASSERT_EQ(r.status, 200);
  body = json::parse(r.body);
  EXPECT_EQ(body["bins"].size(), 48u);
  EXPECT_EQ(body["bins"][16]["counts"], (json{{"express", 1}, {"stopping", 1}}));
  EXPECT_EQ(body["bins"][16]["start"], "08:00:00");
  EXPECT_EQ(json::parse(get("/ensembles/" + ens + "/histogram", {{"bin_minutes", "60"}}).body)["bins"].size(), 24u);
  EXPECT_EQ(get("/ensembles/" + ens + "/histogram", {{"bin_minutes", "7"}}).status, 422);
  EXPECT_EQ(get("/ensembles/" + ens + "/histogram", {{"bin_minutes", "x"}}).status, 400);

  EXPECT_EQ(get("/ensembles/ens-404/histogram").status, 404);
  EXPECT_EQ(get("/ensembles/ens-404/cases/B/metrics/primary_delay").status, 404);
  EXPECT_EQ(get("/nowhere").status, 404);
}

TEST_F(ServiceTest, StoredEnsemblesAreUnchangedByQueries) {
  auto ens = simulate(add_timetable(fixtures::two_trains(360)), kAtoB, 3);
  auto before = io::write_ensemble(*svc.ensemble(ens));
  post("/tables", json{{"ensemble_id", ens}, {"sample", {{"max_rows", 1}, {"max_runs", 1}}}}.dump());
  get("/ensembles/" + ens + "/cases/B/affecting");
  EXPECT_EQ(io::write_ensemble(*svc.ensemble(ens)), before);
  auto preload = std::make_shared<Ensemble const>(io::read_ensemble(before));
  EXPECT_THROW(svc.store_ensemble(preload), LookupError);  // id already taken
}

TEST(Http, RoundTrip) {
  Service svc;
  httplib::Server server;
  bind_routes(server, svc);
  int port = server.bind_to_any_port("127.0.0.1");
  ASSERT_GT(port, 0);
  std::thread t([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  httplib::Client client("127.0.0.1", port);
  auto res = client.Post("/timetables", io::write_timetable(fixtures::two_trains(360)), "text/plain");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 201);
  auto tt = json::parse(res->body)["timetable_id"];
  res = client.Post("/simulations", json{{"timetable_id", tt}, {"config", kAtoB}, {"n_runs", 2}}.dump(),
                    "application/json");
  ASSERT_TRUE(res);
  ASSERT_EQ(res->status, 201) << res->body;
  auto ens = json::parse(res->body)["ensemble_id"].get<std::string>();
  res = client.Get("/ensembles/" + ens + "/cases/B/affecting?direction=suffers_delay_from");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  EXPECT_EQ(json::parse(res->body)["involved"]["A"].size(), 2u);
  EXPECT_EQ(res->get_header_value("Content-Type"), "application/json");
  res = client.Get("/ensembles/none/histogram");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 404);

  server.stop();
  t.join();
}
