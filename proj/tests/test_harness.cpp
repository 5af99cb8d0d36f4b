#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "support.hpp"

using namespace nodal_lab;
using nlohmann::json;

namespace {

json one_task(json task) { return {{"tasks", json::array({std::move(task)})}}; }

std::string csv_of(const std::vector<ReportRow>& rows) {
  std::ostringstream os;
  emit_report(rows, ReportFormat::csv, os);
  return os.str();
}

std::string usage_path(const json& j) {
  try {
    parse_config(j);
  } catch (const UsageError& e) {
    return e.path;
  }
  return "<accepted>";
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

}  // namespace

TEST(Config, RoundTripThroughEmit) {
  const json j = {{"tasks",
                   {{{"id", "f"}, {"kind", "frequency-scan"}, {"family", {{"re_zk", {1, 2}}}},
                     {"metric", {{"family", "conformal"}, {"param", 0.3}}}},
                    {{"id", "p"}, {"kind", "partition-scan"}, {"family", {{"re_zk", {3}}}}, {"params", {{"A", 5}}}},
                    {{"id", "r"}, {"kind", "doubling-scan"},
                     {"family", {{"random", {{"seed", 3}, {"degree_cap", 4}, {"count", 2}, {"n", 3}}}}}}}},
                  {"output", {{"dir", "out"}, {"formats", {"csv", "json"}}}}};
  const auto c = parse_config(j);
  ASSERT_EQ(c.tasks.size(), 3u);
  EXPECT_EQ(parse_config(emit_config(c)), c);
  EXPECT_EQ(c.tasks[1].params.A, 5);
  EXPECT_EQ(c.tasks[2].family.dim(), 3);
}

TEST(Config, HashIsStableAndSensitive) {
  const json t = {{"id", "f"}, {"kind", "frequency-scan"}, {"family", {{"re_zk", {1}}}}};
  const auto a = parse_config(one_task(t)).tasks[0];
  EXPECT_EQ(config_hash(a), config_hash(parse_config(emit_config(parse_config(one_task(t)))).tasks[0]));
  EXPECT_EQ(config_hash(a).size(), 16u);
  json t2 = t;
  t2["params"] = {{"C0", 2.0}};
  EXPECT_NE(config_hash(a), config_hash(parse_config(one_task(t2)).tasks[0]));
}

TEST(Config, ErrorsCarryJsonPaths) {
  const json base = {{"id", "x"}, {"kind", "frequency-scan"}, {"family", {{"re_zk", {1}}}}};
  EXPECT_EQ(usage_path({{"tasks", json::array()}, {"bogus", 1}}), "$.bogus");
  EXPECT_EQ(usage_path(json::object()), "$.tasks");
  json t = base;
  t["params"] = {{"A", 3}};
  EXPECT_EQ(usage_path(one_task(t)), "$.tasks[0].params.A");
  t = base;
  t["kind"] = "nonsense";
  EXPECT_EQ(usage_path(one_task(t)), "$.tasks[0].kind");
  t = base;
  t["family"] = {{"random", {{"count", 2}}}};
  EXPECT_EQ(usage_path(one_task(t)), "$.tasks[0].family.random.seed");
  t = base;
  t["metric"] = {{"family", "bump"}, {"param", 0.9}};
  EXPECT_EQ(usage_path(one_task(t)), "$.tasks[0].metric.param");
  EXPECT_EQ(usage_path({{"tasks", {base, base}}}), "$.tasks[1].id");
  EXPECT_EQ(usage_path({{"tasks", {base}}, {"version", 2}}), "$.version");
  EXPECT_EQ(usage_path({{"tasks", {base}}, {"output", {{"formats", {"csv"}}}}}), "$.output.dir");
}

TEST(Config, LoadConfigErrors) {
  EXPECT_THROW(load_config("/nonexistent/config.json"), UsageError);
  const auto path = std::filesystem::temp_directory_path() / "nodal_lab_bad.json";
  std::ofstream(path) << "{ not json";
  EXPECT_THROW(load_config(path.string()), UsageError);
  std::filesystem::remove(path);
}

TEST(Report, EmptyTaskListGivesHeaderOnly) {
  const auto rows = run_experiment(parse_config({{"tasks", json::array()}}));
  EXPECT_TRUE(rows.empty());
  EXPECT_EQ(csv_of(rows), "config_hash,defaults_version,task,kind,member,ok,error\n");
}

TEST(Report, JsonHasOneObjectPerRow) {
  const auto rows = run_experiment(parse_config(one_task(
      {{"id", "n"}, {"kind", "nodal-measure"}, {"family", {{"re_zk", {1, 2, 3}}}}, {"params", {{"grid_n", 128}}}})));
  ASSERT_EQ(rows.size(), 3u);
  std::ostringstream os;
  emit_report(rows, ReportFormat::json, os);
  const auto j = json::parse(os.str());
  ASSERT_EQ(j.size(), 3u);
  EXPECT_EQ(j[0]["kind"], "nodal-measure");
  EXPECT_EQ(j[2]["ok"], true);
  EXPECT_NEAR(j[2]["values"]["length"].get<double>(), 3.0, 0.02);
}

TEST(Report, FrequencyScanRows) {
  const auto rows =
      run_experiment(parse_config(one_task({{"id", "f"}, {"kind", "frequency-scan"}, {"family", {{"re_zk", {3}}}}})));
  ASSERT_EQ(rows.size(), 40u);
  const auto csv = csv_of(rows);
  std::istringstream is(csv);
  std::string line;
  std::getline(is, line);
  const auto head = split_line(line);
  const auto col = std::find(head.begin(), head.end(), "N") - head.begin();
  ASSERT_LT(static_cast<std::size_t>(col), head.size());
  int n = 0;
  while (std::getline(is, line)) {
    EXPECT_NEAR(std::stod(split_line(line)[col]), 3.0, 1e-8);
    ++n;
  }
  EXPECT_EQ(n, 40);
  EXPECT_EQ(head.front(), "config_hash");
  EXPECT_EQ(head.back(), "error");
}

TEST(Report, ColumnsFollowKindTable) {
  const auto rows = run_experiment(parse_config(one_task(
      {{"id", "d"}, {"kind", "decomposition"}, {"family", {{"re_zk", {2}}}}, {"params", {{"radii", {0.3}}}}})));
  std::istringstream is(csv_of(rows));
  std::string line;
  std::getline(is, line);
  std::vector<std::string> want = common_columns();
  for (const auto& c : kind_columns(ExperimentKind::decomposition)) want.push_back(c);
  want.push_back("ok");
  want.push_back("error");
  EXPECT_EQ(split_line(line), want);
}

TEST(Report, MemberFailureBecomesRow) {
  const auto rows = run_experiment(parse_config(one_task(
      {{"id", "z"}, {"kind", "frequency-scan"}, {"family", {{"re_zk", {0, 1}}, {"scale", 0.0}}}, {"params", {{"radii", {0.1, 0.2, 0.3, 0.4, 0.5}}}}})));
  ASSERT_FALSE(rows.empty());
  EXPECT_FALSE(rows.front().ok);
  EXPECT_FALSE(rows.front().error.empty());
}

TEST(Report, DeterministicAcrossThreadCounts) {
  const auto config = parse_config(
      {{"tasks",
        {{{"id", "f"}, {"kind", "frequency-scan"}, {"family", {{"random", {{"seed", 5}, {"degree_cap", 5}, {"count", 4}}}}}},
         {{"id", "n"}, {"kind", "nodal-measure"}, {"family", {{"random", {{"seed", 6}, {"count", 3}}}}},
          {"params", {{"grid_n", 128}}}}}}});
  const char* old = std::getenv("NODAL_LAB_THREADS");
  const std::string saved = old ? old : "";
  setenv("NODAL_LAB_THREADS", "1", 1);
  const auto a = csv_of(run_experiment(config));
  setenv("NODAL_LAB_THREADS", "3", 1);
  const auto b = csv_of(run_experiment(config));
  if (old) setenv("NODAL_LAB_THREADS", saved.c_str(), 1);
  else unsetenv("NODAL_LAB_THREADS");
  EXPECT_EQ(a, b);
}

TEST(Report, SameSeedSameFamily) {
  EXPECT_EQ(random_almansi_family(9, 6, 3), random_almansi_family(9, 6, 3));
  EXPECT_NE(random_almansi_family(9, 6, 3), random_almansi_family(10, 6, 3));
}

TEST(Outputs, WritesCsvJsonAndTimings) {
  const auto dir = std::filesystem::temp_directory_path() / "nodal_lab_outputs_test";
  std::filesystem::remove_all(dir);
  const auto config = parse_config({{"tasks", {{{"id", "f"}, {"kind", "frequency-scan"}, {"family", {{"re_zk", {1}}}}}}},
                                    {"output", {{"dir", (dir / "nested").string()}, {"formats", {"csv", "json"}}, {"timings", true}}}});
  const auto rows = run_experiment(config);
  const auto written = write_outputs(config, rows);
  ASSERT_EQ(written.size(), 3u);
  for (const auto& p : written) EXPECT_TRUE(std::filesystem::exists(p)) << p;
  std::ifstream in(dir / "nested" / "f.csv");
  std::stringstream ss;
  ss << in.rdbuf();
  EXPECT_EQ(ss.str(), csv_of(rows));
  std::filesystem::remove_all(dir);
}

TEST(Defaults, TableIsVersioned) {
  const auto t = defaults::table();
  EXPECT_EQ(t["version"], defaults::kVersion);
  EXPECT_EQ(t["solver_ratio_lo"], 3.5);
  EXPECT_EQ(t["propagation_alpha_hi"], 0.6);
  EXPECT_EQ(t["nodal_grid"], 1024);
}
