#pragma once

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "nodal_lab/biharmonic.hpp"
#include "nodal_lab/compare.hpp"
#include "nodal_lab/decomposition.hpp"
#include "nodal_lab/defaults.hpp"
#include "nodal_lab/doubling.hpp"
#include "nodal_lab/frequency.hpp"
#include "nodal_lab/nodal.hpp"
#include "nodal_lab/parallel.hpp"
#include "nodal_lab/partition.hpp"

namespace nodal_lab {

using nlohmann::json;

enum class ExperimentKind {
  frequency_scan,
  doubling_scan,
  nodal_measure,
  partition_scan,
  propagation,
  f_recursion,
  decomposition,
  compare
};

inline const std::vector<std::pair<ExperimentKind, std::string>>& kind_names() {
  static const std::vector<std::pair<ExperimentKind, std::string>> names = {
      {ExperimentKind::frequency_scan, "frequency-scan"}, {ExperimentKind::doubling_scan, "doubling-scan"},
      {ExperimentKind::nodal_measure, "nodal-measure"},   {ExperimentKind::partition_scan, "partition-scan"},
      {ExperimentKind::propagation, "propagation"},       {ExperimentKind::f_recursion, "f-recursion"},
      {ExperimentKind::decomposition, "decomposition"},   {ExperimentKind::compare, "compare"}};
  return names;
}

inline std::string to_string(ExperimentKind k) {
  for (const auto& [kind, name] : kind_names())
    if (kind == k) return name;
  return "?";
}

struct FamilySpec {
  enum class Kind { explicit_members, random, re_zk, harmonic_model } kind = Kind::re_zk;
  std::vector<BiharmonicFunction> members;
  std::uint64_t seed = 0;
  int degree_cap = 6, count = 20, n = 2;
  std::vector<int> ks{3};
  double scale = 1.0;

  int dim() const {
    switch (kind) {
      case Kind::explicit_members: return members.empty() ? 2 : members.front().dim();
      case Kind::random: return n;
      default: return 2;
    }
  }
  bool operator==(const FamilySpec&) const = default;
};

struct RegionSpec {
  bool cube = false;
  Point center{};
  double size = 1.0;  // radius or half width

  Ball ball() const { return Ball(center, size); }
  Cube as_cube(int n) const { return Cube(n, center, size); }
  bool operator==(const RegionSpec&) const = default;
};

struct Params {
  std::vector<double> radii;
  int quadrature_degree = 0;
  double C0 = kDefaultC0;
  std::vector<double> t{2.0, 4.0};
  double eps = defaults::kEps;
  std::string norm = "l2";
  int grid_n = defaults::kNodalGrid;
  int A = defaults::kPartitionA;
  int axis = 1;
  double offset = 0.0;
  std::string rule = "half";
  double c = defaults::kContractionC;
  int depth = 1;
  int samples = defaults::kCubeSamples;
  int face_axis = 1, face_side = -1;
  std::string trapezium = "lemma42";
  std::string half_cube = "face_adjacent";
  int grid = defaults::kPropagationGrid;
  double A2 = defaults::kA2;
  std::vector<double> E_grid{1, 2, 3, 4, 5, 6, 7, 8};
  std::vector<RegionSpec> cubes;
  std::string solver = "spectral";
  int resolution = defaults::kSolverResolution;
  double slope = defaults::kCompareSlope;
  int slope_axis = 0;
  int sup_grid = 64, sup_depth = 5;

  SupRule sup_rule() const { return {sup_grid, sup_depth}; }
  bool operator==(const Params&) const = default;
};

struct Task {
  std::string id;
  ExperimentKind kind = ExperimentKind::frequency_scan;
  FamilySpec family;
  MetricFamily metric_family = MetricFamily::identity;
  double metric_param = 0.0;
  RegionSpec region;
  Params params;

  PolarMetric metric() const { return PolarMetric(family.dim(), metric_family, metric_param); }
  bool operator==(const Task&) const = default;
};

struct OutputSpec {
  std::string dir;                   // empty: no files
  std::vector<std::string> formats;  // "csv", "json"
  bool timings = false;              // writes timings.csv next to the reports
  bool operator==(const OutputSpec&) const = default;
};

struct ExperimentConfig {
  int version = 1;
  std::vector<Task> tasks;
  OutputSpec output;
  bool operator==(const ExperimentConfig&) const = default;
};

namespace config_detail {

inline void expect_object(const json& j, const std::string& path) {
  if (!j.is_object()) throw UsageError(path, "expected an object");
}

inline void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& path) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key())) throw UsageError(path + "." + it.key(), "unknown key");
}

inline double number(const json& j, const std::string& path) {
  if (!j.is_number()) throw UsageError(path, "expected a number");
  return j.get<double>();
}

inline int integer(const json& j, const std::string& path) {
  if (!j.is_number_integer()) throw UsageError(path, "expected an integer");
  return j.get<int>();
}

inline std::string string(const json& j, const std::string& path) {
  if (!j.is_string()) throw UsageError(path, "expected a string");
  return j.get<std::string>();
}

inline std::vector<double> numbers(const json& j, const std::string& path) {
  if (!j.is_array()) throw UsageError(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

inline std::vector<int> integers(const json& j, const std::string& path) {
  if (!j.is_array()) throw UsageError(path, "expected an array of integers");
  std::vector<int> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(integer(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

inline Point point(const json& j, const std::string& path) {
  const auto v = numbers(j, path);
  if (v.size() != 2 && v.size() != 3) throw UsageError(path, "expected 2 or 3 coordinates");
  return {v[0], v[1], v.size() == 3 ? v[2] : 0.0};
}

inline json point_json(const Point& p, int n) {
  return n == 3 ? json::array({p[0], p[1], p[2]}) : json::array({p[0], p[1]});
}

inline void require(bool ok, const std::string& path, const std::string& what) {
  if (!ok) throw UsageError(path, what);
}

inline RegionSpec region(const json& j, const std::string& path) {
  expect_object(j, path);
  check_keys(j, {"ball", "cube"}, path);
  require(j.size() == 1, path, "exactly one of \"ball\" or \"cube\" is required");
  RegionSpec r;
  r.cube = j.contains("cube");
  const std::string key = r.cube ? "cube" : "ball";
  const std::string size_key = r.cube ? "half_width" : "radius";
  const json& b = j[key];
  const std::string p = path + "." + key;
  expect_object(b, p);
  check_keys(b, {"center", size_key}, p);
  if (b.contains("center")) r.center = point(b["center"], p + ".center");
  require(b.contains(size_key), p + "." + size_key, "required");
  r.size = number(b[size_key], p + "." + size_key);
  require(r.size > 0.0, p + "." + size_key, "must be positive");
  return r;
}

inline json region_json(const RegionSpec& r, int n) {
  if (r.cube) return {{"cube", {{"center", point_json(r.center, n)}, {"half_width", r.size}}}};
  return {{"ball", {{"center", point_json(r.center, n)}, {"radius", r.size}}}};
}

inline FamilySpec parse_family(const json& j, const std::string& path, ExperimentKind kind) {
  expect_object(j, path);
  check_keys(j, {"explicit", "random", "re_zk", "harmonic_model", "scale"}, path);
  FamilySpec f;
  int chosen = 0;
  for (const char* k : {"explicit", "random", "re_zk", "harmonic_model"}) chosen += j.contains(k) ? 1 : 0;
  require(chosen == 1, path, "exactly one of explicit, random, re_zk, harmonic_model is required");
  if (j.contains("scale")) {
    require(j.contains("re_zk"), path + ".scale", "only valid with re_zk");
    f.scale = number(j["scale"], path + ".scale");
  }
  if (j.contains("explicit")) {
    f.kind = FamilySpec::Kind::explicit_members;
    const json& a = j["explicit"];
    require(a.is_array(), path + ".explicit", "expected an array of functions");
    for (std::size_t i = 0; i < a.size(); ++i)
      f.members.push_back(biharmonic_from_json(a[i], path + ".explicit[" + std::to_string(i) + "]"));
    for (std::size_t i = 1; i < f.members.size(); ++i)
      require(f.members[i].dim() == f.members[0].dim(), path + ".explicit", "members must share a dimension");
  } else if (j.contains("random")) {
    f.kind = FamilySpec::Kind::random;
    const json& r = j["random"];
    const std::string p = path + ".random";
    expect_object(r, p);
    check_keys(r, {"seed", "degree_cap", "count", "n"}, p);
    require(r.contains("seed"), p + ".seed", "required: random families must be seeded");
    require(r["seed"].is_number_unsigned() || (r["seed"].is_number_integer() && r["seed"].get<long long>() >= 0),
            p + ".seed", "expected a non-negative integer");
    f.seed = r["seed"].get<std::uint64_t>();
    if (r.contains("degree_cap")) f.degree_cap = integer(r["degree_cap"], p + ".degree_cap");
    if (r.contains("count")) f.count = integer(r["count"], p + ".count");
    if (r.contains("n")) f.n = integer(r["n"], p + ".n");
    require(f.degree_cap >= 0 && f.degree_cap <= kDefaultDegreeCap, p + ".degree_cap", "must lie in [0, 12]");
    require(f.count >= 0, p + ".count", "must be >= 0");
    require(f.n == 2 || f.n == 3, p + ".n", "must be 2 or 3");
  } else if (j.contains("re_zk")) {
    f.kind = FamilySpec::Kind::re_zk;
    f.ks = integers(j["re_zk"], path + ".re_zk");
    for (int k : f.ks) require(k >= 0 && k <= kDefaultDegreeCap, path + ".re_zk", "degrees must lie in [0, 12]");
  } else {
    require(kind == ExperimentKind::propagation, path + ".harmonic_model", "only valid for propagation");
    f.kind = FamilySpec::Kind::harmonic_model;
    f.ks = integers(j["harmonic_model"], path + ".harmonic_model");
    for (int m : f.ks) require(m >= 1, path + ".harmonic_model", "modes must be >= 1");
  }
  return f;
}

inline json family_json(const FamilySpec& f) {
  switch (f.kind) {
    case FamilySpec::Kind::explicit_members: {
      json a = json::array();
      for (const auto& m : f.members) a.push_back(to_json(m));
      return {{"explicit", a}};
    }
    case FamilySpec::Kind::random:
      return {{"random", {{"seed", f.seed}, {"degree_cap", f.degree_cap}, {"count", f.count}, {"n", f.n}}}};
    case FamilySpec::Kind::re_zk: return {{"re_zk", f.ks}, {"scale", f.scale}};
    case FamilySpec::Kind::harmonic_model: return {{"harmonic_model", f.ks}};
  }
  return {};
}

inline const std::set<std::string>& param_keys(ExperimentKind k) {
  static const std::map<ExperimentKind, std::set<std::string>> keys = {
      {ExperimentKind::frequency_scan, {"radii", "quadrature_degree", "C0"}},
      {ExperimentKind::doubling_scan, {"radii", "t", "eps", "norm", "quadrature_degree", "sup_grid", "sup_depth"}},
      {ExperimentKind::nodal_measure, {"grid_n", "C0"}},
      {ExperimentKind::partition_scan, {"A", "axis", "offset", "rule", "c", "depth", "samples", "sup_grid", "sup_depth"}},
      {ExperimentKind::propagation, {"face_axis", "face_side", "trapezium", "half_cube", "grid"}},
      {ExperimentKind::f_recursion, {"A2", "c", "E_grid", "grid_n", "samples", "cubes", "sup_grid", "sup_depth"}},
      {ExperimentKind::decomposition, {"radii", "solver", "resolution"}},
      {ExperimentKind::compare, {"slope", "slope_axis", "resolution"}}};
  return keys.at(k);
}

inline bool uses_metric(ExperimentKind k) {
  return k == ExperimentKind::frequency_scan || k == ExperimentKind::doubling_scan || k == ExperimentKind::decomposition;
}

inline RegionSpec default_region(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::nodal_measure: return {false, {}, 0.5};
    case ExperimentKind::partition_scan: return {true, {}, 0.4};
    case ExperimentKind::propagation: return {true, {kPi / 2, kPi / 2, 0.0}, kPi / 2};
    case ExperimentKind::f_recursion: return {true, {}, 0.1};
    default: return {false, {}, 1.0};
  }
}

inline Params params(const json& j, const std::string& path, ExperimentKind kind, int n) {
  Params p;
  if (kind == ExperimentKind::frequency_scan || kind == ExperimentKind::decomposition) p.radii = default_radius_grid();
  if (kind == ExperimentKind::doubling_scan) p.radii = {0.1, 0.2, 0.4, 0.8};
  if (kind == ExperimentKind::decomposition) p.radii = {0.2, 0.4, 0.6};
  expect_object(j, path);
  check_keys(j, param_keys(kind), path);
  auto at = [&](const char* k) { return path + "." + k; };
  if (j.contains("radii")) p.radii = numbers(j["radii"], at("radii"));
  if (j.contains("quadrature_degree")) p.quadrature_degree = integer(j["quadrature_degree"], at("quadrature_degree"));
  if (j.contains("C0")) p.C0 = number(j["C0"], at("C0"));
  if (j.contains("t")) p.t = numbers(j["t"], at("t"));
  if (j.contains("eps")) p.eps = number(j["eps"], at("eps"));
  if (j.contains("norm")) p.norm = string(j["norm"], at("norm"));
  if (j.contains("grid_n")) p.grid_n = integer(j["grid_n"], at("grid_n"));
  if (j.contains("A")) p.A = integer(j["A"], at("A"));
  if (j.contains("axis")) p.axis = integer(j["axis"], at("axis"));
  if (j.contains("offset")) p.offset = number(j["offset"], at("offset"));
  if (j.contains("rule")) p.rule = string(j["rule"], at("rule"));
  if (j.contains("c")) p.c = number(j["c"], at("c"));
  if (j.contains("depth")) p.depth = integer(j["depth"], at("depth"));
  if (j.contains("samples")) p.samples = integer(j["samples"], at("samples"));
  if (j.contains("face_axis")) p.face_axis = integer(j["face_axis"], at("face_axis"));
  if (j.contains("face_side")) p.face_side = integer(j["face_side"], at("face_side"));
  if (j.contains("trapezium")) p.trapezium = string(j["trapezium"], at("trapezium"));
  if (j.contains("half_cube")) p.half_cube = string(j["half_cube"], at("half_cube"));
  if (j.contains("grid")) p.grid = integer(j["grid"], at("grid"));
  if (j.contains("A2")) p.A2 = number(j["A2"], at("A2"));
  if (j.contains("E_grid")) p.E_grid = numbers(j["E_grid"], at("E_grid"));
  if (j.contains("cubes")) {
    require(j["cubes"].is_array(), at("cubes"), "expected an array of regions");
    for (std::size_t i = 0; i < j["cubes"].size(); ++i) {
      const std::string q = at("cubes") + "[" + std::to_string(i) + "]";
      auto r = region(j["cubes"][i], q);
      require(r.cube, q, "expected a cube");
      p.cubes.push_back(r);
    }
  }
  if (j.contains("solver")) p.solver = string(j["solver"], at("solver"));
  if (j.contains("resolution")) p.resolution = integer(j["resolution"], at("resolution"));
  if (j.contains("slope")) p.slope = number(j["slope"], at("slope"));
  if (j.contains("slope_axis")) p.slope_axis = integer(j["slope_axis"], at("slope_axis"));
  if (j.contains("sup_grid")) p.sup_grid = integer(j["sup_grid"], at("sup_grid"));
  if (j.contains("sup_depth")) p.sup_depth = integer(j["sup_depth"], at("sup_depth"));

  const auto& keys = param_keys(kind);
  auto check = [&](const char* key, bool ok, const char* what) {
    if (keys.count(key)) require(ok, at(key), what);
  };
  bool increasing = !p.radii.empty() && p.radii.front() > 0.0;
  for (std::size_t i = 1; i < p.radii.size(); ++i) increasing = increasing && p.radii[i] > p.radii[i - 1];
  check("radii", increasing, "must be positive and strictly increasing");
  if (kind == ExperimentKind::frequency_scan) check("radii", p.radii.size() >= 5, "need at least 5 radii");
  check("quadrature_degree", p.quadrature_degree >= 0, "must be >= 0");
  check("C0", p.C0 > 0.0, "must be positive");
  bool t_ok = !p.t.empty();
  for (double t : p.t) t_ok = t_ok && t > (p.norm == "sup" ? 2.0 : 1.0);
  check("t", t_ok, "each t must exceed 1 (l2) or 2 (sup)");
  check("eps", p.eps > 0.0 && p.eps < 1.0, "must lie in (0, 1)");
  check("norm", p.norm == "l2" || p.norm == "sup", "must be \"l2\" or \"sup\"");
  check("grid_n", p.grid_n >= 32, "must be >= 32");
  check("A", p.A >= 3 && p.A % 2 == 1, "must be an odd integer >= 3");
  check("axis", p.axis >= 0 && p.axis < n, "out of range");
  check("rule", p.rule == "half" || p.rule == "contraction", "must be \"half\" or \"contraction\"");
  check("c", p.c > 0.0, "must be positive");
  check("depth", p.depth >= 1 && p.depth <= 4, "must lie in [1, 4]");
  check("samples", p.samples >= 1 && p.samples <= 33, "must lie in [1, 33]");
  check("face_axis", p.face_axis == 0 || p.face_axis == 1, "must be 0 or 1");
  check("face_side", p.face_side == -1 || p.face_side == 1, "must be -1 or 1");
  check("trapezium", p.trapezium == "lemma42" || p.trapezium == "lemma43", "must be \"lemma42\" or \"lemma43\"");
  check("half_cube", p.half_cube == "face_adjacent" || p.half_cube == "concentric",
        "must be \"face_adjacent\" or \"concentric\"");
  check("grid", p.grid >= 16, "must be >= 16");
  check("A2", p.A2 > 0.0, "must be positive");
  bool e_ok = !p.E_grid.empty();
  for (std::size_t i = 1; i < p.E_grid.size(); ++i) e_ok = e_ok && p.E_grid[i] > p.E_grid[i - 1];
  check("E_grid", e_ok, "must be nonempty and strictly increasing");
  check("solver", p.solver == "spectral" || p.solver == "grid", "must be \"spectral\" or \"grid\"");
  check("resolution", p.resolution >= kMinAngularResolution && p.resolution % 8 == 0,
        "must be a multiple of 8 and >= 64");
  check("slope", std::abs(p.slope) <= 0.5, "must satisfy |slope| <= 0.5");
  check("slope_axis", p.slope_axis == 0 || p.slope_axis == 1, "must be 0 or 1");
  check("sup_grid", p.sup_grid >= 8 && p.sup_grid <= 256, "must lie in [8, 256]");
  check("sup_depth", p.sup_depth >= 0 && p.sup_depth <= 10, "must lie in [0, 10]");
  return p;
}

inline json params_json(const Params& p, ExperimentKind kind, int n) {
  json all = {{"radii", p.radii},
              {"quadrature_degree", p.quadrature_degree},
              {"C0", p.C0},
              {"t", p.t},
              {"eps", p.eps},
              {"norm", p.norm},
              {"grid_n", p.grid_n},
              {"A", p.A},
              {"axis", p.axis},
              {"offset", p.offset},
              {"rule", p.rule},
              {"c", p.c},
              {"depth", p.depth},
              {"samples", p.samples},
              {"face_axis", p.face_axis},
              {"face_side", p.face_side},
              {"trapezium", p.trapezium},
              {"half_cube", p.half_cube},
              {"grid", p.grid},
              {"A2", p.A2},
              {"E_grid", p.E_grid},
              {"solver", p.solver},
              {"resolution", p.resolution},
              {"slope", p.slope},
              {"slope_axis", p.slope_axis},
              {"sup_grid", p.sup_grid},
              {"sup_depth", p.sup_depth}};
  json cubes = json::array();
  for (const auto& c : p.cubes) cubes.push_back(region_json(c, n));
  all["cubes"] = cubes;
  json out = json::object();
  for (const auto& k : param_keys(kind)) out[k] = all[k];
  return out;
}

}  // namespace config_detail

inline Task parse_task(const json& j, const std::string& path) {
  using namespace config_detail;
  expect_object(j, path);
  check_keys(j, {"id", "kind", "family", "metric", "region", "params"}, path);
  Task t;
  require(j.contains("id"), path + ".id", "required");
  t.id = string(j["id"], path + ".id");
  require(!t.id.empty() && t.id.find_first_of("/\\,\"\n") == std::string::npos, path + ".id",
          "must be nonempty without path separators, commas or quotes");
  require(j.contains("kind"), path + ".kind", "required");
  const std::string kind = string(j["kind"], path + ".kind");
  bool known = false;
  for (const auto& [k, name] : kind_names())
    if (name == kind) t.kind = k, known = true;
  require(known, path + ".kind", "unknown experiment kind '" + kind + "'");
  require(j.contains("family"), path + ".family", "required");
  t.family = parse_family(j["family"], path + ".family", t.kind);
  const int n = t.family.dim();
  if (t.kind != ExperimentKind::frequency_scan && t.kind != ExperimentKind::doubling_scan)
    require(n == 2, path + ".family", "this experiment kind supports n = 2 only");
  if (j.contains("metric")) {
    const std::string p = path + ".metric";
    require(uses_metric(t.kind), p, "not used by this experiment kind");
    expect_object(j["metric"], p);
    check_keys(j["metric"], {"family", "param"}, p);
    require(j["metric"].contains("family"), p + ".family", "required");
    try {
      t.metric_family = metric_family_from_string(string(j["metric"]["family"], p + ".family"));
    } catch (const InvalidInput& e) {
      throw UsageError(p + ".family", e.what());
    }
    if (j["metric"].contains("param")) t.metric_param = number(j["metric"]["param"], p + ".param");
    if (t.metric_family == MetricFamily::identity) t.metric_param = 0.0;
    try {
      (void)t.metric();
    } catch (const InvalidInput& e) {
      throw UsageError(p + ".param", e.what());
    }
  }
  t.region = j.contains("region") ? region(j["region"], path + ".region") : default_region(t.kind);
  const bool want_cube = t.kind == ExperimentKind::partition_scan || t.kind == ExperimentKind::propagation ||
                         t.kind == ExperimentKind::f_recursion;
  if (t.kind != ExperimentKind::nodal_measure)
    require(t.region.cube == want_cube, path + ".region", want_cube ? "expected a cube" : "expected a ball");
  t.params = params(j.contains("params") ? j["params"] : json::object(), path + ".params", t.kind, n);
  if (t.kind == ExperimentKind::f_recursion && t.params.cubes.empty()) t.params.cubes = {t.region};
  if (t.kind == ExperimentKind::decomposition && t.params.solver == "spectral")
    require(t.metric_family == MetricFamily::identity || t.metric_param == 0.0, path + ".params.solver",
            "the spectral solver needs the identity metric");
  return t;
}

inline json emit_task(const Task& t) {
  using namespace config_detail;
  const int n = t.family.dim();
  json j = {{"id", t.id},
            {"kind", to_string(t.kind)},
            {"family", family_json(t.family)},
            {"region", region_json(t.region, n)},
            {"params", params_json(t.params, t.kind, n)}};
  if (uses_metric(t.kind)) j["metric"] = {{"family", to_string(t.metric_family)}, {"param", t.metric_param}};
  return j;
}

inline ExperimentConfig parse_config(const json& j) {
  using namespace config_detail;
  expect_object(j, "$");
  check_keys(j, {"version", "tasks", "output"}, "$");
  ExperimentConfig c;
  if (j.contains("version")) {
    c.version = integer(j["version"], "$.version");
    require(c.version == 1, "$.version", "only version 1 is supported");
  }
  require(j.contains("tasks"), "$.tasks", "required");
  require(j["tasks"].is_array(), "$.tasks", "expected an array");
  std::set<std::string> ids;
  for (std::size_t i = 0; i < j["tasks"].size(); ++i) {
    const std::string p = "$.tasks[" + std::to_string(i) + "]";
    c.tasks.push_back(parse_task(j["tasks"][i], p));
    require(ids.insert(c.tasks.back().id).second, p + ".id", "duplicate task id");
  }
  if (j.contains("output")) {
    const json& o = j["output"];
    expect_object(o, "$.output");
    check_keys(o, {"dir", "formats", "timings"}, "$.output");
    if (o.contains("dir")) c.output.dir = string(o["dir"], "$.output.dir");
    if (o.contains("formats")) {
      require(o["formats"].is_array(), "$.output.formats", "expected an array");
      for (std::size_t i = 0; i < o["formats"].size(); ++i) {
        const std::string p = "$.output.formats[" + std::to_string(i) + "]";
        const std::string f = string(o["formats"][i], p);
        require(f == "csv" || f == "json", p, "must be \"csv\" or \"json\"");
        c.output.formats.push_back(f);
      }
    }
    if (o.contains("timings")) {
      require(o["timings"].is_boolean(), "$.output.timings", "expected a boolean");
      c.output.timings = o["timings"].get<bool>();
    }
    require(c.output.formats.empty() || !c.output.dir.empty(), "$.output.dir", "required when formats are given");
  }
  return c;
}

inline json emit_config(const ExperimentConfig& c) {
  json tasks = json::array();
  for (const auto& t : c.tasks) tasks.push_back(emit_task(t));
  return {{"version", c.version},
          {"tasks", tasks},
          {"output", {{"dir", c.output.dir}, {"formats", c.output.formats}, {"timings", c.output.timings}}}};
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("", "cannot open config file '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw UsageError("$", std::string("invalid JSON: ") + e.what());
  }
  return parse_config(j);
}

inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::string config_hash(const Task& t) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(emit_task(t).dump())));
  return buf;
}

struct ReportRow {
  std::string task;
  std::string kind;
  std::string member;
  std::string config_hash;
  std::vector<std::pair<std::string, json>> values;
  bool ok = true;
  std::string error;
  double wall_time = 0.0;  // seconds; written only to the timings file

  void set(const std::string& k, json v) { values.emplace_back(k, std::move(v)); }
};

inline const std::vector<std::string>& kind_columns(ExperimentKind k) {
  static const std::map<ExperimentKind, std::vector<std::string>> cols = {
      {ExperimentKind::frequency_scan, {"center_x", "center_y", "r", "D", "H", "N", "dlogN"}},
      {ExperimentKind::doubling_scan,
       {"r", "t", "norm", "ratio", "log_ratio", "upper_quantity", "lower_quantity", "C_req", "C_prime_req", "E"}},
      {ExperimentKind::nodal_measure, {"length", "segments", "h", "N", "ratio"}},
      {ExperimentKind::partition_scan, {"level", "address", "E", "meets_hyperplane", "exceeds", "E_Q", "threshold", "T"}},
      {ExperimentKind::propagation,
       {"label", "eps", "sup_half", "sup_concentric", "sup_trapezium", "included", "flag", "alpha_emp",
        "alpha_trapezium"}},
      {ExperimentKind::f_recursion, {"E", "F_emp", "is_bad", "alpha", "C_fit"}},
      {ExperimentKind::decomposition,
       {"r", "D", "D1", "D2", "D3", "D4", "residual", "d4_ratio", "d2_ratio", "backend"}},
      {ExperimentKind::compare,
       {"omega", "distance_u", "distance_v", "ratio_u", "ratio_v", "residual_u", "residual_v", "resolution"}}};
  return cols.at(k);
}

inline const std::vector<std::string>& common_columns() {
  static const std::vector<std::string> c = {"config_hash", "defaults_version", "task", "kind", "member"};
  return c;
}

namespace report_detail {

inline std::string csv_cell(const json& v) {
  if (v.is_null()) return "";
  if (v.is_boolean()) return v.get<bool>() ? "1" : "0";
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number()) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v.get<double>());
    return buf;
  }
  std::string s = v.is_string() ? v.get<std::string>() : v.dump();
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
  return q + "\"";
}

inline json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

}  // namespace report_detail

enum class ReportFormat { csv, json };

/// CSV columns: common columns, then the kind columns in first-appearance order, then ok, error.
inline void emit_report(const std::vector<ReportRow>& rows, ReportFormat format, std::ostream& os) {
  using report_detail::csv_cell;
  if (format == ReportFormat::json) {
    json arr = json::array();
    for (const auto& r : rows) {
      json o = json::object();
      o["config_hash"] = r.config_hash;
      o["defaults_version"] = defaults::kVersion;
      o["task"] = r.task;
      o["kind"] = r.kind;
      o["member"] = r.member;
      json vals = json::object();
      for (const auto& [k, v] : r.values) vals[k] = v;
      o["values"] = vals;
      o["ok"] = r.ok;
      o["error"] = r.error;
      arr.push_back(o);
    }
    os << arr.dump(2) << '\n';
    return;
  }
  std::vector<std::string> cols = common_columns();
  std::set<std::string> seen(cols.begin(), cols.end());
  for (const auto& r : rows)
    for (const auto& [k, name] : kind_names())
      if (name == r.kind)
        for (const auto& c : kind_columns(k))
          if (seen.insert(c).second) cols.push_back(c);
  cols.push_back("ok");
  cols.push_back("error");
  for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
  os << '\n';
  for (const auto& r : rows) {
    std::map<std::string, json> m(r.values.begin(), r.values.end());
    m["config_hash"] = r.config_hash;
    m["defaults_version"] = defaults::kVersion;
    m["task"] = r.task;
    m["kind"] = r.kind;
    m["member"] = r.member;
    m["ok"] = r.ok;
    m["error"] = r.error;
    for (std::size_t i = 0; i < cols.size(); ++i) {
      const auto it = m.find(cols[i]);
      os << (i ? "," : "") << (it == m.end() ? std::string() : csv_cell(it->second));
    }
    os << '\n';
  }
}

inline void emit_report(const std::vector<ReportRow>& rows, ReportFormat format, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write report '" + path + "'");
  emit_report(rows, format, out);
  if (!out) throw Error("failed writing report '" + path + "'");
}

inline std::vector<BiharmonicFunction> family_members(const FamilySpec& f) {
  switch (f.kind) {
    case FamilySpec::Kind::explicit_members: return f.members;
    case FamilySpec::Kind::random: return random_almansi_family(f.seed, f.degree_cap, f.count, f.n);
    case FamilySpec::Kind::re_zk: {
      std::vector<BiharmonicFunction> out;
      for (int k : f.ks) out.push_back(family::re_zk(k, f.scale));
      return out;
    }
    case FamilySpec::Kind::harmonic_model: return {};
  }
  return {};
}

namespace run_detail {

using report_detail::finite_or_null;

inline std::string member_label(const FamilySpec& f, std::size_t i) {
  if (f.kind == FamilySpec::Kind::re_zk) return "re_z" + std::to_string(f.ks[i]);
  if (f.kind == FamilySpec::Kind::harmonic_model) return "m" + std::to_string(f.ks[i]);
  return "#" + std::to_string(i);
}

inline void frequency_scan(const Task& t, const BiharmonicFunction& f, std::vector<ReportRow>& out, ReportRow base) {
  const auto p = monotonicity_profile(f, t.metric(), t.region.center, t.params.radii, t.params.C0,
                                      t.params.quadrature_degree);
  for (const auto& s : p.samples) {
    ReportRow r = base;
    r.set("center_x", p.center[0]);
    r.set("center_y", p.center[1]);
    r.set("r", s.r);
    r.set("D", s.D);
    r.set("H", s.H);
    r.set("N", s.N);
    r.set("dlogN", finite_or_null(p.logderiv_at(s.r)));
    out.push_back(std::move(r));
  }
}

inline void doubling_scan(const Task& t, const BiharmonicFunction& f, std::vector<ReportRow>& out, ReportRow base) {
  const auto norm = t.params.norm == "l2" ? DoublingNorm::l2_ball : DoublingNorm::sup_ball;
  for (double tt : t.params.t)
    for (double rr : t.params.radii) {
      ReportRow r = base;
      try {
        const auto c = doubling_check(f, t.metric(), t.region.center, rr, tt, t.params.eps, norm,
                                      t.params.quadrature_degree, t.params.sup_rule());
        r.set("r", rr);
        r.set("t", tt);
        r.set("norm", t.params.norm);
        r.set("ratio", c.ratio);
        r.set("log_ratio", c.log_ratio);
        r.set("upper_quantity", c.upper_quantity);
        r.set("lower_quantity", c.lower_quantity);
        r.set("C_req", c.C_req);
        r.set("C_prime_req", c.C_prime_req);
        r.set("E", doubling_index(f, t.region.center, rr, t.params.sup_rule()));
      } catch (const Error& e) {
        r.set("r", rr);
        r.set("t", tt);
        r.ok = false;
        r.error = e.what();
      }
      out.push_back(std::move(r));
    }
}

inline void nodal_measure(const Task& t, const BiharmonicFunction& f, std::vector<ReportRow>& out, ReportRow r) {
  const Region region = t.region.cube ? Region(t.region.as_cube(2)) : Region(t.region.ball());
  const auto c = extract_nodal_curves(f, region, t.params.grid_n);
  r.set("length", c.total_length);
  r.set("segments", static_cast<long long>(c.segments.size()));
  r.set("h", c.h);
  if (!t.region.cube) {
    // the measured ball is B_{r/2} with r = 2 radius
    const double rr = 2.0 * t.region.size;
    try {
      const double N = std::max(t.params.C0, frequency_components(f, PolarMetric::euclidean(2), t.region.center, rr).N);
      r.set("N", N);
      r.set("ratio", c.total_length / (N * rr));
    } catch (const DegenerateDenominator&) {
      r.set("N", nullptr);
      r.set("ratio", nullptr);
    }
  }
  out.push_back(std::move(r));
}

inline void partition_scan(const Task& t, const BiharmonicFunction& f, std::vector<ReportRow>& out, ReportRow base) {
  const auto rule = threshold_rule_from_string(t.params.rule);
  const auto rep = dividing_scan(f, t.region.as_cube(2), t.params.A, {t.params.axis, t.params.offset}, rule,
                                 t.params.c, t.params.depth, t.params.samples, false, t.params.sup_rule());
  for (const auto& e : rep.entries) {
    ReportRow r = base;
    std::string addr;
    for (std::size_t i = 0; i < e.address.size(); ++i) addr += (i ? "-" : "") + std::to_string(e.address[i]);
    r.set("level", e.level);
    r.set("address", addr);
    r.set("E", e.E);
    r.set("meets_hyperplane", e.meets_hyperplane);
    r.set("exceeds", e.exceeds);
    r.set("E_Q", rep.E_Q);
    r.set("threshold", rep.threshold);
    r.set("T", static_cast<long long>(rep.levels.at(e.level).T));
    out.push_back(std::move(r));
  }
}

inline void decomposition(const Task& t, const BiharmonicFunction& f, std::vector<ReportRow>& out, ReportRow base) {
  const auto solver =
      t.params.solver == "spectral" ? LaplaceSolver::spectral() : LaplaceSolver::grid(t.params.resolution);
  for (double rr : t.params.radii) {
    ReportRow r = base;
    r.set("r", rr);
    try {
      const auto d = proof_decomposition(f, t.metric(), t.region.center, rr, solver);
      r.set("D", d.D);
      r.set("D1", d.D1);
      r.set("D2", d.D2);
      r.set("D3", d.D3);
      r.set("D4", d.D4);
      r.set("residual", d.residual);
      r.set("d4_ratio", d.d4_ratio);
      r.set("d2_ratio", d.d2_ratio);
      r.set("backend", d.backend);
    } catch (const Error& e) {
      r.ok = false;
      r.error = e.what();
    }
    out.push_back(std::move(r));
  }
}

inline void compare(const Task& t, const BiharmonicFunction& f, std::vector<ReportRow>& out, ReportRow r) {
  const auto op = EllipticOperator::diagonal_linear(t.params.slope, t.params.slope_axis);
  const Point c = t.region.center;
  const auto cmp = constant_coefficient_compare(
      op, t.params.resolution, [&f, c](const Point& x) { return f(x - c); },
      [&f, c](const Point& x) { return f.v(x - c); });
  r.set("omega", cmp.omega);
  r.set("distance_u", cmp.distance_u);
  r.set("distance_v", cmp.distance_v);
  r.set("ratio_u", cmp.ratio_u);
  r.set("ratio_v", cmp.ratio_v);
  r.set("residual_u", cmp.residual_u);
  r.set("residual_v", cmp.residual_v);
  r.set("resolution", cmp.resolution);
  out.push_back(std::move(r));
}

}  // namespace run_detail

/// Runs one task. Module errors become failed rows; the run continues.
inline std::vector<ReportRow> run_task(const Task& t) {
  using namespace run_detail;
  std::vector<ReportRow> out;
  ReportRow base;
  base.task = t.id;
  base.kind = to_string(t.kind);
  base.config_hash = config_hash(t);
  auto timed = [&](auto&& body, ReportRow row) {
    const auto t0 = std::chrono::steady_clock::now();
    const std::size_t first = out.size();
    try {
      body(row);
    } catch (const Error& e) {
      out.resize(first);
      row.ok = false;
      row.error = e.what();
      out.push_back(std::move(row));
    }
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    for (std::size_t i = first; i < out.size(); ++i) out[i].wall_time = dt / static_cast<double>(out.size() - first);
  };

  if (t.kind == ExperimentKind::propagation) {
    timed(
        [&](ReportRow row) {
          std::vector<PropagationMember> members;
          if (t.family.kind == FamilySpec::Kind::harmonic_model)
            for (int m : t.family.ks) members.push_back(harmonic_model_member(m));
          else {
            const auto fs = family_members(t.family);
            for (std::size_t i = 0; i < fs.size(); ++i) members.push_back(biharmonic_member(fs[i], member_label(t.family, i)));
          }
          const auto rep = cauchy_propagation_experiment(
              members, t.region.as_cube(2), {t.params.face_axis, t.params.face_side}, t.params.grid,
              trapezium_preset_from_string(t.params.trapezium),
              t.params.half_cube == "concentric" ? HalfCube::concentric : HalfCube::face_adjacent);
          for (const auto& pr : rep.rows) {
            ReportRow r = row;
            r.member = pr.label;
            r.set("label", pr.label);
            r.set("eps", pr.eps);
            r.set("sup_half", pr.sup_half);
            r.set("sup_concentric", pr.sup_concentric);
            r.set("sup_trapezium", pr.sup_trapezium);
            r.set("included", pr.included);
            r.set("flag", pr.flag);
            r.set("alpha_emp", finite_or_null(rep.alpha_emp));
            r.set("alpha_trapezium", finite_or_null(rep.alpha_trapezium));
            out.push_back(std::move(r));
          }
        },
        base);
    return out;
  }

  if (t.kind == ExperimentKind::f_recursion) {
    timed(
        [&](ReportRow row) {
          std::vector<Cube> cubes;
          for (const auto& c : t.params.cubes) cubes.push_back(c.as_cube(2));
          const auto fc = f_recursion(family_members(t.family), cubes, t.params.A2, t.params.c, t.params.E_grid,
                                      t.params.grid_n, t.params.samples, t.params.sup_rule());
          for (std::size_t i = 0; i < fc.E_grid.size(); ++i) {
            ReportRow r = row;
            r.member = "family";
            r.set("E", fc.E_grid[i]);
            r.set("F_emp", fc.F_emp[i]);
            r.set("is_bad", static_cast<bool>(fc.is_bad[i]));
            r.set("alpha", fc.alpha);
            r.set("C_fit", fc.C_fit);
            out.push_back(std::move(r));
          }
        },
        base);
    return out;
  }

  std::vector<BiharmonicFunction> members;
  try {
    members = family_members(t.family);
  } catch (const Error& e) {
    base.ok = false;
    base.error = e.what();
    out.push_back(base);
    return out;
  }
  const auto per_member = parallel_map<std::vector<ReportRow>>(members.size(), [&](std::size_t i) {
    std::vector<ReportRow> rows;
    ReportRow r = base;
    r.member = member_label(t.family, i);
    const auto& f = members[i];
    const auto t0 = std::chrono::steady_clock::now();
    try {
      switch (t.kind) {
        case ExperimentKind::frequency_scan: frequency_scan(t, f, rows, r); break;
        case ExperimentKind::doubling_scan: doubling_scan(t, f, rows, r); break;
        case ExperimentKind::nodal_measure: nodal_measure(t, f, rows, r); break;
        case ExperimentKind::partition_scan: partition_scan(t, f, rows, r); break;
        case ExperimentKind::decomposition: decomposition(t, f, rows, r); break;
        case ExperimentKind::compare: compare(t, f, rows, r); break;
        default: break;
      }
    } catch (const Error& e) {
      rows.clear();
      r.ok = false;
      r.error = e.what();
      rows.push_back(std::move(r));
    }
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    for (auto& row : rows) row.wall_time = dt / static_cast<double>(rows.size());
    return rows;
  });
  for (const auto& rows : per_member) out.insert(out.end(), rows.begin(), rows.end());
  return out;
}

inline std::vector<ReportRow> run_experiment(const ExperimentConfig& config) {
  std::vector<ReportRow> rows;
  for (const auto& t : config.tasks) {
    auto r = run_task(t);
    rows.insert(rows.end(), std::make_move_iterator(r.begin()), std::make_move_iterator(r.end()));
  }
  return rows;
}

/// Writes <dir>/<task>.csv per task and <dir>/report.json as configured; returns the paths written.
inline std::vector<std::string> write_outputs(const ExperimentConfig& config, const std::vector<ReportRow>& rows) {
  std::vector<std::string> written;
  if (config.output.dir.empty()) return written;
  const std::string dir = config.output.dir;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("cannot create '" + dir + "': " + ec.message());
  for (const auto& f : config.output.formats) {
    if (f == "csv") {
      for (const auto& t : config.tasks) {
        std::vector<ReportRow> sub;
        for (const auto& r : rows)
          if (r.task == t.id) sub.push_back(r);
        const std::string path = dir + "/" + t.id + ".csv";
        emit_report(sub, ReportFormat::csv, path);
        written.push_back(path);
      }
    } else {
      const std::string path = dir + "/report.json";
      emit_report(rows, ReportFormat::json, path);
      written.push_back(path);
    }
  }
  if (config.output.timings) {
    const std::string path = dir + "/timings.csv";
    std::ofstream out(path);
    if (!out) throw Error("cannot write '" + path + "'");
    out << "task,member,wall_time_s\n";
    char buf[40];
    for (const auto& r : rows) {
      std::snprintf(buf, sizeof buf, "%.6f", r.wall_time);
      out << r.task << ',' << r.member << ',' << buf << '\n';
    }
    written.push_back(path);
  }
  return written;
}

}  // namespace nodal_lab
