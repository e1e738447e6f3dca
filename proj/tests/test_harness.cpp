#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "relnav/harness/log.hpp"
#include "relnav/harness/metrics.hpp"
#include "relnav/harness/plotdata.hpp"
#include "relnav/harness/scenario.hpp"

using namespace relnav;
using namespace relnav::harness;

namespace {

std::string scenario_dir() {
  // Tests run from the build tree; scenarios live in the source tree.
  const char* env = std::getenv("RELNAV_SCENARIO_DIR");
  if (env) return env;
  for (const char* candidate :
       {"scenarios", "../scenarios", "../../scenarios", "../../../scenarios"}) {
    if (std::filesystem::exists(std::filesystem::path(candidate) /
                                "loiter_flat.json")) {
      return candidate;
    }
  }
  return "scenarios";
}

std::string minimal_scenario_json(double duration = 1.0) {
  std::ostringstream oss;
  oss << R"({
    "schema_version": 1,
    "name": "tiny",
    "duration_s": )"
      << duration << R"(,
    "seed": 3,
    "start": {"position": [0, 0, 10], "velocity": [0, 0, 0], "yaw": 0.0},
    "loiter": {"p_z": 10.0, "v": 0.0},
    "environment": {"ground_z": 0.0,
                    "target": {"position": [1000.0, 1000.0, 0.0]}}
  })";
  return oss.str();
}

MissionLog synthetic_log(int n, const std::function<mission::CycleRecord(int)>& make) {
  MissionLog log;
  log.header.name = "synthetic";
  log.header.control_rate = 200.0;
  for (int i = 0; i < n; ++i) log.records.push_back(make(i));
  return log;
}

}  // namespace

TEST_CASE("bundled scenarios load with the documented parameters") {
  const auto dir = scenario_dir();
  SUBCASE("urban_search") {
    const auto cfg = load_scenario(dir + "/urban_search.json");
    CHECK(cfg.mission.loiter.p_z_loiter == doctest::Approx(12.0));
    CHECK(cfg.mission.loiter.v_loiter == doctest::Approx(5.0));
    CHECK(cfg.environment.target.motion == plant::TargetMotion::Static);
  }
  SUBCASE("forest_search") {
    const auto cfg = load_scenario(dir + "/forest_search.json");
    CHECK(cfg.mission.loiter.p_z_loiter == doctest::Approx(2.0));
    CHECK(cfg.mission.loiter.v_loiter == doctest::Approx(2.0));
    CHECK(cfg.mission.loiter.psi_policy == reference::HeadingPolicy::FreeSpace);
  }
  SUBCASE("loiter_flat") {
    const auto cfg = load_scenario(dir + "/loiter_flat.json");
    CHECK(cfg.mission.loiter.v_loiter == doctest::Approx(4.0));
    CHECK(cfg.duration_s == doctest::Approx(60.0));
  }
  SUBCASE("all bundled scenarios validate") {
    for (const char* name : {"hover", "corridor", "single_sphere",
                             "loiter_flat", "urban_search", "urban_pursuit",
                             "forest_search"}) {
      CHECK_NOTHROW(load_scenario(dir + "/" + std::string(name) + ".json"));
    }
  }
}

TEST_CASE("scenario validation errors carry field paths") {
  std::string bad = R"({"schema_version": 1, "name": "x", "duration_s": 10,
    "mode_switch": {"tau_up": 9.0, "tau_down": 2.0}})";
  try {
    parse_scenario(bad);
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("tau_up") != std::string::npos);
    CHECK(msg.find("tau_down") != std::string::npos);
  }
}

TEST_CASE("zero or negative duration is rejected") {
  CHECK_THROWS_AS(parse_scenario(minimal_scenario_json(0.0)), ValidationError);
}

TEST_CASE("malformed JSON raises a parse error, not validation") {
  CHECK_THROWS_AS(parse_scenario("{ not json"), ParseError);
}

TEST_CASE("run_mission is deterministic") {
  const auto cfg = parse_scenario(minimal_scenario_json(1.0));
  const auto log1 = run_mission(cfg);
  const auto log2 = run_mission(cfg);
  REQUIRE(log1.records.size() == log2.records.size());
  std::ostringstream a, b;
  a << header_to_json(log1.header) << "\n";
  b << header_to_json(log2.header) << "\n";
  for (const auto& r : log1.records) a << record_to_json(r) << "\n";
  for (const auto& r : log2.records) b << record_to_json(r) << "\n";
  CHECK(a.str() == b.str());
}

TEST_CASE("log write/read round trip") {
  const auto cfg = parse_scenario(minimal_scenario_json(0.5));
  const auto log = run_mission(cfg);
  const std::string path = "test_roundtrip.ndjson";
  write_log(log, path);
  const auto back = read_log(path);
  REQUIRE(back.records.size() == log.records.size());
  CHECK(back.header.name == log.header.name);
  for (std::size_t i = 0; i < log.records.size(); ++i) {
    CHECK(record_to_json(back.records[i]) == record_to_json(log.records[i]));
  }
  std::remove(path.c_str());
}

TEST_CASE("metrics on synthetic logs") {
  SUBCASE("stationary hover") {
    const auto log = synthetic_log(100, [](int i) {
      mission::CycleRecord r;
      r.t = i * 0.005;
      r.cycle = i;
      r.min_clearance_true = 1e30;
      return r;
    });
    const auto m = compute_metrics(log);
    CHECK(m.velocity_mean == 0.0);
    CHECK(m.pitch_mean_deg == 0.0);
    CHECK(m.mode_transitions == 0);
  }
  SUBCASE("constant 4 m/s cruise") {
    const auto log = synthetic_log(100, [](int i) {
      mission::CycleRecord r;
      r.t = i * 0.005;
      r.v_true = Vec3(4, 0, 0);
      r.ref_v0 = Vec3(4, 0, 0);
      return r;
    });
    const auto m = compute_metrics(log);
    CHECK(m.velocity_mean == doctest::Approx(4.0));
    CHECK(m.velocity_max == doctest::Approx(4.0));
    CHECK(m.speed_deviation_mean == doctest::Approx(0.0));
  }
  SUBCASE("sinusoidal velocity: effort peak matches the analytic derivative") {
    const double A = 2.0, f = 0.5, w = 2 * M_PI * f;
    const auto log = synthetic_log(2000, [&](int i) {
      mission::CycleRecord r;
      r.t = i * 0.005;
      r.v_true = Vec3(A * std::sin(w * r.t), 0, 0);
      return r;
    });
    const auto m = compute_metrics(log);
    CHECK(m.effort_max == doctest::Approx(A * w).epsilon(0.01));
  }
}

TEST_CASE("plot data schema and row counts") {
  const auto cfg = parse_scenario(minimal_scenario_json(0.5));
  const auto log = run_mission(cfg);
  for (const char* panel :
       {"velocity", "heading", "topdown", "trace", "clearance"}) {
    const std::string path = std::string("panel_") + panel + ".csv";
    emit_plot_data(log, panel_from_name(panel), path);
    std::ifstream in(path);
    std::string line;
    int rows = -1;  // header line
    std::string header;
    while (std::getline(in, line)) {
      if (rows == -1) header = line;
      ++rows;
    }
    CHECK(rows == static_cast<int>(log.records.size()));
    if (std::string(panel) == "velocity") {
      CHECK(header == "t,v_commanded,v_true,v_est");
    }
    if (std::string(panel) == "trace") {
      CHECK(header.find("tau_up") != std::string::npos);
      CHECK(header.find("tau_down") != std::string::npos);
    }
    std::remove(path.c_str());
  }
}

TEST_CASE("anchoring subtracts the start position exactly") {
  auto cfg = parse_scenario(minimal_scenario_json(0.5));
  cfg.start.position = Vec3(100.25, -50.5, 10.0);
  cfg.environment.spheres.push_back({Vec3(112.75, -40.25, 5.0), 1.0});
  const auto a = anchored(cfg);
  CHECK(a.anchor.x() == 100.25);
  CHECK(a.anchor.y() == -50.5);
  CHECK(a.start.position.x() == 0.0);
  CHECK(a.start.position.y() == 0.0);
  CHECK(a.start.position.z() == 10.0);
  CHECK(a.environment.spheres[0].center.x() == 12.5);
  CHECK(a.environment.spheres[0].center.y() == 10.25);
}

TEST_CASE("unknown plot panel is rejected") {
  CHECK_THROWS(panel_from_name("nonsense"));
}
