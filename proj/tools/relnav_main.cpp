#include <filesystem>
#include <future>
#include <iostream>

#include <CLI11.hpp>

#include "relnav/harness/log.hpp"
#include "relnav/harness/metrics.hpp"
#include "relnav/harness/plotdata.hpp"
#include "relnav/harness/scenario.hpp"

namespace fs = std::filesystem;
using namespace relnav;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitFault = 3;

int run_one(harness::ScenarioConfig cfg, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  const harness::MissionLog log = harness::run_mission(cfg);
  harness::write_log(log, (out_dir / "mission.ndjson").string());
  harness::write_timing(log, (out_dir / "timing.csv").string());
  std::vector<double> solve_ms;
  solve_ms.reserve(log.records.size());
  for (const auto& r : log.records) solve_ms.push_back(r.solve_wall_ms);
  std::cout << harness::metrics_to_json(
                   harness::compute_metrics(log, solve_ms))
            << std::endl;
  if (log.fault) {
    std::cerr << "mission fault: " << log.fault_message << std::endl;
    return kExitFault;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"relative-navigation quadrotor autonomy stack"};
  app.require_subcommand(1);

  std::string scenario_path, out_dir = "out", log_path, panel = "velocity";
  std::string seeds_spec = "1..4";
  std::uint64_t seed_override = 0;
  bool has_seed = false;

  auto* run = app.add_subcommand("run", "run one closed-loop mission");
  run->add_option("scenario", scenario_path, "scenario JSON file")->required();
  run->add_option("--seed", seed_override, "override the scenario seed")
      ->each([&](const std::string&) { has_seed = true; });
  run->add_option("--out", out_dir, "output directory");

  auto* metrics = app.add_subcommand("metrics", "metrics from a mission log");
  metrics->add_option("log", log_path, "mission.ndjson path")->required();

  auto* plotdata = app.add_subcommand("plotdata", "CSV panel data from a log");
  plotdata->add_option("log", log_path, "mission.ndjson path")->required();
  plotdata->add_option("--panel", panel,
                       "velocity|heading|topdown|trace|clearance");
  plotdata->add_option("--out", out_dir, "output directory");

  auto* batch = app.add_subcommand("batch", "run a range of seeds in parallel");
  batch->add_option("scenario", scenario_path, "scenario JSON file")->required();
  batch->add_option("--seeds", seeds_spec, "inclusive range, e.g. 1..8");
  batch->add_option("--out", out_dir, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      harness::ScenarioConfig cfg = harness::load_scenario(scenario_path);
      if (has_seed) {
        cfg.seed = seed_override;
        cfg.sensors.seed = seed_override;
      }
      return run_one(cfg, out_dir);
    }

    if (metrics->parsed()) {
      const auto log = harness::read_log(log_path);
      const auto timing = harness::read_timing(
          (fs::path(log_path).parent_path() / "timing.csv").string());
      std::cout << harness::metrics_to_json(
                       harness::compute_metrics(log, timing))
                << std::endl;
      return kExitOk;
    }

    if (plotdata->parsed()) {
      const auto log = harness::read_log(log_path);
      fs::create_directories(out_dir);
      harness::emit_plot_data(log, harness::panel_from_name(panel),
                              (fs::path(out_dir) / (panel + ".csv")).string());
      return kExitOk;
    }

    if (batch->parsed()) {
      const auto dots = seeds_spec.find("..");
      if (dots == std::string::npos) {
        std::cerr << "--seeds expects a..b" << std::endl;
        return kExitValidation;
      }
      const std::uint64_t a = std::stoull(seeds_spec.substr(0, dots));
      const std::uint64_t b = std::stoull(seeds_spec.substr(dots + 2));
      if (b < a) {
        std::cerr << "--seeds range is empty" << std::endl;
        return kExitValidation;
      }
      const harness::ScenarioConfig base = harness::load_scenario(scenario_path);
      std::vector<std::future<int>> jobs;
      for (std::uint64_t s = a; s <= b; ++s) {
        harness::ScenarioConfig cfg = base;
        cfg.seed = s;
        cfg.sensors.seed = s;
        const fs::path dir = fs::path(out_dir) / ("seed_" + std::to_string(s));
        jobs.push_back(std::async(std::launch::async, run_one, cfg, dir));
      }
      int rc = kExitOk;
      for (auto& j : jobs) rc = std::max(rc, j.get());
      return rc;
    }
  } catch (const harness::ParseError& e) {
    std::cerr << e.what() << std::endl;
    return kExitValidation;
  } catch (const harness::ValidationError& e) {
    std::cerr << e.what() << std::endl;
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return kExitFault;
  }
  return kExitOk;
}
