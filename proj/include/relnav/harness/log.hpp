#pragma once

#include <string>
#include <vector>

#include "relnav/harness/scenario.hpp"
#include "relnav/mission/mission.hpp"

namespace relnav::harness {

struct LogHeader {
  std::string name;
  int schema_version{1};
  std::uint64_t seed{1};
  Vec2 anchor{Vec2::Zero()};
  double control_rate{200.0};
  double tau_up{0.0};
  double tau_down{0.0};
  double r_safe{0.0};
  double d_xy_track{0.0};
  double v_loiter{0.0};
};

struct MissionLog {
  LogHeader header;
  std::vector<mission::CycleRecord> records;
  bool fault{false};
  std::string fault_message;
};

/// Runs the closed loop for the configured duration. The scenario is anchored
/// first; a plant or estimator fault aborts with the partial log retained.
MissionLog run_mission(const ScenarioConfig& cfg);

/// Newline-delimited JSON, one header line then one line per record. Wall
/// times are excluded: the stream is byte-deterministic for a fixed
/// (scenario, seed).
void write_log(const MissionLog& log, const std::string& path);
MissionLog read_log(const std::string& path);

/// Per-cycle solver wall time (ms), CSV sidecar; inherently nondeterministic.
void write_timing(const MissionLog& log, const std::string& path);
std::vector<double> read_timing(const std::string& path);

std::string record_to_json(const mission::CycleRecord& r);
std::string header_to_json(const LogHeader& h);

}  // namespace relnav::harness
