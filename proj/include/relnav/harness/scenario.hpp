#pragma once

#include <stdexcept>
#include <string>

#include "relnav/mission/mission.hpp"

namespace relnav::harness {

/// Malformed file (bad JSON).
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Well-formed file violating an invariant; the message carries field paths.
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// One file fully defines an experiment; only the seed and output directory
/// may be overridden from the CLI.
struct ScenarioConfig {
  std::string name;
  int schema_version{1};
  double duration_s{60.0};
  std::uint64_t seed{1};

  plant::QuadrotorParams vehicle;
  plant::SensorSuite sensors;
  plant::Environment environment;  // absolute coordinates as parsed
  plant::TrueState start;          // absolute
  mission::MissionConfig mission;

  /// Horizontal anchor subtracted before simulation (loiter-anchored world
  /// surrogate frame). Set by anchored().
  Vec2 anchor{Vec2::Zero()};
};

ScenarioConfig load_scenario(const std::string& path);
ScenarioConfig parse_scenario(const std::string& json_text);

/// Shifts every absolute position so the start sits at the horizontal origin.
/// All downstream computation is translation-covariant by construction.
ScenarioConfig anchored(const ScenarioConfig& cfg);

}  // namespace relnav::harness
