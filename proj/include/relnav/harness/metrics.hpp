#pragma once

#include <string>
#include <vector>

#include "relnav/harness/log.hpp"

namespace relnav::harness {

/// Scalar mission metrics, computed solely from the log (re-running on the
/// same log is bit-identical).
struct MetricsReport {
  double velocity_mean{0.0};      // horizontal speed [m/s]
  double velocity_max{0.0};
  double speed_deviation_mean{0.0};  // |achieved - commanded| [m/s]
  double heading_error_max_deg{0.0};
  double tracking_error_mean{0.0};   // |horizontal distance - d_xy| [m]
  double tracking_error_max{0.0};
  double lateral_corridor_max{0.0};  // deviation from the target path [m]
  double min_clearance{0.0};         // [m]
  int mode_transitions{0};
  double solve_ms_p50{0.0};
  double solve_ms_p99{0.0};
  double effort_mean{0.0};  // |dv/dt| [m/s^2]
  double effort_max{0.0};
  double pitch_mean_deg{0.0};
  double pitch_max_deg{0.0};
};

MetricsReport compute_metrics(const MissionLog& log,
                              const std::vector<double>& solve_ms = {});

std::string metrics_to_json(const MetricsReport& m);

}  // namespace relnav::harness
