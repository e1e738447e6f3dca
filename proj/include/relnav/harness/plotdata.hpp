#pragma once

#include <string>

#include "relnav/harness/log.hpp"

namespace relnav::harness {

enum class PlotPanel { Velocity, Heading, TopDown, Trace, Clearance };

PlotPanel panel_from_name(const std::string& name);  // throws on unknown

/// Writes one CSV column file for the requested panel; one row per log
/// record plus a header row.
void emit_plot_data(const MissionLog& log, PlotPanel panel,
                    const std::string& path);

}  // namespace relnav::harness
