#pragma once

// CSV and SVG artifacts for sweeps and scenario runs. CSV files start with a
// versioned comment line followed by a header row.

#include "coopsense/sim/engine.hpp"
#include "coopsense/sim/scenario.hpp"
#include "coopsense/sim/sweep.hpp"

#include <ostream>
#include <string>
#include <string_view>

namespace coopsense::sim {

inline constexpr std::string_view kSweepCsvVersion = "# coopsense-sweep v1";
inline constexpr std::string_view kScenarioLogVersion = "# coopsense-scenario-log v1";

struct SvgOptions {
  double grid = 10.0;              // m between grid lines
  double probability_mass = 0.95;  // ellipses drawn at this mass
  std::size_t ellipse_every = 10;  // scenario plots: draw tracks every n ticks
};

/// Columns: mode, parameter, value (degrees for heading parameters), offset,
/// object (0 = sensing station), ranges, true pose and transformed pose in
/// the receiver frame, covariance, ellipse axes/orientation/area and the
/// sampling reference when present.
void write_sweep_csv(const SweepResult& result, std::ostream& out);

/// Ellipses of one (mode, value, offset) combination in the receiver frame.
std::string sweep_svg(const SweepResult& result, SensingMode mode, std::size_t value_index, std::size_t offset_index,
                      const SvgOptions& options = {});

/// File name for sweep_svg output, unique per combination.
std::string sweep_svg_name(const SweepResult& result, SensingMode mode, std::size_t value_index,
                           std::size_t offset_index);

/// One row per (tick, track); ticks without tracks get one row with empty
/// track columns.
void write_scenario_csv(const ScenarioLog& log, std::ostream& out);

/// Overhead plot: lane map, occluders, true trajectories, track ellipses and
/// planned paths.
std::string scenario_svg(const Scenario& scenario, const ScenarioLog& log, const SvgOptions& options = {});

}  // namespace coopsense::sim
