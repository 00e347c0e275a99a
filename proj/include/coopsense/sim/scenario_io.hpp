#pragma once

// JSON scenario and sweep files. Headings are given in degrees (keys ending
// in _deg), everything else in SI units. Unknown keys are rejected.

#include "coopsense/sim/scenario.hpp"
#include "coopsense/sim/sweep.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

namespace coopsense::sim {

/// Syntax or schema error in a scenario or sweep file. `line` and `column`
/// are 1-based (0 when unknown); `field` is a JSON pointer.
class ScenarioLoadError : public std::runtime_error {
 public:
  ScenarioLoadError(std::string source, std::size_t line, std::size_t column, std::string field,
                    const std::string& message);

  const std::string& source() const { return source_; }
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }
  const std::string& field() const { return field_; }

 private:
  std::string source_;
  std::size_t line_;
  std::size_t column_;
  std::string field_;
};

Scenario parse_scenario(std::string_view text, const std::string& source = "<scenario>");
Scenario load_scenario(const std::filesystem::path& path);

SweepSpec parse_sweep(std::string_view text, const std::string& source = "<sweep>");
SweepSpec load_sweep(const std::filesystem::path& path);

}  // namespace coopsense::sim
