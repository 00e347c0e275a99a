#pragma once

// Command-line front end. `run` parses arguments and dispatches to the
// transform, sweep, scenario and cpm subcommands; it never throws and
// returns one of the exit codes below.

#include "coopsense/cpm/message.hpp"

#include <cstdint>
#include <ostream>
#include <span>
#include <string>

namespace coopsense::cli {

inline constexpr int kExitSuccess = 0;
inline constexpr int kExitInput = 2;  // bad arguments, unreadable files, schema errors
inline constexpr int kExitCodec = 3;  // CPM decode/encode failures

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// 16 bytes per line: offset, hex bytes, printable ASCII.
std::string hex_dump(std::span<const std::uint8_t> bytes);

/// Multi-line human-readable rendering of a decoded message.
std::string describe(const cpm::Cpm& message);

}  // namespace coopsense::cli
