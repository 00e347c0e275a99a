#pragma once

// Binary codec for CPM-style messages. Little-endian layout:
//
//   magic "CPM1" | version u8 (=1) | station_id u32 | station_type u8 |
//   generation_time_ms u64 | ref_x_mm i64 | ref_y_mm i64 |
//   ref_heading_centideg u16 | ref_sigma_x u16 | ref_sigma_y u16 |
//   ref_rho_xy i16 | ref_sigma_theta u16 | station_data_present u8 |
//   [heading_centideg u16 | speed_mm_s u16 | length_cm u16 | width_cm u16] |
//   sensor_count u8 | sensors... | object_count u8 | objects...
//
//   sensor: id u8 | type u8 | range_cm u32 | fov_start_centideg u16 | fov_end_centideg u16
//   object: id u16 | class u8 | x_mm i32 | y_mm i32 | heading_centideg u16 |
//           sigma_x u16 | sigma_y u16 | rho_xy i16 | sigma_theta u16 |
//           speed_mm_s u16 | speed_sigma_mm_s u16 | length_cm u16 | width_cm u16
//
// Sigma fields are confidence codes (see quantize_confidence); rho is scaled
// by 32767. Headings are stored in [0, 36000) centidegrees. A speed sigma code
// of 65535 means the speed is unavailable.

#include "coopsense/cpm/message.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace coopsense::cpm {

inline constexpr std::uint8_t kWireVersion = 1;
inline constexpr std::size_t kMinimalMessageSize = 47;
inline constexpr std::size_t kSensorRecordSize = 10;
inline constexpr std::size_t kObjectRecordSize = 29;
inline constexpr std::size_t kStationDataSize = 8;

inline constexpr double kPositionConfidenceUnit = 0.005;  // m
inline constexpr double kHeadingConfidenceUnitDeg = 0.05;
inline constexpr double kSpeedConfidenceUnit = 0.001;  // m/s
inline constexpr std::uint16_t kMaxConfidenceCode = 65535;
inline constexpr std::uint16_t kSpeedUnavailableCode = 65535;

enum class ConfidenceKind { position, heading, speed };

/// Smallest code whose represented standard deviation is not below std_dev,
/// clamped to [1, 65535]. Values within 1e-9 of a code boundary snap to that
/// boundary so that decoded confidences re-encode to the same code.
std::uint16_t quantize_confidence(double std_dev, ConfidenceKind kind);

/// Standard deviation represented by a code.
double confidence_from_code(std::uint16_t code, ConfidenceKind kind);

enum class DecodeErrorKind { bad_magic, unsupported_version, truncated, count_limit, invalid_field, trailing_bytes };

std::string_view to_string(DecodeErrorKind kind);

class DecodeError : public std::runtime_error {
 public:
  DecodeError(DecodeErrorKind kind, std::size_t offset, const std::string& detail);

  DecodeErrorKind kind() const { return kind_; }
  std::size_t offset() const { return offset_; }

 private:
  DecodeErrorKind kind_;
  std::size_t offset_;
};

/// A field value that the wire layout cannot represent (e.g. a speed above
/// 65.535 m/s or a position beyond the i32 range of object coordinates).
class EncodeError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Serialises a message. Throws CapacityError when a container limit is
/// exceeded and EncodeError for unrepresentable values.
std::vector<std::uint8_t> encode(const Cpm& message);

/// Parses a message. Throws DecodeError naming the byte offset of the fault.
Cpm decode(std::span<const std::uint8_t> bytes);

/// The message as it reads after an encode/decode cycle: every field snapped
/// to its wire resolution and confidences rounded up to their codes.
Cpm quantize(const Cpm& message);

}  // namespace coopsense::cpm
