#include "coopsense/cpm/codec.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <type_traits>

namespace coopsense::cpm {

namespace {

constexpr std::array<std::uint8_t, 4> kMagic{'C', 'P', 'M', '1'};
constexpr double kRhoScale = 32767.0;
constexpr std::int64_t kCentidegPerTurn = 36000;

double unit_of(ConfidenceKind kind) {
  switch (kind) {
    case ConfidenceKind::position:
      return kPositionConfidenceUnit;
    case ConfidenceKind::heading:
      return geometry::deg_to_rad(kHeadingConfidenceUnitDeg);
    case ConfidenceKind::speed:
      return kSpeedConfidenceUnit;
  }
  return 1.0;
}

// ---- field conversions shared by encode/decode/quantize -------------------

template <typename Int>
Int checked_round(double value, double scale, const char* field) {
  const double scaled = std::round(value * scale);
  if (!std::isfinite(scaled) || scaled < static_cast<double>(std::numeric_limits<Int>::min()) ||
      scaled > static_cast<double>(std::numeric_limits<Int>::max())) {
    throw EncodeError(std::string("cpm encode: ") + field + " out of range");
  }
  return static_cast<Int>(scaled);
}

std::uint16_t heading_to_centideg(double heading) {
  const auto c = static_cast<std::int64_t>(std::llround(geometry::rad_to_deg(heading) * 100.0));
  return static_cast<std::uint16_t>(((c % kCentidegPerTurn) + kCentidegPerTurn) % kCentidegPerTurn);
}

double heading_from_centideg(std::uint16_t c) { return geometry::normalize_angle(geometry::deg_to_rad(c / 100.0)); }

struct WireCovariance {
  std::uint16_t sigma_x = 1;
  std::uint16_t sigma_y = 1;
  std::int16_t rho = 0;
  std::uint16_t sigma_theta = 1;
};

WireCovariance covariance_to_wire(const Eigen::Matrix3d& cov) {
  WireCovariance w;
  const double sx = std::sqrt(std::max(cov(0, 0), 0.0));
  const double sy = std::sqrt(std::max(cov(1, 1), 0.0));
  w.sigma_x = quantize_confidence(sx, ConfidenceKind::position);
  w.sigma_y = quantize_confidence(sy, ConfidenceKind::position);
  w.sigma_theta = quantize_confidence(std::sqrt(std::max(cov(2, 2), 0.0)), ConfidenceKind::heading);
  const double rho = (sx > 0.0 && sy > 0.0) ? std::clamp(cov(0, 1) / (sx * sy), -1.0, 1.0) : 0.0;
  w.rho = static_cast<std::int16_t>(std::lround(rho * kRhoScale));
  return w;
}

Eigen::Matrix3d covariance_from_wire(const WireCovariance& w) {
  const double sx = confidence_from_code(w.sigma_x, ConfidenceKind::position);
  const double sy = confidence_from_code(w.sigma_y, ConfidenceKind::position);
  const double st = confidence_from_code(w.sigma_theta, ConfidenceKind::heading);
  const double rho = std::clamp(w.rho / kRhoScale, -1.0, 1.0);
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  cov(0, 0) = sx * sx;
  cov(1, 1) = sy * sy;
  cov(0, 1) = cov(1, 0) = rho * sx * sy;
  cov(2, 2) = st * st;
  return cov;
}

std::uint16_t speed_std_to_wire(double std_dev) {
  if (!std::isfinite(std_dev)) return kSpeedUnavailableCode;
  // The top code is reserved for "unavailable".
  return std::min<std::uint16_t>(quantize_confidence(std_dev, ConfidenceKind::speed), kSpeedUnavailableCode - 1);
}

double speed_std_from_wire(std::uint16_t code) {
  return code == kSpeedUnavailableCode ? kSpeedStdUnavailable : confidence_from_code(code, ConfidenceKind::speed);
}

// ---- byte writer / reader -------------------------------------------------

class Writer {
 public:
  template <typename T>
  void put(T value) {
    static_assert(std::is_integral_v<T>);
    using U = std::make_unsigned_t<T>;
    auto u = static_cast<U>(value);
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      bytes_.push_back(static_cast<std::uint8_t>(u & 0xFFu));
      u = static_cast<U>(u >> 8);
    }
  }
  std::vector<std::uint8_t> take() { return std::move(bytes_); }
  void reserve(std::size_t n) { bytes_.reserve(n); }
  void put_bytes(std::span<const std::uint8_t> b) { bytes_.insert(bytes_.end(), b.begin(), b.end()); }

 private:
  std::vector<std::uint8_t> bytes_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::size_t offset() const { return offset_; }
  std::size_t remaining() const { return bytes_.size() - offset_; }

  void require(std::size_t n, const char* what) const {
    if (remaining() < n) {
      throw DecodeError(DecodeErrorKind::truncated, offset_,
                        std::string(what) + " needs " + std::to_string(n) + " bytes, " +
                            std::to_string(remaining()) + " left");
    }
  }

  template <typename T>
  T get(const char* what) {
    static_assert(std::is_integral_v<T>);
    require(sizeof(T), what);
    using U = std::make_unsigned_t<T>;
    U u = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) u = static_cast<U>(u | (static_cast<U>(bytes_[offset_ + i]) << (8 * i)));
    offset_ += sizeof(T);
    return static_cast<T>(u);
  }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t offset_ = 0;
};

void put_covariance(Writer& w, const WireCovariance& c) {
  w.put(c.sigma_x);
  w.put(c.sigma_y);
  w.put(c.rho);
  w.put(c.sigma_theta);
}

WireCovariance get_covariance(Reader& r) {
  WireCovariance c;
  const std::size_t at = r.offset();
  c.sigma_x = r.get<std::uint16_t>("sigma_x");
  c.sigma_y = r.get<std::uint16_t>("sigma_y");
  c.rho = r.get<std::int16_t>("rho_xy");
  c.sigma_theta = r.get<std::uint16_t>("sigma_theta");
  if (c.sigma_x == 0 || c.sigma_y == 0 || c.sigma_theta == 0) {
    throw DecodeError(DecodeErrorKind::invalid_field, at, "confidence code 0 is not valid");
  }
  if (c.rho < -32767) throw DecodeError(DecodeErrorKind::invalid_field, at + 4, "rho_xy below -32767");
  return c;
}

std::uint16_t get_heading(Reader& r, const char* what) {
  const std::size_t at = r.offset();
  const auto c = r.get<std::uint16_t>(what);
  if (c >= kCentidegPerTurn) {
    throw DecodeError(DecodeErrorKind::invalid_field, at, std::string(what) + " exceeds 35999 centidegrees");
  }
  return c;
}

double snap(double value, double scale) { return std::round(value * scale) / scale; }

}  // namespace

std::uint16_t quantize_confidence(double std_dev, ConfidenceKind kind) {
  if (std::isnan(std_dev) || std_dev < 0.0) throw std::invalid_argument("quantize_confidence: negative or NaN std");
  const double ratio = std_dev / unit_of(kind);
  const double code = std::ceil(ratio - 1e-9);
  return static_cast<std::uint16_t>(std::clamp(code, 1.0, static_cast<double>(kMaxConfidenceCode)));
}

double confidence_from_code(std::uint16_t code, ConfidenceKind kind) { return code * unit_of(kind); }

std::string_view to_string(DecodeErrorKind kind) {
  switch (kind) {
    case DecodeErrorKind::bad_magic:
      return "bad magic";
    case DecodeErrorKind::unsupported_version:
      return "unsupported version";
    case DecodeErrorKind::truncated:
      return "truncated";
    case DecodeErrorKind::count_limit:
      return "count limit";
    case DecodeErrorKind::invalid_field:
      return "invalid field";
    case DecodeErrorKind::trailing_bytes:
      return "trailing bytes";
  }
  return "?";
}

DecodeError::DecodeError(DecodeErrorKind kind, std::size_t offset, const std::string& detail)
    : std::runtime_error("cpm decode: " + std::string(to_string(kind)) + " at byte " + std::to_string(offset) +
                         ": " + detail),
      kind_(kind),
      offset_(offset) {}

std::vector<std::uint8_t> encode(const Cpm& message) {
  message.validate();
  Writer w;
  w.reserve(kMinimalMessageSize + kStationDataSize + message.sensors.size() * kSensorRecordSize +
            message.objects.size() * kObjectRecordSize);

  const auto& m = message.management;
  w.put_bytes(kMagic);
  w.put(kWireVersion);
  w.put(m.station_id);
  w.put(static_cast<std::uint8_t>(m.station_type));
  w.put(m.generation_time_ms);
  w.put(checked_round<std::int64_t>(m.reference_position.mean.x, 1000.0, "reference x"));
  w.put(checked_round<std::int64_t>(m.reference_position.mean.y, 1000.0, "reference y"));
  w.put(heading_to_centideg(m.reference_position.mean.theta));
  put_covariance(w, covariance_to_wire(m.reference_position.cov));

  w.put(static_cast<std::uint8_t>(message.station_data ? 1 : 0));
  if (message.station_data) {
    const auto& s = *message.station_data;
    w.put(heading_to_centideg(s.heading));
    w.put(checked_round<std::uint16_t>(s.speed, 1000.0, "station speed"));
    w.put(checked_round<std::uint16_t>(s.length, 100.0, "station length"));
    w.put(checked_round<std::uint16_t>(s.width, 100.0, "station width"));
  }

  w.put(static_cast<std::uint8_t>(message.sensors.size()));
  for (const auto& s : message.sensors) {
    w.put(s.sensor_id);
    w.put(static_cast<std::uint8_t>(s.sensor_type));
    w.put(checked_round<std::uint32_t>(s.range, 100.0, "sensor range"));
    w.put(heading_to_centideg(s.fov_start));
    w.put(heading_to_centideg(s.fov_end));
  }

  w.put(static_cast<std::uint8_t>(message.objects.size()));
  for (const auto& o : message.objects) {
    const auto& pose = o.pose_in_station_frame;
    w.put(o.object_id);
    w.put(static_cast<std::uint8_t>(o.object_class));
    w.put(checked_round<std::int32_t>(pose.mean.x, 1000.0, "object x"));
    w.put(checked_round<std::int32_t>(pose.mean.y, 1000.0, "object y"));
    w.put(heading_to_centideg(pose.mean.theta));
    put_covariance(w, covariance_to_wire(pose.cov));
    w.put(checked_round<std::uint16_t>(o.speed, 1000.0, "object speed"));
    w.put(speed_std_to_wire(o.speed_std));
    w.put(checked_round<std::uint16_t>(o.length, 100.0, "object length"));
    w.put(checked_round<std::uint16_t>(o.width, 100.0, "object width"));
  }
  return w.take();
}

Cpm decode(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  Cpm message;

  r.require(kMagic.size(), "magic");
  if (!std::equal(kMagic.begin(), kMagic.end(), bytes.begin())) {
    throw DecodeError(DecodeErrorKind::bad_magic, 0, "expected \"CPM1\"");
  }
  for (std::size_t i = 0; i < kMagic.size(); ++i) r.get<std::uint8_t>("magic");

  const std::size_t version_at = r.offset();
  const auto version = r.get<std::uint8_t>("version");
  if (version != kWireVersion) {
    throw DecodeError(DecodeErrorKind::unsupported_version, version_at, "version " + std::to_string(version));
  }

  auto& m = message.management;
  m.station_id = r.get<std::uint32_t>("station_id");
  const std::size_t type_at = r.offset();
  const auto station_type = r.get<std::uint8_t>("station_type");
  if (station_type > static_cast<std::uint8_t>(StationType::vehicle)) {
    throw DecodeError(DecodeErrorKind::invalid_field, type_at, "unknown station type " + std::to_string(station_type));
  }
  m.station_type = static_cast<StationType>(station_type);
  m.generation_time_ms = r.get<std::uint64_t>("generation_time");
  m.reference_position.mean.x = r.get<std::int64_t>("reference x") / 1000.0;
  m.reference_position.mean.y = r.get<std::int64_t>("reference y") / 1000.0;
  m.reference_position.mean.theta = heading_from_centideg(get_heading(r, "reference heading"));
  m.reference_position.cov = covariance_from_wire(get_covariance(r));

  const std::size_t present_at = r.offset();
  const auto present = r.get<std::uint8_t>("station_data_present");
  if (present > 1) throw DecodeError(DecodeErrorKind::invalid_field, present_at, "station_data_present not 0/1");
  if (present == 1) {
    StationData s;
    s.heading = heading_from_centideg(get_heading(r, "station heading"));
    s.speed = r.get<std::uint16_t>("station speed") / 1000.0;
    const std::size_t dims_at = r.offset();
    s.length = r.get<std::uint16_t>("station length") / 100.0;
    s.width = r.get<std::uint16_t>("station width") / 100.0;
    if (s.length <= 0.0 || s.width <= 0.0) {
      throw DecodeError(DecodeErrorKind::invalid_field, dims_at, "station dimensions must be positive");
    }
    message.station_data = s;
  }

  const std::size_t sensor_count_at = r.offset();
  const auto sensor_count = r.get<std::uint8_t>("sensor_count");
  if (sensor_count > kMaxSensors) {
    throw DecodeError(DecodeErrorKind::count_limit, sensor_count_at,
                      std::to_string(sensor_count) + " sensors exceed the limit of " + std::to_string(kMaxSensors));
  }
  r.require(sensor_count * kSensorRecordSize, "sensor containers");
  for (std::size_t i = 0; i < sensor_count; ++i) {
    SensorInformation s;
    s.sensor_id = r.get<std::uint8_t>("sensor id");
    const std::size_t st_at = r.offset();
    const auto st = r.get<std::uint8_t>("sensor type");
    if (st > static_cast<std::uint8_t>(SensorType::fused)) {
      throw DecodeError(DecodeErrorKind::invalid_field, st_at, "unknown sensor type " + std::to_string(st));
    }
    s.sensor_type = static_cast<SensorType>(st);
    const std::size_t range_at = r.offset();
    s.range = r.get<std::uint32_t>("sensor range") / 100.0;
    if (s.range <= 0.0) throw DecodeError(DecodeErrorKind::invalid_field, range_at, "sensor range must be positive");
    s.fov_start = heading_from_centideg(get_heading(r, "fov start"));
    s.fov_end = heading_from_centideg(get_heading(r, "fov end"));
    message.sensors.push_back(s);
  }

  const auto object_count = r.get<std::uint8_t>("object_count");
  r.require(object_count * kObjectRecordSize, "perceived object containers");
  message.objects.reserve(object_count);
  for (std::size_t i = 0; i < object_count; ++i) {
    PerceivedObject o;
    o.object_id = r.get<std::uint16_t>("object id");
    const std::size_t cls_at = r.offset();
    const auto cls = r.get<std::uint8_t>("object class");
    if (cls > static_cast<std::uint8_t>(ObjectClass::unknown)) {
      throw DecodeError(DecodeErrorKind::invalid_field, cls_at, "unknown object class " + std::to_string(cls));
    }
    o.object_class = static_cast<ObjectClass>(cls);
    o.pose_in_station_frame.mean.x = r.get<std::int32_t>("object x") / 1000.0;
    o.pose_in_station_frame.mean.y = r.get<std::int32_t>("object y") / 1000.0;
    o.pose_in_station_frame.mean.theta = heading_from_centideg(get_heading(r, "object heading"));
    o.pose_in_station_frame.cov = covariance_from_wire(get_covariance(r));
    o.speed = r.get<std::uint16_t>("object speed") / 1000.0;
    o.speed_std = speed_std_from_wire(r.get<std::uint16_t>("object speed sigma"));
    o.length = r.get<std::uint16_t>("object length") / 100.0;
    o.width = r.get<std::uint16_t>("object width") / 100.0;
    message.objects.push_back(o);
  }

  if (r.remaining() != 0) {
    throw DecodeError(DecodeErrorKind::trailing_bytes, r.offset(), std::to_string(r.remaining()) + " unread bytes");
  }
  return message;
}

Cpm quantize(const Cpm& message) {
  message.validate();
  Cpm q = message;
  auto& ref = q.management.reference_position;
  // Range checks happen in encode; here the values are only snapped.
  ref.mean.x = static_cast<double>(checked_round<std::int64_t>(ref.mean.x, 1000.0, "reference x")) / 1000.0;
  ref.mean.y = static_cast<double>(checked_round<std::int64_t>(ref.mean.y, 1000.0, "reference y")) / 1000.0;
  ref.mean.theta = heading_from_centideg(heading_to_centideg(ref.mean.theta));
  ref.cov = covariance_from_wire(covariance_to_wire(ref.cov));

  if (q.station_data) {
    auto& s = *q.station_data;
    s.heading = heading_from_centideg(heading_to_centideg(s.heading));
    s.speed = snap(s.speed, 1000.0);
    s.length = snap(s.length, 100.0);
    s.width = snap(s.width, 100.0);
  }
  for (auto& s : q.sensors) {
    s.range = snap(s.range, 100.0);
    s.fov_start = heading_from_centideg(heading_to_centideg(s.fov_start));
    s.fov_end = heading_from_centideg(heading_to_centideg(s.fov_end));
  }
  for (auto& o : q.objects) {
    auto& p = o.pose_in_station_frame;
    p.mean.x = static_cast<double>(checked_round<std::int32_t>(p.mean.x, 1000.0, "object x")) / 1000.0;
    p.mean.y = static_cast<double>(checked_round<std::int32_t>(p.mean.y, 1000.0, "object y")) / 1000.0;
    p.mean.theta = heading_from_centideg(heading_to_centideg(p.mean.theta));
    p.cov = covariance_from_wire(covariance_to_wire(p.cov));
    o.speed = snap(o.speed, 1000.0);
    o.speed_std = speed_std_from_wire(speed_std_to_wire(o.speed_std));
    o.length = snap(o.length, 100.0);
    o.width = snap(o.width, 100.0);
  }
  return q;
}

}  // namespace coopsense::cpm
