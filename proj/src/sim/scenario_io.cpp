#include "coopsense/sim/scenario_io.hpp"

#include "coopsense/geometry/pose.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <iterator>
#include <limits>
#include <map>
#include <sstream>

namespace coopsense::sim {

using json = nlohmann::json;
using geometry::deg_to_rad;

ScenarioLoadError::ScenarioLoadError(std::string source, std::size_t line, std::size_t column, std::string field,
                                     const std::string& message)
    : std::runtime_error(source + ":" + std::to_string(line) + ":" + std::to_string(column) +
                         (field.empty() ? std::string() : ": field '" + field + "'") + ": " + message),
      source_(std::move(source)),
      line_(line),
      column_(column),
      field_(std::move(field)) {}

namespace {

// Input iterator that counts consumed characters so SAX events can be mapped
// back to source positions.
struct CountingIterator {
  using iterator_category = std::input_iterator_tag;
  using value_type = char;
  using difference_type = std::ptrdiff_t;
  using pointer = const char*;
  using reference = const char&;

  const char* p = nullptr;
  std::size_t* consumed = nullptr;

  reference operator*() const { return *p; }
  CountingIterator& operator++() {
    ++p;
    ++*consumed;
    return *this;
  }
  CountingIterator operator++(int) {
    CountingIterator old = *this;
    ++*this;
    return old;
  }
  bool operator==(const CountingIterator& o) const { return p == o.p; }
  bool operator!=(const CountingIterator& o) const { return p != o.p; }
};

std::string escape_pointer_token(const std::string& key) {
  std::string out;
  for (const char c : key) {
    if (c == '~') {
      out += "~0";
    } else if (c == '/') {
      out += "~1";
    } else {
      out += c;
    }
  }
  return out;
}

struct Position {
  std::size_t line = 0;
  std::size_t column = 0;
};

class LineTable {
 public:
  explicit LineTable(std::string_view text) {
    starts_.push_back(0);
    for (std::size_t i = 0; i < text.size(); ++i) {
      if (text[i] == '\n') starts_.push_back(i + 1);
    }
  }

  Position at(std::size_t offset) const {
    const auto it = std::upper_bound(starts_.begin(), starts_.end(), offset);
    const auto line = static_cast<std::size_t>(it - starts_.begin());
    return {line, offset - starts_[line - 1] + 1};
  }

 private:
  std::vector<std::size_t> starts_;
};

// Records the source position of every JSON pointer in a document.
class PositionIndex {
 public:
  using number_integer_t = json::number_integer_t;
  using number_unsigned_t = json::number_unsigned_t;
  using number_float_t = json::number_float_t;
  using string_t = json::string_t;
  using binary_t = json::binary_t;

  PositionIndex(const LineTable& lines, const std::size_t& consumed) : lines_(lines), consumed_(consumed) {}

  bool null() { return value(); }
  bool boolean(bool) { return value(); }
  bool number_integer(number_integer_t) { return value(); }
  bool number_unsigned(number_unsigned_t) { return value(); }
  bool number_float(number_float_t, const string_t&) { return value(); }
  bool string(string_t&) { return value(); }
  bool binary(binary_t&) { return value(); }
  bool start_object(std::size_t) { return open(false); }
  bool start_array(std::size_t) { return open(true); }
  bool end_object() { return close(); }
  bool end_array() { return close(); }
  bool key(string_t& k) {
    stack_.back().key = k;
    positions_.emplace(stack_.back().path + "/" + escape_pointer_token(k), here());
    return true;
  }
  bool parse_error(std::size_t, const std::string&, const nlohmann::detail::exception&) { return false; }

  const std::map<std::string, Position>& positions() const { return positions_; }

 private:
  struct Frame {
    bool array = false;
    std::size_t index = 0;
    std::string key;
    std::string path;
  };

  Position here() const { return lines_.at(consumed_ == 0 ? 0 : consumed_ - 1); }

  std::string next_path() {
    if (stack_.empty()) return "";
    Frame& top = stack_.back();
    if (top.array) return top.path + "/" + std::to_string(top.index++);
    return top.path + "/" + escape_pointer_token(top.key);
  }

  bool value() {
    positions_.emplace(next_path(), here());
    return true;
  }
  bool open(bool array) {
    std::string path = next_path();
    positions_.emplace(path, here());
    stack_.push_back({array, 0, "", std::move(path)});
    return true;
  }
  bool close() {
    stack_.pop_back();
    return true;
  }

  const LineTable& lines_;
  const std::size_t& consumed_;
  std::vector<Frame> stack_;
  std::map<std::string, Position> positions_;
};

class Document {
 public:
  Document(std::string_view text, std::string source) : source_(std::move(source)), lines_(text) {
    try {
      root_ = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
      const auto pos = lines_.at(e.byte == 0 ? 0 : e.byte - 1);
      throw ScenarioLoadError(source_, pos.line, pos.column, "", "syntax error: " + std::string(e.what()));
    }
    std::size_t consumed = 0;
    PositionIndex index(lines_, consumed);
    json::sax_parse(CountingIterator{text.data(), &consumed}, CountingIterator{text.data() + text.size(), &consumed},
                    &index);
    positions_ = index.positions();
  }

  const json& root() const { return root_; }

  [[noreturn]] void fail(const std::string& pointer, const std::string& message) const {
    std::string p = pointer;
    while (true) {
      const auto it = positions_.find(p);
      if (it != positions_.end()) throw ScenarioLoadError(source_, it->second.line, it->second.column, pointer, message);
      if (p.empty()) break;
      p = p.substr(0, p.rfind('/'));
    }
    throw ScenarioLoadError(source_, 0, 0, pointer, message);
  }

 private:
  std::string source_;
  LineTable lines_;
  json root_;
  std::map<std::string, Position> positions_;
};

class Node {
 public:
  Node(const Document& doc, const json& value, std::string pointer)
      : doc_(&doc), value_(&value), pointer_(std::move(pointer)) {}

  const std::string& pointer() const { return pointer_; }
  const json& raw() const { return *value_; }
  [[noreturn]] void fail(const std::string& message) const { doc_->fail(pointer_, message); }

  /// Requires an object whose keys all appear in `allowed`.
  const Node& object(std::initializer_list<std::string_view> allowed) const {
    if (!value_->is_object()) fail("expected an object");
    for (const auto& [k, v] : value_->items()) {
      if (std::find(allowed.begin(), allowed.end(), k) == allowed.end()) {
        doc_->fail(pointer_ + "/" + escape_pointer_token(k), "unknown field");
      }
    }
    return *this;
  }

  bool has(const char* key) const { return value_->is_object() && value_->contains(key); }

  Node at(const char* key) const {
    if (!has(key)) fail(std::string("missing required field '") + key + "'");
    return {*doc_, (*value_)[key], pointer_ + "/" + escape_pointer_token(key)};
  }

  std::vector<Node> items() const {
    if (!value_->is_array()) fail("expected an array");
    std::vector<Node> out;
    for (std::size_t i = 0; i < value_->size(); ++i) out.emplace_back(*doc_, (*value_)[i], pointer_ + "/" + std::to_string(i));
    return out;
  }

  double number() const {
    if (!value_->is_number()) fail("expected a number");
    const double v = value_->get<double>();
    if (!std::isfinite(v)) fail("expected a finite number");
    return v;
  }
  double non_negative() const {
    const double v = number();
    if (v < 0.0) fail("must be >= 0");
    return v;
  }
  double positive() const {
    const double v = number();
    if (!(v > 0.0)) fail("must be > 0");
    return v;
  }
  double probability() const {
    const double v = number();
    if (!(v >= 0.0 && v <= 1.0)) fail("must lie in [0, 1]");
    return v;
  }
  std::int64_t integer(std::int64_t lo, std::int64_t hi) const {
    if (!value_->is_number_integer()) fail("expected an integer");
    const auto v = value_->get<std::int64_t>();
    if (v < lo || v > hi) fail("must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    return v;
  }
  std::uint64_t unsigned_integer() const {
    if (!value_->is_number_unsigned()) fail("expected a non-negative integer");
    return value_->get<std::uint64_t>();
  }
  std::string string() const {
    if (!value_->is_string()) fail("expected a string");
    return value_->get<std::string>();
  }
  bool boolean() const {
    if (!value_->is_boolean()) fail("expected true or false");
    return value_->get<bool>();
  }
  Point point() const {
    if (!value_->is_array() || value_->size() != 2) fail("expected [x, y]");
    const auto xs = items();
    return {xs[0].number(), xs[1].number()};
  }
  std::vector<Point> points(std::size_t min_count) const {
    std::vector<Point> out;
    for (const auto& n : items()) out.push_back(n.point());
    if (out.size() < min_count) fail("expected at least " + std::to_string(min_count) + " points");
    return out;
  }
  Pose2 pose() const {
    object({"x", "y", "heading_deg"});
    return {at("x").number(), at("y").number(),
            has("heading_deg") ? geometry::normalize_angle(deg_to_rad(at("heading_deg").number())) : 0.0};
  }

 private:
  const Document* doc_;
  const json* value_;
  std::string pointer_;
};

template <typename T>
void read(const Node& n, const char* key, T& out, double (Node::*get)() const) {
  if (n.has(key)) out = (n.at(key).*get)();
}

void read_deg(const Node& n, const char* key, double& out) {
  if (n.has(key)) out = deg_to_rad(n.at(key).non_negative());
}

planner::VehicleParams read_vehicle(const Node& n) {
  n.object({"wheelbase", "max_steer_deg", "length", "width", "max_speed"});
  planner::VehicleParams v;
  read(n, "wheelbase", v.wheelbase, &Node::positive);
  if (n.has("max_steer_deg")) {
    const Node s = n.at("max_steer_deg");
    const double deg = s.positive();
    if (deg >= 90.0) s.fail("must be below 90");
    v.max_steer = deg_to_rad(deg);
  }
  read(n, "length", v.length, &Node::positive);
  read(n, "width", v.width, &Node::positive);
  read(n, "max_speed", v.max_speed, &Node::positive);
  return v;
}

StationSpec read_station(const Node& n) {
  n.object({"name", "id", "role", "type", "pose", "speed", "position_std", "heading_std_deg", "sensor_range", "goal",
            "vehicle"});
  StationSpec s;
  if (n.has("name")) s.name = n.at("name").string();
  s.id = static_cast<std::uint32_t>(n.at("id").integer(0, std::numeric_limits<std::uint32_t>::max()));
  const Node role = n.at("role");
  const std::string r = role.string();
  if (r == "sensing") {
    s.role = StationRole::sensing;
  } else if (r == "receiving") {
    s.role = StationRole::receiving;
  } else {
    role.fail("expected 'sensing' or 'receiving'");
  }
  const Node type = n.at("type");
  const auto t = cpm::parse_station_type(type.string());
  if (!t) type.fail("expected 'IRSU' or 'CAV'");
  s.type = *t;
  s.pose = n.at("pose").pose();
  read(n, "speed", s.speed, &Node::non_negative);
  read(n, "position_std", s.position_std, &Node::non_negative);
  read_deg(n, "heading_std_deg", s.heading_std);
  read(n, "sensor_range", s.sensor_range, &Node::positive);
  if (n.has("goal")) s.goal = n.at("goal").pose();
  if (n.has("vehicle")) s.vehicle = read_vehicle(n.at("vehicle"));
  return s;
}

PerceptionNoise read_noise(const Node& n, PerceptionNoise noise) {
  read(n, "position_std", noise.position_std, &Node::non_negative);
  read_deg(n, "heading_std_deg", noise.heading_std);
  if (n.has("speed_std")) {
    const Node s = n.at("speed_std");
    noise.speed_std = s.raw().is_null() ? std::numeric_limits<double>::infinity() : s.non_negative();
  }
  return noise;
}

Trajectory read_trajectory(const Node& n) {
  n.object({"type", "point", "heading_deg", "points", "speed", "start_time", "center", "half_width", "half_height"});
  Trajectory t;
  const Node type = n.at("type");
  const std::string kind = type.string();
  if (kind == "fixed") {
    t.kind = Trajectory::Kind::fixed;
    t.points = {n.at("point").point()};
    if (n.has("heading_deg")) t.heading = deg_to_rad(n.at("heading_deg").number());
  } else if (kind == "waypoints") {
    t.kind = Trajectory::Kind::waypoints;
    t.points = n.at("points").points(2);
    t.speed = n.at("speed").non_negative();
    read(n, "start_time", t.start_time, &Node::number);
  } else if (kind == "figure_eight") {
    t.kind = Trajectory::Kind::figure_eight;
    t.center = n.at("center").point();
    t.speed = n.at("speed").non_negative();
    t.half_width = n.at("half_width").positive();
    t.half_height = n.at("half_height").positive();
  } else {
    type.fail("expected 'fixed', 'waypoints' or 'figure_eight'");
  }
  return t;
}

RoadUserSpec read_road_user(const Node& n) {
  n.object({"id", "class", "trajectory", "position_std", "heading_std_deg", "speed_std", "length", "width"});
  RoadUserSpec u;
  u.id = static_cast<std::uint16_t>(n.at("id").integer(0, 0xEFFF));
  const Node cls = n.at("class");
  const auto c = cpm::parse_object_class(cls.string());
  if (!c) cls.fail("expected 'pedestrian', 'car', 'cyclist' or 'unknown'");
  u.object_class = *c;
  u.trajectory = read_trajectory(n.at("trajectory"));
  u.perception = read_noise(n, u.perception);
  read(n, "length", u.length, &Node::positive);
  read(n, "width", u.width, &Node::positive);
  return u;
}

planner::LaneMap read_lane_map(const Node& n) {
  n.object({"drivable", "lanes", "dividing_lines", "crossing_zones", "stop_lines"});
  planner::LaneMap m;
  if (n.has("drivable")) {
    for (const auto& poly : n.at("drivable").items()) m.drivable.push_back(poly.points(3));
  }
  if (n.has("lanes")) {
    for (const auto& l : n.at("lanes").items()) {
      l.object({"name", "centerline", "width", "speed_limit"});
      planner::Lane lane;
      if (l.has("name")) lane.name = l.at("name").string();
      lane.centerline = l.at("centerline").points(2);
      read(l, "width", lane.width, &Node::positive);
      read(l, "speed_limit", lane.speed_limit, &Node::positive);
      m.lanes.push_back(std::move(lane));
    }
  }
  if (n.has("dividing_lines")) {
    for (const auto& d : n.at("dividing_lines").items()) {
      d.object({"line", "crossable"});
      planner::DividingLine line;
      line.line = d.at("line").points(2);
      if (d.has("crossable")) line.crossable = d.at("crossable").boolean();
      m.dividing_lines.push_back(std::move(line));
    }
  }
  if (n.has("crossing_zones")) {
    for (const auto& z : n.at("crossing_zones").items()) {
      z.object({"min", "max", "speed_limit"});
      planner::CrossingZone zone;
      zone.area.min = z.at("min").point();
      zone.area.max = z.at("max").point();
      if (zone.area.min.x() > zone.area.max.x() || zone.area.min.y() > zone.area.max.y()) z.fail("min must not exceed max");
      if (z.has("speed_limit")) zone.speed_limit = z.at("speed_limit").positive();
      m.crossing_zones.push_back(zone);
    }
  }
  if (n.has("stop_lines")) {
    for (const auto& s : n.at("stop_lines").items()) {
      s.object({"a", "b"});
      m.stop_lines.push_back({s.at("a").point(), s.at("b").point()});
    }
  }
  try {
    m.validate();
  } catch (const std::invalid_argument& e) {
    n.fail(e.what());
  }
  return m;
}

void read_cost_map(const Node& n, planner::CostMapConfig& c) {
  n.object({"extent", "resolution", "occupied_threshold", "off_road_cost", "opposite_lane_cost", "crossable_line_cost",
            "solid_line_cost", "probability_mass", "inflation_radius", "falloff_peak", "falloff_sigma_cells",
            "falloff_cutoff_cells"});
  read(n, "extent", c.extent, &Node::positive);
  read(n, "resolution", c.resolution, &Node::positive);
  read(n, "occupied_threshold", c.occupied_threshold, &Node::probability);
  read(n, "off_road_cost", c.off_road_cost, &Node::probability);
  read(n, "opposite_lane_cost", c.opposite_lane_cost, &Node::probability);
  read(n, "crossable_line_cost", c.crossable_line_cost, &Node::probability);
  read(n, "solid_line_cost", c.solid_line_cost, &Node::probability);
  if (n.has("probability_mass")) {
    const Node m = n.at("probability_mass");
    c.probability_mass = m.number();
    if (!(c.probability_mass > 0.0 && c.probability_mass < 1.0)) m.fail("must lie in (0, 1)");
  }
  read(n, "inflation_radius", c.inflation_radius, &Node::non_negative);
  read(n, "falloff_peak", c.falloff_peak, &Node::probability);
  read(n, "falloff_sigma_cells", c.falloff_sigma_cells, &Node::positive);
  read(n, "falloff_cutoff_cells", c.falloff_cutoff_cells, &Node::non_negative);
}

void read_planner(const Node& n, planner::PlannerConfig& c) {
  n.object({"heading_bins", "arc_cells", "cost_weight", "turn_weight", "goal_tolerance_arcs", "goal_heading_tolerance_deg",
            "max_expansions"});
  if (n.has("heading_bins")) c.heading_bins = static_cast<int>(n.at("heading_bins").integer(1, 3600));
  read(n, "arc_cells", c.arc_cells, &Node::positive);
  read(n, "cost_weight", c.cost_weight, &Node::non_negative);
  read(n, "turn_weight", c.turn_weight, &Node::non_negative);
  read(n, "goal_tolerance_arcs", c.goal_tolerance_arcs, &Node::positive);
  if (n.has("goal_heading_tolerance_deg")) c.goal_heading_tolerance = deg_to_rad(n.at("goal_heading_tolerance_deg").positive());
  if (n.has("max_expansions")) c.max_expansions = n.at("max_expansions").unsigned_integer();
}

void read_tracker(const Node& n, tracker::TrackerParams& p) {
  n.object({"p_survival", "p_detect", "clutter_density", "birth_weight", "prune_threshold", "merge_distance",
            "confirm_weight", "max_components", "heading_noise_std", "speed_noise_std", "birth_speed_std",
            "speed_span"});
  read(n, "p_survival", p.p_survival, &Node::probability);
  read(n, "p_detect", p.p_detect, &Node::probability);
  read(n, "clutter_density", p.clutter_density, &Node::positive);
  read(n, "birth_weight", p.birth_weight, &Node::probability);
  read(n, "prune_threshold", p.prune_threshold, &Node::non_negative);
  read(n, "merge_distance", p.merge_distance, &Node::non_negative);
  read(n, "confirm_weight", p.confirm_weight, &Node::probability);
  if (n.has("max_components")) p.max_components = static_cast<std::size_t>(n.at("max_components").integer(1, 1000000));
  read(n, "heading_noise_std", p.heading_noise_std, &Node::non_negative);
  read(n, "speed_noise_std", p.speed_noise_std, &Node::non_negative);
  read(n, "birth_speed_std", p.birth_speed_std, &Node::positive);
  read(n, "speed_span", p.speed_span, &Node::positive);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ScenarioLoadError(path.string(), 0, 0, "", "cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

Scenario parse_scenario(std::string_view text, const std::string& source) {
  const Document doc(text, source);
  const Node root(doc, doc.root(), "");
  root.object({"name", "seed", "duration", "tick", "stations", "road_users", "vehicle_perception", "channel",
               "lane_map", "occluders", "cost_map", "planner", "prediction", "tracker", "self_filter_radius"});
  Scenario s;
  if (root.has("name")) s.name = root.at("name").string();
  if (root.has("seed")) s.seed = root.at("seed").unsigned_integer();
  s.duration = root.at("duration").non_negative();
  read(root, "tick", s.tick, &Node::positive);

  const Node stations = root.at("stations");
  for (const auto& st : stations.items()) s.stations.push_back(read_station(st));
  const auto receivers = std::count_if(s.stations.begin(), s.stations.end(),
                                       [](const StationSpec& st) { return st.role == StationRole::receiving; });
  if (receivers != 1) {
    stations.fail("exactly one receiving station is required, found " + std::to_string(receivers));
  }
  if (root.has("road_users")) {
    for (const auto& u : root.at("road_users").items()) s.road_users.push_back(read_road_user(u));
  }
  if (root.has("vehicle_perception")) {
    const Node n = root.at("vehicle_perception");
    n.object({"position_std", "heading_std_deg", "speed_std"});
    s.vehicle_perception = read_noise(n, s.vehicle_perception);
  }
  if (root.has("channel")) {
    const Node c = root.at("channel");
    c.object({"loss", "latency_ticks"});
    read(c, "loss", s.channel.loss, &Node::probability);
    if (c.has("latency_ticks")) s.channel.latency_ticks = static_cast<int>(c.at("latency_ticks").integer(0, 1000000));
  }
  if (root.has("lane_map")) s.lane_map = read_lane_map(root.at("lane_map"));
  if (root.has("occluders")) {
    for (const auto& poly : root.at("occluders").items()) s.occluders.push_back(poly.points(3));
  }

  const auto& rx = s.receiver();
  s.cost_map.inflation_radius = planner::inflation_radius_for(rx.vehicle.length, rx.vehicle.width);
  if (root.has("cost_map")) read_cost_map(root.at("cost_map"), s.cost_map);
  if (root.has("planner")) read_planner(root.at("planner"), s.planner);
  if (root.has("prediction")) {
    const Node p = root.at("prediction");
    p.object({"horizon", "step"});
    read(p, "horizon", s.prediction.horizon, &Node::non_negative);
    read(p, "step", s.prediction.step, &Node::positive);
  }
  if (root.has("tracker")) read_tracker(root.at("tracker"), s.tracker);
  read(root, "self_filter_radius", s.self_filter_radius, &Node::positive);

  try {
    s.validate();
  } catch (const std::invalid_argument& e) {
    root.fail(e.what());
  }
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) { return parse_scenario(read_file(path), path.string()); }

SweepSpec parse_sweep(std::string_view text, const std::string& source) {
  const Document doc(text, source);
  const Node root(doc, doc.root(), "");
  root.object({"name", "parameter", "values", "receiver_position_std", "receiver_heading_std_deg", "modes", "offsets",
               "sender", "receiver_y", "receiver_heading_deg", "irsu_position_std", "irsu_heading_std_rad",
               "object_count", "object_spacing", "object_first", "object_position_std", "object_heading_std_deg",
               "probability_mass", "monte_carlo_samples", "seed"});
  SweepSpec s;
  if (root.has("name")) s.name = root.at("name").string();
  const Node parameter = root.at("parameter");
  const std::string p = parameter.string();
  bool degrees = false;
  if (p == "receiver_heading_std_deg") {
    s.parameter = SweepParameter::receiver_heading_std;
    degrees = true;
  } else if (p == "receiver_position_std") {
    s.parameter = SweepParameter::receiver_position_std;
  } else {
    parameter.fail("expected 'receiver_heading_std_deg' or 'receiver_position_std'");
  }
  const Node values = root.at("values");
  for (const auto& v : values.items()) s.values.push_back(degrees ? deg_to_rad(v.non_negative()) : v.non_negative());
  if (s.values.empty()) values.fail("values must not be empty");

  read(root, "receiver_position_std", s.receiver_position_std, &Node::non_negative);
  read_deg(root, "receiver_heading_std_deg", s.receiver_heading_std);
  if (root.has("modes")) {
    const Node modes = root.at("modes");
    s.modes.clear();
    for (const auto& m : modes.items()) {
      const std::string name = m.string();
      if (name == "V2I") {
        s.modes.push_back(SensingMode::v2i);
      } else if (name == "V2V") {
        s.modes.push_back(SensingMode::v2v);
      } else {
        m.fail("expected 'V2I' or 'V2V'");
      }
    }
    if (s.modes.empty()) modes.fail("at least one mode is required");
  }
  if (root.has("offsets")) {
    const Node offsets = root.at("offsets");
    s.offsets.clear();
    for (const auto& o : offsets.items()) s.offsets.push_back(o.number());
    if (s.offsets.empty()) offsets.fail("at least one offset is required");
  }
  if (root.has("sender")) s.sender = root.at("sender").pose();
  read(root, "receiver_y", s.receiver_y, &Node::number);
  if (root.has("receiver_heading_deg")) {
    s.receiver_heading = geometry::normalize_angle(deg_to_rad(root.at("receiver_heading_deg").number()));
  }
  read(root, "irsu_position_std", s.irsu_position_std, &Node::non_negative);
  read(root, "irsu_heading_std_rad", s.irsu_heading_std, &Node::non_negative);
  if (root.has("object_count")) s.object_count = static_cast<int>(root.at("object_count").integer(1, 255));
  read(root, "object_spacing", s.object_spacing, &Node::positive);
  read(root, "object_first", s.object_first, &Node::number);
  read(root, "object_position_std", s.object_position_std, &Node::non_negative);
  read_deg(root, "object_heading_std_deg", s.object_heading_std);
  if (root.has("probability_mass")) {
    const Node m = root.at("probability_mass");
    s.probability_mass = m.number();
    if (!(s.probability_mass > 0.0 && s.probability_mass < 1.0)) m.fail("must lie in (0, 1)");
  }
  if (root.has("monte_carlo_samples")) s.monte_carlo_samples = root.at("monte_carlo_samples").unsigned_integer();
  if (root.has("seed")) s.seed = root.at("seed").unsigned_integer();
  try {
    s.validate();
  } catch (const std::invalid_argument& e) {
    root.fail(e.what());
  }
  return s;
}

SweepSpec load_sweep(const std::filesystem::path& path) { return parse_sweep(read_file(path), path.string()); }

}  // namespace coopsense::sim
