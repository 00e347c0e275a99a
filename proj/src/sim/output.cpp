#include "coopsense/sim/output.hpp"

#include "coopsense/geometry/ellipse.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>

namespace coopsense::sim {

namespace {

std::string num(double v) { return fmt::format("{:.9g}", v); }

double value_for_output(const SweepSpec& spec, double value) {
  return spec.parameter == SweepParameter::receiver_heading_std ? geometry::rad_to_deg(value) : value;
}

std::string_view parameter_column(const SweepSpec& spec) {
  return spec.parameter == SweepParameter::receiver_heading_std ? "receiver_heading_std_deg" : "receiver_position_std";
}

struct Bounds {
  double min_x = std::numeric_limits<double>::infinity();
  double min_y = std::numeric_limits<double>::infinity();
  double max_x = -std::numeric_limits<double>::infinity();
  double max_y = -std::numeric_limits<double>::infinity();

  void add(double x, double y) {
    min_x = std::min(min_x, x);
    min_y = std::min(min_y, y);
    max_x = std::max(max_x, x);
    max_y = std::max(max_y, y);
  }
  void add(const geometry::ConfidenceEllipse& e) {
    const auto h = geometry::bounding_half_extents(e);
    add(e.center.x() - h.x(), e.center.y() - h.y());
    add(e.center.x() + h.x(), e.center.y() + h.y());
  }
  bool empty() const { return !(min_x <= max_x); }
  // Expands outwards to whole grid cells plus one cell of margin.
  void snap(double grid) {
    if (empty()) {
      min_x = min_y = 0.0;
      max_x = max_y = grid;
    }
    min_x = (std::floor(min_x / grid) - 1.0) * grid;
    min_y = (std::floor(min_y / grid) - 1.0) * grid;
    max_x = (std::ceil(max_x / grid) + 1.0) * grid;
    max_y = (std::ceil(max_y / grid) + 1.0) * grid;
  }
};

// World y points north; SVG y points down, so every y is negated.
class Svg {
 public:
  Svg(const Bounds& b, double grid) : bounds_(b) {
    body_ += fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"{} {} {} {}\" width=\"{}\" height=\"{}\">\n",
        num(b.min_x), num(-b.max_y), num(b.max_x - b.min_x), num(b.max_y - b.min_y),
        num(std::min(1200.0, 10.0 * (b.max_x - b.min_x))),
        num(std::min(1200.0, 10.0 * (b.max_x - b.min_x)) * (b.max_y - b.min_y) / (b.max_x - b.min_x)));
    body_ += "<rect x=\"" + num(b.min_x) + "\" y=\"" + num(-b.max_y) + "\" width=\"" + num(b.max_x - b.min_x) +
             "\" height=\"" + num(b.max_y - b.min_y) + "\" fill=\"white\"/>\n";
    body_ += "<g stroke=\"#d0d0d0\" stroke-width=\"0.1\">\n";
    for (double x = b.min_x; x <= b.max_x + 1e-9; x += grid) {
      body_ += fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\"/>\n", num(x), num(-b.max_y), num(-b.min_y));
    }
    for (double y = b.min_y; y <= b.max_y + 1e-9; y += grid) {
      body_ += fmt::format("<line x1=\"{1}\" y1=\"{0}\" x2=\"{2}\" y2=\"{0}\"/>\n", num(-y), num(b.min_x), num(b.max_x));
    }
    body_ += "</g>\n";
  }

  void ellipse(const geometry::ConfidenceEllipse& e, std::string_view stroke, std::string_view fill = "none") {
    body_ += fmt::format(
        "<ellipse cx=\"{0}\" cy=\"{1}\" rx=\"{2}\" ry=\"{3}\" transform=\"rotate({4} {0} {1})\" fill=\"{5}\" "
        "stroke=\"{6}\" stroke-width=\"0.15\"/>\n",
        num(e.center.x()), num(-e.center.y()), num(std::max(e.semi_major, 1e-6)), num(std::max(e.semi_minor, 1e-6)),
        num(-geometry::rad_to_deg(e.orientation)), fill, stroke);
  }

  void polyline(const std::vector<Point>& pts, std::string_view stroke, double width, bool closed = false,
                std::string_view fill = "none", std::string_view dash = "") {
    if (pts.empty()) return;
    std::string coords;
    for (const auto& p : pts) coords += num(p.x()) + "," + num(-p.y()) + " ";
    if (!coords.empty()) coords.pop_back();
    body_ += fmt::format("<{} points=\"{}\" fill=\"{}\" stroke=\"{}\" stroke-width=\"{}\"{}/>\n",
                         closed ? "polygon" : "polyline", coords, fill, stroke, num(width),
                         dash.empty() ? std::string() : fmt::format(" stroke-dasharray=\"{}\"", dash));
  }

  void marker(double x, double y, std::string_view fill, std::string_view label) {
    body_ += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"1.2\" height=\"1.2\" fill=\"{}\"/>\n", num(x - 0.6),
                         num(-y - 0.6), fill);
    if (!label.empty()) {
      body_ += fmt::format("<text x=\"{}\" y=\"{}\" font-size=\"2\" fill=\"#333\">{}</text>\n", num(x + 1.0),
                           num(-y - 1.0), label);
    }
  }

  std::string finish() { return body_ + "</svg>\n"; }

 private:
  Bounds bounds_;
  std::string body_;
};

geometry::ConfidenceEllipse ellipse_of(const Eigen::Matrix2d& cov, double x, double y, double mass) {
  return geometry::confidence_ellipse(cov, {x, y}, mass);
}

}  // namespace

void write_sweep_csv(const SweepResult& result, std::ostream& out) {
  out << kSweepCsvVersion << '\n';
  out << "mode,parameter,value,offset,object,range_receiver,range_sender,true_x,true_y,true_theta,x,y,theta,"
         "cov_xx,cov_xy,cov_xt,cov_yy,cov_yt,cov_tt,semi_major,semi_minor,orientation_deg,area,probability_mass,"
         "ref_x,ref_y,ref_theta,ref_cov_xx,ref_cov_xy,ref_cov_xt,ref_cov_yy,ref_cov_yt,ref_cov_tt\n";
  for (const auto& r : result.records) {
    const auto& c = r.transformed.cov;
    out << to_string(r.mode) << ',' << parameter_column(result.spec) << ',' << num(value_for_output(result.spec, r.value))
        << ',' << num(r.offset) << ',' << r.object_index << ',' << num(r.range_to_receiver) << ','
        << num(r.range_to_sender) << ',' << num(r.truth_in_receiver.x) << ',' << num(r.truth_in_receiver.y) << ','
        << num(r.truth_in_receiver.theta) << ',' << num(r.transformed.mean.x) << ',' << num(r.transformed.mean.y) << ','
        << num(r.transformed.mean.theta) << ',' << num(c(0, 0)) << ',' << num(c(0, 1)) << ',' << num(c(0, 2)) << ','
        << num(c(1, 1)) << ',' << num(c(1, 2)) << ',' << num(c(2, 2)) << ',' << num(r.ellipse.semi_major) << ','
        << num(r.ellipse.semi_minor) << ',' << num(geometry::rad_to_deg(r.ellipse.orientation)) << ','
        << num(r.ellipse.area()) << ',' << num(r.ellipse.probability_mass);
    if (r.reference) {
      const auto& g = *r.reference;
      out << ',' << num(g.mean.x) << ',' << num(g.mean.y) << ',' << num(g.mean.theta) << ',' << num(g.cov(0, 0)) << ','
          << num(g.cov(0, 1)) << ',' << num(g.cov(0, 2)) << ',' << num(g.cov(1, 1)) << ',' << num(g.cov(1, 2)) << ','
          << num(g.cov(2, 2));
    } else {
      out << ",,,,,,,,,";
    }
    out << '\n';
  }
}

std::string sweep_svg_name(const SweepResult& result, SensingMode mode, std::size_t value_index,
                           std::size_t offset_index) {
  const double value = value_for_output(result.spec, result.spec.values.at(value_index));
  const double offset = result.spec.offsets.at(offset_index);
  return fmt::format("{}_{}_{}{}_offset{}.svg", result.spec.name, to_string(mode),
                     result.spec.parameter == SweepParameter::receiver_heading_std ? "sigma-theta-deg-" : "sigma-pos-m-",
                     num(value), num(offset));
}

std::string sweep_svg(const SweepResult& result, SensingMode mode, std::size_t value_index, std::size_t offset_index,
                      const SvgOptions& options) {
  const auto records = result.combination(mode, value_index, offset_index);
  std::vector<geometry::ConfidenceEllipse> ellipses;
  Bounds b;
  b.add(0.0, 0.0);
  for (const auto* r : records) {
    ellipses.push_back(ellipse_of(r->transformed.cov.topLeftCorner<2, 2>(), r->transformed.mean.x,
                                  r->transformed.mean.y, options.probability_mass));
    b.add(ellipses.back());
  }
  b.snap(options.grid);
  Svg svg(b, options.grid);
  svg.marker(0.0, 0.0, "#c00000", "receiver");
  for (std::size_t i = 0; i < ellipses.size(); ++i) {
    svg.ellipse(ellipses[i], records[i]->object_index == 0 ? "#d4a000" : "#1f5fbf");
  }
  return svg.finish();
}

void write_scenario_csv(const ScenarioLog& log, std::ostream& out) {
  out << kScenarioLogVersion << '\n';
  out << "tick,time,ego_x,ego_y,ego_theta,ego_speed,believed_x,believed_y,believed_theta,decision,messages_sent,"
         "message_bytes,messages_received,sensed,locally_visible,path_feasible,path_poses,track_class,track_id,"
         "track_x,track_y,track_heading,track_speed,track_weight,track_cov_xx,track_cov_xy,track_cov_yy\n";
  for (const auto& t : log.ticks) {
    std::size_t sensed = 0;
    std::size_t visible = 0;
    for (const auto& u : t.road_users) {
      sensed += u.sensed ? 1 : 0;
      visible += u.locally_visible ? 1 : 0;
    }
    const std::string prefix = fmt::format(
        "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}", t.tick, num(t.time), num(t.ego_true.x), num(t.ego_true.y),
        num(t.ego_true.theta), num(t.ego_speed), num(t.ego_believed.x), num(t.ego_believed.y),
        num(t.ego_believed.theta), t.decision ? planner::to_string(*t.decision) : std::string_view(), t.messages_sent,
        t.message_bytes, t.messages_received, sensed, visible, t.decision ? (t.path.feasible ? "1" : "0") : "",
        t.path.poses.size());
    if (t.tracks.empty()) {
      out << prefix << ",,,,,,,,,,\n";
      continue;
    }
    for (const auto& ct : t.tracks) {
      const auto& tr = ct.track;
      out << prefix << ',' << cpm::to_string(ct.object_class) << ',' << tr.id << ',' << num(tr.state.x) << ','
          << num(tr.state.y) << ',' << num(tr.state.heading) << ',' << num(tr.state.speed) << ',' << num(tr.weight)
          << ',' << num(tr.cov(0, 0)) << ',' << num(tr.cov(0, 1)) << ',' << num(tr.cov(1, 1)) << '\n';
    }
  }
}

std::string scenario_svg(const Scenario& scenario, const ScenarioLog& log, const SvgOptions& options) {
  Bounds b;
  if (scenario.lane_map) {
    for (const auto& poly : scenario.lane_map->drivable) {
      for (const auto& p : poly) b.add(p.x(), p.y());
    }
  }
  for (const auto& poly : scenario.occluders) {
    for (const auto& p : poly) b.add(p.x(), p.y());
  }
  for (const auto& s : scenario.stations) b.add(s.pose.x, s.pose.y);
  for (const auto& t : log.ticks) {
    b.add(t.ego_true.x, t.ego_true.y);
    for (const auto& u : t.road_users) b.add(u.pose.x, u.pose.y);
  }
  std::vector<geometry::ConfidenceEllipse> ellipses;
  for (std::size_t i = 0; i < log.ticks.size(); i += std::max<std::size_t>(1, options.ellipse_every)) {
    for (const auto& ct : log.ticks[i].tracks) {
      ellipses.push_back(ellipse_of(ct.track.cov.topLeftCorner<2, 2>(), ct.track.state.x, ct.track.state.y,
                                    options.probability_mass));
      b.add(ellipses.back());
    }
  }
  b.snap(options.grid);

  Svg svg(b, options.grid);
  if (scenario.lane_map) {
    const auto& m = *scenario.lane_map;
    for (const auto& poly : m.drivable) svg.polyline(poly, "#999999", 0.1, true, "#ececec");
    for (const auto& z : m.crossing_zones) {
      svg.polyline({z.area.min, {z.area.max.x(), z.area.min.y()}, z.area.max, {z.area.min.x(), z.area.max.y()}},
                   "#e08000", 0.15, true, "#ffe0b0");
    }
    for (const auto& d : m.dividing_lines) svg.polyline(d.line, "#ffffff", 0.2, false, "none", d.crossable ? "1.5 1.5" : "");
    for (const auto& s : m.stop_lines) svg.polyline({s.a, s.b}, "#c00000", 0.3);
  }
  for (const auto& poly : scenario.occluders) svg.polyline(poly, "#404040", 0.1, true, "#808080");
  for (const auto& s : scenario.stations) {
    svg.marker(s.pose.x, s.pose.y, s.role == StationRole::sensing ? "#6a3d9a" : "#c00000", s.name);
  }
  for (std::size_t u = 0; u < scenario.road_users.size(); ++u) {
    std::vector<Point> pts;
    for (const auto& t : log.ticks) {
      if (u < t.road_users.size()) pts.emplace_back(t.road_users[u].pose.x, t.road_users[u].pose.y);
    }
    svg.polyline(pts, "#1f5fbf", 0.2);
  }
  std::vector<Point> ego;
  for (const auto& t : log.ticks) ego.emplace_back(t.ego_true.x, t.ego_true.y);
  svg.polyline(ego, "#c00000", 0.25);
  for (std::size_t i = 0; i < log.ticks.size(); i += std::max<std::size_t>(1, options.ellipse_every)) {
    const auto& path = log.ticks[i].path;
    if (path.feasible && path.poses.size() > 1) {
      std::vector<Point> pts;
      for (const auto& p : path.poses) pts.emplace_back(p.x, p.y);
      svg.polyline(pts, "#2ca02c", 0.12, false, "none", "0.4 0.4");
    }
  }
  for (const auto& e : ellipses) svg.ellipse(e, "#d4a000");
  return svg.finish();
}

}  // namespace coopsense::sim
