#include "coopsense/cli/commands.hpp"

#include "coopsense/cpm/codec.hpp"
#include "coopsense/geometry/ellipse.hpp"
#include "coopsense/geometry/unscented.hpp"
#include "coopsense/sim/engine.hpp"
#include "coopsense/sim/output.hpp"
#include "coopsense/sim/scenario_io.hpp"
#include "coopsense/sim/sweep.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include <cctype>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace coopsense::cli {

namespace {

namespace fs = std::filesystem;
using geometry::GaussianPose2;
using geometry::Pose2;

enum class Format { csv, svg, both };

struct GlobalOptions {
  std::optional<std::uint64_t> seed;
  std::string out_dir = ".";
  Format format = Format::both;
  double mass = 0.95;
  bool mass_override = false;
  double grid = 10.0;
  int verbosity = 0;
};

// Carries an exit code out of a subcommand.
struct Failure {
  int code;
  std::string message;
};

[[noreturn]] void fail_input(const std::string& message) { throw Failure{kExitInput, message}; }

bool wants_csv(Format f) { return f != Format::svg; }
bool wants_svg(Format f) { return f != Format::csv; }

std::vector<double> parse_numbers(const std::string& text, const std::string& flag) {
  std::vector<double> values;
  std::string token;
  std::istringstream in(text);
  while (std::getline(in, token, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(token, &used);
    } catch (const std::exception&) {
      fail_input(fmt::format("{}: '{}' is not a number", flag, token));
    }
    while (used < token.size() && std::isspace(static_cast<unsigned char>(token[used]))) ++used;
    if (used != token.size()) fail_input(fmt::format("{}: '{}' is not a number", flag, token));
    values.push_back(v);
  }
  return values;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) fail_input("cannot write " + path.string());
  f << content;
  if (!f) fail_input("cannot write " + path.string());
}

fs::path prepare_out_dir(const GlobalOptions& g) {
  const fs::path dir(g.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) fail_input("output directory " + dir.string() + " is not writable");
  return dir;
}

// ---- transform -------------------------------------------------------------

struct FrameArgs {
  std::string pose;
  std::string std_devs;
  std::string cov;
};

GaussianPose2 frame_from_flags(const FrameArgs& a, const std::string& name) {
  GaussianPose2 g;
  if (!a.pose.empty()) {
    const auto p = parse_numbers(a.pose, "--" + name);
    if (p.size() != 3) fail_input(fmt::format("--{} expects x,y,heading_deg", name));
    g.mean = {p[0], p[1], geometry::normalize_angle(geometry::deg_to_rad(p[2]))};
  }
  if (!a.std_devs.empty() && !a.cov.empty()) fail_input(fmt::format("--{0}-std and --{0}-cov are exclusive", name));
  if (!a.std_devs.empty()) {
    const auto s = parse_numbers(a.std_devs, "--" + name + "-std");
    if (s.size() != 2 || s[0] < 0.0 || s[1] < 0.0) {
      fail_input(fmt::format("--{}-std expects position_std,heading_std_deg (both >= 0)", name));
    }
    const double h = geometry::deg_to_rad(s[1]);
    g.cov.diagonal() << s[0] * s[0], s[0] * s[0], h * h;
  }
  if (!a.cov.empty()) {
    const auto c = parse_numbers(a.cov, "--" + name + "-cov");
    if (c.size() != 9) fail_input(fmt::format("--{}-cov expects 9 row-major entries", name));
    for (int i = 0; i < 9; ++i) g.cov(i / 3, i % 3) = c[i];
  }
  return g;
}

GaussianPose2 frame_from_json(const nlohmann::json& j, const std::string& name) {
  if (!j.is_object()) fail_input(fmt::format("'{}' must be an object", name));
  for (const auto& [key, _] : j.items()) {
    if (key != "x" && key != "y" && key != "heading_deg" && key != "position_std" && key != "heading_std_deg" &&
        key != "cov") {
      fail_input(fmt::format("'{}': unknown key '{}'", name, key));
    }
  }
  auto number = [&](const char* key, double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_number()) fail_input(fmt::format("'{}/{}' must be a number", name, key));
    return j[key].get<double>();
  };
  GaussianPose2 g;
  g.mean = {number("x", 0.0), number("y", 0.0),
            geometry::normalize_angle(geometry::deg_to_rad(number("heading_deg", 0.0)))};
  if (j.contains("cov")) {
    if (j.contains("position_std") || j.contains("heading_std_deg")) {
      fail_input(fmt::format("'{}': give either cov or position_std/heading_std_deg", name));
    }
    const auto& c = j["cov"];
    if (!c.is_array() || c.size() != 3) fail_input(fmt::format("'{}/cov' must be a 3x3 array", name));
    for (int r = 0; r < 3; ++r) {
      if (!c[r].is_array() || c[r].size() != 3) fail_input(fmt::format("'{}/cov' must be a 3x3 array", name));
      for (int k = 0; k < 3; ++k) {
        if (!c[r][k].is_number()) fail_input(fmt::format("'{}/cov' entries must be numbers", name));
        g.cov(r, k) = c[r][k].get<double>();
      }
    }
  } else {
    const double p = number("position_std", 0.0);
    const double h = geometry::deg_to_rad(number("heading_std_deg", 0.0));
    if (p < 0.0 || h < 0.0) fail_input(fmt::format("'{}': standard deviations must be >= 0", name));
    g.cov.diagonal() << p * p, p * p, h * h;
  }
  return g;
}

std::string format_pose(const GaussianPose2& g, double mass) {
  std::string s = fmt::format("mean: x={:.6f} y={:.6f} heading_deg={:.6f}\ncov:\n", g.mean.x, g.mean.y,
                              geometry::rad_to_deg(g.mean.theta));
  for (int r = 0; r < 3; ++r) {
    s += fmt::format("  {:>16.9e} {:>16.9e} {:>16.9e}\n", g.cov(r, 0), g.cov(r, 1), g.cov(r, 2));
  }
  const auto e = geometry::confidence_ellipse(g.cov.topLeftCorner<2, 2>(), {g.mean.x, g.mean.y}, mass);
  s += fmt::format("ellipse({}): semi_major={:.6f} semi_minor={:.6f} orientation_deg={:.6f}\n", mass, e.semi_major,
                   e.semi_minor, geometry::rad_to_deg(e.orientation));
  return s;
}

std::string transform_svg(const GaussianPose2& g, double mass, double grid) {
  const auto e = geometry::confidence_ellipse(g.cov.topLeftCorner<2, 2>(), {g.mean.x, g.mean.y}, mass);
  const auto h = geometry::bounding_half_extents(e);
  const double min_x = (std::floor(std::min(0.0, g.mean.x - h.x()) / grid) - 1.0) * grid;
  const double max_x = (std::ceil(std::max(0.0, g.mean.x + h.x()) / grid) + 1.0) * grid;
  const double min_y = (std::floor(std::min(0.0, g.mean.y - h.y()) / grid) - 1.0) * grid;
  const double max_y = (std::ceil(std::max(0.0, g.mean.y + h.y()) / grid) + 1.0) * grid;
  std::string s = fmt::format("<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"{} {} {} {}\">\n", min_x, -max_y,
                              max_x - min_x, max_y - min_y);
  s += "<g stroke=\"#d0d0d0\" stroke-width=\"0.1\">\n";
  for (double x = min_x; x <= max_x + 1e-9; x += grid) {
    s += fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\"/>\n", x, -max_y, -min_y);
  }
  for (double y = min_y; y <= max_y + 1e-9; y += grid) {
    s += fmt::format("<line x1=\"{1}\" y1=\"{0}\" x2=\"{2}\" y2=\"{0}\"/>\n", -y, min_x, max_x);
  }
  s += "</g>\n";
  s += "<rect x=\"-0.6\" y=\"-0.6\" width=\"1.2\" height=\"1.2\" fill=\"#c00000\"/>\n";
  s += fmt::format(
      "<ellipse cx=\"{0:.9g}\" cy=\"{1:.9g}\" rx=\"{2:.9g}\" ry=\"{3:.9g}\" transform=\"rotate({4:.9g} {0:.9g} "
      "{1:.9g})\" fill=\"none\" stroke=\"#1f5fbf\" stroke-width=\"0.15\"/>\n",
      e.center.x(), -e.center.y(), std::max(e.semi_major, 1e-6), std::max(e.semi_minor, 1e-6),
      -geometry::rad_to_deg(e.orientation));
  return s + "</svg>\n";
}

struct TransformArgs {
  FrameArgs receiver, sender, object;
  std::string input;
  bool svg = false;
};

int cmd_transform(const TransformArgs& a, const GlobalOptions& g, std::ostream& out) {
  GaussianPose2 receiver, sender, object;
  if (!a.input.empty()) {
    std::ifstream f(a.input);
    if (!f) fail_input("cannot open " + a.input);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(f);
    } catch (const nlohmann::json::parse_error& e) {
      fail_input(a.input + ": " + e.what());
    }
    if (!j.is_object()) fail_input(a.input + ": top level must be an object");
    for (const auto& [key, _] : j.items()) {
      if (key != "receiver" && key != "sender" && key != "object") fail_input(a.input + ": unknown key '" + key + "'");
    }
    if (j.contains("receiver")) receiver = frame_from_json(j["receiver"], "receiver");
    if (j.contains("sender")) sender = frame_from_json(j["sender"], "sender");
    if (j.contains("object")) object = frame_from_json(j["object"], "object");
  } else {
    receiver = frame_from_flags(a.receiver, "receiver");
    sender = frame_from_flags(a.sender, "sender");
    object = frame_from_flags(a.object, "object");
  }
  try {
    geometry::validate(receiver, "receiver");
    geometry::validate(sender, "sender");
    geometry::validate(object, "object");
  } catch (const std::invalid_argument& e) {
    fail_input(e.what());
  }
  const GaussianPose2 result = geometry::transform_with_uncertainty(receiver, sender, object);
  out << format_pose(result, g.mass);
  if (a.svg || g.format == Format::svg) {
    const fs::path path = prepare_out_dir(g) / "transform.svg";
    write_file(path, transform_svg(result, g.mass, g.grid));
    out << "wrote " << path.string() << '\n';
  }
  return kExitSuccess;
}

// ---- sweep / scenario ------------------------------------------------------

int cmd_sweep(const std::string& input, const GlobalOptions& g, std::ostream& out) {
  sim::SweepSpec spec = sim::load_sweep(input);
  if (g.seed) spec.seed = *g.seed;
  if (g.mass_override) spec.probability_mass = g.mass;
  // Only the CSV carries the sampling reference.
  if (!wants_csv(g.format)) spec.monte_carlo_samples = 0;
  try {
    spec.validate();
  } catch (const std::invalid_argument& e) {
    fail_input(e.what());
  }
  const sim::SweepResult result = sim::run_sweep(spec);
  const fs::path dir = prepare_out_dir(g);
  std::size_t files = 0;
  if (wants_csv(g.format)) {
    std::ostringstream csv;
    sim::write_sweep_csv(result, csv);
    write_file(dir / (spec.name + ".csv"), csv.str());
    ++files;
  }
  if (wants_svg(g.format)) {
    sim::SvgOptions options;
    options.probability_mass = spec.probability_mass;
    options.grid = g.grid;
    for (const auto mode : spec.modes) {
      for (std::size_t vi = 0; vi < spec.values.size(); ++vi) {
        for (std::size_t oi = 0; oi < spec.offsets.size(); ++oi) {
          write_file(dir / sim::sweep_svg_name(result, mode, vi, oi), sim::sweep_svg(result, mode, vi, oi, options));
          ++files;
        }
      }
    }
  }
  out << fmt::format("sweep '{}': {} records, {} files written to {}\n", spec.name, result.records.size(), files,
                     dir.string());
  return kExitSuccess;
}

int cmd_scenario(const std::string& input, const GlobalOptions& g, std::ostream& out) {
  sim::Scenario scenario = sim::load_scenario(input);
  if (g.seed) scenario.seed = *g.seed;
  sim::ScenarioLog log;
  try {
    log = sim::run_scenario(scenario);
  } catch (const std::invalid_argument& e) {
    fail_input(e.what());
  }
  const fs::path dir = prepare_out_dir(g);
  if (wants_csv(g.format)) {
    std::ostringstream csv;
    sim::write_scenario_csv(log, csv);
    write_file(dir / (scenario.name + ".csv"), csv.str());
  }
  if (wants_svg(g.format)) {
    sim::SvgOptions options;
    options.probability_mass = g.mass;
    options.grid = g.grid;
    write_file(dir / (scenario.name + ".svg"), sim::scenario_svg(scenario, log, options));
  }
  std::map<std::string, std::size_t> decisions;
  for (const auto& t : log.ticks) {
    if (t.decision) ++decisions[std::string(planner::to_string(*t.decision))];
  }
  out << fmt::format("scenario '{}': {} ticks, seed {}\n", scenario.name, log.ticks.size(), log.seed);
  if (g.verbosity > 0) {
    for (const auto& [name, count] : decisions) out << fmt::format("  {}: {} ticks\n", name, count);
    out << fmt::format("  out-of-order measurements dropped: {}\n", log.dropped_out_of_order);
  }
  return kExitSuccess;
}

// ---- cpm -------------------------------------------------------------------

std::vector<std::uint8_t> parse_hex(const std::string& text) {
  std::string digits;
  for (const char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) continue;
    if (!std::isxdigit(static_cast<unsigned char>(c))) fail_input(fmt::format("--hex: invalid character '{}'", c));
    digits += c;
  }
  if (digits.size() % 2 != 0) fail_input("--hex: odd number of hex digits");
  std::vector<std::uint8_t> bytes;
  for (std::size_t i = 0; i < digits.size(); i += 2) {
    bytes.push_back(static_cast<std::uint8_t>(std::stoi(digits.substr(i, 2), nullptr, 16)));
  }
  return bytes;
}

std::vector<std::uint8_t> read_bytes(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail_input("cannot open " + path);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

struct CpmArgs {
  std::string input;
  std::string hex;
  bool check = false;
};

int cmd_cpm(const CpmArgs& a, std::ostream& out) {
  if (a.input.empty() == a.hex.empty()) fail_input("cpm: give exactly one of FILE or --hex");
  const std::vector<std::uint8_t> bytes = a.hex.empty() ? read_bytes(a.input) : parse_hex(a.hex);
  cpm::Cpm message;
  try {
    message = cpm::decode(bytes);
  } catch (const cpm::DecodeError& e) {
    throw Failure{kExitCodec, fmt::format("decode error ({}) at byte {}: {}", cpm::to_string(e.kind()), e.offset(),
                                          e.what())};
  }
  out << fmt::format("{} bytes\n", bytes.size()) << hex_dump(bytes) << describe(message);
  if (a.check) {
    std::vector<std::uint8_t> again;
    try {
      again = cpm::encode(message);
    } catch (const std::exception& e) {
      throw Failure{kExitCodec, std::string("re-encode failed: ") + e.what()};
    }
    if (again != bytes) {
      std::size_t i = 0;
      while (i < again.size() && i < bytes.size() && again[i] == bytes[i]) ++i;
      throw Failure{kExitCodec, fmt::format("roundtrip mismatch at byte {}", i)};
    }
    if (cpm::decode(again) != message) throw Failure{kExitCodec, "roundtrip mismatch after second decode"};
    out << "check: roundtrip ok\n";
  }
  return kExitSuccess;
}

}  // namespace

std::string hex_dump(std::span<const std::uint8_t> bytes) {
  std::string s;
  for (std::size_t off = 0; off < bytes.size(); off += 16) {
    s += fmt::format("{:08x} ", off);
    std::string ascii;
    for (std::size_t i = off; i < off + 16; ++i) {
      if (i < bytes.size()) {
        s += fmt::format(" {:02x}", bytes[i]);
        ascii += std::isprint(bytes[i]) ? static_cast<char>(bytes[i]) : '.';
      } else {
        s += "   ";
      }
    }
    s += "  |" + ascii + "|\n";
  }
  return s;
}

std::string describe(const cpm::Cpm& m) {
  const auto& mg = m.management;
  const auto& ref = mg.reference_position;
  std::string s = fmt::format(
      "management: station_id={} station_type={} generation_time_ms={}\n"
      "  reference: x={:.3f} y={:.3f} heading_deg={:.2f} sigma_x={:.3f} sigma_y={:.3f} sigma_heading_deg={:.2f}\n",
      mg.station_id, cpm::to_string(mg.station_type), mg.generation_time_ms, ref.mean.x, ref.mean.y,
      geometry::rad_to_deg(ref.mean.theta), std::sqrt(ref.cov(0, 0)), std::sqrt(ref.cov(1, 1)),
      geometry::rad_to_deg(std::sqrt(ref.cov(2, 2))));
  if (m.station_data) {
    const auto& d = *m.station_data;
    s += fmt::format("station_data: heading_deg={:.2f} speed={:.3f} length={:.2f} width={:.2f}\n",
                     geometry::rad_to_deg(d.heading), d.speed, d.length, d.width);
  } else {
    s += "station_data: none\n";
  }
  s += fmt::format("sensors: {}\n", m.sensors.size());
  for (const auto& sn : m.sensors) {
    s += fmt::format("  sensor {}: type={} range={:.2f} fov_deg=[{:.2f}, {:.2f}]\n", sn.sensor_id,
                     cpm::to_string(sn.sensor_type), sn.range, geometry::rad_to_deg(sn.fov_start),
                     geometry::rad_to_deg(sn.fov_end));
  }
  s += fmt::format("objects: {}\n", m.objects.size());
  for (const auto& o : m.objects) {
    const auto& p = o.pose_in_station_frame;
    s += fmt::format(
        "  object {}: class={} x={:.3f} y={:.3f} heading_deg={:.2f} sigma_x={:.3f} sigma_y={:.3f} "
        "sigma_heading_deg={:.2f} speed={:.3f}",
        o.object_id, cpm::to_string(o.object_class), p.mean.x, p.mean.y, geometry::rad_to_deg(p.mean.theta),
        std::sqrt(p.cov(0, 0)), std::sqrt(p.cov(1, 1)), geometry::rad_to_deg(std::sqrt(p.cov(2, 2))), o.speed);
    s += std::isfinite(o.speed_std) ? fmt::format(" sigma_speed={:.3f}", o.speed_std) : std::string(" sigma_speed=n/a");
    s += fmt::format(" length={:.2f} width={:.2f}\n", o.length, o.width);
  }
  return s;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Collective perception toolkit: frame transforms, uncertainty sweeps, scenarios and CPM inspection",
               "coopsense"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  std::uint64_t seed = 0;
  std::string format = "both";
  auto* seed_opt = app.add_option("--seed", seed, "Override the RNG seed of sweeps and scenarios");
  app.add_option("--out", g.out_dir, "Output directory")->capture_default_str();
  app.add_option("--format", format, "Artifacts to write")
      ->check(CLI::IsMember({"csv", "svg", "both"}))
      ->capture_default_str();
  auto* mass_opt = app.add_option("--mass", g.mass, "Probability mass of drawn ellipses")
      ->check(CLI::Range(0.0, 1.0).description("in (0, 1)"))
      ->capture_default_str();
  app.add_option("--grid", g.grid, "Grid spacing of SVG plots, m")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_flag("-v,--verbose", g.verbosity, "More output");

  TransformArgs ta;
  auto* transform = app.add_subcommand("transform", "Transform one perceived object into the receiver frame");
  for (auto [name, frame] : {std::pair{"receiver", &ta.receiver}, {"sender", &ta.sender}, {"object", &ta.object}}) {
    const std::string n = name;
    transform->add_option("--" + n, frame->pose, n + " pose x,y,heading_deg");
    transform->add_option("--" + n + "-std", frame->std_devs, n + " position_std,heading_std_deg");
    transform->add_option("--" + n + "-cov", frame->cov, n + " covariance, 9 row-major entries (m, rad)");
  }
  transform->add_option("--input", ta.input, "JSON file with receiver/sender/object entries")->check(CLI::ExistingFile);
  transform->add_flag("--svg", ta.svg, "Also write transform.svg");

  std::string sweep_file;
  auto* sweep = app.add_subcommand("sweep", "Run an uncertainty sweep and write CSV/SVG artifacts");
  sweep->add_option("file", sweep_file, "Sweep file")->required()->check(CLI::ExistingFile);

  std::string scenario_file;
  auto* scenario = app.add_subcommand("scenario", "Run a scenario and write its log and plot");
  scenario->add_option("file", scenario_file, "Scenario file")->required()->check(CLI::ExistingFile);

  CpmArgs ca;
  auto* cpm_cmd = app.add_subcommand("cpm", "Decode, dump and check an encoded CPM");
  cpm_cmd->add_option("file", ca.input, "Encoded message file");
  cpm_cmd->add_option("--hex", ca.hex, "Encoded message as hex digits");
  cpm_cmd->add_flag("--check", ca.check, "Verify that re-encoding reproduces the input bytes");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitSuccess : kExitInput;
  }
  if (*seed_opt) g.seed = seed;
  g.mass_override = mass_opt->count() > 0;
  g.format = format == "csv" ? Format::csv : format == "svg" ? Format::svg : Format::both;
  if (!(g.mass > 0.0 && g.mass < 1.0)) {
    err << "error: --mass must lie in (0, 1)\n";
    return kExitInput;
  }

  try {
    if (*transform) return cmd_transform(ta, g, out);
    if (*sweep) return cmd_sweep(sweep_file, g, out);
    if (*scenario) return cmd_scenario(scenario_file, g, out);
    if (*cpm_cmd) return cmd_cpm(ca, out);
  } catch (const Failure& f) {
    err << "error: " << f.message << '\n';
    return f.code;
  } catch (const sim::ScenarioLoadError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const geometry::NumericDomainError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  }
  return kExitInput;
}

}  // namespace coopsense::cli
