// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero when any criterion fails. Criteria can be selected by number
// on the command line: `coopsense_acceptance 1 6`.

#include "coopsense/cpm/codec.hpp"
#include "coopsense/geometry/unscented.hpp"
#include "coopsense/planner/behavior.hpp"
#include "coopsense/planner/hybrid_astar.hpp"
#include "coopsense/sim/engine.hpp"
#include "coopsense/sim/output.hpp"
#include "coopsense/sim/scenario_io.hpp"
#include "coopsense/sim/sweep.hpp"

#include "cpm_random.hpp"
#include "oracles.hpp"
#include "planner_oracle.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace coopsense;
using namespace coopsense::sim;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;
const std::filesystem::path kData = COOPSENSE_DATA_DIR;

struct Outcome {
  bool pass = true;
  std::string detail;

  void fail(const std::string& why) {
    if (pass) detail.clear();
    pass = false;
    if (detail.size() < 400) detail += (detail.empty() ? "" : "; ") + why;
  }
};

std::string fmt(const char* f, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

SweepSpec bundled(const char* name) { return load_sweep(kData / "sweeps" / (std::string(name) + ".sweep")); }

Scenario preset(const char* name) { return load_scenario(kData / "scenarios" / (std::string(name) + ".scenario")); }

// Sweeps without the sampling reference are cheap; criteria 2-4 share them.
const SweepResult& analytic_sweep(const char* name) {
  static std::map<std::string, SweepResult> cache;
  auto it = cache.find(name);
  if (it == cache.end()) {
    auto spec = bundled(name);
    spec.monte_carlo_samples = 0;
    it = cache.emplace(name, run_sweep(spec)).first;
  }
  return it->second;
}

std::string mode_name(SensingMode m) { return std::string(to_string(m)); }

// 1. Unscented transform against a 10^6-sample reference.
Outcome ut_against_sampling() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  double worst_mean = 0.0, worst_heading = 0.0, worst_frob = 0.0;
  std::size_t compared = 0;
  for (const char* name : {"test1", "test2"}) {
    auto spec = bundled(name);
    if (spec.parameter == SweepParameter::receiver_heading_std) {
      std::erase_if(spec.values, [](double v) { return v > 1.0 * kDeg + 1e-12; });
    }
    if (spec.monte_carlo_samples < 1000000) spec.monte_carlo_samples = 1000000;
    const auto result = run_sweep(spec);
    for (const auto& r : result.records) {
      if (!r.reference) {
        o.fail("missing sampling reference");
        continue;
      }
      ++compared;
      const auto& ut = r.transformed;
      const auto& mc = *r.reference;
      const double dm = std::hypot(ut.mean.x - mc.mean.x, ut.mean.y - mc.mean.y);
      const double dh = std::abs(oracle::wrap(ut.mean.theta - mc.mean.theta)) / kDeg;
      const double fr = oracle::frobenius_relative(ut.cov, mc.cov);
      worst_mean = std::max(worst_mean, dm);
      worst_heading = std::max(worst_heading, dh);
      worst_frob = std::max(worst_frob, fr);
      if (dm > 0.02 || dh > 0.02 || fr > 0.05) {
        o.fail(fmt("%s %s value %.4g offset %g object %zu: mean %.4f m, heading %.4f deg, frob %.4f", name,
                   mode_name(r.mode).c_str(), r.value, r.offset, r.object_index, dm, dh, fr));
      }
    }
  }
  const double elapsed = seconds_since(t0);
  if (elapsed > 300.0) o.fail(fmt("grid took %.1f s", elapsed));
  if (o.pass) {
    o.detail = fmt("%zu poses, worst mean %.4f m, heading %.4f deg, frobenius %.4f, %.1f s", compared, worst_mean,
                   worst_heading, worst_frob, elapsed);
  }
  return o;
}

constexpr double kRangeTie = 1e-6;

// Drops record 0, the sensing station itself.
std::vector<const SweepRecord*> perceived(std::vector<const SweepRecord*> records) {
  std::erase_if(records, [](const SweepRecord* r) { return r->object_index == 0; });
  return records;
}

// Angle between an ellipse axis and a direction, folded into [0, 90] deg.
double axis_angle_deg(double axis, double direction) {
  double d = std::fmod(std::abs(axis - direction), std::numbers::pi);
  if (d > std::numbers::pi / 2) d = std::numbers::pi - d;
  return d / kDeg;
}

// 2. Ellipses grow with range and lean along the tangential direction.
Outcome growth_with_range() {
  Outcome o;
  const auto& result = analytic_sweep("test1");
  const auto& spec = result.spec;
  double worst_slant = 0.0;
  std::size_t series = 0, ordered_pairs = 0;
  for (auto mode : spec.modes) {
    for (std::size_t v = 0; v < spec.values.size(); ++v) {
      if (spec.values[v] < 0.5 * kDeg - 1e-12) continue;
      for (std::size_t k = 0; k < spec.offsets.size(); ++k) {
        auto records = perceived(result.combination(mode, v, k));
        std::sort(records.begin(), records.end(),
                  [](auto* a, auto* b) { return a->range_to_receiver < b->range_to_receiver; });
        ++series;
        // V2I: the infrastructure heading is essentially exact, so growth is
        // ordered by range to the receiver. V2V: both headings are uncertain
        // and an object must be at least as far from both stations. Objects
        // mirrored about the receiver share a range and are not ordered.
        auto further = [&](const SweepRecord& a, const SweepRecord& b) {
          const double dr = a.range_to_receiver - b.range_to_receiver;
          const double ds = a.range_to_sender - b.range_to_sender;
          if (mode == SensingMode::v2i) return dr > kRangeTie;
          return dr > -kRangeTie && ds > -kRangeTie && (dr > kRangeTie || ds > kRangeTie);
        };
        for (const auto* a : records) {
          for (const auto* b : records) {
            if (!further(*a, *b)) continue;
            ++ordered_pairs;
            if (!(a->ellipse.semi_major > b->ellipse.semi_major)) {
              o.fail(fmt("%s sigma %.2f deg offset %g: major axis at %.2f m not above %.2f m",
                         mode_name(mode).c_str(), spec.values[v] / kDeg, spec.offsets[k], a->range_to_receiver,
                         b->range_to_receiver));
            }
          }
        }
        // Slant follows the tangential direction about the station whose
        // heading uncertainty spreads the farthest object the most.
        const auto* far = records.back();
        const auto& p = far->truth_in_receiver;
        const auto& station = result.combination(mode, v, k).front()->truth_in_receiver;
        const double receiver_spread =
            std::sqrt(spec.receiver_estimate(spec.values[v], spec.offsets[k]).cov(2, 2)) * far->range_to_receiver;
        const double sender_spread =
            std::sqrt(spec.sender_estimate(mode, spec.values[v]).cov(2, 2)) * far->range_to_sender;
        const double tangential = receiver_spread >= sender_spread
                                      ? std::atan2(p.y, p.x) + std::numbers::pi / 2
                                      : std::atan2(p.y - station.y, p.x - station.x) + std::numbers::pi / 2;
        const double slant = axis_angle_deg(far->ellipse.orientation, tangential);
        worst_slant = std::max(worst_slant, slant);
        if (slant > 10.0) {
          o.fail(fmt("%s sigma %.2f deg offset %g: farthest ellipse %.1f deg off tangential", mode_name(mode).c_str(),
                     spec.values[v] / kDeg, spec.offsets[k], slant));
        }
      }
    }
  }
  if (o.pass) {
    o.detail = fmt("%zu series, %zu ordered pairs growing, worst slant %.2f deg", series, ordered_pairs, worst_slant);
  }
  return o;
}

const SweepRecord& farthest(const SweepResult& result, SensingMode mode, std::size_t v, std::size_t k) {
  const auto records = perceived(result.combination(mode, v, k));
  return **std::max_element(records.begin(), records.end(),
                            [](auto* a, auto* b) { return a->range_to_receiver < b->range_to_receiver; });
}

// 3. Heading uncertainty inflates the ellipse of the farthest object in the
// test more than position uncertainty does. Quotients at the other offsets
// are reported for reference.
Outcome heading_dominates_position() {
  Outcome o;
  const auto& t1 = analytic_sweep("test1");
  const auto& t2 = analytic_sweep("test2");
  const std::size_t last1 = t1.spec.values.size() - 1, last2 = t2.spec.values.size() - 1;
  std::string report;
  for (auto mode : t1.spec.modes) {
    std::size_t far_offset = 0;
    double far_range = -1.0;
    for (std::size_t k = 0; k < t1.spec.offsets.size(); ++k) {
      const double r = farthest(t1, mode, 0, k).range_to_receiver;
      if (r > far_range) {
        far_range = r;
        far_offset = k;
      }
    }
    for (std::size_t k = 0; k < t1.spec.offsets.size(); ++k) {
      const double heading_ratio =
          farthest(t1, mode, last1, k).ellipse.area() / farthest(t1, mode, 0, k).ellipse.area();
      const double position_ratio =
          farthest(t2, mode, last2, k).ellipse.area() / farthest(t2, mode, 0, k).ellipse.area();
      report += fmt("%s%s@%g %.2f/%.2f", report.empty() ? "" : " ", mode_name(mode).c_str(), t1.spec.offsets[k],
                    heading_ratio, position_ratio);
      if (k == far_offset && !(heading_ratio > position_ratio)) {
        o.fail(fmt("%s farthest object (%.1f m): heading ratio %.3f vs position ratio %.3f", mode_name(mode).c_str(),
                   far_range, heading_ratio, position_ratio));
      }
    }
  }
  if (o.pass) o.detail = "heading/position area ratios " + report;
  return o;
}

// 4. Infrastructure senders never yield larger ellipses than vehicles.
Outcome infrastructure_not_worse() {
  Outcome o;
  std::size_t pairs = 0;
  for (const char* name : {"test1", "test2"}) {
    const auto& result = analytic_sweep(name);
    const auto& spec = result.spec;
    for (std::size_t v = 0; v < spec.values.size(); ++v) {
      for (std::size_t k = 0; k < spec.offsets.size(); ++k) {
        const auto v2i = result.combination(SensingMode::v2i, v, k);
        const auto v2v = result.combination(SensingMode::v2v, v, k);
        for (std::size_t i = 0; i < v2i.size(); ++i) {
          ++pairs;
          const double a = v2i[i]->ellipse.area(), b = v2v[i]->ellipse.area();
          if (a > b + 1e-9) {
            o.fail(fmt("%s value %.4g offset %g object %zu: %.6f > %.6f", name, spec.values[v], spec.offsets[k], i, a,
                       b));
          }
        }
      }
    }
  }
  if (o.pass) o.detail = fmt("%zu matched pairs", pairs);
  return o;
}

// 5. Wire format round trip, fuzzing and the minimal size.
Outcome codec() {
  Outcome o;
  std::mt19937_64 rng(5);
  for (int i = 0; i < 10000 && o.pass; ++i) {
    const auto m = oracle::random_message(rng);
    const auto bytes = cpm::encode(m);
    if (!(cpm::decode(bytes) == cpm::quantize(m))) o.fail(fmt("round trip %d differs from quantize", i));
  }
  std::vector<std::vector<std::uint8_t>> seeds;
  for (int i = 0; i < 16; ++i) seeds.push_back(cpm::encode(oracle::random_message(rng)));
  std::uniform_int_distribution<int> byte(0, 255), len(0, 300);
  std::size_t accepted = 0;
  for (int i = 0; i < 1000000; ++i) {
    std::vector<std::uint8_t> buf;
    if (i % 2 == 0) {
      buf.resize(static_cast<std::size_t>(len(rng)));
      for (auto& b : buf) b = static_cast<std::uint8_t>(byte(rng));
    } else {
      buf = seeds[static_cast<std::size_t>(i) % seeds.size()];
      buf[rng() % buf.size()] = static_cast<std::uint8_t>(byte(rng));
      if (i % 3 == 0) buf.resize(rng() % (buf.size() + 1));
    }
    try {
      cpm::decode(buf);
      ++accepted;
    } catch (const cpm::DecodeError& e) {
      if (e.offset() > buf.size()) o.fail(fmt("error offset %zu past %zu bytes", e.offset(), buf.size()));
    }
  }
  cpm::Cpm minimal;
  minimal.management.reference_position.cov = Eigen::Matrix3d::Identity() * 1e-4;
  const auto size = cpm::encode(minimal).size();
  if (size != 47) o.fail(fmt("minimal message is %zu bytes", size));
  if (o.pass) o.detail = fmt("10000 round trips, 1000000 fuzz buffers (%zu decoded), minimal 47 bytes", accepted);
  return o;
}

// 6. Figure-eight walker tracked through the full pipeline.
Outcome figure_eight_rmse() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const auto base = preset("figure-eight-walker");
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto s = base;
    s.seed = seed;
    const auto log = run_scenario(s);
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& t : log.ticks) {
      if (t.road_users.empty()) continue;
      const auto& truth = t.road_users.front().pose;
      double best = std::numeric_limits<double>::infinity();
      for (const auto& ct : t.tracks) {
        if (ct.object_class != cpm::ObjectClass::pedestrian) continue;
        best = std::min(best, std::hypot(ct.track.state.x - truth.x, ct.track.state.y - truth.y));
      }
      if (std::isfinite(best)) {
        sum += best * best;
        ++n;
      }
    }
    if (n < log.ticks.size() / 2) {
      o.fail(fmt("seed %llu: confirmed track on only %zu of %zu ticks", static_cast<unsigned long long>(seed), n,
                 log.ticks.size()));
      continue;
    }
    const double rmse = std::sqrt(sum / static_cast<double>(n));
    worst = std::max(worst, rmse);
    if (!(rmse < 0.4)) o.fail(fmt("seed %llu: RMSE %.3f m", static_cast<unsigned long long>(seed), rmse));
  }
  const double elapsed = seconds_since(t0);
  if (elapsed > 30.0) o.fail(fmt("10 runs took %.1f s", elapsed));
  if (o.pass) o.detail = fmt("worst RMSE %.3f m over 10 seeds, %.1f s", worst, elapsed);
  return o;
}

// 7. Hybrid A* against uniform-cost search on the same primitive graph.
Outcome planner_optimality() {
  Outcome o;
  const planner::VehicleParams vehicle;
  const planner::PlannerConfig config;
  double worst_ratio = 0.0;
  std::size_t feasible = 0, violations = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto c = oracle::random_planning_case(200, seed);
    const auto path = planner::plan(c.map, c.start, c.goal, vehicle, config);
    const auto ref = oracle::dijkstra(planner::PrimitiveGraph(c.map, vehicle, config), c.start, c.goal);
    if (path.feasible != ref.found) {
      o.fail(fmt("map %llu: planner feasible=%d, exhaustive found=%d", static_cast<unsigned long long>(seed),
                 path.feasible, ref.found));
      continue;
    }
    if (!ref.found) continue;
    ++feasible;
    const double ratio = path.cost / ref.cost;
    worst_ratio = std::max(worst_ratio, ratio);
    if (ratio > 1.05) o.fail(fmt("map %llu: cost ratio %.4f", static_cast<unsigned long long>(seed), ratio));
    if (planner::path_blocked(path, c.map)) {
      ++violations;
      o.fail(fmt("map %llu: path crosses an occupied cell", static_cast<unsigned long long>(seed)));
    }
  }
  if (feasible == 0) o.fail("no feasible map");
  if (o.pass) o.detail = fmt("%zu/20 feasible, worst cost ratio %.4f, %zu violations", feasible, worst_ratio, violations);
  return o;
}

bool inside(const planner::Rect& r, const Pose2& p) {
  return p.x >= r.min.x() && p.x <= r.max.x() && p.y >= r.min.y() && p.y <= r.max.y();
}

// 8. Give-way, keep-lane and overtake presets.
Outcome behaviour_presets() {
  Outcome o;
  using planner::Decision;

  // Crossing: give way before the stop line, then replan and proceed once the
  // walker has left the crossing.
  {
    const auto s = preset("lab-crossing");
    const auto& zone = s.lane_map->crossing_zones.front().area;
    const double stop_x = s.lane_map->stop_lines.front().a.x();
    const auto log = run_scenario(s);
    std::optional<std::size_t> give_way, replan, proceed;
    for (std::size_t i = 0; i < log.ticks.size(); ++i) {
      const auto& t = log.ticks[i];
      if (!t.decision) continue;
      if (*t.decision == Decision::give_way) {
        if (!give_way) give_way = i;
        if (t.ego_true.x > stop_x) o.fail(fmt("crossing: GiveWay past the stop line at tick %zu", i));
      }
      if (give_way && !replan && *t.decision == Decision::replan) replan = i;
      if (replan && !proceed && *t.decision == Decision::proceed) proceed = i;
    }
    if (!give_way || !replan || !proceed) {
      o.fail("crossing: decision sequence lacks GiveWay -> Replan -> Proceed");
    } else {
      for (const auto& u : log.ticks[*replan].road_users) {
        if (inside(zone, u.pose)) o.fail(fmt("crossing: Replan at tick %zu with the walker still crossing", *replan));
      }
      if (log.ticks.back().decision != Decision::proceed) o.fail("crossing: run does not end in Proceed");
      if (!(log.ticks.back().ego_true.x > zone.max.x())) o.fail("crossing: vehicle never passes the crossing");
      o.detail = fmt("crossing GiveWay@%zu Replan@%zu Proceed@%zu", *give_way, *replan, *proceed);
    }
  }

  // Walker in the opposite lane: the plans match a run without the walker
  // and keep the footprint inside the ego lane.
  {
    const auto s = preset("opposite-lane-walker");
    const double lane_y = s.receiver().goal->y;
    const double room = 0.5 * s.lane_map->lanes.front().width - 0.5 * s.receiver().vehicle.width;
    auto deviation = [&](const ScenarioLog& log) {
      double worst = 0.0;
      for (const auto& t : log.ticks) {
        for (const auto& p : t.path.poses) worst = std::max(worst, std::abs(p.y - lane_y));
        worst = std::max(worst, std::abs(t.ego_true.y - lane_y));
      }
      return worst;
    };
    const auto log = run_scenario(s);
    auto empty = s;
    empty.road_users.clear();
    const double with_walker = deviation(log), without_walker = deviation(run_scenario(empty));
    std::size_t replans = 0;
    for (const auto& t : log.ticks) replans += t.decision == Decision::replan;
    if (replans != 0) o.fail(fmt("opposite lane: %zu Replan ticks", replans));
    if (with_walker > without_walker + 0.5 * s.cost_map.resolution) {
      o.fail(fmt("opposite lane: deviation %.2f m against %.2f m without the walker", with_walker, without_walker));
    }
    if (with_walker > room) o.fail(fmt("opposite lane: footprint leaves the lane (%.2f m off centre)", with_walker));
    if (o.pass) o.detail += fmt(", opposite-lane deviation %.2f m (%.2f m without walker)", with_walker, without_walker);
  }

  // Walker in the ego lane, crossable divider: leave the lane and come back.
  {
    const auto s = preset("mid-lane-overtake");
    const double lane_y = s.receiver().goal->y;
    const double divider_y = s.lane_map->dividing_lines.front().line.front().y();
    const auto log = run_scenario(s);
    double peak = -std::numeric_limits<double>::infinity();
    std::size_t peak_tick = 0;
    for (std::size_t i = 0; i < log.ticks.size(); ++i) {
      if (log.ticks[i].ego_true.y > peak) {
        peak = log.ticks[i].ego_true.y;
        peak_tick = i;
      }
    }
    if (!(peak > divider_y)) o.fail(fmt("overtake: ego never crosses the divider (max y %.2f)", peak));
    const auto& last = log.ticks.back().ego_true;
    const double room = 0.5 * s.lane_map->lanes.front().width - 0.5 * s.receiver().vehicle.width;
    if (std::abs(last.y - lane_y) > room) o.fail(fmt("overtake: ends outside the ego lane (y %.2f)", last.y));
    const double walker_x = s.road_users.front().trajectory.points.front().x();
    if (!(last.x > walker_x)) o.fail("overtake: vehicle does not pass the walker");
    if (o.pass) o.detail += fmt(", overtake peak y %.2f at tick %zu, final y %.2f", peak, peak_tick, last.y);
  }
  return o;
}

// 9. Outputs are byte-identical across runs.
Outcome determinism() {
  Outcome o;
  std::size_t files = 0;
  for (const auto& entry : std::filesystem::directory_iterator(kData / "scenarios")) {
    const auto s = load_scenario(entry.path());
    std::string csv[2], svg[2];
    for (int run = 0; run < 2; ++run) {
      const auto log = run_scenario(s);
      std::ostringstream out;
      write_scenario_csv(log, out);
      csv[run] = out.str();
      svg[run] = scenario_svg(s, log);
    }
    files += 2;
    if (csv[0] != csv[1]) o.fail(entry.path().filename().string() + " CSV differs");
    if (svg[0] != svg[1]) o.fail(entry.path().filename().string() + " SVG differs");
  }
  for (const char* name : {"test1", "test2"}) {
    auto spec = bundled(name);
    spec.monte_carlo_samples = 20000;
    std::string csv[2], svg[2];
    for (int run = 0; run < 2; ++run) {
      // Different thread counts must not matter either.
      const auto result = run_sweep(spec, run == 0 ? 1u : 4u);
      std::ostringstream out;
      write_sweep_csv(result, out);
      csv[run] = out.str();
      for (auto mode : spec.modes) {
        for (std::size_t v = 0; v < spec.values.size(); ++v) {
          for (std::size_t k = 0; k < spec.offsets.size(); ++k) svg[run] += sweep_svg(result, mode, v, k);
        }
      }
    }
    files += 2;
    if (csv[0] != csv[1]) o.fail(std::string(name) + " sweep CSV differs");
    if (svg[0] != svg[1]) o.fail(std::string(name) + " sweep SVGs differ");
  }
  if (o.pass) o.detail = fmt("%zu output pairs identical", files);
  return o;
}

struct Criterion {
  int number;
  const char* title;
  std::function<Outcome()> check;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria{
      {1, "unscented transform matches 1e6-sample reference", ut_against_sampling},
      {2, "ellipse growth with range and tangential slant", growth_with_range},
      {3, "heading uncertainty dominates position uncertainty", heading_dominates_position},
      {4, "V2I ellipses no larger than V2V", infrastructure_not_worse},
      {5, "CPM codec round trip, fuzz and size", codec},
      {6, "figure-eight tracking RMSE below 0.4 m", figure_eight_rmse},
      {7, "hybrid A* within 5% of exhaustive search", planner_optimality},
      {8, "give-way, keep-lane and overtake presets", behaviour_presets},
      {9, "byte-identical CSV and SVG outputs", determinism},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  int failures = 0;
  for (const auto& c : criteria) {
    if (!selected.empty() && !selected.contains(c.number)) continue;
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    failures += o.pass ? 0 : 1;
    std::printf("%s criterion %d: %s (%s) [%.1f s]\n", o.pass ? "PASS" : "FAIL", c.number, c.title, o.detail.c_str(),
                seconds_since(t0));
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
