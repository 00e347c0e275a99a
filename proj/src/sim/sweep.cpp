#include "coopsense/sim/sweep.hpp"

#include "coopsense/geometry/unscented.hpp"
#include "coopsense/sim/monte_carlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <thread>

namespace coopsense::sim {

std::string_view to_string(SensingMode mode) { return mode == SensingMode::v2i ? "V2I" : "V2V"; }

std::string_view to_string(SweepParameter parameter) {
  return parameter == SweepParameter::receiver_heading_std ? "receiver_heading_std" : "receiver_position_std";
}

namespace {

Eigen::Matrix3d diag_cov(double position_std, double heading_std) {
  return Eigen::Vector3d(position_std * position_std, position_std * position_std, heading_std * heading_std)
      .asDiagonal();
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

void SweepSpec::validate() const {
  if (values.empty()) throw std::invalid_argument("sweep '" + name + "': values must not be empty");
  for (const double v : values) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("sweep '" + name + "': values must be finite and >= 0");
  }
  if (modes.empty()) throw std::invalid_argument("sweep '" + name + "': at least one mode is required");
  if (offsets.empty()) throw std::invalid_argument("sweep '" + name + "': at least one offset is required");
  if (object_count <= 0) throw std::invalid_argument("sweep '" + name + "': object_count must be > 0");
  if (!(probability_mass > 0.0 && probability_mass < 1.0)) {
    throw std::invalid_argument("sweep '" + name + "': probability mass must lie in (0, 1)");
  }
}

Pose2 SweepSpec::receiver_at(double offset) const { return {sender.x - offset, receiver_y, receiver_heading}; }

std::vector<GaussianPose2> SweepSpec::objects_in_sender() const {
  std::vector<GaussianPose2> out;
  out.push_back({});
  for (int k = 0; k < object_count; ++k) {
    out.push_back({{object_first + object_spacing * k, 0.0, 0.0}, diag_cov(object_position_std, object_heading_std)});
  }
  return out;
}

GaussianPose2 SweepSpec::receiver_estimate(double value, double offset) const {
  const bool heading = parameter == SweepParameter::receiver_heading_std;
  return {receiver_at(offset), diag_cov(heading ? receiver_position_std : value, heading ? value : receiver_heading_std)};
}

GaussianPose2 SweepSpec::sender_estimate(SensingMode mode, double value) const {
  if (mode == SensingMode::v2i) return {sender, diag_cov(irsu_position_std, irsu_heading_std)};
  return {sender, receiver_estimate(value, 0.0).cov};
}

std::vector<const SweepRecord*> SweepResult::combination(SensingMode mode, std::size_t value_index,
                                                         std::size_t offset_index) const {
  std::vector<const SweepRecord*> out;
  for (const auto& r : records) {
    if (r.mode == mode && r.value_index == value_index && r.offset_index == offset_index) out.push_back(&r);
  }
  return out;
}

unsigned default_thread_count() {
  if (const char* env = std::getenv("COOPSENSE_THREADS")) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && n > 0) return static_cast<unsigned>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

SweepResult run_sweep(const SweepSpec& spec, unsigned threads) {
  spec.validate();
  struct Combination {
    std::size_t mode, value, offset;
  };
  std::vector<Combination> combos;
  for (std::size_t m = 0; m < spec.modes.size(); ++m) {
    for (std::size_t v = 0; v < spec.values.size(); ++v) {
      for (std::size_t o = 0; o < spec.offsets.size(); ++o) combos.push_back({m, v, o});
    }
  }
  const auto objects = spec.objects_in_sender();
  std::vector<std::vector<SweepRecord>> slots(combos.size());

  const auto run_one = [&](std::size_t index) {
    const Combination& c = combos[index];
    const SensingMode mode = spec.modes[c.mode];
    const double value = spec.values[c.value];
    const double offset = spec.offsets[c.offset];
    const GaussianPose2 receiver = spec.receiver_estimate(value, offset);
    const GaussianPose2 sender = spec.sender_estimate(mode, value);

    std::vector<GaussianPose2> references;
    if (spec.monte_carlo_samples > 0) {
      const std::uint64_t seed = splitmix64(spec.seed ^ splitmix64(index));
      references = monte_carlo_reference_batch(receiver, sender, objects, spec.monte_carlo_samples, seed);
    }
    auto& out = slots[index];
    for (std::size_t k = 0; k < objects.size(); ++k) {
      SweepRecord r;
      r.mode = mode;
      r.value_index = c.value;
      r.value = value;
      r.offset_index = c.offset;
      r.offset = offset;
      r.object_index = k;
      const Pose2 global = geometry::compose(spec.sender, objects[k].mean);
      r.range_to_receiver = std::hypot(global.x - receiver.mean.x, global.y - receiver.mean.y);
      r.range_to_sender = std::hypot(objects[k].mean.x, objects[k].mean.y);
      r.truth_in_receiver = geometry::trans(receiver.mean, sender.mean, objects[k].mean);
      r.transformed = geometry::transform_with_uncertainty(receiver, sender, objects[k]);
      r.ellipse = geometry::confidence_ellipse(r.transformed.cov.topLeftCorner<2, 2>(),
                                               {r.transformed.mean.x, r.transformed.mean.y}, spec.probability_mass);
      if (!references.empty()) r.reference = references[k];
      out.push_back(r);
    }
  };

  if (threads == 0) threads = default_thread_count();
  threads = std::min<unsigned>(threads, static_cast<unsigned>(combos.size()));
  if (threads <= 1) {
    for (std::size_t i = 0; i < combos.size(); ++i) run_one(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(threads);
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        try {
          for (std::size_t i = next++; i < combos.size(); i = next++) run_one(i);
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  SweepResult result;
  result.spec = spec;
  for (auto& slot : slots) {
    for (auto& r : slot) result.records.push_back(std::move(r));
  }
  return result;
}

}  // namespace coopsense::sim
