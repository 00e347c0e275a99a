#include "coopsense/tracker/gm_phd.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace coopsense::tracker {

namespace {

using geometry::normalize_angle;

constexpr double kMinPositionVar = 1e-8;
constexpr double kMinHeadingVar = 1e-10;
constexpr double kMinSpeedVar = 1e-8;
constexpr double kRegularisation = 1e-12;

// Measurement vectors have 2 (position), 3 (+heading) or 4 (+speed) rows.
using MeasVector = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 4, 1>;
using MeasMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 4, 4>;
using GainMatrix = Eigen::Matrix<double, 4, Eigen::Dynamic, 0, 4, 4>;
using ObsMatrix = Eigen::Matrix<double, Eigen::Dynamic, 4, 0, 4, 4>;

struct MeasurementModel {
  MeasVector z;
  MeasMatrix r;
  ObsMatrix h;
  int heading_row = -1;
  double clutter_intensity = 0.0;
};

MeasurementModel build_model(const Measurement& m, const TrackerParams& params) {
  if (!m.position.allFinite() || !m.position_cov.allFinite() || !std::isfinite(m.heading) ||
      !std::isfinite(m.heading_var)) {
    throw std::invalid_argument("tracker update: non-finite measurement");
  }
  const Eigen::Matrix2d pc = 0.5 * (m.position_cov + m.position_cov.transpose());
  if (std::abs(m.position_cov(0, 1) - m.position_cov(1, 0)) > geometry::kSymmetryTolerance ||
      pc.determinant() < -geometry::kPsdTolerance || pc(0, 0) < -geometry::kPsdTolerance ||
      pc(1, 1) < -geometry::kPsdTolerance || m.heading_var < 0.0) {
    throw std::invalid_argument("tracker update: measurement covariance is not positive semi-definite");
  }
  const bool use_heading = m.heading_reliable;
  const bool use_speed = m.speed.has_value() && std::isfinite(*m.speed) && std::isfinite(m.speed_var);
  const int rows = 2 + (use_heading ? 1 : 0) + (use_speed ? 1 : 0);

  MeasurementModel model;
  model.z.setZero(rows);
  model.r.setZero(rows, rows);
  model.h.setZero(rows, 4);
  model.z.head<2>() = m.position;
  model.r.topLeftCorner<2, 2>() = pc;
  model.r(0, 0) = std::max(model.r(0, 0), kMinPositionVar);
  model.r(1, 1) = std::max(model.r(1, 1), kMinPositionVar);
  model.h(0, 0) = 1.0;
  model.h(1, 1) = 1.0;
  model.clutter_intensity = params.clutter_density;
  int row = 2;
  if (use_heading) {
    model.z(row) = normalize_angle(m.heading);
    model.r(row, row) = std::max(m.heading_var, kMinHeadingVar);
    model.h(row, 2) = 1.0;
    model.heading_row = row;
    model.clutter_intensity /= 2.0 * std::numbers::pi;
    ++row;
  }
  if (use_speed) {
    model.z(row) = *m.speed;
    model.r(row, row) = std::max(m.speed_var, kMinSpeedVar);
    model.h(row, 3) = 1.0;
    model.clutter_intensity /= params.speed_span;
  }
  return model;
}

struct KalmanResult {
  StateVector mean;
  StateMatrix cov;
  double likelihood;
};

KalmanResult kalman_update(const GaussianComponent& c, const MeasurementModel& model) {
  MeasVector innovation = model.z - model.h * c.mean;
  if (model.heading_row >= 0) innovation(model.heading_row) = normalize_angle(innovation(model.heading_row));
  const int k = static_cast<int>(model.z.size());

  MeasMatrix s = model.h * c.cov * model.h.transpose() + model.r;
  s = (0.5 * (s + s.transpose())).eval();
  const Eigen::LLT<MeasMatrix> llt(s);
  const GainMatrix pht = c.cov * model.h.transpose();
  const GainMatrix gain = llt.solve(pht.transpose()).transpose();

  KalmanResult out;
  out.mean = c.mean + gain * innovation;
  const StateMatrix ikh = StateMatrix::Identity() - gain * model.h;
  out.cov = ikh * c.cov * ikh.transpose() + gain * model.r * gain.transpose();
  out.cov = (0.5 * (out.cov + out.cov.transpose())).eval();

  const MeasVector whitened = llt.matrixL().solve(innovation);
  const double log_det = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  out.likelihood = std::exp(-0.5 * whitened.squaredNorm() - 0.5 * log_det - 0.5 * k * std::log(2.0 * std::numbers::pi));
  return out;
}

GaussianComponent birth_component(const Measurement& m, const MeasurementModel& model, const TrackerParams& params) {
  GaussianComponent b;
  b.weight = params.birth_weight;
  b.mean << m.position, (m.heading_reliable ? normalize_angle(m.heading) : 0.0), 0.0;
  b.cov.setZero();
  b.cov.topLeftCorner<2, 2>() = model.r.topLeftCorner<2, 2>();
  b.cov(2, 2) = m.heading_reliable ? std::max(m.heading_var, kMinHeadingVar) : std::numbers::pi * std::numbers::pi;
  const bool use_speed = m.speed.has_value() && std::isfinite(*m.speed) && std::isfinite(m.speed_var);
  b.mean(3) = use_speed ? *m.speed : 0.0;
  b.cov(3, 3) = use_speed ? std::max(m.speed_var, kMinSpeedVar) : params.birth_speed_std * params.birth_speed_std;
  canonicalize(b);
  return b;
}

// Residual of b relative to a with a wrapped heading.
StateVector state_residual(const StateVector& b, const StateVector& a) {
  StateVector d = b - a;
  d(2) = normalize_angle(d(2));
  return d;
}

}  // namespace

void canonicalize(GaussianComponent& c) {
  if (c.mean(3) < 0.0) {
    c.mean(3) = -c.mean(3);
    c.mean(2) += std::numbers::pi;
    StateMatrix flip = StateMatrix::Identity();
    flip(3, 3) = -1.0;
    c.cov = flip * c.cov * flip;
  }
  c.mean(2) = normalize_angle(c.mean(2));
}

std::vector<GaussianComponent> predict(std::span<const GaussianComponent> components, double dt,
                                       const TrackerParams& params) {
  if (!(dt >= 0.0)) throw std::invalid_argument("tracker predict: dt must be non-negative");
  std::vector<GaussianComponent> out(components.begin(), components.end());
  if (dt == 0.0) return out;

  const double q_heading = params.heading_noise_std * params.heading_noise_std;
  const double q_speed = params.speed_noise_std * params.speed_noise_std;
  const double t1 = dt, t2 = dt * dt / 2.0, t3 = dt * dt * dt / 3.0;

  for (auto& c : out) {
    const double h = c.mean(2);
    const double v = c.mean(3);
    const double ch = std::cos(h), sh = std::sin(h);

    StateMatrix f = StateMatrix::Identity();
    f(0, 2) = -v * sh * dt;
    f(0, 3) = ch * dt;
    f(1, 2) = v * ch * dt;
    f(1, 3) = sh * dt;

    // Integrated white noise on heading rate and acceleration, propagated
    // through the linearised motion.
    const Eigen::Vector4d u(-v * sh, v * ch, 0.0, 0.0);
    const Eigen::Vector4d w(ch, sh, 0.0, 0.0);
    const Eigen::Vector4d e_heading(0.0, 0.0, 1.0, 0.0);
    const Eigen::Vector4d e_speed(0.0, 0.0, 0.0, 1.0);
    StateMatrix q = q_heading * (t3 * u * u.transpose() + t2 * (u * e_heading.transpose() + e_heading * u.transpose()) +
                                 t1 * e_heading * e_heading.transpose());
    q += q_speed * (t3 * w * w.transpose() + t2 * (w * e_speed.transpose() + e_speed * w.transpose()) +
                    t1 * e_speed * e_speed.transpose());

    c.mean(0) += v * ch * dt;
    c.mean(1) += v * sh * dt;
    c.cov = f * c.cov * f.transpose() + q;
    c.cov = (0.5 * (c.cov + c.cov.transpose())).eval();
    c.weight *= params.p_survival;
    canonicalize(c);
  }
  return out;
}

std::vector<GaussianComponent> update(std::span<const GaussianComponent> components,
                                      std::span<const Measurement> measurements, const TrackerParams& params) {
  std::vector<MeasurementModel> models;
  models.reserve(measurements.size());
  for (const auto& m : measurements) models.push_back(build_model(m, params));

  std::vector<GaussianComponent> out;
  out.reserve(components.size() * (measurements.size() + 1) + measurements.size());
  for (const auto& c : components) {
    GaussianComponent missed = c;
    missed.weight = c.weight * (1.0 - params.p_detect);
    out.push_back(std::move(missed));
  }

  std::vector<GaussianComponent> detected(components.size());
  for (std::size_t mi = 0; mi < measurements.size(); ++mi) {
    const auto& model = models[mi];
    double association = 0.0;
    for (std::size_t j = 0; j < components.size(); ++j) {
      const auto& c = components[j];
      const KalmanResult k = kalman_update(c, model);
      detected[j].mean = k.mean;
      detected[j].cov = k.cov;
      detected[j].track_id = c.track_id;
      detected[j].weight = params.p_detect * c.weight * k.likelihood;
      association += detected[j].weight;
    }
    const double normaliser = model.clutter_intensity + association;
    if (normaliser > 0.0) {
      for (auto& d : detected) {
        GaussianComponent updated = d;
        updated.weight = d.weight / normaliser;
        canonicalize(updated);
        out.push_back(std::move(updated));
      }
    }
    if (model.clutter_intensity >= association) {
      out.push_back(birth_component(measurements[mi], model, params));
    }
  }
  return out;
}

std::vector<GaussianComponent> prune_and_merge(std::span<const GaussianComponent> components,
                                               const TrackerParams& params) {
  std::vector<std::size_t> alive;
  for (std::size_t i = 0; i < components.size(); ++i) {
    if (components[i].weight >= params.prune_threshold && std::isfinite(components[i].weight)) alive.push_back(i);
  }
  // Heaviest first; index breaks ties.
  std::stable_sort(alive.begin(), alive.end(),
                   [&](std::size_t a, std::size_t b) { return components[a].weight > components[b].weight; });

  const double gate = params.merge_distance * params.merge_distance;
  std::vector<bool> used(components.size(), false);
  std::vector<GaussianComponent> merged;

  for (std::size_t leader_pos = 0; leader_pos < alive.size(); ++leader_pos) {
    const std::size_t leader = alive[leader_pos];
    if (used[leader]) continue;
    const auto& lc = components[leader];
    std::optional<TrackId> group_id = lc.track_id;

    std::vector<std::size_t> group;
    for (std::size_t pos = leader_pos; pos < alive.size(); ++pos) {
      const std::size_t i = alive[pos];
      if (used[i]) continue;
      const auto& ci = components[i];
      // Components labelled with different tracks never merge.
      if (ci.track_id && group_id && *ci.track_id != *group_id) continue;
      const StateVector d = state_residual(ci.mean, lc.mean);
      const StateMatrix reg = ci.cov + kRegularisation * StateMatrix::Identity();
      const double m2 = d.dot(reg.ldlt().solve(d));
      if (i != leader && !(m2 <= gate)) continue;
      if (!group_id && ci.track_id) group_id = ci.track_id;
      group.push_back(i);
      used[i] = true;
    }

    GaussianComponent out;
    out.track_id = group_id;
    StateVector offset = StateVector::Zero();
    for (std::size_t i : group) {
      out.weight += components[i].weight;
      offset += components[i].weight * state_residual(components[i].mean, lc.mean);
    }
    offset /= out.weight;
    out.mean = lc.mean + offset;
    out.cov.setZero();
    for (std::size_t i : group) {
      const StateVector d = state_residual(components[i].mean, lc.mean) - offset;
      out.cov += components[i].weight * (components[i].cov + d * d.transpose());
    }
    out.cov /= out.weight;
    out.cov = (0.5 * (out.cov + out.cov.transpose())).eval();
    canonicalize(out);
    merged.push_back(std::move(out));
  }

  std::stable_sort(merged.begin(), merged.end(),
                   [](const GaussianComponent& a, const GaussianComponent& b) { return a.weight > b.weight; });
  if (merged.size() > params.max_components) merged.resize(params.max_components);
  return merged;
}

std::vector<Track> extract_tracks(std::vector<GaussianComponent>& components, const TrackerParams& params,
                                  TrackIdAllocator& ids) {
  std::vector<std::size_t> order(components.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return components[a].weight > components[b].weight; });

  std::vector<Track> tracks;
  for (std::size_t i : order) {
    auto& c = components[i];
    if (!(c.weight >= params.confirm_weight)) break;
    if (!c.track_id) c.track_id = ids.next();
    const bool reported = std::any_of(tracks.begin(), tracks.end(), [&](const Track& t) { return t.id == *c.track_id; });
    if (reported) continue;
    tracks.push_back({*c.track_id, TargetState::from_vector(c.mean), c.cov, c.weight});
  }
  std::sort(tracks.begin(), tracks.end(), [](const Track& a, const Track& b) { return a.id < b.id; });
  return tracks;
}

std::vector<Measurement> self_filter(std::span<const Measurement> measurements, const geometry::GaussianPose2& ego,
                                     double exclusion_radius) {
  if (!(exclusion_radius > 0.0)) throw std::invalid_argument("self_filter: exclusion radius must be positive");
  std::vector<Measurement> kept;
  const Eigen::Vector2d ego_position(ego.mean.x, ego.mean.y);
  for (const auto& m : measurements) {
    if ((m.position - ego_position).norm() <= exclusion_radius) continue;
    kept.push_back(m);
  }
  return kept;
}

}  // namespace coopsense::tracker
