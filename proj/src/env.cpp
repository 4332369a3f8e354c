#include "msr/env.hpp"

#include <cmath>
#include <numbers>

namespace msr {

FieldState clamp_field(const FieldState& field, const Vec2& increment_mT) {
  FieldState next = field;
  next.b.x() += increment_mT.x() * 1e-3;
  next.b.y() += increment_mT.y() * 1e-3;
  // Radial rescaling alone can push a realized per-axis increment past the
  // per-axis bound near the cap, so alternate projections onto the cap disc
  // and the per-axis increment box around the previous field. Both sets are
  // convex and contain the previous field, so this converges; a handful of
  // rounds reaches machine precision.
  const double bound =
      std::max(std::abs(increment_mT.x()), std::abs(increment_mT.y())) * 1e-3;
  for (int round = 0; round < 32; ++round) {
    const double amplitude = next.b.norm();
    const bool over_cap = amplitude > next.b_max;
    if (over_cap) next.b *= next.b_max / amplitude;
    const Vec3 delta = next.b - field.b;
    const double worst = std::max(std::abs(delta.x()), std::abs(delta.y()));
    if (worst > bound) {
      next.b.x() = field.b.x() + std::clamp(delta.x(), -bound, bound);
      next.b.y() = field.b.y() + std::clamp(delta.y(), -bound, bound);
    } else if (!over_cap) {
      break;
    }
  }
  return next;
}

VecX build_observation(const RodState& rod, const FieldState& field,
                       const GroundPlane& ground, const EnvConfig& cfg) {
  const int n = rod.element_count();
  const double height_scale =
      cfg.height_scale > 0.0 ? cfg.height_scale : 1.0 / cfg.material.length;

  std::vector<int> sampled;
  for (int i = 0; i < rod.node_count(); i += cfg.sampled_node_stride) {
    sampled.push_back(i);
  }

  VecX obs(3 * n + 2 * static_cast<int>(sampled.size()) + 3);
  int at = 0;
  for (int j = 0; j < n; ++j) {
    const Vec3 d3 = rod.element_directors[j].col(2);
    const double theta = std::atan2(d3.y(), d3.x());
    obs(at++) = std::sin(theta);
    obs(at++) = std::cos(theta);
    // Planar spin is about d2.
    obs(at++) = rod.element_angular_velocities(1, j) * cfg.angular_velocity_scale;
  }
  const VecX indicators = contact_indicators(rod, ground);
  for (int i : sampled) {
    obs(at++) = (rod.node_positions(1, i) - ground.height) * height_scale;
    obs(at++) = indicators(i);
  }
  const auto [angle, amplitude] = field_polar(field);
  obs(at++) = std::sin(angle);
  obs(at++) = std::cos(angle);
  obs(at++) = amplitude / field.b_max;
  return obs;
}

MsrEnv::MsrEnv(const EnvConfig& cfg) : cfg_(cfg) {
  if (cfg_.density_scale < 1.0) {
    throw ConfigError("MsrEnv: density_scale must be >= 1");
  }
  const double substeps = cfg_.action_period / cfg_.dt;
  substeps_per_action_ = static_cast<int>(std::lround(substeps));
  if (substeps_per_action_ < 1 ||
      std::abs(substeps - substeps_per_action_) > 1e-9 * substeps) {
    throw ConfigError("MsrEnv: dt must divide the action period");
  }

  MaterialParams scaled = cfg_.material;
  scaled.density *= cfg_.density_scale;
  scaled_gravity_ = cfg_.gravity / cfg_.density_scale;

  auto [rod, rig] = build_rod(scaled, cfg_.elements);
  rod_ = std::move(rod);
  rigidity_ = rig;
  if (cfg_.dt > stable_dt_estimate(rod_, rigidity_)) {
    throw ConfigError("MsrEnv: dt exceeds the stability bound " +
                      std::to_string(stable_dt_estimate(rod_, rigidity_)));
  }

  profile_ = pattern_profile(cfg_.pattern, cfg_.elements, cfg_.magnetization);
  ground_ = cfg_.ground;
  field_.b_max = cfg_.field_cap_mT * 1e-3;
}

int MsrEnv::observation_size() const {
  const int sampled = (cfg_.elements + cfg_.sampled_node_stride) /
                      cfg_.sampled_node_stride;
  return 3 * cfg_.elements + 2 * sampled + 3;
}

Mat3X MsrEnv::accumulate_external_forces() const {
  const Mat3X damping = damping_forces(rod_, cfg_.damping);
  const InternalLoads internal =
      internal_loads(rod_, compute_strains(rod_), rigidity_);
  const Mat3X contact = ground_response(
      rod_, ground_, scaled_gravity_, internal.node_forces + damping, cfg_.dt);
  return damping + contact;
}

void MsrEnv::substep() {
  const Mat3X forces = accumulate_external_forces();
  const Mat3X torques = magnetic_torques(rod_, profile_, field_);
  try {
    msr::step(rod_, rigidity_, forces, torques, cfg_.dt);
  } catch (const InstabilityError& e) {
    throw InstabilityError(std::string(e.what()) + " (environment step " +
                           std::to_string(step_index_) + ")");
  }
}

VecX MsrEnv::reset(std::uint64_t seed) {
  rng_.seed(seed);

  MaterialParams scaled = cfg_.material;
  scaled.density *= cfg_.density_scale;
  auto [rod, rig] = build_rod(scaled, cfg_.elements);
  rod_ = std::move(rod);
  rigidity_ = rig;

  // Start each node at its penalty-equilibrium penetration, then settle.
  for (int i = 0; i < rod_.node_count(); ++i) {
    rod_.node_positions(1, i) =
        ground_.height -
        rod_.node_masses(i) * scaled_gravity_ / ground_.normal_stiffness;
  }
  field_.b.setZero();
  const long settle_steps =
      static_cast<long>(std::lround(cfg_.settle_seconds / cfg_.dt));
  for (long s = 0; s < settle_steps; ++s) substep();
  rod_.node_velocities.setZero();
  rod_.element_angular_velocities.setZero();

  if (cfg_.random_initial_field) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double radius = field_.b_max * std::sqrt(unit(rng_));
    const double angle = 2.0 * std::numbers::pi * unit(rng_);
    field_.b = Vec3(radius * std::cos(angle), radius * std::sin(angle), 0.0);
  }

  elapsed_ = 0.0;
  step_index_ = 0;
  start_mid_x_ = rod_.node_positions(0, rod_.element_count() / 2);
  return build_observation(rod_, field_, ground_, cfg_);
}

Environment::StepResult MsrEnv::step(const VecX& action) {
  if (action.size() != 2) throw ConfigError("MsrEnv: action must have 2 components");
  Vec2 increment(action(0), action(1));
  increment = increment.cwiseMax(-cfg_.action_bound_mT).cwiseMin(cfg_.action_bound_mT);
  field_ = clamp_field(field_, increment);

  const int mid = rod_.element_count() / 2;
  const double x_before = rod_.node_positions(0, mid);
  for (int s = 0; s < substeps_per_action_; ++s) substep();
  const double x_after = rod_.node_positions(0, mid);

  elapsed_ += cfg_.action_period;
  ++step_index_;

  StepResult result;
  result.observation = build_observation(rod_, field_, ground_, cfg_);
  result.reward = cfg_.reward_coefficient * (x_after - x_before);
  result.truncated =
      elapsed_ >= cfg_.episode_seconds - 0.5 * cfg_.action_period;
  return result;
}

double MsrEnv::forward_displacement() const {
  return rod_.node_positions(0, rod_.element_count() / 2) - start_mid_x_;
}

}  // namespace msr
