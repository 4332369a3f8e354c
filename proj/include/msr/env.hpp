#pragma once

#include <cstdint>
#include <memory>
#include <random>

#include "msr/contact.hpp"
#include "msr/dissipation.hpp"
#include "msr/magnetics.hpp"
#include "msr/rod.hpp"
#include "msr/types.hpp"

namespace msr {

/// Minimal reset/step surface shared by the robot environment and test
/// environments; actions are bounded per-component by action_bound().
class Environment {
 public:
  struct StepResult {
    VecX observation;
    double reward = 0.0;
    bool truncated = false;
  };

  virtual ~Environment() = default;
  virtual VecX reset(std::uint64_t seed) = 0;
  virtual StepResult step(const VecX& action) = 0;
  virtual int observation_size() const = 0;
  virtual int action_size() const = 0;
  virtual double action_bound() const = 0;
  /// Net middle-point forward displacement since the last reset, m.
  virtual double forward_displacement() const = 0;
};

struct EnvConfig {
  MaterialParams material;
  DampingConfig damping;
  GroundPlane ground;
  MagnetizationPattern pattern = MagnetizationPattern::kTransverseHalves;
  double magnetization = 61.3e3;  // A/m

  double field_cap_mT = 4.0;
  double action_bound_mT = 0.3;   // per-axis increment limit
  double action_period = 0.01;    // s, 100 Hz
  double episode_seconds = 20.0;  // truncation cap
  double dt = 2.5e-5;             // physics substep, must divide action_period
  double density_scale = 1.0;     // rho * scale, g / scale
  double gravity = 9.81;          // m/s^2, before scaling
  double reward_coefficient = 1000.0;  // c_r, 1/m
  bool random_initial_field = true;    // train mode; false = rollout mode
  int elements = 20;
  int sampled_node_stride = 2;
  double settle_seconds = 0.1;    // post-reset settling time

  // Fixed per-feature observation scales.
  double angular_velocity_scale = 0.02;  // multiplies rad/s
  double height_scale = 0.0;             // 0 means 1 / body length
};

/// The planar magnetic-soft-robot locomotion environment: a rod on flat
/// ground actuated by a uniform field whose per-step increments are the
/// agent's actions. The 20 s cap is a truncation signal, never a terminal
/// state.
class MsrEnv : public Environment {
 public:
  explicit MsrEnv(const EnvConfig& cfg);

  VecX reset(std::uint64_t seed) override;
  StepResult step(const VecX& action) override;

  int observation_size() const override;
  int action_size() const override { return 2; }
  double action_bound() const override { return cfg_.action_bound_mT; }
  double forward_displacement() const override;

  const RodState& rod() const { return rod_; }
  const FieldState& field() const { return field_; }
  const EnvConfig& config() const { return cfg_; }
  double elapsed() const { return elapsed_; }
  long step_index() const { return step_index_; }

 private:
  Mat3X accumulate_external_forces() const;
  void substep();

  EnvConfig cfg_;
  RodState rod_;
  RigidityTable rigidity_;
  MagnetizationProfile profile_;
  FieldState field_;
  GroundPlane ground_;
  double scaled_gravity_ = 9.81;
  int substeps_per_action_ = 100;
  double elapsed_ = 0.0;
  long step_index_ = 0;
  double start_mid_x_ = 0.0;
  std::mt19937_64 rng_;
};

/// B' = B + dB (mT, pre-clipped per axis), projected onto the intersection
/// of the cap disc and the per-axis increment box around B, so the result
/// honors both the amplitude cap and the per-axis increment bound.
FieldState clamp_field(const FieldState& field, const Vec2& increment_mT);

/// Observation layout: per element (sin theta, cos theta, scaled angular
/// velocity), per sampled node (scaled height, contact indicator), then
/// (sin phi_B, cos phi_B, |B|/B_max).
VecX build_observation(const RodState& rod, const FieldState& field,
                       const GroundPlane& ground, const EnvConfig& cfg);

}  // namespace msr
