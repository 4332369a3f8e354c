#include "msr/static_validation.hpp"

#include <cmath>
#include <numbers>

#include "msr/contact.hpp"

namespace msr {

DeflectionReport validate_static(const MaterialParams& material,
                                 const MagnetizationSpec& magnetization,
                                 const StaticScenario& scenario,
                                 const DampingConfig& damping, int elements) {
  auto [rod, rig] = build_rod(material, elements);
  const MagnetizationProfile profile =
      magnetization.build(elements, material.length);

  FieldState field;
  field.b_max = std::max(1.0, scenario.field_amplitude_mT * 1e-3);
  const double alpha = scenario.field_angle_deg * std::numbers::pi / 180.0;
  // alpha is a clockwise angle from the x-axis.
  field.b = scenario.field_amplitude_mT * 1e-3 *
            Vec3(std::cos(alpha), -std::sin(alpha), 0.0);

  const Mat3X straight = rod.node_positions;
  const Vec3 clamp_position = rod.node_positions.col(0);
  const Mat3 clamp_directors = rod.element_directors[0];

  const double dt = stable_dt_estimate(rod, rig);
  const long max_steps =
      static_cast<long>(std::ceil(scenario.time_budget / dt));
  const double gravity = scenario.gravity_on ? 9.81 : 0.0;

  DeflectionReport report;
  for (long s = 0; s < max_steps; ++s) {
    Mat3X forces = damping_forces(rod, damping);
    if (gravity > 0.0) {
      for (int i = 0; i < rod.node_count(); ++i) {
        forces(1, i) -= rod.node_masses(i) * gravity;
      }
    }
    const Mat3X torques = magnetic_torques(rod, profile, field);
    step(rod, rig, forces, torques, dt);
    if (scenario.relaxation_rate > 0.0) {
      const double keep = std::max(0.0, 1.0 - scenario.relaxation_rate * dt);
      rod.node_velocities *= keep;
      rod.element_angular_velocities *= keep;
    }
    if (scenario.clamped) {
      rod.node_positions.col(0) = clamp_position;
      rod.node_velocities.col(0).setZero();
      rod.element_directors[0] = clamp_directors;
      rod.element_angular_velocities.col(0).setZero();
    }
    report.simulated_time = (s + 1) * dt;

    if (s % 50 == 49) {
      double kinetic = 0.0;
      for (int i = 0; i < rod.node_count(); ++i) {
        kinetic +=
            0.5 * rod.node_masses(i) * rod.node_velocities.col(i).squaredNorm();
      }
      for (int j = 0; j < rod.element_count(); ++j) {
        kinetic += 0.5 * rod.element_inertias(j) *
                   rod.element_angular_velocities.col(j).squaredNorm();
      }
      if (kinetic < scenario.kinetic_energy_threshold) {
        report.converged = true;
        break;
      }
    }
  }

  report.node_positions = rod.node_positions;
  report.max_deflection = 0.0;
  for (int i = 0; i < rod.node_count(); ++i) {
    report.max_deflection = std::max(
        report.max_deflection,
        (rod.node_positions.col(i) - straight.col(i)).norm());
  }
  const int last = rod.node_count() - 1;
  report.tip_deflection = rod.node_positions(1, last) - straight(1, last);
  return report;
}

}  // namespace msr
