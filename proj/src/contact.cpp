#include "msr/contact.hpp"

#include <algorithm>
#include <cmath>

namespace msr {

Mat3X ground_response(const RodState& rod, const GroundPlane& ground,
                      double gravity, const Mat3X& applied_forces, double dt) {
  const int nodes = rod.node_count();
  Mat3X forces = Mat3X::Zero(3, nodes);
  for (int i = 0; i < nodes; ++i) {
    const double mass = rod.node_masses(i);
    const Vec3 weight(0.0, -mass * gravity, 0.0);
    forces.col(i) += weight;

    const double depth = ground.height - rod.node_positions(1, i);
    if (depth <= 0.0) continue;

    const double vy = rod.node_velocities(1, i);
    const double normal = ground.normal_stiffness * depth +
                          ground.normal_damping * std::max(0.0, -vy);
    forces(1, i) += normal;

    // Tangential (x-z) friction against the already-applied forces.
    Vec3 tangential_force = applied_forces.col(i) + weight;
    tangential_force.y() = 0.0;
    Vec3 tangential_velocity = rod.node_velocities.col(i);
    tangential_velocity.y() = 0.0;

    const double speed = tangential_velocity.norm();
    if (speed < ground.slip_threshold) {
      // Stick: cancel the applied tangential force and drain the residual
      // velocity, within the static friction budget.
      Vec3 hold = -tangential_force - (mass / dt) * tangential_velocity;
      const double budget = ground.mu_static * normal;
      if (hold.norm() > budget) hold *= budget / hold.norm();
      forces.col(i) += hold;
    } else {
      forces.col(i) -=
          ground.mu_kinetic * normal * tangential_velocity / speed;
    }
  }
  return forces;
}

VecX contact_indicators(const RodState& rod, const GroundPlane& ground) {
  const int nodes = rod.node_count();
  VecX indicators = VecX::Zero(nodes);
  for (int i = 0; i < nodes; ++i) {
    const double depth = ground.height - rod.node_positions(1, i);
    if (depth >= 0.0) {
      indicators(i) = 1.0 + depth / ground.indicator_depth;
    }
  }
  return indicators;
}

}  // namespace msr
