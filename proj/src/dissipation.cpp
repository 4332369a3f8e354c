#include "msr/dissipation.hpp"

namespace msr {

Mat3X damping_forces(const RodState& rod, const DampingConfig& cfg) {
  const int nodes = rod.node_count();
  if (cfg.coefficient < 0.0) {
    throw ConfigError("damping_forces: coefficient must be >= 0");
  }
  if (cfg.node_skip < 1 || cfg.node_skip >= nodes) {
    throw ConfigError("damping_forces: node_skip out of range");
  }
  Mat3X forces = Mat3X::Zero(3, nodes);
  for (int j = 0; j + cfg.node_skip < nodes; ++j) {
    const Vec3 relative = rod.node_velocities.col(j) -
                          rod.node_velocities.col(j + cfg.node_skip);
    const Vec3 f = -cfg.coefficient * relative;
    forces.col(j) += f;
    forces.col(j + cfg.node_skip) -= f;
  }
  return forces;
}

}  // namespace msr
