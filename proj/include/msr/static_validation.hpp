#pragma once

#include "msr/config.hpp"
#include "msr/dissipation.hpp"
#include "msr/magnetics.hpp"
#include "msr/rod.hpp"

namespace msr {

struct DeflectionReport {
  bool converged = false;
  double max_deflection = 0.0;   // m, max nodal distance from the straight shape
  double tip_deflection = 0.0;   // m, transverse displacement of the last node
  double simulated_time = 0.0;   // s
  Mat3X node_positions;          // final shape
};

/// Simulates the configured robot under a fixed uniform field until the
/// kinetic energy falls below the threshold (or the time budget runs out) and
/// reports the equilibrium shape. The field angle is clockwise from +x.
/// With `clamped` set, node 0 and element 0 are held fixed (cantilever).
DeflectionReport validate_static(const MaterialParams& material,
                                 const MagnetizationSpec& magnetization,
                                 const StaticScenario& scenario,
                                 const DampingConfig& damping, int elements);

}  // namespace msr
