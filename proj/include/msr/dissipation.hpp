#pragma once

#include "msr/rod.hpp"
#include "msr/types.hpp"

namespace msr {

/// Relative-velocity pair damping. node_skip > 1 widens the pair interval,
/// which coarse-tunes dissipation on finely segmented rods.
struct DampingConfig {
  /// Calibrated so a free zero-momentum bending oscillation of the reference
  /// robot halves its amplitude in roughly 0.3 s (the calibration scenario
  /// ships as a test).
  double coefficient = 5e-5;  // nu, N*s/m
  int node_skip = 4;          // k
};

/// f_j = -nu (v_j - v_{j+k}), f_{j+k} = -nu (v_{j+k} - v_j), accumulated over
/// every pair (j, j+k), j = 0 .. N-k, no wraparound. The global force sum is
/// exactly zero, so rigid translation is unaffected.
Mat3X damping_forces(const RodState& rod, const DampingConfig& cfg);

}  // namespace msr
