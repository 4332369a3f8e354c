#pragma once

#include "msr/rod.hpp"
#include "msr/types.hpp"

namespace msr {

/// Flat ground at y = height with penalty normal response and regularized
/// Coulomb friction.
struct GroundPlane {
  double height = 0.0;            // m
  double normal_stiffness = 20.0;  // k_g, N/m per node
  double normal_damping = 5e-3;   // c_g, N*s/m per node
  double mu_static = 0.8;
  double mu_kinetic = 0.6;
  double slip_threshold = 1e-4;   // v_eps, m/s
  double indicator_depth = 1e-5;  // delta_ref, m
};

/// Gravity on every node plus, for penetrating nodes, a non-pulling penalty
/// normal force k_g*delta + c_g*max(0, -vy) and stick/slip Coulomb friction.
/// `applied_forces` are the already-accumulated non-contact forces per node;
/// stick cancels their tangential part (and drains residual tangential
/// velocity over one step of length dt) as long as the required holding force
/// stays within mu_s * F_n, otherwise kinetic friction opposes sliding.
Mat3X ground_response(const RodState& rod, const GroundPlane& ground,
                      double gravity, const Mat3X& applied_forces, double dt);

/// 0 when airborne, 1 + delta/delta_ref when penetrating by delta.
VecX contact_indicators(const RodState& rod, const GroundPlane& ground);

}  // namespace msr
