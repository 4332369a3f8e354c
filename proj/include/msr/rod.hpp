#pragma once

#include <utility>

#include "msr/types.hpp"

namespace msr {

/// Rectangular-bar geometry and material constants of one robot.
struct MaterialParams {
  double youngs_modulus = 84.5e3;  // Pa
  double shear_modulus = 0.0;      // Pa; 0 means derive as E/3 (incompressible)
  double density = 1860.0;         // kg/m^3
  double width = 8e-3;             // m (out-of-plane)
  double height = 0.8e-3;          // m (in-plane thickness)
  double length = 20e-3;           // m

  double effective_shear_modulus() const {
    return shear_modulus > 0.0 ? shear_modulus : youngs_modulus / 3.0;
  }
};

/// Constitutive stiffnesses of the three planar deformation modes.
struct RigidityTable {
  double bending = 0.0;  // B_t = E*I_t, N*m^2
  double shear = 0.0;    // S_t = alpha_c*G*A, N
  double stretch = 0.0;  // S_n = E*A, N
  double alpha_c = 1.0;
};

/// Full discrete kinematic/dynamic state of one rod.
///
/// Nodes 0..N carry position, velocity, and lumped mass; elements 0..N-1
/// carry an orthonormal director triad (columns d1, d2, d3 of a
/// material-to-lab rotation), an angular velocity expressed in the material
/// frame, a rotational inertia about the bending axis, and a volume.
/// The rod is built along +x with d3 = tangent, d1 = +y, d2 = +z; planar
/// motion lives in the x-y plane with bending about d2.
struct RodState {
  Mat3X node_positions;               // 3 x (N+1)
  Mat3X node_velocities;              // 3 x (N+1)
  std::vector<Mat3> element_directors;  // N triads, columns {d1,d2,d3}
  Mat3X element_angular_velocities;   // 3 x N, material frame
  VecX reference_lengths;             // N
  VecX node_masses;                   // N+1
  VecX element_inertias;              // N, kg*m^2 about the bending axis
  VecX element_volumes;               // N

  int element_count() const { return static_cast<int>(reference_lengths.size()); }
  int node_count() const { return static_cast<int>(node_positions.cols()); }
};

/// Strains of the three planar modes, stored as full material-frame vectors
/// so that planarity is an observable property rather than an assumption.
struct StrainSet {
  Mat3X curvature;          // 3 x (N-1), at interior nodes, material frame
  Mat3X shear_stretch;      // 3 x N, per element: (shear_1, shear_2, stretch-1)
  Mat3X intrinsic_curvature;      // same shape, pre-strain
  Mat3X intrinsic_shear_stretch;  // same shape, pre-strain

  // Planar scalar views.
  double bending_strain(int interior_node) const { return curvature(1, interior_node); }
  double shear_strain(int element) const { return shear_stretch(0, element); }
  double stretch_strain(int element) const { return shear_stretch(2, element); }
};

/// Internal loads entering the momentum balances: net elastic force per node
/// and elastic torque per element (material frame).
struct InternalLoads {
  Mat3X node_forces;      // 3 x (N+1)
  Mat3X element_torques;  // 3 x N, material frame
};

/// Radius of the circular section whose bending rigidity per unit area
/// matches a rectangular section of the given height: r = (sqrt(3)/3) h.
double equivalent_radius(double height);

/// Builds a straight resting rod along +x together with its rigidities.
/// Rigidities use the equivalent circular section with alpha_c = 1; masses,
/// volumes, and inertias use the true rectangular geometry.
std::pair<RodState, RigidityTable> build_rod(const MaterialParams& geometry,
                                             int element_count);

/// Curvatures from inter-element director rotations over Voronoi lengths;
/// shear/stretch from the mismatch between the centerline tangent and d3.
/// Intrinsic strains are zero (straight, unstretched natural shape).
StrainSet compute_strains(const RodState& rod);

/// Linear constitutive loads: node forces from the shear/stretch springs and
/// element torques from bending plus the shear-coupling couple. All forces
/// come from exact energy gradients, so pairwise cancellation is exact.
InternalLoads internal_loads(const RodState& rod, const StrainSet& strains,
                             const RigidityTable& rig);

/// One position-Verlet step: half-kick, drift (directors via the rotation
/// exponential map), recompute internal loads, half-kick. External loads are
/// held frozen across the step; torques are lab-frame. Directors are
/// re-orthonormalized. Throws InstabilityError on NaN or |v| > blow_up_bound.
void step(RodState& rod, const RigidityTable& rig, const Mat3X& external_forces,
          const Mat3X& external_torques, double dt,
          double blow_up_bound = 1e3);

/// Conservative stability estimate for the step size: half the travel time of
/// the fastest elastic wave across the shortest element, also bounding the
/// shear-rotation mode.
double stable_dt_estimate(const RodState& rod, const RigidityTable& rig);

Vec3 total_linear_momentum(const RodState& rod);

/// Kinetic + elastic + gravitational potential energy; gravity acts along -y
/// with magnitude `gravity` and zero potential at y = 0.
double total_energy(const RodState& rod, const RigidityTable& rig,
                    double gravity = 0.0);

/// Rotation exponential map (Rodrigues).
Mat3 rotation_exp(const Vec3& rotation_vector);

/// Rotation log map, returning the rotation vector.
Vec3 rotation_log(const Mat3& rotation);

}  // namespace msr
