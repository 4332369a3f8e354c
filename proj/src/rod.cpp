#include "msr/rod.hpp"

#include <cmath>
#include <numbers>

namespace msr {

namespace {

constexpr double kDegenerateLength = 1e-15;

Mat3 stiffness_matrix_shear(const RigidityTable& rig) {
  Mat3 k = Mat3::Zero();
  k(0, 0) = rig.shear;
  k(1, 1) = rig.shear;
  k(2, 2) = rig.stretch;
  return k;
}

void check_finite_or_throw(const RodState& rod, double blow_up_bound) {
  const double vmax = rod.node_velocities.cwiseAbs().maxCoeff();
  if (!std::isfinite(vmax) || vmax > blow_up_bound) {
    throw InstabilityError("rod step diverged: max |velocity| = " +
                           std::to_string(vmax) + " m/s");
  }
  const double wmax = rod.element_angular_velocities.cwiseAbs().maxCoeff();
  if (!std::isfinite(wmax)) {
    throw InstabilityError("rod step diverged: non-finite angular velocity");
  }
}

void reorthonormalize(Mat3& directors) {
  // Gram-Schmidt on the columns, anchored on d3 then d1.
  Vec3 d3 = directors.col(2).normalized();
  Vec3 d1 = directors.col(0) - directors.col(0).dot(d3) * d3;
  d1.normalize();
  directors.col(2) = d3;
  directors.col(0) = d1;
  directors.col(1) = d3.cross(d1);
}

}  // namespace

Mat3 rotation_exp(const Vec3& rotation_vector) {
  const double angle = rotation_vector.norm();
  if (angle < 1e-14) {
    Mat3 r = Mat3::Identity();
    r(0, 1) = -rotation_vector.z();
    r(1, 0) = rotation_vector.z();
    r(0, 2) = rotation_vector.y();
    r(2, 0) = -rotation_vector.y();
    r(1, 2) = -rotation_vector.x();
    r(2, 1) = rotation_vector.x();
    return r;
  }
  return Eigen::AngleAxisd(angle, rotation_vector / angle).toRotationMatrix();
}

Vec3 rotation_log(const Mat3& rotation) {
  Eigen::AngleAxisd aa(rotation);
  return aa.angle() * aa.axis();
}

double equivalent_radius(double height) {
  if (height <= 0.0) throw ConfigError("equivalent_radius: height must be > 0");
  return std::numbers::sqrt3 / 3.0 * height;
}

std::pair<RodState, RigidityTable> build_rod(const MaterialParams& geometry,
                                             int element_count) {
  if (element_count < 2) {
    throw ConfigError("build_rod: element_count must be >= 2");
  }
  if (geometry.youngs_modulus <= 0.0 || geometry.density <= 0.0 ||
      geometry.width <= 0.0 || geometry.height <= 0.0 ||
      geometry.length <= 0.0 || geometry.effective_shear_modulus() <= 0.0) {
    throw ConfigError("build_rod: all geometry fields must be > 0");
  }

  const int n = element_count;
  const double ell = geometry.length / n;
  const double area_rect = geometry.width * geometry.height;
  const double second_moment_rect =
      geometry.width * std::pow(geometry.height, 3) / 12.0;

  // Rigidities on the equivalent circular section, alpha_c = 1, so that
  // active load per area and passive rigidity per area match the bar.
  const double r = equivalent_radius(geometry.height);
  const double area_cir = std::numbers::pi * r * r;
  const double second_moment_cir = std::numbers::pi * std::pow(r, 4) / 4.0;
  const double area_ratio = area_rect / area_cir;

  RigidityTable rig;
  rig.alpha_c = 1.0;
  rig.bending = geometry.youngs_modulus * second_moment_cir * area_ratio;
  rig.shear =
      rig.alpha_c * geometry.effective_shear_modulus() * area_cir * area_ratio;
  rig.stretch = geometry.youngs_modulus * area_cir * area_ratio;

  RodState rod;
  rod.node_positions = Mat3X::Zero(3, n + 1);
  // Accumulate instead of multiplying so every span is exactly ell and the
  // straight rod carries bitwise-zero strain.
  for (int i = 1; i <= n; ++i) {
    rod.node_positions(0, i) = rod.node_positions(0, i - 1) + ell;
  }
  rod.node_velocities = Mat3X::Zero(3, n + 1);

  // d3 along +x (tangent), d1 = +y, d2 = +z; right-handed: d1 x d2 = d3.
  Mat3 triad;
  triad.col(0) = Vec3::UnitY();
  triad.col(1) = Vec3::UnitZ();
  triad.col(2) = Vec3::UnitX();
  rod.element_directors.assign(n, triad);
  rod.element_angular_velocities = Mat3X::Zero(3, n);

  rod.reference_lengths = VecX::Constant(n, ell);
  rod.element_volumes = VecX::Constant(n, area_rect * ell);

  const double element_mass = geometry.density * area_rect * ell;
  rod.node_masses = VecX::Constant(n + 1, element_mass);
  rod.node_masses(0) = 0.5 * element_mass;
  rod.node_masses(n) = 0.5 * element_mass;

  rod.element_inertias =
      VecX::Constant(n, geometry.density * second_moment_rect * ell);

  return {std::move(rod), rig};
}

StrainSet compute_strains(const RodState& rod) {
  const int n = rod.element_count();
  StrainSet s;
  s.shear_stretch = Mat3X::Zero(3, n);
  s.curvature = Mat3X::Zero(3, n - 1);
  s.intrinsic_shear_stretch = Mat3X::Zero(3, n);
  s.intrinsic_curvature = Mat3X::Zero(3, n - 1);

  for (int j = 0; j < n; ++j) {
    const Vec3 span = rod.node_positions.col(j + 1) - rod.node_positions.col(j);
    const double ell = rod.reference_lengths(j);
    if (ell < kDegenerateLength || span.norm() < kDegenerateLength) {
      throw DegeneracyError("compute_strains: degenerate element " +
                            std::to_string(j));
    }
    // Material-frame tangent mismatch: sigma = R^T dr/ds - e3.
    s.shear_stretch.col(j) =
        rod.element_directors[j].transpose() * (span / ell) - Vec3::UnitZ();
  }
  for (int i = 0; i < n - 1; ++i) {
    const double voronoi =
        0.5 * (rod.reference_lengths(i) + rod.reference_lengths(i + 1));
    const Mat3 relative = rod.element_directors[i].transpose() *
                          rod.element_directors[i + 1];
    s.curvature.col(i) = rotation_log(relative) / voronoi;
  }
  return s;
}

InternalLoads internal_loads(const RodState& rod, const StrainSet& strains,
                             const RigidityTable& rig) {
  const int n = rod.element_count();
  InternalLoads loads;
  loads.node_forces = Mat3X::Zero(3, n + 1);
  loads.element_torques = Mat3X::Zero(3, n);

  const Mat3 k_shear = stiffness_matrix_shear(rig);

  for (int j = 0; j < n; ++j) {
    const double ell = rod.reference_lengths(j);
    const Vec3 sigma =
        strains.shear_stretch.col(j) - strains.intrinsic_shear_stretch.col(j);
    const Vec3 load_material = k_shear * sigma;  // n_t, n_t, n_n
    const Vec3 load_lab = rod.element_directors[j] * load_material;
    // Energy gradient of (1/2) l sigma^T K sigma w.r.t. node positions.
    loads.node_forces.col(j) += load_lab;
    loads.node_forces.col(j + 1) -= load_lab;
    // Shear couple: torque from the same energy w.r.t. the element rotation.
    const Vec3 tangent_material = strains.shear_stretch.col(j) + Vec3::UnitZ();
    loads.element_torques.col(j) +=
        ell * tangent_material.cross(load_material);
  }

  // Bending: tau_t = B_t (kappa - kappa0) at interior nodes, applied as
  // equal-and-opposite torques on the two adjoining elements.
  for (int i = 0; i < n - 1; ++i) {
    const Vec3 moment =
        rig.bending *
        (strains.curvature.col(i) - strains.intrinsic_curvature.col(i));
    loads.element_torques.col(i) += moment;
    loads.element_torques.col(i + 1) -= moment;
  }
  return loads;
}

void step(RodState& rod, const RigidityTable& rig, const Mat3X& external_forces,
          const Mat3X& external_torques, double dt, double blow_up_bound) {
  if (dt <= 0.0) throw ConfigError("step: dt must be > 0");
  const int n = rod.element_count();
  if (external_forces.cols() != rod.node_count() ||
      external_torques.cols() != n) {
    throw ConfigError("step: external load sizes do not match the rod");
  }

  const auto half_kick = [&](const InternalLoads& loads) {
    for (int i = 0; i <= n; ++i) {
      rod.node_velocities.col(i) +=
          0.5 * dt / rod.node_masses(i) *
          (loads.node_forces.col(i) + external_forces.col(i));
    }
    for (int j = 0; j < n; ++j) {
      const Vec3 torque_material =
          loads.element_torques.col(j) +
          rod.element_directors[j].transpose() * external_torques.col(j);
      rod.element_angular_velocities.col(j) +=
          0.5 * dt / rod.element_inertias(j) * torque_material;
    }
  };

  half_kick(internal_loads(rod, compute_strains(rod), rig));

  for (int i = 0; i <= n; ++i) {
    rod.node_positions.col(i) += dt * rod.node_velocities.col(i);
  }
  for (int j = 0; j < n; ++j) {
    rod.element_directors[j] =
        rod.element_directors[j] *
        rotation_exp(dt * rod.element_angular_velocities.col(j));
    reorthonormalize(rod.element_directors[j]);
  }

  half_kick(internal_loads(rod, compute_strains(rod), rig));

  check_finite_or_throw(rod, blow_up_bound);
}

double stable_dt_estimate(const RodState& rod, const RigidityTable& rig) {
  const int n = rod.element_count();
  double dt = std::numeric_limits<double>::max();
  for (int j = 0; j < n; ++j) {
    const double ell = rod.reference_lengths(j);
    const double mass = std::min(rod.node_masses(j), rod.node_masses(j + 1));
    // Stretch/shear translational mode: stiffness S/l against node mass.
    const double k_lin = std::max(rig.stretch, rig.shear) / ell;
    dt = std::min(dt, 2.0 * std::sqrt(mass / k_lin));
    // Shear-rotation mode: torque ~ S*l*theta against element inertia.
    const double k_rot_shear = rig.shear * ell;
    dt = std::min(dt, 2.0 * std::sqrt(rod.element_inertias(j) / k_rot_shear));
    // Bending mode between adjacent elements.
    const double k_rot_bend = 2.0 * rig.bending / ell;
    dt = std::min(dt, 2.0 * std::sqrt(rod.element_inertias(j) / k_rot_bend));
  }
  return 0.5 * dt;
}

Vec3 total_linear_momentum(const RodState& rod) {
  return rod.node_velocities * rod.node_masses;
}

double total_energy(const RodState& rod, const RigidityTable& rig,
                    double gravity) {
  const int n = rod.element_count();
  double energy = 0.0;
  for (int i = 0; i <= n; ++i) {
    energy += 0.5 * rod.node_masses(i) * rod.node_velocities.col(i).squaredNorm();
    energy += rod.node_masses(i) * gravity * rod.node_positions(1, i);
  }
  for (int j = 0; j < n; ++j) {
    energy += 0.5 * rod.element_inertias(j) *
              rod.element_angular_velocities.col(j).squaredNorm();
  }
  const StrainSet s = compute_strains(rod);
  const Mat3 k_shear = stiffness_matrix_shear(rig);
  for (int j = 0; j < n; ++j) {
    const Vec3 sigma = s.shear_stretch.col(j) - s.intrinsic_shear_stretch.col(j);
    energy += 0.5 * rod.reference_lengths(j) * sigma.dot(k_shear * sigma);
  }
  for (int i = 0; i < n - 1; ++i) {
    const double voronoi =
        0.5 * (rod.reference_lengths(i) + rod.reference_lengths(i + 1));
    const Vec3 kappa = s.curvature.col(i) - s.intrinsic_curvature.col(i);
    energy += 0.5 * voronoi * rig.bending * kappa.squaredNorm();
  }
  return energy;
}

}  // namespace msr
