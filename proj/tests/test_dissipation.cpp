#include <doctest.h>

#include <cmath>
#include <random>

#include "msr/dissipation.hpp"
#include "msr/rod.hpp"

using namespace msr;

namespace {

double kinetic_energy(const RodState& rod) {
  double e = 0.0;
  for (int i = 0; i < rod.node_count(); ++i) {
    e += 0.5 * rod.node_masses(i) * rod.node_velocities.col(i).squaredNorm();
  }
  return e;
}

}  // namespace

TEST_CASE("rigid translation sees no damping") {
  auto [rod, rig] = build_rod(MaterialParams{}, 20);
  rod.node_velocities.colwise() = Vec3(0.4, -0.2, 0.0);
  const Mat3X forces = damping_forces(rod, DampingConfig{});
  CHECK(forces.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("pair forces match the constitutive law directly") {
  auto [rod, rig] = build_rod(MaterialParams{}, 20);
  DampingConfig cfg;
  cfg.coefficient = 0.1;
  cfg.node_skip = 4;
  // Exactly one moving node: node 6 participates in pairs (2,6) and (6,10).
  rod.node_velocities.col(6) = Vec3(1.0, 0.0, 0.0);
  const Mat3X forces = damping_forces(rod, cfg);
  CHECK(forces(0, 6) == doctest::Approx(-0.2).epsilon(1e-12));  // two pairs
  CHECK(forces(0, 2) == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(forces(0, 10) == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(forces(0, 3) == 0.0);
}

TEST_CASE("damping forces sum to exactly zero for any state") {
  auto [rod, rig] = build_rod(MaterialParams{}, 20);
  std::mt19937_64 rng(17);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (int k = 0; k < 20; ++k) {
    for (int i = 0; i < rod.node_count(); ++i) {
      rod.node_velocities.col(i) = Vec3(noise(rng), noise(rng), noise(rng));
    }
    for (int skip : {1, 4}) {
      DampingConfig cfg;
      cfg.node_skip = skip;
      const Mat3X forces = damping_forces(rod, cfg);
      const Vec3 sum = forces.rowwise().sum();
      // Pair contributions cancel exactly; the global reduction only leaves
      // reassociation rounding at machine epsilon of the force scale.
      const double scale =
          std::max(1e-300, forces.cwiseAbs().maxCoeff()) * rod.node_count();
      CHECK(sum.cwiseAbs().maxCoeff() <= 1e-15 * scale);
    }
  }
}

TEST_CASE("kinetic energy is non-increasing under pure damping") {
  for (int skip : {1, 4}) {
    auto [rod, rig] = build_rod(MaterialParams{}, 20);
    std::mt19937_64 rng(23);
    std::normal_distribution<double> noise(0.0, 0.05);
    for (int i = 0; i < rod.node_count(); ++i) {
      rod.node_velocities.col(i) = Vec3(noise(rng), noise(rng), 0.0);
    }
    DampingConfig cfg;
    cfg.node_skip = skip;
    // Remove rigidity so only damping acts.
    rig.bending = rig.shear = rig.stretch = 0.0;
    const double dt = 1e-5;
    const Mat3X zero_t = Mat3X::Zero(3, rod.element_count());
    double energy = kinetic_energy(rod);
    for (int s = 0; s < 2000; ++s) {
      step(rod, rig, damping_forces(rod, cfg), zero_t, dt);
      const double next = kinetic_energy(rod);
      CHECK(next <= energy * (1.0 + 1e-12));
      energy = next;
    }
  }
}

TEST_CASE("invalid node skip is rejected") {
  auto [rod, rig] = build_rod(MaterialParams{}, 4);
  DampingConfig cfg;
  cfg.node_skip = 0;
  CHECK_THROWS_AS(damping_forces(rod, cfg), ConfigError);
  cfg.node_skip = rod.node_count();
  CHECK_THROWS_AS(damping_forces(rod, cfg), ConfigError);
  cfg.node_skip = 1;
  cfg.coefficient = -1.0;
  CHECK_THROWS_AS(damping_forces(rod, cfg), ConfigError);
}

TEST_CASE("calibration: default damping halves a free oscillation in ~0.3 s") {
  auto [rod, rig] = build_rod(MaterialParams{}, 20);
  // Zero-momentum transverse mode (damping never touches rigid translation,
  // so the benchmark must carry no center-of-mass motion).
  const double length = MaterialParams{}.length;
  for (int i = 0; i < rod.node_count(); ++i) {
    const double s = rod.node_positions(0, i) / length;
    rod.node_velocities(1, i) = 0.02 * std::sin(2.0 * std::numbers::pi * s);
  }
  DampingConfig cfg;  // defaults under test
  const double dt = stable_dt_estimate(rod, rig);
  const Mat3X zero_t = Mat3X::Zero(3, rod.element_count());
  const double initial = total_energy(rod, rig);

  // Amplitude scales as sqrt(energy): it has halved once the total
  // mechanical energy drops below a quarter of its initial value.
  double half_time = -1.0;
  for (long s = 0; s < static_cast<long>(std::lround(1.5 / dt)); ++s) {
    step(rod, rig, damping_forces(rod, cfg), zero_t, dt);
    if (total_energy(rod, rig) < 0.25 * initial) {
      half_time = (s + 1) * dt;
      break;
    }
  }
  REQUIRE(half_time > 0.0);
  CHECK(half_time > 0.15);
  CHECK(half_time < 0.6);
}
