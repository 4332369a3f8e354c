#pragma once

#include <vector>

#include "msr/rod.hpp"
#include "msr/types.hpp"

namespace msr {

/// Per-element remanent magnetization expressed in the element material
/// frame; rigid with the director triad.
struct MagnetizationProfile {
  Mat3X material_magnetization;  // 3 x N, A/m
  double magnitude = 0.0;        // nominal |M|, A/m

  int element_count() const { return static_cast<int>(material_magnetization.cols()); }
};

/// Uniform external field with amplitude cap. Stored in tesla; interfaces
/// that speak millitesla say so in their names.
struct FieldState {
  Vec3 b = Vec3::Zero();  // T
  double b_max = 4e-3;    // T
};

/// One piece of a piecewise-constant magnetization pattern: elements whose
/// midpoint arc-length fraction falls in [begin, end) get `direction` * M.
struct ProfileSegment {
  double begin = 0.0;
  double end = 1.0;
  Vec3 direction = Vec3::UnitZ();  // material frame, unit
};

/// tau = V (R M) x B per element, lab frame; feeds Eq. 2 as external torque.
Mat3X magnetic_torques(const RodState& rod, const MagnetizationProfile& profile,
                       const FieldState& field);

/// Piecewise-constant profile; segments must partition [0, 1].
MagnetizationProfile piecewise_profile(int element_count, double magnitude,
                                       const std::vector<ProfileSegment>& segments);

/// Harmonic profile in the in-plane material axes (d3, d1):
/// element at arc-length s gets M (cos(2 pi s / wavelength + phase) d3
///                               + sin(2 pi s / wavelength + phase) d1).
MagnetizationProfile sinusoidal_profile(int element_count, double total_length,
                                        double magnitude, double wavelength,
                                        double phase = 0.0);

/// The two folded experimental patterns.
enum class MagnetizationPattern {
  kTransverseHalves,  // pattern 1: halves magnetized +-90 deg to the body axis
  kAxialHalves,       // pattern 2: halves with opposite axial polarity
};

MagnetizationProfile pattern_profile(MagnetizationPattern pattern,
                                     int element_count, double magnitude);

/// (angle, amplitude) of the in-plane field components; zero field maps to
/// angle 0.
std::pair<double, double> field_polar(const FieldState& field);

}  // namespace msr
