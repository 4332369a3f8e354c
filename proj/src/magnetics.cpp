#include "msr/magnetics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace msr {

Mat3X magnetic_torques(const RodState& rod, const MagnetizationProfile& profile,
                       const FieldState& field) {
  const int n = rod.element_count();
  if (profile.element_count() != n) {
    throw ConfigError("magnetic_torques: profile has " +
                      std::to_string(profile.element_count()) +
                      " elements, rod has " + std::to_string(n));
  }
  Mat3X torques = Mat3X::Zero(3, n);
  for (int j = 0; j < n; ++j) {
    const Vec3 m_lab =
        rod.element_directors[j] * profile.material_magnetization.col(j);
    torques.col(j) = rod.element_volumes(j) * m_lab.cross(field.b);
  }
  return torques;
}

MagnetizationProfile piecewise_profile(
    int element_count, double magnitude,
    const std::vector<ProfileSegment>& segments) {
  if (element_count < 1) throw ConfigError("piecewise_profile: empty rod");
  auto sorted = segments;
  std::sort(sorted.begin(), sorted.end(),
            [](const ProfileSegment& a, const ProfileSegment& b) {
              return a.begin < b.begin;
            });
  double cursor = 0.0;
  for (const auto& seg : sorted) {
    if (std::abs(seg.begin - cursor) > 1e-12 || seg.end <= seg.begin) {
      throw ConfigError("piecewise_profile: segments must partition [0,1]");
    }
    cursor = seg.end;
  }
  if (std::abs(cursor - 1.0) > 1e-12) {
    throw ConfigError("piecewise_profile: segments must cover [0,1]");
  }

  MagnetizationProfile profile;
  profile.magnitude = magnitude;
  profile.material_magnetization = Mat3X::Zero(3, element_count);
  for (int j = 0; j < element_count; ++j) {
    const double mid = (j + 0.5) / element_count;
    for (const auto& seg : sorted) {
      if (mid >= seg.begin && (mid < seg.end || seg.end >= 1.0)) {
        profile.material_magnetization.col(j) =
            magnitude * seg.direction.normalized();
        break;
      }
    }
  }
  return profile;
}

MagnetizationProfile sinusoidal_profile(int element_count, double total_length,
                                        double magnitude, double wavelength,
                                        double phase) {
  if (wavelength <= 0.0) {
    throw ConfigError("sinusoidal_profile: wavelength must be > 0");
  }
  MagnetizationProfile profile;
  profile.magnitude = magnitude;
  profile.material_magnetization = Mat3X::Zero(3, element_count);
  for (int j = 0; j < element_count; ++j) {
    const double s = (j + 0.5) / element_count * total_length;
    const double theta = 2.0 * std::numbers::pi * s / wavelength + phase;
    // cos along d3 (tangent), sin along d1 (in-plane normal).
    profile.material_magnetization(2, j) = magnitude * std::cos(theta);
    profile.material_magnetization(0, j) = magnitude * std::sin(theta);
  }
  return profile;
}

MagnetizationProfile pattern_profile(MagnetizationPattern pattern,
                                     int element_count, double magnitude) {
  std::vector<ProfileSegment> segments(2);
  segments[0].begin = 0.0;
  segments[0].end = 0.5;
  segments[1].begin = 0.5;
  segments[1].end = 1.0;
  switch (pattern) {
    case MagnetizationPattern::kTransverseHalves:
      segments[0].direction = Vec3::UnitX();   // +d1
      segments[1].direction = -Vec3::UnitX();  // -d1
      break;
    case MagnetizationPattern::kAxialHalves:
      segments[0].direction = Vec3::UnitZ();   // +d3
      segments[1].direction = -Vec3::UnitZ();  // -d3
      break;
  }
  return piecewise_profile(element_count, magnitude, segments);
}

std::pair<double, double> field_polar(const FieldState& field) {
  const double amplitude = std::hypot(field.b.x(), field.b.y());
  if (amplitude == 0.0) return {0.0, 0.0};
  return {std::atan2(field.b.y(), field.b.x()), amplitude};
}

}  // namespace msr
