#pragma once

#include <string>
#include <vector>

#include "msr/contact.hpp"
#include "msr/td3.hpp"
#include "msr/types.hpp"

namespace msr {

struct ExperimentConfig;

/// One 100 Hz sample of a rollout: every node position plus the field.
struct TrajectorySample {
  double t = 0.0;
  Mat3X node_positions;  // 3 x (N+1)
  Vec3 field_mT = Vec3::Zero();
};

struct TrajectoryLog {
  std::vector<TrajectorySample> samples;

  std::string to_csv() const;
  static TrajectoryLog from_csv(const std::string& csv_text);
};

/// Deterministic zero-initial-field rollout recorded at the action rate.
TrajectoryLog record_rollout(Td3Agent& agent, const ExperimentConfig& cfg,
                             double duration, std::uint64_t seed);

/// Per-sample gait quantities of one trajectory.
struct GaitSample {
  double t = 0.0;
  double height_regularized = 0.0;  // min-max over the window, [0, 1]
  double span_regularized = 0.0;
  double front_contact = 0.0;       // indicator of the front end node
  double back_contact = 0.0;
  double mid_x = 0.0, mid_y = 0.0;  // middle node position, m
  double mid_vx = 0.0;              // differentiated middle-node velocity, m/s
  double opening_angle = 0.0;       // beta, rad, (-pi, pi], 0 when degenerate
  double field_angle = 0.0;         // rad
  double field_amplitude_mT = 0.0;
};

struct GaitTable {
  std::vector<GaitSample> samples;

  std::string to_columns() const;  // plain-column table with a header row
};

/// Height/span regularized over the window; beta measured counterclockwise
/// from +x to the vector from the middle node to the midpoint of the two
/// ends; front/back resolved relative to the +x travel direction.
GaitTable analyze_gait(const TrajectoryLog& log, const GroundPlane& ground);

}  // namespace msr
