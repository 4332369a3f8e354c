#pragma once

#include <string>

#include "msr/config.hpp"
#include "msr/td3.hpp"

namespace msr {

/// Hardware-ready field table: rows at exactly the 10 ms action period with
/// columns t (s) and B in mT. The first row is all-zero field and b_z is
/// identically zero.
struct WaveformTable {
  std::vector<double> t;
  std::vector<Vec3> b_mT;
};

/// Deterministic zero-initial-field rollout of the policy in the accurate
/// environment, sampled at 100 Hz for `duration` seconds. Throws (naming the
/// offending row) if any table invariant would be violated.
WaveformTable generate_waveform(Td3Agent& agent, const ExperimentConfig& cfg,
                                double duration, std::uint64_t seed);

/// CSV with header "t,bx,by,bz" and fixed 6-decimal formatting.
std::string format_waveform_csv(const WaveformTable& table);

/// Independent re-parser: checks row spacing, the all-zero first row, per-axis
/// increment bounds, the amplitude cap, and b_z == 0 from the CSV text alone.
/// Throws with the offending row index on any violation.
WaveformTable parse_and_validate_waveform(const std::string& csv_text,
                                          double action_period,
                                          double increment_bound_mT,
                                          double amplitude_cap_mT);

}  // namespace msr
