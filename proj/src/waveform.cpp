#include "msr/waveform.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "msr/env.hpp"

namespace msr {

namespace {

// Half an ulp of the 6-decimal CSV format, doubled for the increment check
// which subtracts two rounded values.
constexpr double kFormatTolerance = 1.1e-6;

void check_table(const WaveformTable& table, double increment_bound_mT,
                 double amplitude_cap_mT) {
  if (table.t.empty()) throw ConfigError("waveform: empty table");
  if (table.b_mT.front().norm() != 0.0) {
    throw ConfigError("waveform: row 0 must be all-zero field");
  }
  for (std::size_t i = 0; i < table.t.size(); ++i) {
    const Vec3& b = table.b_mT[i];
    if (b.z() != 0.0) {
      throw ConfigError("waveform: nonzero b_z at row " + std::to_string(i));
    }
    if (b.norm() > amplitude_cap_mT + kFormatTolerance) {
      throw ConfigError("waveform: amplitude above cap at row " +
                        std::to_string(i));
    }
    if (i > 0) {
      const Vec3 inc = b - table.b_mT[i - 1];
      if (inc.cwiseAbs().maxCoeff() > increment_bound_mT + kFormatTolerance) {
        throw ConfigError("waveform: increment above bound at row " +
                          std::to_string(i));
      }
    }
  }
}

}  // namespace

WaveformTable generate_waveform(Td3Agent& agent, const ExperimentConfig& cfg,
                                double duration, std::uint64_t seed) {
  MsrEnv env(cfg.env_config(/*accurate=*/true, /*train_mode=*/false));
  VecX obs = env.reset(seed);

  WaveformTable table;
  const long rows = static_cast<long>(std::lround(duration / cfg.action_period));
  table.t.push_back(0.0);
  table.b_mT.push_back(env.field().b * 1e3);  // zero by rollout-mode contract
  for (long i = 1; i < rows; ++i) {
    const VecX action = agent.select_action(obs, 0.0);
    const Environment::StepResult result = env.step(action);
    obs = result.observation;
    table.t.push_back(i * cfg.action_period);
    table.b_mT.push_back(env.field().b * 1e3);
  }
  check_table(table, cfg.action_bound_mT, cfg.field_cap_mT);
  return table;
}

std::string format_waveform_csv(const WaveformTable& table) {
  std::string out = "t,bx,by,bz\n";
  char line[128];
  for (std::size_t i = 0; i < table.t.size(); ++i) {
    std::snprintf(line, sizeof(line), "%.6f,%.6f,%.6f,%.6f\n", table.t[i],
                  table.b_mT[i].x(), table.b_mT[i].y(), table.b_mT[i].z());
    out += line;
  }
  return out;
}

WaveformTable parse_and_validate_waveform(const std::string& csv_text,
                                          double action_period,
                                          double increment_bound_mT,
                                          double amplitude_cap_mT) {
  std::istringstream in(csv_text);
  std::string line;
  if (!std::getline(in, line) || line != "t,bx,by,bz") {
    throw ConfigError("waveform: missing or malformed header");
  }
  WaveformTable table;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    double t, bx, by, bz;
    if (std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf", &t, &bx, &by, &bz) != 4) {
      throw ConfigError("waveform: malformed row " + std::to_string(row));
    }
    if (std::abs(t - row * action_period) > 1e-9) {
      throw ConfigError("waveform: bad time spacing at row " +
                        std::to_string(row));
    }
    table.t.push_back(t);
    table.b_mT.emplace_back(bx, by, bz);
    ++row;
  }
  check_table(table, increment_bound_mT, amplitude_cap_mT);
  return table;
}

}  // namespace msr
