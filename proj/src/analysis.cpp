#include "msr/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "msr/config.hpp"
#include "msr/env.hpp"

namespace msr {

std::string TrajectoryLog::to_csv() const {
  if (samples.empty()) throw ConfigError("trajectory: empty log");
  const int nodes = static_cast<int>(samples.front().node_positions.cols());
  std::ostringstream out;
  out << "t";
  for (int i = 0; i < nodes; ++i) out << ",x" << i << ",y" << i;
  out << ",bx,by\n";
  out.setf(std::ios::scientific);
  out.precision(12);
  for (const auto& s : samples) {
    out << s.t;
    for (int i = 0; i < nodes; ++i) {
      out << "," << s.node_positions(0, i) << "," << s.node_positions(1, i);
    }
    out << "," << s.field_mT.x() << "," << s.field_mT.y() << "\n";
  }
  return out.str();
}

TrajectoryLog TrajectoryLog::from_csv(const std::string& csv_text) {
  std::istringstream in(csv_text);
  std::string line;
  if (!std::getline(in, line) || line.rfind("t,x0,y0", 0) != 0) {
    throw ConfigError("trajectory: missing header");
  }
  const long columns = 1 + std::count(line.begin(), line.end(), ',');
  const int nodes = static_cast<int>((columns - 3) / 2);
  if (nodes < 3 || columns != 3 + 2 * nodes) {
    throw ConfigError("trajectory: malformed header");
  }

  TrajectoryLog log;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    std::vector<double> values;
    while (std::getline(row, cell, ',')) values.push_back(std::stod(cell));
    if (static_cast<long>(values.size()) != columns) {
      throw ConfigError("trajectory: malformed row " +
                        std::to_string(log.samples.size()));
    }
    TrajectorySample s;
    s.t = values[0];
    s.node_positions = Mat3X::Zero(3, nodes);
    for (int i = 0; i < nodes; ++i) {
      s.node_positions(0, i) = values[1 + 2 * i];
      s.node_positions(1, i) = values[2 + 2 * i];
    }
    s.field_mT = Vec3(values[columns - 2], values[columns - 1], 0.0);
    log.samples.push_back(std::move(s));
  }
  if (log.samples.empty()) throw ConfigError("trajectory: empty log");
  return log;
}

TrajectoryLog record_rollout(Td3Agent& agent, const ExperimentConfig& cfg,
                             double duration, std::uint64_t seed) {
  MsrEnv env(cfg.env_config(/*accurate=*/true, /*train_mode=*/false));
  VecX obs = env.reset(seed);

  TrajectoryLog log;
  const long rows = static_cast<long>(std::lround(duration / cfg.action_period));
  const auto snapshot = [&](double t) {
    TrajectorySample s;
    s.t = t;
    s.node_positions = env.rod().node_positions;
    s.field_mT = env.field().b * 1e3;
    log.samples.push_back(std::move(s));
  };
  snapshot(0.0);
  for (long i = 1; i < rows; ++i) {
    const VecX action = agent.select_action(obs, 0.0);
    obs = env.step(action).observation;
    snapshot(i * cfg.action_period);
  }
  return log;
}

GaitTable analyze_gait(const TrajectoryLog& log, const GroundPlane& ground) {
  if (log.samples.empty()) throw ConfigError("analyze_gait: empty log");
  const int nodes = static_cast<int>(log.samples.front().node_positions.cols());
  const int mid = (nodes - 1) / 2;
  const int last = nodes - 1;
  const double dt_fallback = 0.01;

  // Front/back ends relative to the +x travel direction.
  double mean_x0 = 0.0, mean_xN = 0.0;
  for (const auto& s : log.samples) {
    mean_x0 += s.node_positions(0, 0);
    mean_xN += s.node_positions(0, last);
  }
  const int front = mean_xN >= mean_x0 ? last : 0;
  const int back = last - front;

  const auto indicator = [&](double y) {
    const double depth = ground.height - y;
    return depth >= 0.0 ? 1.0 + depth / ground.indicator_depth : 0.0;
  };

  GaitTable table;
  std::vector<double> heights, spans;
  for (std::size_t k = 0; k < log.samples.size(); ++k) {
    const auto& s = log.samples[k];
    GaitSample g;
    g.t = s.t;
    heights.push_back(s.node_positions.row(1).maxCoeff() - ground.height);
    spans.push_back(
        (s.node_positions.col(last) - s.node_positions.col(0)).norm());
    g.front_contact = indicator(s.node_positions(1, front));
    g.back_contact = indicator(s.node_positions(1, back));
    g.mid_x = s.node_positions(0, mid);
    g.mid_y = s.node_positions(1, mid);
    if (k > 0) {
      const double dt = s.t - log.samples[k - 1].t;
      g.mid_vx = (g.mid_x - log.samples[k - 1].node_positions(0, mid)) /
                 (dt > 0.0 ? dt : dt_fallback);
    }
    const Vec3 ends_mid =
        0.5 * (s.node_positions.col(0) + s.node_positions.col(last));
    const Vec3 opening = ends_mid - s.node_positions.col(mid);
    g.opening_angle = (opening.head<2>().norm() < 1e-12)
                          ? 0.0
                          : std::atan2(opening.y(), opening.x());
    g.field_amplitude_mT = std::hypot(s.field_mT.x(), s.field_mT.y());
    g.field_angle = g.field_amplitude_mT == 0.0
                        ? 0.0
                        : std::atan2(s.field_mT.y(), s.field_mT.x());
    table.samples.push_back(g);
  }

  // Min-max regularization over the analyzed window.
  const auto regularize = [](const std::vector<double>& series) {
    const auto [lo_it, hi_it] = std::minmax_element(series.begin(), series.end());
    const double lo = *lo_it, range = *hi_it - *lo_it;
    std::vector<double> reg(series.size(), 0.0);
    for (std::size_t i = 0; i < series.size(); ++i) {
      reg[i] = range > 0.0 ? (series[i] - lo) / range : 0.0;
    }
    return reg;
  };
  const std::vector<double> h_reg = regularize(heights);
  const std::vector<double> s_reg = regularize(spans);
  for (std::size_t i = 0; i < table.samples.size(); ++i) {
    table.samples[i].height_regularized = h_reg[i];
    table.samples[i].span_regularized = s_reg[i];
  }
  return table;
}

std::string GaitTable::to_columns() const {
  std::ostringstream out;
  out << "t height_reg span_reg front_contact back_contact mid_x mid_y "
         "mid_vx beta field_angle field_amp_mT\n";
  out.setf(std::ios::scientific);
  out.precision(9);
  for (const auto& g : samples) {
    out << g.t << " " << g.height_regularized << " " << g.span_regularized
        << " " << g.front_contact << " " << g.back_contact << " " << g.mid_x
        << " " << g.mid_y << " " << g.mid_vx << " " << g.opening_angle << " "
        << g.field_angle << " " << g.field_amplitude_mT << "\n";
  }
  return out.str();
}

}  // namespace msr
