#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "msr/env.hpp"
#include "msr/td3.hpp"
#include "msr/types.hpp"

namespace msr {

struct TrainConfig {
  long scaled_steps = 100'000;  // phase 1, scaled environment
  long refine_steps = 1'000;    // phase 2, accurate environment
  long eval_interval = 1'000;   // environment steps between evaluations
  int eval_episodes = 1;
  double ema_factor = 0.99;     // per evaluation point
  double stable_fraction = 0.5;  // sweep classification threshold
};

struct CurvePoint {
  long step = 0;
  double raw_return = 0.0;
  double ema_return = 0.0;
};

using LearningCurve = std::vector<CurvePoint>;

/// Requested environment flavor; `accurate` selects the true-density phase,
/// `train_mode` enables random initial fields.
struct EnvRequest {
  bool accurate = false;
  bool train_mode = true;
};

using EnvFactory = std::function<std::unique_ptr<Environment>(const EnvRequest&)>;

struct TrainResult {
  std::unique_ptr<Td3Agent> agent;
  LearningCurve curve;
};

struct EvalResult {
  double mean_return = 0.0;
  double mean_displacement = 0.0;
  /// Field samples (mT, one row per action step) when the environment exposes
  /// a field; empty otherwise.
  std::vector<Vec3> field_log_mT;
};

struct SweepSeedResult {
  std::uint64_t seed = 0;
  bool completed = false;
  bool stable = false;
  double final_ema = 0.0;
  std::string error;
  LearningCurve curve;
};

struct SweepReport {
  std::vector<SweepSeedResult> seeds;
  LearningCurve average_curve;  // pointwise mean of completed seeds' EMA
};

/// y_0 = x_0, y_t = factor * y_{t-1} + (1 - factor) * x_t.
std::vector<double> ema_smooth(const std::vector<double>& series, double factor);

/// Two-phase training: scaled environment for scaled_steps, then the accurate
/// environment for refine_steps without resetting network parameters.
/// When out_dir is given, writes checkpoint.bin and curve.txt there.
TrainResult train(const EnvFactory& factory, const TrainConfig& cfg,
                  const Hyperparams& hp, std::uint64_t seed,
                  const std::optional<std::filesystem::path>& out_dir = {},
                  std::uint64_t config_hash = 0);

/// Deterministic rollouts (no exploration noise) over full episodes.
EvalResult evaluate(Td3Agent& agent, Environment& env, int episodes,
                    std::uint64_t seed_base = 0);

/// Independent runs of `train` per seed (concurrently); a seed is classified
/// stable when its final EMA return reaches stable_fraction of the best.
SweepReport seed_sweep(const EnvFactory& factory, const TrainConfig& cfg,
                       const Hyperparams& hp,
                       const std::vector<std::uint64_t>& seeds,
                       const std::optional<std::filesystem::path>& out_dir = {},
                       std::uint64_t config_hash = 0);

/// Whole-file atomic write (write temp, then rename).
void atomic_write(const std::filesystem::path& path, const std::string& content);

/// Plain-text learning-curve table: "step return ema_return" per row.
std::string format_curve(const LearningCurve& curve);

}  // namespace msr
