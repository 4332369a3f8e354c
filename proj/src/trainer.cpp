#include "msr/trainer.hpp"

#include <cmath>
#include <fstream>
#include <future>
#include <sstream>

namespace msr {

namespace {

std::uint64_t episode_seed(std::uint64_t run_seed, long episode) {
  // splitmix64 over (seed, episode) for decorrelated per-episode streams.
  std::uint64_t z = run_seed + 0x9e3779b97f4a7c15ULL * (episode + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

void run_phase(Td3Agent& agent, Environment& env, Environment& eval_env,
               long steps, long& global_step, long& episode,
               const TrainConfig& cfg, const Hyperparams& hp,
               std::uint64_t seed, LearningCurve& curve) {
  if (steps <= 0) return;
  VecX obs = env.reset(episode_seed(seed, episode));
  const double explore_std = hp.exploration_noise * env.action_bound();

  for (long s = 0; s < steps; ++s) {
    ++global_step;
    const VecX action = (global_step <= hp.warmup_steps)
                            ? agent.random_action()
                            : agent.select_action(obs, explore_std);
    const Environment::StepResult result = env.step(action);
    if (result.truncated) {
      // Continuing task: the truncating transition is never stored.
      ++episode;
      obs = env.reset(episode_seed(seed, episode));
    } else {
      agent.observe({obs, action, result.reward, result.observation});
      obs = result.observation;
    }
    agent.train_step();

    if (global_step % cfg.eval_interval == 0) {
      const EvalResult eval =
          evaluate(agent, eval_env, cfg.eval_episodes, episode_seed(seed, -1));
      CurvePoint point;
      point.step = global_step;
      point.raw_return = eval.mean_return;
      point.ema_return = curve.empty()
                             ? eval.mean_return
                             : cfg.ema_factor * curve.back().ema_return +
                                   (1.0 - cfg.ema_factor) * eval.mean_return;
      curve.push_back(point);
    }
  }
}

}  // namespace

std::vector<double> ema_smooth(const std::vector<double>& series, double factor) {
  if (factor <= 0.0 || factor > 1.0) {
    throw ConfigError("ema_smooth: factor must be in (0, 1]");
  }
  std::vector<double> smoothed;
  smoothed.reserve(series.size());
  for (std::size_t i = 0; i < series.size(); ++i) {
    smoothed.push_back(i == 0 ? series[0]
                              : factor * smoothed.back() +
                                    (1.0 - factor) * series[i]);
  }
  return smoothed;
}

EvalResult evaluate(Td3Agent& agent, Environment& env, int episodes,
                    std::uint64_t seed_base) {
  EvalResult result;
  for (int e = 0; e < episodes; ++e) {
    VecX obs = env.reset(seed_base + e);
    double episode_return = 0.0;
    bool done = false;
    while (!done) {
      const VecX action = agent.select_action(obs, 0.0);
      if (e == 0) {
        if (auto* msr_env = dynamic_cast<MsrEnv*>(&env)) {
          // Log the field after this step below; record pre-step for t = 0.
          if (result.field_log_mT.empty()) {
            result.field_log_mT.push_back(msr_env->field().b * 1e3);
          }
        }
      }
      const Environment::StepResult step = env.step(action);
      episode_return += step.reward;
      obs = step.observation;
      done = step.truncated;
      if (e == 0) {
        if (auto* msr_env = dynamic_cast<MsrEnv*>(&env)) {
          result.field_log_mT.push_back(msr_env->field().b * 1e3);
        }
      }
    }
    result.mean_return += episode_return;
    result.mean_displacement += env.forward_displacement();
  }
  result.mean_return /= episodes;
  result.mean_displacement /= episodes;
  return result;
}

TrainResult train(const EnvFactory& factory, const TrainConfig& cfg,
                  const Hyperparams& hp, std::uint64_t seed,
                  const std::optional<std::filesystem::path>& out_dir,
                  std::uint64_t config_hash) {
  if (cfg.scaled_steps < 0 || cfg.refine_steps < 0) {
    throw ConfigError("train: phase step counts must be >= 0");
  }
  auto scaled_env = factory({.accurate = false, .train_mode = true});
  auto scaled_eval = factory({.accurate = false, .train_mode = false});

  TrainResult result;
  result.agent = std::make_unique<Td3Agent>(scaled_env->observation_size(),
                                            scaled_env->action_size(),
                                            scaled_env->action_bound(), hp, seed);
  long global_step = 0;
  long episode = 0;
  run_phase(*result.agent, *scaled_env, *scaled_eval, cfg.scaled_steps,
            global_step, episode, cfg, hp, seed, result.curve);

  if (cfg.refine_steps > 0) {
    auto accurate_env = factory({.accurate = true, .train_mode = true});
    auto accurate_eval = factory({.accurate = true, .train_mode = false});
    run_phase(*result.agent, *accurate_env, *accurate_eval, cfg.refine_steps,
              global_step, episode, cfg, hp, seed, result.curve);
  }

  if (out_dir) {
    std::filesystem::create_directories(*out_dir);
    std::ostringstream checkpoint;
    result.agent->save(checkpoint, config_hash);
    atomic_write(*out_dir / "checkpoint.bin", checkpoint.str());
    atomic_write(*out_dir / "curve.txt", format_curve(result.curve));
  }
  return result;
}

SweepReport seed_sweep(const EnvFactory& factory, const TrainConfig& cfg,
                       const Hyperparams& hp,
                       const std::vector<std::uint64_t>& seeds,
                       const std::optional<std::filesystem::path>& out_dir,
                       std::uint64_t config_hash) {
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    for (std::size_t j = i + 1; j < seeds.size(); ++j) {
      if (seeds[i] == seeds[j]) throw ConfigError("seed_sweep: seeds must be distinct");
    }
  }

  std::vector<std::future<SweepSeedResult>> futures;
  for (std::uint64_t seed : seeds) {
    futures.push_back(std::async(std::launch::async, [&, seed]() {
      SweepSeedResult r;
      r.seed = seed;
      try {
        std::optional<std::filesystem::path> seed_dir;
        if (out_dir) seed_dir = *out_dir / ("seed_" + std::to_string(seed));
        TrainResult t = train(factory, cfg, hp, seed, seed_dir, config_hash);
        r.curve = std::move(t.curve);
        r.final_ema = r.curve.empty() ? 0.0 : r.curve.back().ema_return;
        r.completed = true;
      } catch (const std::exception& e) {
        r.error = e.what();
      }
      return r;
    }));
  }

  SweepReport report;
  for (auto& f : futures) report.seeds.push_back(f.get());

  double best = -std::numeric_limits<double>::infinity();
  for (const auto& s : report.seeds) {
    if (s.completed) best = std::max(best, s.final_ema);
  }
  std::size_t longest = 0;
  for (auto& s : report.seeds) {
    if (!s.completed) continue;
    s.stable = s.final_ema >= cfg.stable_fraction * best;
    longest = std::max(longest, s.curve.size());
  }
  for (std::size_t i = 0; i < longest; ++i) {
    CurvePoint avg;
    int count = 0;
    for (const auto& s : report.seeds) {
      if (!s.completed || i >= s.curve.size()) continue;
      avg.step = s.curve[i].step;
      avg.raw_return += s.curve[i].raw_return;
      avg.ema_return += s.curve[i].ema_return;
      ++count;
    }
    if (count == 0) break;
    avg.raw_return /= count;
    avg.ema_return /= count;
    report.average_curve.push_back(avg);
  }
  return report;
}

void atomic_write(const std::filesystem::path& path, const std::string& content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("atomic_write: cannot open " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
  }
  std::filesystem::rename(tmp, path);
}

std::string format_curve(const LearningCurve& curve) {
  std::ostringstream out;
  out << "step return ema_return\n";
  out.setf(std::ios::fixed);
  out.precision(6);
  for (const auto& p : curve) {
    out << p.step << " " << p.raw_return << " " << p.ema_return << "\n";
  }
  return out.str();
}

}  // namespace msr
