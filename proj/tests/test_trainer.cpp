#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "msr/toy_env.hpp"
#include "msr/trainer.hpp"

using namespace msr;

namespace {

namespace fs = std::filesystem;

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

EnvFactory toy_factory(ToyPointMassEnv::Config cfg) {
  return [cfg](const EnvRequest& request) -> std::unique_ptr<Environment> {
    ToyPointMassEnv::Config local = cfg;
    local.random_start = request.train_mode;
    return std::make_unique<ToyPointMassEnv>(local);
  };
}

Hyperparams toy_hp() {
  Hyperparams hp;
  hp.hidden_sizes = {8, 8};
  hp.batch_size = 8;
  hp.warmup_steps = 20;
  return hp;
}

/// Actor that always outputs tanh(100) ~ 1, i.e. full push to the right.
void saturate_actor_positive(Td3Agent& agent) {
  for (auto& w : agent.nets().actor.weights()) w.setZero();
  for (auto& b : agent.nets().actor.biases()) b.setZero();
  agent.nets().actor.biases().back().setConstant(100.0);
}

}  // namespace

TEST_CASE("ema_smooth basics") {
  const std::vector<double> series{2.0, 4.0, 8.0, 16.0};

  SUBCASE("factor near zero is the identity") {
    const auto y = ema_smooth(series, 1e-15);
    for (std::size_t i = 0; i < series.size(); ++i) {
      CHECK(y[i] == doctest::Approx(series[i]).epsilon(1e-12));
    }
  }
  SUBCASE("constant series is a fixed point") {
    const auto y = ema_smooth({3.0, 3.0, 3.0, 3.0, 3.0}, 0.9);
    for (double v : y) CHECK(v == 3.0);
  }
  SUBCASE("step input follows the closed form 1 - factor^t") {
    std::vector<double> step_series(21, 1.0);
    step_series[0] = 0.0;
    const auto y = ema_smooth(step_series, 0.9);
    for (std::size_t t = 0; t < y.size(); ++t) {
      CHECK(y[t] == doctest::Approx(1.0 - std::pow(0.9, static_cast<double>(t)))
                        .epsilon(1e-12));
    }
  }
  SUBCASE("first output equals the first input") {
    CHECK(ema_smooth({7.5, 0.0}, 0.99)[0] == 7.5);
  }
  SUBCASE("invalid factor throws") {
    CHECK_THROWS_AS(ema_smooth(series, 0.0), ConfigError);
    CHECK_THROWS_AS(ema_smooth(series, 1.5), ConfigError);
  }
}

TEST_CASE("zero training steps leaves the agent untouched") {
  TrainConfig cfg;
  cfg.scaled_steps = 0;
  cfg.refine_steps = 0;
  const fs::path dir = fresh_dir("msr_trainer_zero");
  const Hyperparams hp = toy_hp();
  TrainResult result =
      train(toy_factory({}), cfg, hp, /*seed=*/77, dir, /*config_hash=*/42);
  CHECK(result.curve.empty());

  Td3Agent fresh(1, 1, ToyPointMassEnv::Config{}.max_increment, hp, 77);
  std::ostringstream expected;
  fresh.save(expected, 42);
  CHECK(read_file(dir / "checkpoint.bin") == expected.str());
}

TEST_CASE("truncating transitions are never stored") {
  ToyPointMassEnv::Config env_cfg;
  env_cfg.episode_steps = 50;
  TrainConfig cfg;
  cfg.scaled_steps = 50;  // exactly one full episode, ends in truncation
  cfg.refine_steps = 0;
  cfg.eval_interval = 1000;  // no evaluations
  Hyperparams hp = toy_hp();
  hp.warmup_steps = 1000;       // random actions only
  hp.batch_size = 1000;         // no gradient updates
  TrainResult result = train(toy_factory(env_cfg), cfg, hp, 5);
  CHECK(result.agent->buffer().size() == 49);
  CHECK(result.agent->trained_steps() == 0);
}

TEST_CASE("evaluate scores a known policy exactly") {
  Hyperparams hp = toy_hp();
  ToyPointMassEnv env;  // fixed start at 0, optimal return is 1
  Td3Agent agent(1, 1, env.action_bound(), hp, 3);
  saturate_actor_positive(agent);

  const EvalResult eval = evaluate(agent, env, /*episodes=*/3, /*seed_base=*/9);
  CHECK(eval.mean_return == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(eval.mean_displacement == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(eval.field_log_mT.empty());  // toy env exposes no magnetic field

  const EvalResult again = evaluate(agent, env, 3, 9);
  CHECK(again.mean_return == eval.mean_return);
  CHECK(again.mean_displacement == eval.mean_displacement);
}

TEST_CASE("zero actor earns zero return on the toy task") {
  Hyperparams hp = toy_hp();
  ToyPointMassEnv env;
  Td3Agent agent(1, 1, env.action_bound(), hp, 4);
  for (auto& w : agent.nets().actor.weights()) w.setZero();
  for (auto& b : agent.nets().actor.biases()) b.setZero();
  const EvalResult eval = evaluate(agent, env, 2, 1);
  CHECK(eval.mean_return == 0.0);
  CHECK(eval.mean_displacement == 0.0);
}

TEST_CASE("learning curve cadence and EMA chaining") {
  ToyPointMassEnv::Config env_cfg;
  env_cfg.episode_steps = 25;
  TrainConfig cfg;
  cfg.scaled_steps = 25;
  cfg.refine_steps = 5;
  cfg.eval_interval = 10;
  cfg.ema_factor = 0.9;
  TrainResult result = train(toy_factory(env_cfg), cfg, toy_hp(), 11);

  REQUIRE(result.curve.size() == 3);
  CHECK(result.curve[0].step == 10);
  CHECK(result.curve[1].step == 20);
  CHECK(result.curve[2].step == 30);  // continues across the phase switch
  CHECK(result.curve[0].ema_return == result.curve[0].raw_return);
  CHECK(result.curve[1].ema_return ==
        doctest::Approx(0.9 * result.curve[0].ema_return +
                        0.1 * result.curve[1].raw_return)
            .epsilon(1e-12));
  CHECK(result.curve[2].ema_return ==
        doctest::Approx(0.9 * result.curve[1].ema_return +
                        0.1 * result.curve[2].raw_return)
            .epsilon(1e-12));
}

TEST_CASE("training is reproducible for a fixed seed") {
  ToyPointMassEnv::Config env_cfg;
  env_cfg.episode_steps = 40;
  TrainConfig cfg;
  cfg.scaled_steps = 120;
  cfg.refine_steps = 0;
  cfg.eval_interval = 40;
  Hyperparams hp = toy_hp();

  TrainResult a = train(toy_factory(env_cfg), cfg, hp, 21);
  TrainResult b = train(toy_factory(env_cfg), cfg, hp, 21);
  REQUIRE(a.curve.size() == b.curve.size());
  for (std::size_t i = 0; i < a.curve.size(); ++i) {
    CHECK(a.curve[i].raw_return == b.curve[i].raw_return);
    CHECK(a.curve[i].ema_return == b.curve[i].ema_return);
  }
  std::ostringstream sa, sb;
  a.agent->save(sa, 0);
  b.agent->save(sb, 0);
  CHECK(sa.str() == sb.str());
}

TEST_CASE("seed sweep with one seed reduces to its own curve") {
  ToyPointMassEnv::Config env_cfg;
  env_cfg.episode_steps = 30;
  TrainConfig cfg;
  cfg.scaled_steps = 60;
  cfg.refine_steps = 0;
  cfg.eval_interval = 20;
  const SweepReport report =
      seed_sweep(toy_factory(env_cfg), cfg, toy_hp(), {101});
  REQUIRE(report.seeds.size() == 1);
  CHECK(report.seeds[0].completed);
  CHECK(report.seeds[0].stable);  // alone, it is its own best
  CHECK(report.seeds[0].error.empty());
  REQUIRE(report.average_curve.size() == report.seeds[0].curve.size());
  for (std::size_t i = 0; i < report.average_curve.size(); ++i) {
    CHECK(report.average_curve[i].ema_return ==
          report.seeds[0].curve[i].ema_return);
  }
  CHECK(report.seeds[0].final_ema ==
        report.seeds[0].curve.back().ema_return);
}

TEST_CASE("seed sweep averages curves pointwise and rejects duplicates") {
  ToyPointMassEnv::Config env_cfg;
  env_cfg.episode_steps = 30;
  TrainConfig cfg;
  cfg.scaled_steps = 60;
  cfg.refine_steps = 0;
  cfg.eval_interval = 20;
  const Hyperparams hp = toy_hp();

  CHECK_THROWS_AS(seed_sweep(toy_factory(env_cfg), cfg, hp, {7, 7}), ConfigError);

  const SweepReport report = seed_sweep(toy_factory(env_cfg), cfg, hp, {7, 8});
  REQUIRE(report.seeds.size() == 2);
  const auto& s7 = report.seeds[0];
  const auto& s8 = report.seeds[1];
  CHECK(s7.seed == 7);
  CHECK(s8.seed == 8);
  REQUIRE(s7.completed);
  REQUIRE(s8.completed);
  REQUIRE(s7.curve.size() == s8.curve.size());
  REQUIRE(report.average_curve.size() == s7.curve.size());
  for (std::size_t i = 0; i < report.average_curve.size(); ++i) {
    CHECK(report.average_curve[i].ema_return ==
          doctest::Approx(0.5 * (s7.curve[i].ema_return +
                                 s8.curve[i].ema_return))
              .epsilon(1e-15));
    CHECK(report.average_curve[i].raw_return ==
          doctest::Approx(0.5 * (s7.curve[i].raw_return +
                                 s8.curve[i].raw_return))
              .epsilon(1e-15));
  }
  // At least the best seed is stable by construction.
  CHECK((s7.stable || s8.stable));

  // Sweep results match standalone training with the same seed.
  TrainResult solo = train(toy_factory(env_cfg), cfg, hp, 7);
  REQUIRE(solo.curve.size() == s7.curve.size());
  for (std::size_t i = 0; i < solo.curve.size(); ++i) {
    CHECK(solo.curve[i].ema_return == s7.curve[i].ema_return);
  }
}

TEST_CASE("format_curve layout") {
  LearningCurve curve;
  curve.push_back({1000, 1.5, 1.5});
  curve.push_back({2000, -0.25, 1.325});
  CHECK(format_curve(curve) ==
        "step return ema_return\n"
        "1000 1.500000 1.500000\n"
        "2000 -0.250000 1.325000\n");
  CHECK(format_curve({}) == "step return ema_return\n");
}

TEST_CASE("atomic_write replaces the file and leaves no temp behind") {
  const fs::path dir = fresh_dir("msr_trainer_atomic");
  const fs::path target = dir / "data.txt";
  atomic_write(target, "first");
  CHECK(read_file(target) == "first");
  atomic_write(target, "second version");
  CHECK(read_file(target) == "second version");
  CHECK(!fs::exists(dir / "data.txt.tmp"));
  int entries = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir)) ++entries;
  CHECK(entries == 1);
}

TEST_CASE("train writes checkpoint and curve artifacts") {
  const fs::path dir = fresh_dir("msr_trainer_artifacts");
  ToyPointMassEnv::Config env_cfg;
  env_cfg.episode_steps = 20;
  TrainConfig cfg;
  cfg.scaled_steps = 40;
  cfg.refine_steps = 0;
  cfg.eval_interval = 20;
  TrainResult result =
      train(toy_factory(env_cfg), cfg, toy_hp(), 31, dir, /*config_hash=*/9);

  CHECK(read_file(dir / "curve.txt") == format_curve(result.curve));
  std::ostringstream expected;
  result.agent->save(expected, 9);
  CHECK(read_file(dir / "checkpoint.bin") == expected.str());
}
