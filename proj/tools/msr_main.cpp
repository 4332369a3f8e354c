#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "msr/analysis.hpp"
#include "msr/config.hpp"
#include "msr/static_validation.hpp"
#include "msr/trainer.hpp"
#include "msr/waveform.hpp"

namespace fs = std::filesystem;

namespace {

msr::ExperimentConfig load_config(const std::string& path) {
  return msr::ExperimentConfig::load(path);
}

void write_run_metadata(const fs::path& out_dir, const msr::ExperimentConfig& cfg) {
  fs::create_directories(out_dir);
  msr::atomic_write(out_dir / "config.json", cfg.serialize());
  std::ostringstream hash;
  hash << std::hex << cfg.hash() << "\n";
  msr::atomic_write(out_dir / "config_hash.txt", hash.str());
}

std::unique_ptr<msr::Td3Agent> load_agent(const msr::ExperimentConfig& cfg,
                                          const fs::path& checkpoint,
                                          std::uint64_t seed) {
  msr::MsrEnv probe(cfg.env_config(/*accurate=*/true, /*train_mode=*/false));
  auto agent = std::make_unique<msr::Td3Agent>(
      probe.observation_size(), probe.action_size(), probe.action_bound(),
      cfg.td3, seed);
  std::ifstream in(checkpoint, std::ios::binary);
  if (!in) throw msr::ConfigError("cannot open checkpoint " + checkpoint.string());
  agent->load(in, /*expected_config_hash=*/0);
  return agent;
}

int run(int argc, char** argv) {
  CLI::App app{"Magnetic soft robot simulator and TD3 learning toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::uint64_t seed = 1;
  std::string out_dir = "out";
  std::string checkpoint_path;
  std::string trajectory_path;
  double duration = 10.0;

  const auto add_common = [&](CLI::App* cmd, bool config_required = true) {
    auto* opt = cmd->add_option("--config", config_path, "experiment configuration file");
    if (config_required) opt->required();
    cmd->add_option("--seed", seed, "random seed");
    cmd->add_option("--out", out_dir, "output directory");
  };

  auto* train_cmd = app.add_subcommand("train", "train one TD3 agent (two-phase)");
  add_common(train_cmd);

  auto* sweep_cmd = app.add_subcommand("sweep", "train every configured seed");
  add_common(sweep_cmd);

  auto* rollout_cmd =
      app.add_subcommand("rollout", "deterministic policy rollout with trajectory log");
  add_common(rollout_cmd);
  rollout_cmd->add_option("--checkpoint", checkpoint_path, "policy checkpoint")->required();
  rollout_cmd->add_option("--duration", duration, "rollout length, s");

  auto* export_cmd =
      app.add_subcommand("export-waveform", "export the hardware-ready field CSV");
  add_common(export_cmd);
  export_cmd->add_option("--checkpoint", checkpoint_path, "policy checkpoint")->required();
  export_cmd->add_option("--duration", duration, "waveform length, s");

  auto* static_cmd =
      app.add_subcommand("validate-static", "static equilibrium deflection report");
  add_common(static_cmd);

  auto* analyze_cmd = app.add_subcommand("analyze", "gait analysis tables");
  add_common(analyze_cmd);
  analyze_cmd->add_option("--trajectory", trajectory_path, "trajectory CSV from rollout")
      ->required();

  CLI11_PARSE(app, argc, argv);

  if (train_cmd->parsed()) {
    const auto cfg = load_config(config_path);
    write_run_metadata(out_dir, cfg);
    msr::train(cfg.env_factory(), cfg.train, cfg.td3, seed, fs::path(out_dir),
               cfg.hash());
    std::cout << "train: wrote checkpoint.bin and curve.txt to " << out_dir << "\n";
    return 0;
  }

  if (sweep_cmd->parsed()) {
    const auto cfg = load_config(config_path);
    write_run_metadata(out_dir, cfg);
    const msr::SweepReport report = msr::seed_sweep(
        cfg.env_factory(), cfg.train, cfg.td3, cfg.seeds, fs::path(out_dir),
        cfg.hash());
    std::ostringstream summary;
    summary << "seed completed stable final_ema error\n";
    for (const auto& s : report.seeds) {
      summary << s.seed << " " << s.completed << " " << s.stable << " "
              << s.final_ema << " " << (s.error.empty() ? "-" : s.error) << "\n";
    }
    msr::atomic_write(fs::path(out_dir) / "report.txt", summary.str());
    msr::atomic_write(fs::path(out_dir) / "average_curve.txt",
                      msr::format_curve(report.average_curve));
    std::cout << "sweep: " << report.seeds.size() << " seeds, report in "
              << out_dir << "\n";
    return 0;
  }

  if (rollout_cmd->parsed()) {
    const auto cfg = load_config(config_path);
    write_run_metadata(out_dir, cfg);
    auto agent = load_agent(cfg, checkpoint_path, seed);
    const msr::TrajectoryLog log = msr::record_rollout(*agent, cfg, duration, seed);
    msr::atomic_write(fs::path(out_dir) / "trajectory.csv", log.to_csv());
    std::cout << "rollout: wrote trajectory.csv to " << out_dir << "\n";
    return 0;
  }

  if (export_cmd->parsed()) {
    const auto cfg = load_config(config_path);
    write_run_metadata(out_dir, cfg);
    auto agent = load_agent(cfg, checkpoint_path, seed);
    const msr::WaveformTable table =
        msr::generate_waveform(*agent, cfg, duration, seed);
    const std::string csv = msr::format_waveform_csv(table);
    // Independent re-validation of the exact bytes being shipped.
    msr::parse_and_validate_waveform(csv, cfg.action_period, cfg.action_bound_mT,
                                     cfg.field_cap_mT);
    msr::atomic_write(fs::path(out_dir) / "waveform.csv", csv);
    std::cout << "export-waveform: wrote waveform.csv to " << out_dir << "\n";
    return 0;
  }

  if (static_cmd->parsed()) {
    const auto cfg = load_config(config_path);
    write_run_metadata(out_dir, cfg);
    const msr::DeflectionReport report =
        msr::validate_static(cfg.material, cfg.magnetization, cfg.static_scenario,
                             cfg.damping, cfg.elements);
    std::ostringstream out;
    out.setf(std::ios::scientific);
    out.precision(9);
    out << "converged " << report.converged << "\n"
        << "simulated_time " << report.simulated_time << "\n"
        << "max_deflection " << report.max_deflection << "\n"
        << "tip_deflection " << report.tip_deflection << "\n"
        << "shape_x_y\n";
    for (int i = 0; i < report.node_positions.cols(); ++i) {
      out << report.node_positions(0, i) << " " << report.node_positions(1, i)
          << "\n";
    }
    msr::atomic_write(fs::path(out_dir) / "static_report.txt", out.str());
    std::cout << "validate-static: "
              << (report.converged ? "converged" : "NOT converged")
              << ", max deflection " << report.max_deflection << " m\n";
    return 0;
  }

  if (analyze_cmd->parsed()) {
    const auto cfg = load_config(config_path);
    write_run_metadata(out_dir, cfg);
    std::ifstream in(trajectory_path);
    if (!in) throw msr::ConfigError("cannot open trajectory " + trajectory_path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    const msr::TrajectoryLog log = msr::TrajectoryLog::from_csv(buffer.str());
    const msr::GaitTable table = msr::analyze_gait(log, cfg.ground);
    msr::atomic_write(fs::path(out_dir) / "gait.txt", table.to_columns());
    std::cout << "analyze: wrote gait.txt to " << out_dir << "\n";
    return 0;
  }

  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
