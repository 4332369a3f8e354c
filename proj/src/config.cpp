#include "msr/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace msr {

namespace {

using nlohmann::json;

void require_keys(const json& node, const std::string& where,
                  const std::set<std::string>& allowed) {
  if (!node.is_object()) throw ConfigError("config: " + where + " must be an object");
  for (const auto& [key, value] : node.items()) {
    if (!allowed.count(key)) {
      throw ConfigError("config: unknown key '" + where + "." + key + "'");
    }
  }
}

template <typename T>
void get_if_present(const json& node, const char* key, T& out) {
  if (node.contains(key)) out = node.at(key).get<T>();
}

MagnetizationSpec::Kind parse_kind(const std::string& name) {
  if (name == "transverse_halves") return MagnetizationSpec::Kind::kTransverseHalves;
  if (name == "axial_halves") return MagnetizationSpec::Kind::kAxialHalves;
  if (name == "sinusoidal") return MagnetizationSpec::Kind::kSinusoidal;
  if (name == "segments") return MagnetizationSpec::Kind::kSegments;
  throw ConfigError("config: unknown magnetization pattern '" + name + "'");
}

std::string kind_name(MagnetizationSpec::Kind kind) {
  switch (kind) {
    case MagnetizationSpec::Kind::kTransverseHalves: return "transverse_halves";
    case MagnetizationSpec::Kind::kAxialHalves: return "axial_halves";
    case MagnetizationSpec::Kind::kSinusoidal: return "sinusoidal";
    case MagnetizationSpec::Kind::kSegments: return "segments";
  }
  throw ConfigError("config: invalid magnetization kind");
}

}  // namespace

MagnetizationProfile MagnetizationSpec::build(int element_count,
                                              double total_length) const {
  switch (kind) {
    case Kind::kTransverseHalves:
      return pattern_profile(MagnetizationPattern::kTransverseHalves,
                             element_count, magnitude);
    case Kind::kAxialHalves:
      return pattern_profile(MagnetizationPattern::kAxialHalves, element_count,
                             magnitude);
    case Kind::kSinusoidal:
      return sinusoidal_profile(element_count, total_length, magnitude,
                                wavelength, phase);
    case Kind::kSegments:
      return piecewise_profile(element_count, magnitude, segments);
  }
  throw ConfigError("config: invalid magnetization kind");
}

EnvConfig ExperimentConfig::env_config(bool accurate, bool train_mode) const {
  EnvConfig env;
  env.material = material;
  env.damping = damping;
  env.ground = ground;
  env.magnetization = magnetization.magnitude;
  env.field_cap_mT = field_cap_mT;
  env.action_bound_mT = action_bound_mT;
  env.action_period = action_period;
  env.episode_seconds = episode_seconds;
  env.dt = accurate ? dt_accurate : dt_scaled;
  env.density_scale = accurate ? 1.0 : density_scale;
  env.gravity = gravity;
  env.reward_coefficient = reward_coefficient;
  env.random_initial_field = train_mode;
  env.elements = elements;
  env.sampled_node_stride = sampled_node_stride;
  env.settle_seconds = settle_seconds;
  env.angular_velocity_scale = angular_velocity_scale;
  env.height_scale = height_scale;
  switch (magnetization.kind) {
    case MagnetizationSpec::Kind::kAxialHalves:
      env.pattern = MagnetizationPattern::kAxialHalves;
      break;
    default:
      env.pattern = MagnetizationPattern::kTransverseHalves;
      break;
  }
  return env;
}

EnvFactory ExperimentConfig::env_factory() const {
  ExperimentConfig copy = *this;
  return [copy](const EnvRequest& request) -> std::unique_ptr<Environment> {
    return std::make_unique<MsrEnv>(
        copy.env_config(request.accurate, request.train_mode));
  };
}

std::string ExperimentConfig::serialize() const {
  json j;
  j["material"] = {{"youngs_modulus", material.youngs_modulus},
                   {"shear_modulus", material.shear_modulus},
                   {"density", material.density},
                   {"width", material.width},
                   {"height", material.height},
                   {"length", material.length}};
  json mag = {{"pattern", kind_name(magnetization.kind)},
              {"magnitude", magnetization.magnitude},
              {"wavelength", magnetization.wavelength},
              {"phase", magnetization.phase}};
  if (magnetization.kind == MagnetizationSpec::Kind::kSegments) {
    json segs = json::array();
    for (const auto& s : magnetization.segments) {
      segs.push_back({{"begin", s.begin},
                      {"end", s.end},
                      {"direction", {s.direction.x(), s.direction.y(), s.direction.z()}}});
    }
    mag["segments"] = segs;
  }
  j["magnetization"] = mag;
  j["damping"] = {{"coefficient", damping.coefficient},
                  {"node_skip", damping.node_skip}};
  j["ground"] = {{"height", ground.height},
                 {"normal_stiffness", ground.normal_stiffness},
                 {"normal_damping", ground.normal_damping},
                 {"mu_static", ground.mu_static},
                 {"mu_kinetic", ground.mu_kinetic},
                 {"slip_threshold", ground.slip_threshold},
                 {"indicator_depth", ground.indicator_depth}};
  j["env"] = {{"field_cap_mT", field_cap_mT},
              {"action_bound_mT", action_bound_mT},
              {"action_period", action_period},
              {"episode_seconds", episode_seconds},
              {"dt_scaled", dt_scaled},
              {"dt_accurate", dt_accurate},
              {"density_scale", density_scale},
              {"gravity", gravity},
              {"reward_coefficient", reward_coefficient},
              {"elements", elements},
              {"sampled_node_stride", sampled_node_stride},
              {"settle_seconds", settle_seconds},
              {"angular_velocity_scale", angular_velocity_scale},
              {"height_scale", height_scale}};
  j["train"] = {{"scaled_steps", train.scaled_steps},
                {"refine_steps", train.refine_steps},
                {"eval_interval", train.eval_interval},
                {"eval_episodes", train.eval_episodes},
                {"ema_factor", train.ema_factor},
                {"stable_fraction", train.stable_fraction}};
  j["td3"] = {{"discount", td3.discount},
              {"learning_rate", td3.learning_rate},
              {"batch_size", td3.batch_size},
              {"polyak", td3.polyak},
              {"policy_delay", td3.policy_delay},
              {"target_noise", td3.target_noise},
              {"noise_clip", td3.noise_clip},
              {"exploration_noise", td3.exploration_noise},
              {"warmup_steps", td3.warmup_steps},
              {"buffer_capacity", td3.buffer_capacity},
              {"hidden_sizes", td3.hidden_sizes}};
  j["seeds"] = seeds;
  j["static_scenario"] = {
      {"field_angle_deg", static_scenario.field_angle_deg},
      {"field_amplitude_mT", static_scenario.field_amplitude_mT},
      {"clamped", static_scenario.clamped},
      {"gravity_on", static_scenario.gravity_on},
      {"kinetic_energy_threshold", static_scenario.kinetic_energy_threshold},
      {"time_budget", static_scenario.time_budget},
      {"relaxation_rate", static_scenario.relaxation_rate}};
  return j.dump(2) + "\n";
}

std::uint64_t fnv1a_hash(const std::string& text) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

std::uint64_t ExperimentConfig::hash() const { return fnv1a_hash(serialize()); }

ExperimentConfig ExperimentConfig::parse(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  require_keys(j, "<root>",
               {"material", "magnetization", "damping", "ground", "env",
                "train", "td3", "seeds", "static_scenario"});

  ExperimentConfig cfg;
  if (j.contains("material")) {
    const json& node = j["material"];
    require_keys(node, "material",
                 {"youngs_modulus", "shear_modulus", "density", "width",
                  "height", "length"});
    get_if_present(node, "youngs_modulus", cfg.material.youngs_modulus);
    get_if_present(node, "shear_modulus", cfg.material.shear_modulus);
    get_if_present(node, "density", cfg.material.density);
    get_if_present(node, "width", cfg.material.width);
    get_if_present(node, "height", cfg.material.height);
    get_if_present(node, "length", cfg.material.length);
  }
  if (j.contains("magnetization")) {
    const json& node = j["magnetization"];
    require_keys(node, "magnetization",
                 {"pattern", "magnitude", "wavelength", "phase", "segments"});
    if (node.contains("pattern")) {
      cfg.magnetization.kind = parse_kind(node["pattern"].get<std::string>());
    }
    get_if_present(node, "magnitude", cfg.magnetization.magnitude);
    get_if_present(node, "wavelength", cfg.magnetization.wavelength);
    get_if_present(node, "phase", cfg.magnetization.phase);
    if (node.contains("segments")) {
      for (const auto& s : node["segments"]) {
        require_keys(s, "magnetization.segments[]", {"begin", "end", "direction"});
        ProfileSegment seg;
        seg.begin = s.at("begin").get<double>();
        seg.end = s.at("end").get<double>();
        const auto dir = s.at("direction").get<std::vector<double>>();
        if (dir.size() != 3) {
          throw ConfigError("config: segment direction must have 3 components");
        }
        seg.direction = Vec3(dir[0], dir[1], dir[2]);
        cfg.magnetization.segments.push_back(seg);
      }
    }
  }
  if (j.contains("damping")) {
    const json& node = j["damping"];
    require_keys(node, "damping", {"coefficient", "node_skip"});
    get_if_present(node, "coefficient", cfg.damping.coefficient);
    get_if_present(node, "node_skip", cfg.damping.node_skip);
  }
  if (j.contains("ground")) {
    const json& node = j["ground"];
    require_keys(node, "ground",
                 {"height", "normal_stiffness", "normal_damping", "mu_static",
                  "mu_kinetic", "slip_threshold", "indicator_depth"});
    get_if_present(node, "height", cfg.ground.height);
    get_if_present(node, "normal_stiffness", cfg.ground.normal_stiffness);
    get_if_present(node, "normal_damping", cfg.ground.normal_damping);
    get_if_present(node, "mu_static", cfg.ground.mu_static);
    get_if_present(node, "mu_kinetic", cfg.ground.mu_kinetic);
    get_if_present(node, "slip_threshold", cfg.ground.slip_threshold);
    get_if_present(node, "indicator_depth", cfg.ground.indicator_depth);
  }
  if (j.contains("env")) {
    const json& node = j["env"];
    require_keys(node, "env",
                 {"field_cap_mT", "action_bound_mT", "action_period",
                  "episode_seconds", "dt_scaled", "dt_accurate",
                  "density_scale", "gravity", "reward_coefficient", "elements",
                  "sampled_node_stride", "settle_seconds",
                  "angular_velocity_scale", "height_scale"});
    get_if_present(node, "field_cap_mT", cfg.field_cap_mT);
    get_if_present(node, "action_bound_mT", cfg.action_bound_mT);
    get_if_present(node, "action_period", cfg.action_period);
    get_if_present(node, "episode_seconds", cfg.episode_seconds);
    get_if_present(node, "dt_scaled", cfg.dt_scaled);
    get_if_present(node, "dt_accurate", cfg.dt_accurate);
    get_if_present(node, "density_scale", cfg.density_scale);
    get_if_present(node, "gravity", cfg.gravity);
    get_if_present(node, "reward_coefficient", cfg.reward_coefficient);
    get_if_present(node, "elements", cfg.elements);
    get_if_present(node, "sampled_node_stride", cfg.sampled_node_stride);
    get_if_present(node, "settle_seconds", cfg.settle_seconds);
    get_if_present(node, "angular_velocity_scale", cfg.angular_velocity_scale);
    get_if_present(node, "height_scale", cfg.height_scale);
  }
  if (j.contains("train")) {
    const json& node = j["train"];
    require_keys(node, "train",
                 {"scaled_steps", "refine_steps", "eval_interval",
                  "eval_episodes", "ema_factor", "stable_fraction"});
    get_if_present(node, "scaled_steps", cfg.train.scaled_steps);
    get_if_present(node, "refine_steps", cfg.train.refine_steps);
    get_if_present(node, "eval_interval", cfg.train.eval_interval);
    get_if_present(node, "eval_episodes", cfg.train.eval_episodes);
    get_if_present(node, "ema_factor", cfg.train.ema_factor);
    get_if_present(node, "stable_fraction", cfg.train.stable_fraction);
  }
  if (j.contains("td3")) {
    const json& node = j["td3"];
    require_keys(node, "td3",
                 {"discount", "learning_rate", "batch_size", "polyak",
                  "policy_delay", "target_noise", "noise_clip",
                  "exploration_noise", "warmup_steps", "buffer_capacity",
                  "hidden_sizes"});
    get_if_present(node, "discount", cfg.td3.discount);
    get_if_present(node, "learning_rate", cfg.td3.learning_rate);
    get_if_present(node, "batch_size", cfg.td3.batch_size);
    get_if_present(node, "polyak", cfg.td3.polyak);
    get_if_present(node, "policy_delay", cfg.td3.policy_delay);
    get_if_present(node, "target_noise", cfg.td3.target_noise);
    get_if_present(node, "noise_clip", cfg.td3.noise_clip);
    get_if_present(node, "exploration_noise", cfg.td3.exploration_noise);
    get_if_present(node, "warmup_steps", cfg.td3.warmup_steps);
    get_if_present(node, "buffer_capacity", cfg.td3.buffer_capacity);
    get_if_present(node, "hidden_sizes", cfg.td3.hidden_sizes);
  }
  if (j.contains("seeds")) cfg.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
  if (j.contains("static_scenario")) {
    const json& node = j["static_scenario"];
    require_keys(node, "static_scenario",
                 {"field_angle_deg", "field_amplitude_mT", "clamped",
                  "gravity_on", "kinetic_energy_threshold", "time_budget",
                  "relaxation_rate"});
    get_if_present(node, "field_angle_deg", cfg.static_scenario.field_angle_deg);
    get_if_present(node, "field_amplitude_mT", cfg.static_scenario.field_amplitude_mT);
    get_if_present(node, "clamped", cfg.static_scenario.clamped);
    get_if_present(node, "gravity_on", cfg.static_scenario.gravity_on);
    get_if_present(node, "kinetic_energy_threshold",
                   cfg.static_scenario.kinetic_energy_threshold);
    get_if_present(node, "time_budget", cfg.static_scenario.time_budget);
    get_if_present(node, "relaxation_rate", cfg.static_scenario.relaxation_rate);
  }
  return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("config: cannot open " + file.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str());
}

}  // namespace msr
