#pragma once

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>

#include "curiosity/drqn_agent.hpp"
#include "curiosity/episode_env.hpp"

namespace curiosity {

struct EvalConfig {
  int n_scenes = 20;
  double time_budget = 300.0;
  int n_obs_min = 20;
  int n_obs_max = 25;
  std::uint64_t scene_seed = 7;
  std::uint64_t policy_seed = 11;
  double epsilon = 0.05;
  int ap_every = 1;
  bool operator==(const EvalConfig&) const = default;
};

inline void validate(const EvalConfig& e) {
  if (e.n_scenes < 1) throw ConfigError("eval: n_scenes must be >= 1");
  if (!(e.time_budget > 0.0)) throw ConfigError("eval: time_budget must be positive");
  if (e.n_obs_min < 0 || e.n_obs_max < e.n_obs_min) throw ConfigError("eval: invalid n_obs range");
  if (!(e.epsilon >= 0.0 && e.epsilon <= 1.0)) throw ConfigError("eval: epsilon must lie in [0, 1]");
  if (e.ap_every < 1) throw ConfigError("eval: ap_every must be >= 1");
}

struct ExperimentConfig {
  EnvConfig env;
  nn::TrainConfig agent;
  EvalConfig eval;
};

inline void validate(const ExperimentConfig& c) {
  validate(c.env);
  nn::validate(c.agent);
  validate(c.eval);
  if (nn::shape_for(c.agent.preset).input_size != c.env.scene.image_size)
    throw ConfigError("agent preset " + std::string(nn::to_string(c.agent.preset)) + " expects image_size " +
                      std::to_string(nn::shape_for(c.agent.preset).input_size));
}

namespace detail {

template <typename T>
std::string format_value(const T& v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

template <typename T>
T parse_value(const std::string& key, const std::string& text) {
  std::istringstream is(text);
  T v{};
  is >> v;
  if (!is || !(is >> std::ws).eof()) throw ConfigError("config: cannot parse " + key + " = '" + text + "'");
  return v;
}

inline std::string format_field(const double& v) { return format_value(v); }
inline std::string format_field(const int& v) { return format_value(v); }
inline std::string format_field(const std::int64_t& v) { return format_value(v); }
inline std::string format_field(const std::uint64_t& v) { return format_value(v); }
inline std::string format_field(const std::optional<double>& v) { return v ? format_value(*v) : "default"; }
inline std::string format_field(const nn::ScalePreset& v) { return nn::to_string(v); }
inline std::string format_field(const EpisodeMode& v) { return v == EpisodeMode::train ? "train" : "eval"; }

inline void parse_field(const std::string& k, const std::string& s, double& v) { v = parse_value<double>(k, s); }
inline void parse_field(const std::string& k, const std::string& s, int& v) { v = parse_value<int>(k, s); }
inline void parse_field(const std::string& k, const std::string& s, std::int64_t& v) {
  v = parse_value<std::int64_t>(k, s);
}
inline void parse_field(const std::string& k, const std::string& s, std::uint64_t& v) {
  if (!s.empty() && s.front() == '-') throw ConfigError("config: " + k + " must be non-negative");
  v = parse_value<std::uint64_t>(k, s);
}
inline void parse_field(const std::string& k, const std::string& s, std::optional<double>& v) {
  if (s == "default")
    v.reset();
  else
    v = parse_value<double>(k, s);
}
inline void parse_field(const std::string& k, const std::string& s, nn::ScalePreset& v) {
  if (s == "full")
    v = nn::ScalePreset::full;
  else if (s == "mini")
    v = nn::ScalePreset::mini;
  else
    throw ConfigError("config: " + k + " must be full or mini");
}
inline void parse_field(const std::string& k, const std::string& s, EpisodeMode& v) {
  if (s == "train")
    v = EpisodeMode::train;
  else if (s == "eval")
    v = EpisodeMode::eval;
  else
    throw ConfigError("config: " + k + " must be train or eval");
}

// Calls f(section, key, field) for every configurable field.
template <typename Config, typename F>
void for_each_field(Config& c, F&& f) {
  auto& o = c.env.orbit;
  f("orbit", "d", o.d);
  f("orbit", "theta", o.theta);
  f("orbit", "delta_alpha", o.delta_alpha);
  f("orbit", "n_orbits", o.n_orbits);

  auto& s = c.env.scene;
  f("scene", "n_obs_min", s.n_obs_min);
  f("scene", "n_obs_max", s.n_obs_max);
  f("scene", "annulus_inner", s.annulus_inner);
  f("scene", "annulus_outer", s.annulus_outer);
  f("scene", "max_center_perturbation", s.max_center_perturbation);
  f("scene", "fov", s.fov);
  f("scene", "image_size", s.image_size);
  f("scene", "min_hue_distance", s.min_hue_distance);
  f("scene", "stretch_min", s.stretch_min);
  f("scene", "stretch_max", s.stretch_max);

  auto& d = c.env.detector;
  f("detector", "grid_size", d.grid_size);
  f("detector", "learning_rate", d.learning_rate);
  f("detector", "detection_threshold", d.detection_threshold);
  f("detector", "nms_iou", d.nms_iou);
  f("detector", "objectness_bias", d.objectness_bias);
  f("detector", "anchor_cells", d.anchor_cells);

  auto& tr = c.env.tracker;
  f("tracker", "template_size", tr.template_size);
  f("tracker", "margin", tr.margin);
  f("tracker", "threshold", tr.threshold);

  auto& t = c.env.time;
  f("time", "t_click", t.t_click);
  f("time", "t_train", t.t_train);
  f("time", "s_a", t.s_a);
  f("time", "t_idle", t.t_idle);

  auto& r = c.env.reward;
  f("reward", "w_p", r.w_p);
  f("reward", "w_n", r.w_n);
  f("reward", "c_t", r.c_t);

  auto& e = c.env.episode;
  f("episode", "max_action_steps", e.max_action_steps);
  f("episode", "win_ap", e.win_ap);
  f("episode", "win_gain", e.win_gain);
  f("episode", "subsample_size", e.subsample_size);

  auto& a = c.agent;
  f("agent", "preset", a.preset);
  f("agent", "gamma", a.gamma);
  f("agent", "learning_rate", a.learning_rate);
  f("agent", "eps_start", a.eps_start);
  f("agent", "eps_end", a.eps_end);
  f("agent", "eps_anneal_steps", a.eps_anneal_steps);
  f("agent", "target_sync", a.target_sync);
  f("agent", "batch_size", a.batch_size);
  f("agent", "seq_len", a.seq_len);
  f("agent", "replay_capacity", a.replay_capacity);
  f("agent", "episodes", a.episodes);
  f("agent", "warmup_steps", a.warmup_steps);
  f("agent", "train_every", a.train_every);
  f("agent", "grad_clip", a.grad_clip);
  f("agent", "seed", a.seed);

  auto& v = c.eval;
  f("eval", "n_scenes", v.n_scenes);
  f("eval", "time_budget", v.time_budget);
  f("eval", "n_obs_min", v.n_obs_min);
  f("eval", "n_obs_max", v.n_obs_max);
  f("eval", "scene_seed", v.scene_seed);
  f("eval", "policy_seed", v.policy_seed);
  f("eval", "epsilon", v.epsilon);
  f("eval", "ap_every", v.ap_every);
}

}  // namespace detail

// Applies INI text on top of the defaults. Unknown sections or keys are errors.
inline ExperimentConfig parse_config(const std::string& text, const std::string& origin = "<config>") {
  boost::property_tree::ptree tree;
  std::istringstream is(text);
  try {
    boost::property_tree::read_ini(is, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(origin + ": " + e.message() + " (line " + std::to_string(e.line()) + ")");
  }
  ExperimentConfig cfg;
  std::set<std::string> known;
  detail::for_each_field(cfg, [&](const char* sec, const char* key, auto& field) {
    const std::string path = std::string(sec) + "." + key;
    known.insert(path);
    if (auto v = tree.get_optional<std::string>(boost::property_tree::ptree::path_type(path, '.')))
      detail::parse_field(path, *v, field);
  });
  for (const auto& [sec, body] : tree) {
    if (body.empty() && !body.data().empty()) throw ConfigError(origin + ": key outside a section: " + sec);
    for (const auto& [key, value] : body)
      if (!known.count(sec + "." + key)) throw ConfigError(origin + ": unknown key " + sec + "." + key);
  }
  validate(cfg);
  return cfg;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open config " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str(), path.string());
}

// Fully resolved config, every key written; parse_config(to_ini(c)) == c.
inline std::string to_ini(const ExperimentConfig& cfg) {
  auto copy = cfg;
  std::string out, section;
  detail::for_each_field(copy, [&](const char* sec, const char* key, auto& field) {
    if (section != sec) {
      if (!section.empty()) out += "\n";
      section = sec;
      out += "[" + section + "]\n";
    }
    out += std::string(key) + " = " + detail::format_field(field) + "\n";
  });
  return out;
}

}  // namespace curiosity
