#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "curiosity/config.hpp"
#include "curiosity/drqn_agent.hpp"
#include "curiosity/metrics.hpp"
#include "curiosity/trace.hpp"

namespace curiosity {

inline EnvConfig train_env_config(const ExperimentConfig& c) {
  EnvConfig e = c.env;
  e.episode.mode = EpisodeMode::train;
  return e;
}

inline EnvConfig eval_env_config(const ExperimentConfig& c) {
  EnvConfig e = c.env;
  e.episode.mode = EpisodeMode::eval;
  e.episode.time_budget = c.eval.time_budget;
  e.episode.ap_every = c.eval.ap_every;
  e.scene.n_obs_min = c.eval.n_obs_min;
  e.scene.n_obs_max = c.eval.n_obs_max;
  return e;
}

// Scene seeds depend only on the eval config, so every strategy sees the same scenes.
inline std::uint64_t eval_scene_seed(const EvalConfig& e, int episode) {
  return mix_seed(mix_seed(e.scene_seed, 0xE7A1), static_cast<std::uint64_t>(episode));
}

inline std::uint64_t eval_policy_seed(const EvalConfig& e, int episode) {
  return mix_seed(mix_seed(e.policy_seed, 0x9011), static_cast<std::uint64_t>(episode));
}

// ---------------------------------------------------------------------------
// Training

inline std::string train_log_header() {
  return "episode,scene_seed,win,steps,t_elapsed,interactions,mean_loss,epsilon,final_ap\n";
}

inline std::string train_log_row(const nn::EpisodeLog& l) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%lld,%llu,%d,%d,%.10g,%d,%.10g,%.10g,%.10g\n", static_cast<long long>(l.episode),
                static_cast<unsigned long long>(l.scene_seed), l.win ? 1 : 0, l.steps, l.t_elapsed, l.interactions,
                l.mean_loss, l.epsilon, l.final_ap);
  return buf;
}

struct TrainPaths {
  std::filesystem::path checkpoint, log, config;
};

inline TrainPaths train_paths(const std::filesystem::path& out_dir) {
  return {out_dir / "checkpoint.bin", out_dir / "train_log.csv", out_dir / "config.ini"};
}

// Trains from scratch and writes checkpoint.bin, train_log.csv and config.ini
// into out_dir.
inline nn::AgentCheckpoint run_train(const ExperimentConfig& cfg, const std::filesystem::path& out_dir,
                                     const std::function<void(const nn::EpisodeLog&)>& progress = {}) {
  validate(cfg);
  std::filesystem::create_directories(out_dir);
  const auto paths = train_paths(out_dir);
  detail::write_text(paths.config, to_ini(cfg));
  std::ofstream log(paths.log, std::ios::binary);
  if (!log) throw IoError("cannot open " + paths.log.string());
  log << train_log_header();

  CuriosityEnv env(train_env_config(cfg));
  auto ck = nn::fresh_checkpoint(cfg.agent);
  nn::train_agent(env, ck, [&](const nn::EpisodeLog& l, const nn::AgentCheckpoint&) {
    log << train_log_row(l);
    log.flush();
    if (progress) progress(l);
  });
  if (!log) throw IoError("failed writing " + paths.log.string());
  nn::save_checkpoint(paths.checkpoint, ck);
  return ck;
}

// ---------------------------------------------------------------------------
// Evaluation

// Either a trained network (epsilon-greedy) or the uniform random policy.
class EvalPolicy {
 public:
  static EvalPolicy random() { return EvalPolicy(std::nullopt, 1.0); }
  static EvalPolicy agent(nn::Network net, double epsilon) { return EvalPolicy(std::move(net), epsilon); }

  bool is_random() const { return !net_; }

  void begin_episode() {
    if (net_) hidden_ = nn::Hidden::zeros(net_->shape.hidden);
  }

  int choose(const AgentObservation& obs, std::mt19937_64& rng) {
    if (!net_) return static_cast<int>(rng() % kActionCount);
    return nn::act(*net_, obs, hidden_, epsilon_, rng).first;
  }

  const std::optional<nn::Network>& network() const { return net_; }

 private:
  EvalPolicy(std::optional<nn::Network> net, double eps) : net_(std::move(net)), epsilon_(eps) {}
  std::optional<nn::Network> net_;
  double epsilon_;
  nn::Hidden hidden_;
};

// Loads a checkpoint path, or the literal "random".
inline EvalPolicy load_policy(const std::string& which, const ExperimentConfig& cfg) {
  if (which == "random") return EvalPolicy::random();
  auto ck = nn::load_checkpoint(which);
  if (ck.online.shape.input_size != cfg.env.scene.image_size)
    throw ConfigError("checkpoint input size " + std::to_string(ck.online.shape.input_size) +
                      " does not match image_size " + std::to_string(cfg.env.scene.image_size));
  return EvalPolicy::agent(std::move(ck.online), cfg.eval.epsilon);
}

inline EpisodeTrace run_episode(CuriosityEnv& env, EvalPolicy& policy, std::uint64_t scene_seed,
                                std::uint64_t policy_seed, int episode_id) {
  std::mt19937_64 rng(policy_seed);
  policy.begin_episode();
  AgentObservation obs = env.reset(scene_seed);
  EpisodeTrace trace;
  trace.records.push_back(initial_record(episode_id, env));
  while (!env.done()) {
    auto [next, out] = env.step(action_from_id(policy.choose(obs, rng)));
    obs = std::move(next);
    trace.records.push_back(make_record(episode_id, out));
  }
  return trace;
}

inline std::string trace_file_name(int episode) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "episode_%04d.jsonl", episode);
  return buf;
}

// Eval-mode episodes over the paired scene list; one trace file per episode
// when out_dir is non-empty.
inline std::vector<EpisodeTrace> run_eval(EvalPolicy policy, const ExperimentConfig& cfg,
                                          const std::filesystem::path& out_dir,
                                          const std::function<void(int, const EpisodeTrace&)>& progress = {}) {
  validate(cfg);
  if (!out_dir.empty()) std::filesystem::create_directories(out_dir);
  CuriosityEnv env(eval_env_config(cfg));
  std::vector<EpisodeTrace> traces;
  for (int i = 0; i < cfg.eval.n_scenes; ++i) {
    traces.push_back(run_episode(env, policy, eval_scene_seed(cfg.eval, i), eval_policy_seed(cfg.eval, i), i));
    if (!out_dir.empty()) write_trace(out_dir / trace_file_name(i), traces.back());
    if (progress) progress(i, traces.back());
  }
  return traces;
}

// ---------------------------------------------------------------------------
// Reports

struct NamedTraceDir {
  std::string name;
  std::filesystem::path dir;
};

inline void run_report(const std::vector<NamedTraceDir>& inputs, const ReportOptions& opt,
                       const std::filesystem::path& out_dir) {
  if (inputs.empty()) throw std::invalid_argument("report: no trace directories");
  std::vector<StrategyTraces> strategies;
  for (const auto& in : inputs) {
    auto traces = read_trace_dir(in.dir);
    if (traces.empty()) throw IoError("report: no traces in " + in.dir.string());
    strategies.push_back({in.name, std::move(traces)});
  }
  write_report(strategies, opt, out_dir);
}

}  // namespace curiosity
