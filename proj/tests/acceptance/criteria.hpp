#pragma once

// Acceptance criteria shared by the acceptance binary and `curiosity selftest`.
// Every tolerance is pinned here.

#include <boost/math/distributions/students_t.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "curiosity/harness.hpp"
#include "oracles.hpp"

namespace curiosity::acceptance {

inline constexpr double kTimeTol = 1e-9;
inline constexpr double kRewardPropertySamples = 10000;
inline constexpr int kApInstances = 200;
inline constexpr double kGradTol = 1e-4;
inline constexpr int kLearningScenes = 5;
inline constexpr int kLearningRounds = 200;
inline constexpr double kLearningGain = 0.3;
inline constexpr double kPairedAlpha = 0.05;
inline constexpr int kExtendedHorizon = 60;

struct Result {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

// Collects failed expectations with a short message each.
class Checks {
 public:
  void expect(bool ok, const std::string& what) {
    ++total_;
    if (!ok && failures_.size() < 8) failures_.push_back(what);
    if (!ok) ++failed_;
  }
  void near(double got, double want, double tol, const std::string& what) {
    std::ostringstream os;
    os.precision(12);
    os << what << ": got " << got << " want " << want;
    expect(std::abs(got - want) <= tol, os.str());
  }
  bool ok() const { return failed_ == 0; }
  std::string summary() const {
    std::string s = std::to_string(total_ - failed_) + "/" + std::to_string(total_) + " checks";
    for (const auto& f : failures_) s += "; " + f;
    return s;
  }

 private:
  int total_ = 0, failed_ = 0;
  std::vector<std::string> failures_;
};

// ---------------------------------------------------------------------------
// 1. Time model

inline Result time_model() {
  Checks c;
  const auto g = derive_geometry({});
  const double pi = std::numbers::pi, s3 = std::sqrt(3.0);
  const TimeParams a{0.9, 0.305, 2.5, std::nullopt}, b{0.9, 2.5, 10.0, std::nullopt};
  TimeParams idle = a;
  idle.t_idle = 1.0;
  struct Case {
    const char* name;
    Action act;
    GridPosition at;
    bool trained, annotated;
    TimeParams tp;
    double want;
  };
  // arc at orbit k is k * 5 sqrt(3) * pi / 15; radial step is 5 sqrt(3)
  const std::vector<Case> cases = {
      {"left outer A", Action::move_left, {6, 0}, true, false, a, 2 * s3 * pi / 2.5},
      {"forward B", Action::move_forward, {6, 0}, true, false, b, 2.5},
      {"request A", Action::request_user, {6, 0}, true, true, a, 1.205},
      {"right inner A untrained", Action::move_right, {1, 4}, false, false, a, s3 * pi / 3 / 2.5},
      {"right inner A trained", Action::move_right, {1, 4}, true, false, a, s3 * pi / 3 / 2.5},
      {"left inner B", Action::move_left, {1, 4}, true, false, b, 2.5},
      {"left outer B", Action::move_left, {6, 9}, true, false, b, 2.5},
      {"left outer B untrained", Action::move_left, {6, 9}, false, false, b, 2 * s3 * pi / 10},
      {"left orbit 3 A", Action::move_left, {3, 2}, true, false, a, s3 * pi / 2.5},
      {"backward A", Action::move_backward, {2, 2}, false, false, a, 2 * s3},
      {"dont move idle", Action::dont_move, {4, 0}, false, false, idle, 1.0},
      {"dont move B trained", Action::dont_move, {4, 0}, true, false, b, 2.5},
      {"request unanswered", Action::request_user, {4, 0}, false, true, a, 0.9},
  };
  for (const auto& k : cases) c.near(elapsed_time(k.act, k.at, k.trained, k.annotated, k.tp, g), k.want, kTimeTol, k.name);
  c.near(elapsed_time(Action::move_left, {6, 0}, true, false, a, g), 4.3531, 5e-5, "rounded value 4.3531");
  return {1, "time model exactness", c.ok(), c.summary()};
}

// ---------------------------------------------------------------------------
// 2. Rewards

inline Result reward_model() {
  Checks c;
  const RewardWeights w{0.5, 0.5, 0.08};
  c.near(reward_components(0.0, Action::move_left, 2.5, w, false).r_time, -0.2, 1e-15, "R_time(2.5)");
  const auto r = reward_components(0.05, Action::move_left, 2.5, w, false);
  c.near(r.r_learn, 0.5, 1e-15, "composite r_learn");
  c.near(r.r_total, 0.2, 1e-15, "composite r_total");
  c.expect(reward_components(0.0, Action::dont_move, 1.0, w, true).r_total == 1.0, "win total");
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < kRewardPropertySamples; ++i) {
    const RewardWeights ww{u(rng), u(rng), 0.08};
    const Action act = action_from_id(static_cast<int>(rng() % kActionCount));
    const double t = 12.5 * u(rng), dap = 2 * u(rng) - 1;
    const auto x = reward_components(dap, act, t, ww, false);
    c.expect(x.r_learn >= -1 && x.r_learn <= 1, "r_learn range");
    c.expect(x.r_behave == (act == Action::request_user ? -1.0 : 0.0), "r_behave");
    c.expect(std::abs(x.r_time) <= ww.c_t * t + 1e-15, "r_time bound");
    const double comp = ww.w_p * x.r_learn + (1 - ww.w_p) * (ww.w_n * x.r_behave + (1 - ww.w_n) * x.r_time);
    c.expect(x.r_total == comp, "composition identity");
    c.expect(std::abs(x.r_total) <= 1.0, "|r_total| <= 1");
  }
  return {2, "reward exactness and composition", c.ok(), c.summary()};
}

// ---------------------------------------------------------------------------
// 3. Geometry

inline Result geometry() {
  Checks c;
  const auto g = derive_geometry({});
  c.near(g.delta_r, 8.66, 0.005, "delta_r");
  c.near(g.r_max, 51.9615, 5e-5, "r_max");
  c.expect(g.n_angles == 30, "n_angles == 30");
  return {3, "geometry", c.ok(), c.summary()};
}

// ---------------------------------------------------------------------------
// 4. AP oracle

inline Result ap_oracle() {
  Checks c;
  std::mt19937_64 rng(404);
  for (int i = 0; i < kApInstances; ++i) {
    const auto views = oracle::random_ap_instance(rng);
    c.expect(average_precision(views) == oracle::brute_force_ap(views), "instance " + std::to_string(i));
  }
  // evaluate_ap on rendered views with a partially trained detector
  SceneConfig sc;
  sc.image_size = 32;
  const auto g = derive_geometry({});
  const Scene s = generate_scene(sc, g, 3);
  std::vector<LabeledView> views;
  for (int v = 0; v < g.n_views(); v += 6) views.push_back(render_labeled(s, camera_pose(position_of_view(v, g), g, s.aim_point()), sc));
  auto m = make_detector({}, 32);
  for (int r = 0; r < 40; ++r) {
    const auto& lv = views[static_cast<std::size_t>(r) % views.size()];
    if (lv.truth.bbox) m = training_round(m, lv.image, to_bbox(lv.truth.bbox));
  }
  std::vector<ScoredView> scored;
  for (const auto& lv : views) {
    ScoredView sv{detect(m, lv.image), {}};
    if (lv.truth.bbox) sv.truths.push_back(to_bbox(*lv.truth.bbox));
    scored.push_back(sv);
  }
  c.expect(evaluate_ap(m, views) == oracle::brute_force_ap(scored), "rendered views");
  return {4, "AP equals brute-force oracle", c.ok(), c.summary()};
}

// ---------------------------------------------------------------------------
// 5. Gradients

inline Result gradients() {
  Checks c;
  std::mt19937_64 rng(55);
  std::normal_distribution<double> nd(0.0, 0.3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  DetectorConfig dc;
  dc.grid_size = 3;
  double det_worst = 0.0;
  for (int trial = 0; trial < 4; ++trial) {
    auto m = make_detector(dc, 30);
    for (auto& w : m.weights) w = nd(rng);
    CellFeatures f{3, 30, std::vector<double>(9 * kCellFeatures)};
    for (auto& v : f.values) v = u(rng);
    const BBox gt{3.0 + 2 * trial, 5.0, 13.0, 10.0};
    const auto grad = detector_gradient(m, f, gt);
    for (std::size_t i = 0; i < m.weights.size(); ++i) {
      auto p = m, q = m;
      p.weights[i] += 1e-5;
      q.weights[i] -= 1e-5;
      const double num = (detector_loss(p, f, gt) - detector_loss(q, f, gt)) / 2e-5;
      det_worst = std::max(det_worst, std::abs(num - grad[i]) / std::max({std::abs(num), std::abs(grad[i]), 1e-6}));
    }
  }
  c.expect(det_worst < kGradTol, "detector rel err " + std::to_string(det_worst));

  nn::NetworkShape shape;
  shape.input_size = 8;
  shape.conv = {{3, 3, 1}, {4, 2, 1}, {4, 2, 1}};
  shape.fc_image = 6;
  shape.fc_position = 3;
  shape.fc_fusion = 5;
  shape.hidden = 16;
  const auto net = nn::make_network(shape, 31);
  std::vector<std::vector<AgentObservation>> storage(2);
  std::vector<nn::SequenceRef> batch;
  std::vector<std::vector<double>> targets;
  for (auto& seq_obs : storage) {
    for (int t = 0; t < 4; ++t) {
      AgentObservation o;
      o.size = 8;
      o.matrix.resize(8 * 8 * AgentObservation::kChannels);
      for (auto& byte : o.matrix) byte = static_cast<std::uint8_t>(rng() & 0xFF);
      o.p0 = u(rng);
      o.p1 = u(rng);
      seq_obs.push_back(std::move(o));
    }
    nn::SequenceRef ref;
    std::vector<double> y;
    for (auto& o : seq_obs) ref.obs.push_back(&o);
    for (int t = 0; t < 3; ++t) {
      ref.actions.push_back(static_cast<int>(rng() % kActionCount));
      ref.rewards.push_back(0.0);
      ref.terminal.push_back(0);
      y.push_back(2 * u(rng) - 1);
    }
    batch.push_back(std::move(ref));
    targets.push_back(std::move(y));
  }
  const auto q = nn::gradient_check(net, batch, targets);
  c.expect(q.max_relative_error < kGradTol, "q-network rel err " + std::to_string(q.max_relative_error));
  return {5, "gradient checks", c.ok(), c.summary()};
}

// ---------------------------------------------------------------------------
// 6. Trainee learning curve

struct LearningCurveResult {
  std::vector<double> baseline, trained;
  double mean_gain = 0.0;
};

// Oracle-fed rounds on views drawn uniformly among those showing the subject;
// AP measured over every view of the scene.
inline LearningCurveResult learning_curve(int image_size, int rounds, int n_scenes) {
  SceneConfig sc;
  sc.image_size = image_size;
  const auto g = derive_geometry({});
  LearningCurveResult out;
  for (int k = 0; k < n_scenes; ++k) {
    const std::uint64_t seed = 100 + static_cast<std::uint64_t>(k);
    const Scene s = generate_scene(sc, g, seed);
    std::vector<LabeledView> views;
    std::vector<CellFeatures> feats;
    std::vector<std::size_t> visible;
    const auto fresh = make_detector({}, image_size);
    for (int v = 0; v < g.n_views(); ++v) {
      views.push_back(render_labeled(s, camera_pose(position_of_view(v, g), g, s.aim_point()), sc));
      feats.push_back(extract_features(views.back().image, fresh.config.grid_size));
      if (views.back().truth.bbox) visible.push_back(static_cast<std::size_t>(v));
    }
    auto ap_of = [&](const DetectorModel& m) {
      std::vector<ScoredView> scored;
      for (std::size_t v = 0; v < views.size(); ++v) scored.push_back(score_view(m, feats[v], views[v].truth));
      return average_precision(scored);
    };
    auto m = fresh;
    std::mt19937_64 rng(mix_seed(seed, 0x1EA));
    for (int r = 0; r < rounds && !visible.empty(); ++r) {
      const auto v = visible[rng() % visible.size()];
      training_round_inplace(m, feats[v], to_bbox(*views[v].truth.bbox));
    }
    out.baseline.push_back(ap_of(fresh));
    out.trained.push_back(ap_of(m));
    out.mean_gain += (out.trained.back() - out.baseline.back()) / n_scenes;
  }
  return out;
}

inline Result trainee_learning() {
  const auto r = learning_curve(84, kLearningRounds, kLearningScenes);
  std::ostringstream os;
  os.precision(3);
  os << "mean gain " << r.mean_gain << " (per scene:";
  for (std::size_t i = 0; i < r.trained.size(); ++i) os << " " << r.baseline[i] << "->" << r.trained[i];
  os << ")";
  return {6, "trainee learning curve", r.mean_gain >= kLearningGain, os.str()};
}

// ---------------------------------------------------------------------------
// 7. step-loop conformance

inline EnvConfig conformance_env() {
  EnvConfig e;
  e.scene.image_size = 32;
  return e;
}

inline Result algorithm_conformance() {
  Checks c;
  const auto base = conformance_env();
  const auto g = derive_geometry(base.orbit);
  const double tol = 1e-12;

  // a scene whose start view shows the subject
  std::uint64_t seed = 0;
  for (;; ++seed) {
    CuriosityEnv probe(base);
    probe.reset(seed);
    const auto t = probe.current_truth();
    if (t && t->w >= 2 && t->h >= 2) break;
  }

  {
    CuriosityEnv env(base);
    env.reset(seed);
    c.expect(env.position() == GridPosition{6, 0}, "reset at outer orbit, angle 0");
    c.expect(!env.tracked_box() && !env.trainee().tracker, "reset: nothing tracked");

    // DontMove without tracking
    auto out = env.step(Action::dont_move).second;
    c.expect(!out.trained && env.trainee().detector.updates == 0, "DontMove untracked: no training");
    c.near(out.t_i, base.time.idle(), tol, "DontMove untracked time");

    // RequestUser
    const auto truth = env.current_truth();
    out = env.step(Action::request_user).second;
    c.expect(out.trained && env.trainee().detector.updates == 1, "RequestUser: one training round");
    c.expect(env.trainee().tracker.has_value(), "RequestUser: tracker initialized");
    c.expect(env.tracked_box() == truth, "RequestUser: tracked box is the annotation");
    c.expect(out.user_interaction == 1, "RequestUser: u = 1");
    c.near(out.t_i, 0.9 + 0.305, tol, "RequestUser time");

    // DontMove with tracking
    out = env.step(Action::dont_move).second;
    c.expect(out.trained && env.trainee().detector.updates == 2, "DontMove tracked: trains");
    c.expect(env.position() == GridPosition{6, 0}, "DontMove keeps position");
    c.near(out.t_i, 0.305, tol, "DontMove tracked time");

    // motion while tracking trains on the pre-move view
    const bool tracking = env.tracked_box().has_value();
    const auto before = env.trainee().detector.updates;
    out = env.step(Action::move_left).second;
    c.expect(out.trained == tracking && env.trainee().detector.updates == before + (tracking ? 1u : 0u),
             "MoveLeft trains iff tracking");
    c.expect(env.position() == GridPosition{6, 1}, "MoveLeft increments angle");
    c.near(out.t_i, tracking ? std::max(arc_length(6, g) / 2.5, 0.305) : arc_length(6, g) / 2.5, tol, "MoveLeft time");
  }

  {
    // pure motion script: wrap and clamps, no tracking so no training
    CuriosityEnv env(base);
    env.reset(seed);
    env.step(Action::move_right);
    c.expect(env.position() == GridPosition{6, 29}, "MoveRight wraps to 29");
    env.step(Action::move_backward);
    c.expect(env.position() == GridPosition{6, 29}, "MoveBackward clamps at outer orbit");
    for (int i = 0; i < 5; ++i) env.step(Action::move_forward);
    c.expect(env.position() == GridPosition{1, 29}, "MoveForward reaches orbit 1");
    const auto out = env.step(Action::move_forward).second;
    c.expect(env.position() == GridPosition{1, 29}, "MoveForward clamps at orbit 1");
    c.near(out.t_i, g.delta_r / 2.5, tol, "clamped move still charges radial time");
    env.step(Action::move_left);
    c.expect(env.position() == GridPosition{1, 0}, "MoveLeft wraps to 0");
    c.expect(env.trainee().detector.updates == 0, "no training without tracking");
  }

  {
    // unanswered annotation
    struct Silent final : Annotator {
      std::optional<BBox> annotate(const ViewImage&, const std::optional<BBox>&) override { return std::nullopt; }
    };
    CuriosityEnv env(base, std::make_shared<Silent>());
    env.reset(seed);
    const auto out = env.step(Action::request_user).second;
    c.expect(out.annotation_missing && !out.trained && !env.trainee().tracker, "missing annotation: no train, no init");
    c.near(out.t_i, 0.9, tol, "missing annotation time");
  }

  {
    // timeout
    CuriosityEnv env(base);
    env.reset(seed);
    StepOutcome out;
    int steps = 0;
    while (!env.done()) {
      out = env.step(Action::dont_move).second;
      ++steps;
    }
    c.expect(steps == 10000 && out.done && !out.win, "timeout after 10000 steps");
    c.near(out.rewards.r_total, 0.5 * -0.08 * 0.305, tol, "timeout step rewarded as normal");
  }

  {
    // absolute win at 0.85
    CuriosityEnv env(base);
    env.set_ap_override([](int step, double) { return step >= 4 ? 0.85 : 0.5; });
    env.reset(seed);
    int steps = 0;
    StepOutcome out;
    while (!env.done()) {
      out = env.step(Action::move_left).second;
      ++steps;
    }
    c.expect(steps == 4 && out.win && out.rewards.r_total == 1.0, "absolute AP win");
  }

  {
    // gain win at +0.70 below the absolute threshold
    CuriosityEnv env(base);
    env.set_ap_override([](int step, double) { return step == 0 ? 0.1 : (step < 3 ? 0.79 : 0.80); });
    env.reset(seed);
    int steps = 0;
    StepOutcome out;
    while (!env.done()) {
      out = env.step(Action::dont_move).second;
      ++steps;
    }
    c.expect(steps == 3 && out.win && out.ap < 0.85, "gain win");
  }
  return {7, "step-loop conformance", c.ok(), c.summary()};
}

// ---------------------------------------------------------------------------
// Extended tier (8-11): trains mini agents from the shipped configs.

inline double one_sided_paired_p(const std::vector<double>& diffs) {
  const double n = static_cast<double>(diffs.size());
  double mean = 0.0;
  for (double d : diffs) mean += d / n;
  double var = 0.0;
  for (double d : diffs) var += (d - mean) * (d - mean) / (n - 1);
  if (var == 0.0) return mean > 0.0 ? 0.0 : 1.0;
  const double t = mean / std::sqrt(var / n);
  const boost::math::students_t dist(n - 1);
  return boost::math::cdf(boost::math::complement(dist, t));
}

inline std::vector<double> per_episode_auc(const std::vector<EpisodeTrace>& traces, int horizon) {
  std::vector<double> out;
  for (const auto& t : traces) out.push_back(curve_auc(bin_performance(std::span(&t, 1), horizon)));
  return out;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

struct ExtendedRun {
  std::filesystem::path dir;
  std::vector<EpisodeTrace> traces;
};

using Log = std::function<void(const std::string&)>;

inline ExtendedRun train_and_eval(const ExperimentConfig& cfg, const std::filesystem::path& dir, const Log& log) {
  run_train(cfg, dir / "train", [&](const nn::EpisodeLog& l) {
    if ((l.episode + 1) % 25 == 0)
      log("  " + dir.filename().string() + " episode " + std::to_string(l.episode + 1) + " win " +
          std::to_string(l.win) + " final_ap " + std::to_string(l.final_ap));
  });
  auto policy = load_policy((dir / "train" / "checkpoint.bin").string(), cfg);
  return {dir, run_eval(std::move(policy), cfg, dir / "traces")};
}

inline std::vector<Result> extended(const std::filesystem::path& config_dir, const std::filesystem::path& work,
                                    const Log& log) {
  std::vector<Result> results;
  auto timed = [](auto&& f) {
    const auto t0 = std::chrono::steady_clock::now();
    auto r = f();
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
  };
  const auto cfg_a = load_config(config_dir / "mini_agent_a.cfg");
  const auto cfg_b = load_config(config_dir / "mini_agent_b.cfg");
  const auto cfg_wn = load_config(config_dir / "mini_wn_0.6.cfg");
  std::filesystem::create_directories(work);

  ExtendedRun run_a, run_random;
  results.push_back(timed([&] {
    log("criterion 8: training agent A (mini)");
    run_a = train_and_eval(cfg_a, work / "agent_a", log);
    run_random = {work / "random", run_eval(EvalPolicy::random(), cfg_a, work / "random" / "traces")};
    run_report({{"agent", run_a.dir / "traces"}, {"random", run_random.dir / "traces"}}, {kExtendedHorizon, 60.0},
               run_a.dir / "report");
    const auto auc_a = per_episode_auc(run_a.traces, kExtendedHorizon);
    const auto auc_r = per_episode_auc(run_random.traces, kExtendedHorizon);
    std::vector<double> diffs;
    double ma = 0, mr = 0;
    for (std::size_t i = 0; i < auc_a.size(); ++i) {
      diffs.push_back(auc_a[i] - auc_r[i]);
      ma += auc_a[i] / auc_a.size();
      mr += auc_r[i] / auc_r.size();
    }
    const double p = one_sided_paired_p(diffs);
    std::ostringstream os;
    os << "mean AUC agent " << ma << " random " << mr << ", one-sided paired p = " << p;
    return Result{8, "agent beats random (60 s AUC)", ma > mr && p < kPairedAlpha, os.str()};
  }));

  results.push_back(timed([&] {
    log("criterion 9: training agent with w_n = 0.6 (mini)");
    const auto run_wn = train_and_eval(cfg_wn, work / "agent_wn06", log);
    const double f0 = interaction_fraction(run_a.traces), f6 = interaction_fraction(run_wn.traces);
    const auto i0 = mean_itb(run_a.traces, std::numeric_limits<double>::infinity()).itb_user;
    const auto i6 = mean_itb(run_wn.traces, std::numeric_limits<double>::infinity()).itb_user;
    std::ostringstream os;
    os << "interaction fraction w_n=0: " << f0 << " w_n=0.6: " << f6 << "; ITB/interaction w_n=0: "
       << (i0 ? std::to_string(*i0) : "undefined") << " w_n=0.6: " << (i6 ? std::to_string(*i6) : "undefined");
    const bool pass = f6 < f0 && i0 && i6 && *i6 > *i0;
    return Result{9, "w_n trend", pass, os.str()};
  }));

  results.push_back(timed([&] {
    log("criterion 10: training agent B (mini)");
    const auto run_b = train_and_eval(cfg_b, work / "agent_b", log);
    const double ma = action_distribution(run_a.traces)[2], mb = action_distribution(run_b.traces)[2];
    std::ostringstream os;
    os << "Motion fraction A: " << ma << " B: " << mb;
    return Result{10, "agent B moves more", mb > ma, os.str()};
  }));

  results.push_back(timed([&] {
    log("criterion 11: repeating agent A train+eval+report");
    const auto again = train_and_eval(cfg_a, work / "agent_a_repeat", log);
    run_report({{"agent", again.dir / "traces"}, {"random", run_random.dir / "traces"}}, {kExtendedHorizon, 60.0},
               again.dir / "report");
    std::vector<std::string> differing;
    for (const auto& e : std::filesystem::directory_iterator(run_a.dir / "report")) {
      const auto other = again.dir / "report" / e.path().filename();
      if (read_file(e.path()) != read_file(other)) differing.push_back(e.path().filename().string());
    }
    const bool ckpt_same =
        read_file(run_a.dir / "train" / "checkpoint.bin") == read_file(again.dir / "train" / "checkpoint.bin");
    std::string detail = ckpt_same ? "checkpoints identical" : "checkpoints differ";
    detail += differing.empty() ? ", reports identical" : ", differing: " + differing.front();
    return Result{11, "determinism", differing.empty() && ckpt_same, detail};
  }));
  return results;
}

inline std::vector<Result> core() {
  std::vector<Result> out;
  for (auto f : {time_model, reward_model, geometry, ap_oracle, gradients, trainee_learning, algorithm_conformance}) {
    const auto t0 = std::chrono::steady_clock::now();
    auto r = f();
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.push_back(std::move(r));
  }
  return out;
}

inline std::string format(const Result& r) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.1fs", r.seconds);
  return std::string(r.pass ? "PASS" : "FAIL") + " criterion " + std::to_string(r.id) + " " + r.name + " [" + buf +
         "]: " + r.detail;
}

}  // namespace curiosity::acceptance
