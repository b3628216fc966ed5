#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "curiosity/common.hpp"
#include "curiosity/image.hpp"
#include "curiosity/orbit_space.hpp"
#include "curiosity/scene_sim.hpp"
#include "curiosity/trainee.hpp"

namespace curiosity {

enum class Action : int {
  dont_move = 0,
  request_user = 1,
  move_left = 2,
  move_right = 3,
  move_forward = 4,
  move_backward = 5,
};

inline constexpr int kActionCount = 6;

inline Action action_from_id(int id) {
  if (id < 0 || id >= kActionCount) throw std::invalid_argument("action id out of range");
  return static_cast<Action>(id);
}

inline std::optional<Move> movement_of(Action a) {
  switch (a) {
    case Action::move_left: return Move::left;
    case Action::move_right: return Move::right;
    case Action::move_forward: return Move::forward;
    case Action::move_backward: return Move::backward;
    default: return std::nullopt;
  }
}

struct TimeParams {
  double t_click = 0.9;
  double t_train = 0.305;
  double s_a = 2.5;
  std::optional<double> t_idle;  // DontMove without a training round; defaults to t_train

  double idle() const { return t_idle.value_or(t_train); }
};

struct RewardWeights {
  double w_p = 0.5;
  double w_n = 0.0;
  double c_t = 0.08;
};

enum class EpisodeMode { train, eval };

struct EpisodeConfig {
  int max_action_steps = 10000;
  double win_ap = 0.85;
  double win_gain = 0.70;
  int subsample_size = 30;
  EpisodeMode mode = EpisodeMode::train;
  double time_budget = 300.0;  // eval mode, seconds
  int ap_every = 1;            // eval mode AP cadence, in action-steps
};

inline void validate(const TimeParams& t) {
  if (!(t.t_click > 0.0 && t.t_train > 0.0 && t.s_a > 0.0 && t.idle() > 0.0))
    throw ConfigError("time: t_click, t_train, s_a and t_idle must be positive");
}

inline void validate(const RewardWeights& w) {
  if (!(w.w_p >= 0.0 && w.w_p <= 1.0 && w.w_n >= 0.0 && w.w_n <= 1.0))
    throw ConfigError("reward: w_p and w_n must lie in [0, 1]");
  if (!(w.c_t >= 0.0)) throw ConfigError("reward: c_t must be non-negative");
}

inline void validate(const EpisodeConfig& e) {
  if (e.max_action_steps < 1) throw ConfigError("episode: max_action_steps must be >= 1");
  if (e.subsample_size < 1) throw ConfigError("episode: subsample_size must be >= 1");
  if (!(e.time_budget > 0.0)) throw ConfigError("episode: time_budget must be positive");
  if (e.ap_every < 1) throw ConfigError("episode: ap_every must be >= 1");
  if (!(e.win_ap > 0.0 && e.win_gain > 0.0)) throw ConfigError("episode: win thresholds must be positive");
}

// Simulated seconds consumed by one action-step.
inline double elapsed_time(Action a, GridPosition before, bool trained, bool annotated, const TimeParams& tp,
                           const DerivedGeometry& g) {
  if (annotated && a != Action::request_user)
    throw std::invalid_argument("elapsed_time: only RequestUser can be annotated");
  switch (a) {
    case Action::dont_move:
      return trained ? tp.t_train : tp.idle();
    case Action::request_user:
      return trained ? tp.t_click + tp.t_train : tp.t_click;
    case Action::move_left:
    case Action::move_right: {
      const double t_move = arc_length(before.k, g) / tp.s_a;
      return trained ? std::max(t_move, tp.t_train) : t_move;
    }
    case Action::move_forward:
    case Action::move_backward: {
      const double t_move = g.delta_r / tp.s_a;
      return trained ? std::max(t_move, tp.t_train) : t_move;
    }
  }
  return 0.0;
}

struct RewardBreakdown {
  double r_total = 0.0;
  double r_learn = 0.0;
  double r_behave = 0.0;
  double r_time = 0.0;
};

inline RewardBreakdown reward_components(double delta_ap, Action a, double t_i, const RewardWeights& w, bool win) {
  RewardBreakdown r;
  r.r_learn = std::clamp(10.0 * delta_ap, -1.0, 1.0);
  r.r_behave = a == Action::request_user ? -1.0 : 0.0;
  r.r_time = -w.c_t * t_i;
  r.r_total = win ? 1.0
                  : w.w_p * r.r_learn + (1.0 - w.w_p) * (w.w_n * r.r_behave + (1.0 - w.w_n) * r.r_time);
  return r;
}

// Fused agent state: image_size x image_size x 5 bytes (RGB, tracked/annotated
// box mask, confidence-weighted detections), plus the normalized position.
struct AgentObservation {
  static constexpr int kChannels = 5;
  int size = 0;
  std::vector<std::uint8_t> matrix;  // row-major, channels interleaved
  double p0 = 0.0;
  double p1 = 0.0;

  std::uint8_t at(int row, int col, int c) const {
    return matrix[(static_cast<std::size_t>(row) * size + col) * kChannels + c];
  }
  bool operator==(const AgentObservation&) const = default;
};

namespace detail {

// Pixels whose centers fall inside the box.
template <typename F>
void for_each_pixel_in(const BBox& b, int n, F&& f) {
  const int c0 = std::max(0, static_cast<int>(std::ceil(b.x - 0.5)));
  const int c1 = std::min(n, static_cast<int>(std::ceil(b.x + b.w - 0.5)));
  const int r0 = std::max(0, static_cast<int>(std::ceil(b.y - 0.5)));
  const int r1 = std::min(n, static_cast<int>(std::ceil(b.y + b.h - 0.5)));
  for (int r = r0; r < r1; ++r)
    for (int c = c0; c < c1; ++c) f(r, c);
}

}  // namespace detail

inline AgentObservation encode_observation(const ViewImage& view, const std::optional<BBox>& tracked,
                                           std::span<const Detection> detections, GridPosition pos,
                                           const DerivedGeometry& geom) {
  const int n = view.size;
  AgentObservation obs;
  obs.size = n;
  obs.matrix.assign(static_cast<std::size_t>(n) * n * AgentObservation::kChannels, 0);
  auto px = [&](int r, int c, int ch) -> std::uint8_t& {
    return obs.matrix[(static_cast<std::size_t>(r) * n + c) * AgentObservation::kChannels + ch];
  };
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c)
      for (int ch = 0; ch < 3; ++ch) px(r, c, ch) = view.at(r, c, ch);
  if (tracked) detail::for_each_pixel_in(*tracked, n, [&](int r, int c) { px(r, c, 3) = 255; });

  std::vector<Detection> order(detections.begin(), detections.end());
  std::stable_sort(order.begin(), order.end(),
                   [](const Detection& a, const Detection& b) { return a.confidence < b.confidence; });
  for (const auto& d : order) {
    const auto value = static_cast<std::uint8_t>(std::lround(255.0 * std::clamp(d.confidence, 0.0, 1.0)));
    detail::for_each_pixel_in(d.bbox, n, [&](int r, int c) { px(r, c, 4) = value; });
  }
  std::tie(obs.p0, obs.p1) = normalized_position(pos, geom);
  return obs;
}

// Source of ground-truth annotations for RequestUser; a live annotator could
// replace the simulated one.
class Annotator {
 public:
  virtual ~Annotator() = default;
  virtual std::optional<BBox> annotate(const ViewImage& view, const std::optional<BBox>& truth) = 0;
};

// Answers with the exact rendered ground truth.
class SimulatedAnnotator final : public Annotator {
 public:
  std::optional<BBox> annotate(const ViewImage&, const std::optional<BBox>& truth) override { return truth; }
};

struct EnvConfig {
  OrbitSpaceConfig orbit;
  SceneConfig scene;
  DetectorConfig detector;
  TrackerConfig tracker;
  TimeParams time;
  RewardWeights reward;
  EpisodeConfig episode;
};

inline void validate(const EnvConfig& c) {
  const auto g = derive_geometry(c.orbit);
  validate(c.scene, g);
  validate(c.detector);
  validate(c.tracker);
  validate(c.time);
  validate(c.reward);
  validate(c.episode);
}

struct StepOutcome {
  RewardBreakdown rewards;
  double t_i = 0.0;
  double t_elapsed = 0.0;
  double ap = 0.0;
  bool done = false;
  bool win = false;
  int user_interaction = 0;
  bool trained = false;
  bool annotation_missing = false;  // RequestUser while the subject was fully hidden
  int step = 0;
  Action action = Action::dont_move;
  GridPosition position;
};

// One episode of the curiosity game over a scene.
// Single-threaded; independent instances may run in parallel.
class CuriosityEnv {
 public:
  // Test hook: maps (action-step, measured AP) to the AP the episode sees.
  using ApOverride = std::function<double(int step, double measured)>;

  explicit CuriosityEnv(EnvConfig cfg, std::shared_ptr<Annotator> annotator = nullptr)
      : cfg_(std::move(cfg)),
        geom_(derive_geometry(cfg_.orbit)),
        annotator_(annotator ? std::move(annotator) : std::make_shared<SimulatedAnnotator>()) {
    validate(cfg_);
  }

  AgentObservation reset(std::uint64_t scene_seed) {
    scene_ = generate_scene(cfg_.scene, geom_, scene_seed);
    cache_.assign(static_cast<std::size_t>(geom_.n_views()), std::nullopt);
    pos_ = {geom_.n_orbits, 0};
    trainee_ = TraineeState{make_detector(cfg_.detector, cfg_.scene.image_size), std::nullopt};
    tracked_.reset();
    t_elapsed_ = 0.0;
    steps_ = 0;
    done_ = false;
    ap_dirty_ = false;

    eval_views_.resize(static_cast<std::size_t>(geom_.n_views()));
    std::iota(eval_views_.begin(), eval_views_.end(), 0);
    if (cfg_.episode.mode == EpisodeMode::train) {
      // Fixed for the whole episode.
      std::mt19937_64 rng(mix_seed(scene_seed, 0x5AB5));
      const std::size_t m = std::min<std::size_t>(eval_views_.size(), cfg_.episode.subsample_size);
      for (std::size_t i = 0; i < m; ++i) {
        const std::size_t j = i + rng() % (eval_views_.size() - i);
        std::swap(eval_views_[i], eval_views_[j]);
      }
      eval_views_.resize(m);
      std::sort(eval_views_.begin(), eval_views_.end());
    }
    initial_ap_ = measured_ap();
    if (ap_override_) initial_ap_ = ap_override_(0, initial_ap_);
    ap_ = initial_ap_;
    return observe();
  }

  std::pair<AgentObservation, StepOutcome> step(Action a) {
    if (done_) throw std::logic_error("step called on a finished episode");
    ++steps_;
    StepOutcome out;
    out.step = steps_;
    out.action = a;
    const GridPosition before = pos_;
    const CachedView& v = view(pos_);

    bool annotated = false;
    switch (a) {
      case Action::request_user: {
        out.user_interaction = 1;
        annotated = true;
        const auto gt = annotator_->annotate(v.image, v.truth);
        tracked_ = gt;
        trainee_.tracker.reset();
        if (gt) {
          train(v, *gt, out);
          if (gt->w >= 2.0 && gt->h >= 2.0) trainee_.tracker = init_tracker(v.image, *gt, cfg_.tracker);
        } else {
          out.annotation_missing = true;
        }
        break;
      }
      case Action::dont_move:
      default:
        if (tracked_) train(v, *tracked_, out);
        if (auto m = movement_of(a)) pos_ = apply_move(pos_, *m, geom_);
        break;
    }

    const CachedView& nv = view(pos_);
    tracked_ = update_tracker_inplace(trainee_, nv.image);

    out.t_i = elapsed_time(a, before, out.trained, annotated, cfg_.time, geom_);
    t_elapsed_ += out.t_i;
    out.t_elapsed = t_elapsed_;

    const double prev_ap = ap_;
    const bool eval = cfg_.episode.mode == EpisodeMode::eval;
    if (ap_dirty_ && (!eval || steps_ % cfg_.episode.ap_every == 0)) {
      ap_ = measured_ap();
      ap_dirty_ = false;
    }
    if (ap_override_) ap_ = ap_override_(steps_, ap_);
    out.ap = ap_;

    if (!eval) {
      out.win = ap_ >= cfg_.episode.win_ap || ap_ - initial_ap_ >= cfg_.episode.win_gain;
      done_ = out.win || steps_ >= cfg_.episode.max_action_steps;
    } else {
      done_ = t_elapsed_ >= cfg_.episode.time_budget;
    }
    out.done = done_;
    out.position = pos_;
    out.rewards = reward_components(ap_ - prev_ap, a, out.t_i, cfg_.reward, out.win);
    return {observe(), out};
  }

  void set_ap_override(ApOverride f) { ap_override_ = std::move(f); }

  const EnvConfig& config() const { return cfg_; }
  const DerivedGeometry& geometry() const { return geom_; }
  const Scene& scene() const { return scene_; }
  GridPosition position() const { return pos_; }
  const TraineeState& trainee() const { return trainee_; }
  const std::optional<BBox>& tracked_box() const { return tracked_; }
  double t_elapsed() const { return t_elapsed_; }
  int steps() const { return steps_; }
  bool done() const { return done_; }
  double ap() const { return ap_; }
  double initial_ap() const { return initial_ap_; }
  const std::vector<int>& evaluation_views() const { return eval_views_; }

  const ViewImage& current_view() { return view(pos_).image; }
  std::optional<BBox> current_truth() { return view(pos_).truth; }

 private:
  struct CachedView {
    ViewImage image;
    std::optional<BBox> truth;
    CellFeatures features;
  };

  const CachedView& view(GridPosition p) {
    auto& slot = cache_[static_cast<std::size_t>(view_index(p, geom_))];
    if (!slot) {
      auto rb = ray_cast(scene_, camera_pose(p, geom_, scene_.aim_point()), cfg_.scene);
      auto box = detail::label_box(rb.labels, cfg_.scene.image_size, 0).first;
      CachedView cv{std::move(rb.image), to_bbox(box), {}};
      cv.features = extract_features(cv.image, cfg_.detector.grid_size);
      slot = std::move(cv);
    }
    return *slot;
  }

  void train(const CachedView& v, const BBox& box, StepOutcome& out) {
    training_round_inplace(trainee_.detector, v.features, box);
    out.trained = true;
    ap_dirty_ = true;
  }

  double measured_ap() {
    std::vector<ScoredView> scored;
    scored.reserve(eval_views_.size());
    for (int idx : eval_views_) {
      const auto& v = view(position_of_view(idx, geom_));
      ScoredView sv{detect(trainee_.detector, v.features), {}};
      if (v.truth) sv.truths.push_back(*v.truth);
      scored.push_back(std::move(sv));
    }
    return average_precision(scored);
  }

  AgentObservation observe() {
    const auto& v = view(pos_);
    const auto dets = detect(trainee_.detector, v.features);
    return encode_observation(v.image, tracked_, dets, pos_, geom_);
  }

  EnvConfig cfg_;
  DerivedGeometry geom_;
  std::shared_ptr<Annotator> annotator_;
  ApOverride ap_override_;

  Scene scene_;
  std::vector<std::optional<CachedView>> cache_;
  GridPosition pos_;
  TraineeState trainee_;
  std::optional<BBox> tracked_;
  std::vector<int> eval_views_;
  double t_elapsed_ = 0.0;
  double ap_ = 0.0;
  double initial_ap_ = 0.0;
  int steps_ = 0;
  bool done_ = true;
  bool ap_dirty_ = false;
};

}  // namespace curiosity
