#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "curiosity/common.hpp"
#include "curiosity/image.hpp"
#include "curiosity/scene_sim.hpp"

namespace curiosity {

// Axis-aligned box in continuous pixel coordinates.
struct BBox {
  double x = 0.0, y = 0.0, w = 0.0, h = 0.0;
  bool operator==(const BBox&) const = default;
  double area() const { return w * h; }
};

inline BBox to_bbox(const PixelBox& p) {
  return {static_cast<double>(p.x), static_cast<double>(p.y), static_cast<double>(p.w),
          static_cast<double>(p.h)};
}

inline std::optional<BBox> to_bbox(const std::optional<PixelBox>& p) {
  if (!p) return std::nullopt;
  return to_bbox(*p);
}

inline double iou(const BBox& a, const BBox& b) {
  const double ix = std::max(0.0, std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x));
  const double iy = std::max(0.0, std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y));
  const double inter = ix * iy;
  const double uni = a.area() + b.area() - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

struct Detection {
  BBox bbox;
  double confidence = 0.0;
  bool operator==(const Detection&) const = default;
};

// ---------------------------------------------------------------------------
// Surrogate grid detector
//
// Every cell of a G x G grid owns a linear scorer over the cell feature vector.
// Outputs per cell: objectness logit and box deltas (dx, dy, log dw, log dh).
// Deltas are in cell units relative to the cell center and to an anchor of
// `anchor_cells` cells, and are clamped to [-1, 1] when decoded.
//
// Cell features: mean R, G, B in [0, 1]; hue histogram of saturated pixels in
// the cell; the same histogram pooled over the 3x3 and 5x5 cell neighborhoods
// (clipped at the border); normalized cell center x, y; bias.

inline constexpr int kHueBins = 8;
inline constexpr double kHueSaturationCut = 0.5;
inline constexpr int kCellFeatures = 3 + 3 * kHueBins + 2 + 1;
inline constexpr int kCellOutputs = 5;

struct DetectorConfig {
  int grid_size = 7;
  double learning_rate = 0.1;
  double detection_threshold = 0.3;
  double nms_iou = 0.5;
  double objectness_bias = -2.0;
  double anchor_cells = 2.0;
};

inline void validate(const DetectorConfig& c) {
  if (c.grid_size < 1) throw ConfigError("trainee: grid_size must be >= 1");
  if (!(c.learning_rate > 0.0)) throw ConfigError("trainee: learning_rate must be positive");
  if (!(c.detection_threshold > 0.0 && c.detection_threshold < 1.0))
    throw ConfigError("trainee: detection_threshold must lie in (0, 1)");
  if (!(c.nms_iou > 0.0 && c.nms_iou <= 1.0)) throw ConfigError("trainee: nms_iou must lie in (0, 1]");
  if (!(c.anchor_cells > 0.0)) throw ConfigError("trainee: anchor_cells must be positive");
}

struct CellFeatures {
  int grid = 0;
  int image_size = 0;
  std::vector<double> values;  // grid * grid * kCellFeatures

  const double* cell(int c) const { return values.data() + static_cast<std::size_t>(c) * kCellFeatures; }
  bool operator==(const CellFeatures&) const = default;
};

// Hue bin of a pixel, or -1 when its saturation is below the cut.
inline int hue_bin(double r, double g, double b) {
  const double mx = std::max({r, g, b});
  const double mn = std::min({r, g, b});
  if (mx <= 0.0 || (mx - mn) / mx <= kHueSaturationCut) return -1;
  const double d = mx - mn;
  double h = 0.0;
  if (mx == r)
    h = std::fmod((g - b) / d + 6.0, 6.0);
  else if (mx == g)
    h = (b - r) / d + 2.0;
  else
    h = (r - g) / d + 4.0;
  return std::min(kHueBins - 1, static_cast<int>(h / 6.0 * kHueBins));
}

inline CellFeatures extract_features(const ViewImage& view, int grid) {
  const int n = view.size;
  const auto cells = static_cast<std::size_t>(grid) * grid;
  constexpr int kLocal = 3 + kHueBins;
  std::vector<double> local(cells * kLocal, 0.0);
  std::vector<int> counts(cells, 0);
  for (int row = 0; row < n; ++row) {
    const int gr = std::min(grid - 1, row * grid / n);
    for (int col = 0; col < n; ++col) {
      const int gc = std::min(grid - 1, col * grid / n);
      const std::size_t c = static_cast<std::size_t>(gr) * grid + gc;
      ++counts[c];
      double* v = local.data() + c * kLocal;
      const double r = view.at(row, col, 0) / 255.0, g = view.at(row, col, 1) / 255.0,
                   b = view.at(row, col, 2) / 255.0;
      v[0] += r;
      v[1] += g;
      v[2] += b;
      if (const int bin = hue_bin(r, g, b); bin >= 0) v[3 + bin] += 1.0;
    }
  }
  for (std::size_t c = 0; c < cells; ++c)
    for (int i = 0; i < kLocal; ++i) local[c * kLocal + i] /= std::max(1, counts[c]);

  CellFeatures f{grid, n, std::vector<double>(cells * kCellFeatures, 0.0)};
  for (int gr = 0; gr < grid; ++gr)
    for (int gc = 0; gc < grid; ++gc) {
      const std::size_t c = static_cast<std::size_t>(gr) * grid + gc;
      double* v = f.values.data() + c * kCellFeatures;
      const double* own = local.data() + c * kLocal;
      std::copy(own, own + kLocal, v);
      for (int rad = 1; rad <= 2; ++rad) {
        double* ctx = v + kLocal + (rad - 1) * kHueBins;
        int cnt = 0;
        for (int dr = -rad; dr <= rad; ++dr)
          for (int dc = -rad; dc <= rad; ++dc) {
            const int r = gr + dr, cc = gc + dc;
            if (r < 0 || r >= grid || cc < 0 || cc >= grid) continue;
            ++cnt;
            const double* nb = local.data() + (static_cast<std::size_t>(r) * grid + cc) * kLocal + 3;
            for (int b = 0; b < kHueBins; ++b) ctx[b] += nb[b];
          }
        for (int b = 0; b < kHueBins; ++b) ctx[b] /= cnt;
      }
      v[kCellFeatures - 3] = (gc + 0.5) / grid;
      v[kCellFeatures - 2] = (gr + 0.5) / grid;
      v[kCellFeatures - 1] = 1.0;
    }
  return f;
}

struct DetectorModel {
  DetectorConfig config;
  int image_size = 0;
  std::vector<double> weights;  // [cell][output][feature]
  std::uint64_t updates = 0;

  std::size_t offset(int cell, int output) const {
    return (static_cast<std::size_t>(cell) * kCellOutputs + output) * kCellFeatures;
  }
  int cells() const { return config.grid_size * config.grid_size; }
  bool operator==(const DetectorModel&) const = default;
};

// Fresh model: zero weights except the objectness bias; emits nothing.
inline DetectorModel make_detector(const DetectorConfig& cfg, int image_size) {
  validate(cfg);
  DetectorModel m;
  m.config = cfg;
  m.image_size = image_size;
  m.weights.assign(static_cast<std::size_t>(m.cells()) * kCellOutputs * kCellFeatures, 0.0);
  for (int c = 0; c < m.cells(); ++c) m.weights[m.offset(c, 0) + kCellFeatures - 1] = cfg.objectness_bias;
  return m;
}

inline double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

namespace detail {

inline double linear(const DetectorModel& m, int cell, int output, const double* f) {
  const double* w = m.weights.data() + m.offset(cell, output);
  double s = 0.0;
  for (int i = 0; i < kCellFeatures; ++i) s += w[i] * f[i];
  return s;
}

inline std::optional<BBox> clip_box(BBox b, double n) {
  const double x0 = std::clamp(b.x, 0.0, n), x1 = std::clamp(b.x + b.w, 0.0, n);
  const double y0 = std::clamp(b.y, 0.0, n), y1 = std::clamp(b.y + b.h, 0.0, n);
  if (x1 - x0 < 1.0 || y1 - y0 < 1.0) return std::nullopt;
  return BBox{x0, y0, x1 - x0, y1 - y0};
}

// Regression targets of a positive cell for a ground-truth box, clamped like decoding.
inline std::array<double, 4> box_targets(const DetectorModel& m, int cell, const BBox& gt) {
  const int g = m.config.grid_size;
  const double s = static_cast<double>(m.image_size) / g;
  const double cx = (cell % g + 0.5) * s, cy = (cell / g + 0.5) * s;
  const double anchor = m.config.anchor_cells * s;
  return {std::clamp((gt.x + gt.w * 0.5 - cx) / s, -1.0, 1.0),
          std::clamp((gt.y + gt.h * 0.5 - cy) / s, -1.0, 1.0),
          std::clamp(std::log(gt.w / anchor), -1.0, 1.0),
          std::clamp(std::log(gt.h / anchor), -1.0, 1.0)};
}

inline bool cell_is_positive(const DetectorModel& m, int cell, const BBox& gt) {
  const int g = m.config.grid_size;
  const double s = static_cast<double>(m.image_size) / g;
  const double cx = (cell % g + 0.5) * s, cy = (cell / g + 0.5) * s;
  return cx >= gt.x && cx < gt.x + gt.w && cy >= gt.y && cy < gt.y + gt.h;
}

}  // namespace detail

// Greedy non-maximum suppression; output sorted by descending confidence.
inline std::vector<Detection> non_max_suppression(std::vector<Detection> cands, double max_iou) {
  std::stable_sort(cands.begin(), cands.end(),
                   [](const Detection& a, const Detection& b) { return a.confidence > b.confidence; });
  std::vector<Detection> kept;
  for (const auto& d : cands) {
    const bool suppressed = std::any_of(kept.begin(), kept.end(),
                                        [&](const Detection& k) { return iou(k.bbox, d.bbox) > max_iou; });
    if (!suppressed) kept.push_back(d);
  }
  return kept;
}

inline std::vector<Detection> detect(const DetectorModel& m, const CellFeatures& f) {
  if (f.grid != m.config.grid_size || f.image_size != m.image_size)
    throw std::invalid_argument("detect: features do not match the model");
  const int g = m.config.grid_size;
  const double s = static_cast<double>(m.image_size) / g;
  const double anchor = m.config.anchor_cells * s;
  std::vector<Detection> cands;
  for (int c = 0; c < m.cells(); ++c) {
    const double* x = f.cell(c);
    const double conf = logistic(detail::linear(m, c, 0, x));
    if (conf < m.config.detection_threshold) continue;
    const double dx = std::clamp(detail::linear(m, c, 1, x), -1.0, 1.0);
    const double dy = std::clamp(detail::linear(m, c, 2, x), -1.0, 1.0);
    const double dw = std::clamp(detail::linear(m, c, 3, x), -1.0, 1.0);
    const double dh = std::clamp(detail::linear(m, c, 4, x), -1.0, 1.0);
    const double cx = (c % g + 0.5 + dx) * s, cy = (c / g + 0.5 + dy) * s;
    const double w = anchor * std::exp(dw), h = anchor * std::exp(dh);
    if (auto b = detail::clip_box({cx - w * 0.5, cy - h * 0.5, w, h}, m.image_size))
      cands.push_back({*b, conf});
  }
  return non_max_suppression(std::move(cands), m.config.nms_iou);
}

inline std::vector<Detection> detect(const DetectorModel& m, const ViewImage& view) {
  if (view.size != m.image_size) throw std::invalid_argument("detect: view size mismatch");
  return detect(m, extract_features(view, m.config.grid_size));
}

// Logistic objectness loss over all cells plus squared delta loss over positive cells.
inline double detector_loss(const DetectorModel& m, const CellFeatures& f, const BBox& gt) {
  double loss = 0.0;
  for (int c = 0; c < m.cells(); ++c) {
    const double* x = f.cell(c);
    const double z = detail::linear(m, c, 0, x);
    const bool pos = detail::cell_is_positive(m, c, gt);
    // softplus(z) - y z, computed stably
    loss += std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))) - (pos ? z : 0.0);
    if (pos) {
      const auto t = detail::box_targets(m, c, gt);
      for (int k = 0; k < 4; ++k) {
        const double e = detail::linear(m, c, k + 1, x) - t[k];
        loss += e * e;
      }
    }
  }
  return loss;
}

inline std::vector<double> detector_gradient(const DetectorModel& m, const CellFeatures& f, const BBox& gt) {
  std::vector<double> grad(m.weights.size(), 0.0);
  for (int c = 0; c < m.cells(); ++c) {
    const double* x = f.cell(c);
    const bool pos = detail::cell_is_positive(m, c, gt);
    std::array<double, kCellOutputs> dout{};
    dout[0] = logistic(detail::linear(m, c, 0, x)) - (pos ? 1.0 : 0.0);
    if (pos) {
      const auto t = detail::box_targets(m, c, gt);
      for (int k = 0; k < 4; ++k) dout[k + 1] = 2.0 * (detail::linear(m, c, k + 1, x) - t[k]);
    }
    for (int o = 0; o < kCellOutputs; ++o) {
      double* g = grad.data() + m.offset(c, o);
      for (int i = 0; i < kCellFeatures; ++i) g[i] += dout[o] * x[i];
    }
  }
  return grad;
}

inline void training_round_inplace(DetectorModel& m, const CellFeatures& f, const BBox& gt) {
  const auto grad = detector_gradient(m, f, gt);
  for (std::size_t i = 0; i < grad.size(); ++i) m.weights[i] -= m.config.learning_rate * grad[i];
  ++m.updates;
}

// One plain SGD step on one annotated view.
inline DetectorModel training_round(DetectorModel m, const CellFeatures& f, const std::optional<BBox>& gt) {
  if (!gt) throw std::invalid_argument("training_round: ground truth box required");
  training_round_inplace(m, f, *gt);
  return m;
}

inline DetectorModel training_round(const DetectorModel& m, const ViewImage& view, const std::optional<BBox>& gt) {
  return training_round(m, extract_features(view, m.config.grid_size), gt);
}

// Checkpoint: 16-byte header (magic, version, G, feature count) then the weights.
inline constexpr std::uint32_t kDetectorMagic = 0x54454443;  // "CDET"
inline constexpr std::uint32_t kDetectorVersion = 1;

inline void save_detector(const std::filesystem::path& path, const DetectorModel& m) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  binio::write<std::uint32_t>(os, kDetectorMagic);
  binio::write<std::uint32_t>(os, kDetectorVersion);
  binio::write<std::uint32_t>(os, static_cast<std::uint32_t>(m.config.grid_size));
  binio::write<std::uint32_t>(os, kCellFeatures);
  binio::write_doubles(os, m.weights.data(), m.weights.size());
  if (!os) throw IoError("failed writing " + path.string());
}

// Restores weights into a model built from `cfg`; the grid size must match.
inline DetectorModel load_detector(const std::filesystem::path& path, const DetectorConfig& cfg, int image_size) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  if (binio::read<std::uint32_t>(is) != kDetectorMagic) throw IoError("not a detector checkpoint");
  if (binio::read<std::uint32_t>(is) != kDetectorVersion) throw IoError("unsupported detector version");
  const auto g = binio::read<std::uint32_t>(is);
  const auto nf = binio::read<std::uint32_t>(is);
  if (static_cast<int>(g) != cfg.grid_size || nf != kCellFeatures)
    throw IoError("detector checkpoint shape does not match configuration");
  auto m = make_detector(cfg, image_size);
  binio::read_doubles(is, m.weights.data(), m.weights.size());
  return m;
}

// ---------------------------------------------------------------------------
// Template tracker (normalized cross-correlation, single scale)

struct TrackerConfig {
  int template_size = 16;
  double margin = 0.25;     // search offset per side, as a fraction of box size
  double threshold = 0.6;   // tau_track
  bool operator==(const TrackerConfig&) const = default;
};

inline void validate(const TrackerConfig& c) {
  if (c.template_size < 2) throw ConfigError("trainee: tracker template_size must be >= 2");
  if (c.margin < 0.0) throw ConfigError("trainee: tracker margin must be >= 0");
  if (!(c.threshold >= 0.0 && c.threshold <= 1.0)) throw ConfigError("trainee: tracker threshold must lie in [0, 1]");
}

struct TrackerState {
  TrackerConfig config;
  std::vector<double> templ;  // template_size^2 luminance samples
  BBox last_bbox;
  double last_confidence = 1.0;
  bool operator==(const TrackerState&) const = default;
};

namespace detail {

inline double bilinear_luma(const ViewImage& img, double px, double py) {
  const int n = img.size;
  const double fx = std::clamp(px - 0.5, 0.0, n - 1.0);
  const double fy = std::clamp(py - 0.5, 0.0, n - 1.0);
  const int x0 = static_cast<int>(fx), y0 = static_cast<int>(fy);
  const int x1 = std::min(x0 + 1, n - 1), y1 = std::min(y0 + 1, n - 1);
  const double ax = fx - x0, ay = fy - y0;
  return (1 - ax) * (1 - ay) * luminance(img, y0, x0) + ax * (1 - ay) * luminance(img, y0, x1) +
         (1 - ax) * ay * luminance(img, y1, x0) + ax * ay * luminance(img, y1, x1);
}

inline std::vector<double> sample_patch(const ViewImage& img, const BBox& b, int t) {
  std::vector<double> out(static_cast<std::size_t>(t) * t);
  for (int i = 0; i < t; ++i)
    for (int j = 0; j < t; ++j)
      out[static_cast<std::size_t>(i) * t + j] =
          bilinear_luma(img, b.x + (j + 0.5) * b.w / t, b.y + (i + 0.5) * b.h / t);
  return out;
}

// Zero-variance patches correlate as 0.
inline double ncc(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma, db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa <= 1e-12 || sbb <= 1e-12) return 0.0;
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

}  // namespace detail

inline TrackerState init_tracker(const ViewImage& view, const BBox& gt, const TrackerConfig& cfg = {}) {
  validate(cfg);
  if (gt.w < 2.0 || gt.h < 2.0) throw std::invalid_argument("init_tracker: degenerate ground truth box");
  return {cfg, detail::sample_patch(view, gt, cfg.template_size), gt, 1.0};
}

struct TraineeState {
  DetectorModel detector;
  std::optional<TrackerState> tracker;
  bool operator==(const TraineeState&) const = default;
};

// Returns the tracked box, or nullopt and clears the tracker when confidence
// drops below threshold.
inline std::optional<BBox> update_tracker_inplace(TraineeState& s, const ViewImage& view) {
  if (!s.tracker) return std::nullopt;
  auto& tr = *s.tracker;
  const int t = tr.config.template_size;
  const BBox last = tr.last_bbox;
  const int mx = static_cast<int>(std::ceil(tr.config.margin * last.w));
  const int my = static_cast<int>(std::ceil(tr.config.margin * last.h));
  const double n = view.size;

  double best = -2.0;
  BBox best_box = last;
  auto consider = [&](int dx, int dy) {
    const BBox cand{last.x + dx, last.y + dy, last.w, last.h};
    if (cand.x < 0.0 || cand.y < 0.0 || cand.x + cand.w > n || cand.y + cand.h > n) return;
    const double score = detail::ncc(tr.templ, detail::sample_patch(view, cand, t));
    if (score > best) {
      best = score;
      best_box = cand;
    }
  };
  consider(0, 0);
  for (int dy = -my; dy <= my; ++dy)
    for (int dx = -mx; dx <= mx; ++dx)
      if (dx != 0 || dy != 0) consider(dx, dy);

  const double confidence = std::max(0.0, best);
  if (confidence < tr.config.threshold) {
    s.tracker.reset();
    return std::nullopt;
  }
  tr.last_bbox = best_box;
  tr.last_confidence = confidence;
  return best_box;
}

inline std::pair<TraineeState, std::optional<BBox>> update_tracker(TraineeState s, const ViewImage& view) {
  auto box = update_tracker_inplace(s, view);
  return {std::move(s), box};
}

// ---------------------------------------------------------------------------
// Average precision

struct ScoredView {
  std::vector<Detection> detections;
  std::vector<BBox> truths;
};

// Single-class AP: detections pooled over views, sorted by confidence, each
// greedily matched to the best-overlapping ground truth of its view (true
// positive when IoU >= threshold and that truth is unmatched), then the area
// under the monotone precision envelope over all recall points.
inline double average_precision(std::span<const ScoredView> views, double iou_threshold = 0.5) {
  if (views.empty()) throw std::invalid_argument("average_precision: empty view list");
  struct Entry {
    double conf;
    std::size_t view;
    std::size_t rank;
  };
  std::vector<Entry> pool;
  std::size_t n_pos = 0;
  for (std::size_t v = 0; v < views.size(); ++v) {
    n_pos += views[v].truths.size();
    for (std::size_t r = 0; r < views[v].detections.size(); ++r)
      pool.push_back({views[v].detections[r].confidence, v, r});
  }
  if (n_pos == 0 || pool.empty()) return 0.0;
  std::stable_sort(pool.begin(), pool.end(), [](const Entry& a, const Entry& b) { return a.conf > b.conf; });

  std::vector<std::vector<bool>> used(views.size());
  for (std::size_t v = 0; v < views.size(); ++v) used[v].assign(views[v].truths.size(), false);

  std::vector<double> rec, prec;
  std::size_t tp = 0, fp = 0;
  for (const auto& e : pool) {
    const auto& det = views[e.view].detections[e.rank];
    const auto& truths = views[e.view].truths;
    double best = -1.0;
    std::size_t best_j = 0;
    for (std::size_t j = 0; j < truths.size(); ++j) {
      const double o = iou(det.bbox, truths[j]);
      if (o > best) {
        best = o;
        best_j = j;
      }
    }
    if (best >= iou_threshold && !used[e.view][best_j]) {
      used[e.view][best_j] = true;
      ++tp;
    } else {
      ++fp;
    }
    rec.push_back(static_cast<double>(tp) / static_cast<double>(n_pos));
    prec.push_back(static_cast<double>(tp) / static_cast<double>(tp + fp));
  }

  std::vector<double> mrec{0.0}, mpre{0.0};
  mrec.insert(mrec.end(), rec.begin(), rec.end());
  mpre.insert(mpre.end(), prec.begin(), prec.end());
  mrec.push_back(1.0);
  mpre.push_back(0.0);
  for (std::size_t i = mpre.size() - 1; i > 0; --i) mpre[i - 1] = std::max(mpre[i - 1], mpre[i]);
  double ap = 0.0;
  for (std::size_t i = 0; i + 1 < mrec.size(); ++i)
    if (mrec[i + 1] != mrec[i]) ap += (mrec[i + 1] - mrec[i]) * mpre[i + 1];
  return ap;
}

inline ScoredView score_view(const DetectorModel& m, const CellFeatures& f, const GroundTruth& gt) {
  ScoredView sv{detect(m, f), {}};
  if (gt.bbox) sv.truths.push_back(to_bbox(*gt.bbox));
  return sv;
}

inline double evaluate_ap(const DetectorModel& m, std::span<const LabeledView> views) {
  if (views.empty()) throw std::invalid_argument("evaluate_ap: empty view list");
  std::vector<ScoredView> scored;
  scored.reserve(views.size());
  for (const auto& v : views) scored.push_back(score_view(m, extract_features(v.image, m.config.grid_size), v.truth));
  return average_precision(scored);
}

}  // namespace curiosity
