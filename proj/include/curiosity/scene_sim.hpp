#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "curiosity/common.hpp"
#include "curiosity/image.hpp"
#include "curiosity/orbit_space.hpp"

namespace curiosity {

enum class SubjectKind { cube, train, plane, ship, sphere, car, capsule };
enum class ObstructionKind { box, tall_box, flat_box, cylinder, tall_cylinder, sphere, hemisphere, l_shape };

inline constexpr int kSubjectKinds = 7;
inline constexpr int kObstructionKinds = 8;
inline constexpr int kConfusors = 2;

inline const char* to_string(SubjectKind k) {
  static constexpr std::array<const char*, kSubjectKinds> names{
      "cube", "train", "plane", "ship", "sphere", "car", "capsule"};
  return names[static_cast<std::size_t>(k)];
}

struct SceneConfig {
  int n_obs_min = 15;
  int n_obs_max = 25;
  double annulus_inner = 10.0;
  double annulus_outer = 35.0;
  double max_center_perturbation = 5.0;
  double fov = 37.2;  // degrees, square frustum
  int image_size = 84;
  double min_hue_distance = 1.0 / 6.0;
  double stretch_min = 0.5;
  double stretch_max = 2.0;
};

inline void validate(const SceneConfig& c, const DerivedGeometry& g) {
  if (c.n_obs_min < 0 || c.n_obs_max < c.n_obs_min)
    throw ConfigError("scene: invalid n_obs range");
  if (!(c.annulus_inner >= 0.0 && c.annulus_inner < c.annulus_outer && c.annulus_outer < g.r_max))
    throw ConfigError("scene: annulus must satisfy 0 <= inner < outer < r_max");
  if (c.max_center_perturbation < 0.0) throw ConfigError("scene: negative center perturbation");
  if (!(c.fov > 0.0 && c.fov < 180.0)) throw ConfigError("scene: fov must lie in (0, 180)");
  if (c.image_size < 8) throw ConfigError("scene: image_size must be >= 8");
  if (!(c.min_hue_distance >= 0.0 && c.min_hue_distance < 0.5))
    throw ConfigError("scene: min_hue_distance must lie in [0, 0.5)");
  if (!(c.stretch_min > 0.0 && c.stretch_min <= c.stretch_max))
    throw ConfigError("scene: invalid stretch range");
}

// Solid in an object's local frame (z up, ground at z = 0).
// box: half = half extents; sphere: half.x = radius;
// cylinder (vertical axis): half.x = radius, half.z = half height.
struct Primitive {
  enum class Shape { box, sphere, cylinder };
  Shape shape = Shape::box;
  Vec3 center;
  Vec3 half;
  bool operator==(const Primitive&) const = default;
};

struct SceneObject {
  std::variant<SubjectKind, ObstructionKind> kind;
  std::vector<Primitive> primitives;
  Vec3 position;  // on the ground plane
  double yaw = 0.0;  // degrees
  Vec3 scale{1.0, 1.0, 1.0};
  double hue = 0.0;
  bool operator==(const SceneObject&) const = default;

  // Radius of a vertical cylinder around `position` containing the object.
  double footprint_radius() const {
    double r = 0.0;
    for (const auto& p : primitives) {
      if (p.shape == Primitive::Shape::box) {
        for (double sx : {-1.0, 1.0})
          for (double sy : {-1.0, 1.0}) {
            const double x = (p.center.x + sx * p.half.x) * scale.x;
            const double y = (p.center.y + sy * p.half.y) * scale.y;
            r = std::max(r, std::hypot(x, y));
          }
      } else {
        const double c = std::hypot(p.center.x * scale.x, p.center.y * scale.y);
        r = std::max(r, c + p.half.x * std::max(scale.x, scale.y));
      }
    }
    return r;
  }

  double top_height() const {
    double h = 0.0;
    for (const auto& p : primitives) {
      const double extent = p.shape == Primitive::Shape::sphere ? p.half.x : p.half.z;
      h = std::max(h, (p.center.z + extent) * scale.z);
    }
    return h;
  }
};

struct Scene {
  SceneObject subject;
  std::vector<SceneObject> confusors;
  std::vector<SceneObject> obstructions;
  Vec3 aim_offset;
  std::uint64_t seed = 0;
  int n_obs_drawn = 0;  // obstructions drawn before overlap rejection

  Vec3 aim_point() const { return aim_offset; }

  // Subject first, then confusors, then obstructions. Ray-cast labels index this order.
  std::vector<const SceneObject*> objects() const {
    std::vector<const SceneObject*> out;
    out.reserve(1 + confusors.size() + obstructions.size());
    out.push_back(&subject);
    for (const auto& c : confusors) out.push_back(&c);
    for (const auto& o : obstructions) out.push_back(&o);
    return out;
  }
  bool operator==(const Scene&) const = default;
};

namespace detail {

inline Primitive box(Vec3 c, Vec3 h) { return {Primitive::Shape::box, c, h}; }
inline Primitive ball(Vec3 c, double r) { return {Primitive::Shape::sphere, c, {r, r, r}}; }
inline Primitive cyl(Vec3 c, double r, double hz) { return {Primitive::Shape::cylinder, c, {r, r, hz}}; }

inline std::vector<Primitive> subject_primitives(SubjectKind k) {
  switch (k) {
    case SubjectKind::cube:
      return {box({0, 0, 4}, {4, 4, 4})};
    case SubjectKind::train:
      return {box({-8, 0, 2.1}, {3.6, 1.6, 1.9}), box({0, 0, 2.1}, {3.6, 1.6, 1.9}),
              box({8, 0, 2.1}, {3.6, 1.6, 1.9})};
    case SubjectKind::plane:
      return {box({0, 0, 2.5}, {7, 1.2, 1.2}), box({0.5, 4.2, 2.5}, {1.6, 3.0, 0.3}),
              box({0.5, -4.2, 2.5}, {1.6, 3.0, 0.3}), box({-6, 0, 4.6}, {1.0, 0.25, 1.8})};
    case SubjectKind::ship:
      return {box({0, 0, 1.5}, {10, 2.5, 1.5}), box({-3, 0, 4.5}, {3, 2, 1.5})};
    case SubjectKind::sphere:
      return {ball({0, 0, 4.5}, 4.5)};
    case SubjectKind::car:
      return {box({0, 0, 1.6}, {5, 2.2, 1.1}), box({-0.5, 0, 3.6}, {2.5, 1.9, 0.9})};
    case SubjectKind::capsule:
      return {cyl({0, 0, 5.5}, 3.0, 2.5), ball({0, 0, 3.0}, 3.0), ball({0, 0, 8.0}, 3.0)};
  }
  return {};
}

inline std::vector<Primitive> obstruction_primitives(ObstructionKind k) {
  switch (k) {
    case ObstructionKind::box:
      return {box({0, 0, 2.5}, {2.5, 2.5, 2.5})};
    case ObstructionKind::tall_box:
      return {box({0, 0, 6}, {2, 2, 6})};
    case ObstructionKind::flat_box:
      return {box({0, 0, 1}, {5, 4, 1})};
    case ObstructionKind::cylinder:
      return {cyl({0, 0, 2.5}, 2.5, 2.5)};
    case ObstructionKind::tall_cylinder:
      return {cyl({0, 0, 6}, 1.5, 6)};
    case ObstructionKind::sphere:
      return {ball({0, 0, 3}, 3)};
    case ObstructionKind::hemisphere:
      return {ball({0, 0, 0}, 4)};  // lower half is below the ground plane
    case ObstructionKind::l_shape:
      return {box({0, 0, 2}, {4, 1.5, 2}), box({-2.5, 3, 2}, {1.5, 3, 2})};
  }
  return {};
}

inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

inline int uniform_int(std::mt19937_64& rng, int lo, int hi) {
  const auto span = static_cast<std::uint64_t>(hi - lo + 1);
  return lo + static_cast<int>(rng() % span);
}

inline double hue_distance(double a, double b) {
  const double d = std::abs(a - b);
  return std::min(d, 1.0 - d);
}

}  // namespace detail

// Procedurally generates a scene; identical (config, geometry, seed) gives an identical scene.
inline Scene generate_scene(const SceneConfig& cfg, const DerivedGeometry& geom, std::uint64_t seed) {
  validate(cfg, geom);
  using namespace detail;
  std::mt19937_64 rng(mix_seed(seed, 0x5CE4E));
  Scene s;
  s.seed = seed;

  const auto kind = static_cast<SubjectKind>(uniform_int(rng, 0, kSubjectKinds - 1));
  s.subject.kind = kind;
  s.subject.primitives = subject_primitives(kind);
  s.subject.yaw = uniform(rng, 0.0, 360.0);
  s.subject.hue = uniform01(rng);

  {
    const double r = cfg.max_center_perturbation * std::sqrt(uniform01(rng));
    const double a = uniform(rng, 0.0, 2.0 * kPi);
    s.aim_offset = {r * std::cos(a), r * std::sin(a), 0.0};
  }

  const double subject_radius = s.subject.footprint_radius();
  const double max_top = 0.95 * geom.height;

  auto place = [&](SceneObject& o) {
    const double r = std::sqrt(uniform(rng, cfg.annulus_inner * cfg.annulus_inner,
                                       cfg.annulus_outer * cfg.annulus_outer));
    const double a = uniform(rng, 0.0, 2.0 * kPi);
    o.position = {r * std::cos(a), r * std::sin(a), 0.0};
    o.yaw = uniform(rng, 0.0, 360.0);
    o.scale = {uniform(rng, cfg.stretch_min, cfg.stretch_max),
               uniform(rng, cfg.stretch_min, cfg.stretch_max),
               uniform(rng, cfg.stretch_min, cfg.stretch_max)};
    const double top = o.top_height();
    if (top > max_top) o.scale.z *= max_top / top;
  };
  auto overlaps_subject = [&](const SceneObject& o) {
    return std::hypot(o.position.x, o.position.y) < subject_radius + o.footprint_radius();
  };

  for (int c = 0; c < kConfusors; ++c) {
    SceneObject conf;
    conf.kind = kind;
    conf.primitives = s.subject.primitives;
    bool placed = false;
    for (int attempt = 0; attempt < 256 && !placed; ++attempt) {
      place(conf);
      placed = !overlaps_subject(conf);
    }
    if (!placed) {
      // Shrunk confusor on the outer edge of the annulus always clears the subject.
      const double a = uniform(rng, 0.0, 2.0 * kPi);
      conf.position = {cfg.annulus_outer * std::cos(a), cfg.annulus_outer * std::sin(a), 0.0};
      conf.scale = {cfg.stretch_min, cfg.stretch_min, cfg.stretch_min};
      if (overlaps_subject(conf))
        throw ConfigError("scene: annulus too small to place confusors clear of the subject");
    }
    do {
      conf.hue = uniform01(rng);
    } while (hue_distance(conf.hue, s.subject.hue) < cfg.min_hue_distance);
    s.confusors.push_back(std::move(conf));
  }

  s.n_obs_drawn = uniform_int(rng, cfg.n_obs_min, cfg.n_obs_max);
  for (int i = 0; i < s.n_obs_drawn; ++i) {
    SceneObject o;
    const auto ok = static_cast<ObstructionKind>(uniform_int(rng, 0, kObstructionKinds - 1));
    o.kind = ok;
    o.primitives = obstruction_primitives(ok);
    place(o);
    o.hue = uniform01(rng);
    if (overlaps_subject(o)) continue;  // dropped, not re-placed
    s.obstructions.push_back(std::move(o));
  }
  return s;
}

// ---------------------------------------------------------------------------
// Ray casting

namespace detail {

struct Ray {
  Vec3 origin;
  Vec3 dir;
};

struct Hit {
  double t = std::numeric_limits<double>::infinity();
  Vec3 normal;
};

inline constexpr double kEps = 1e-9;

inline void hit_sphere(const Ray& r, const Vec3& c, double rad, Hit& best) {
  const Vec3 oc = r.origin - c;
  const double a = r.dir.dot(r.dir);
  const double b = oc.dot(r.dir);
  const double cc = oc.dot(oc) - rad * rad;
  const double disc = b * b - a * cc;
  if (disc < 0.0) return;
  const double sq = std::sqrt(disc);
  for (double t : {(-b - sq) / a, (-b + sq) / a}) {
    if (t > kEps && t < best.t) {
      best.t = t;
      best.normal = (r.origin + r.dir * t - c) * (1.0 / rad);
      return;
    }
  }
}

inline void hit_box(const Ray& r, const Vec3& c, const Vec3& h, Hit& best) {
  double tmin = -std::numeric_limits<double>::infinity();
  double tmax = std::numeric_limits<double>::infinity();
  int axis_in = -1;
  double sign_in = 0.0;
  const std::array<double, 3> o{r.origin.x - c.x, r.origin.y - c.y, r.origin.z - c.z};
  const std::array<double, 3> d{r.dir.x, r.dir.y, r.dir.z};
  const std::array<double, 3> he{h.x, h.y, h.z};
  for (int i = 0; i < 3; ++i) {
    if (std::abs(d[i]) < 1e-300) {
      if (o[i] < -he[i] || o[i] > he[i]) return;
      continue;
    }
    double t1 = (-he[i] - o[i]) / d[i];
    double t2 = (he[i] - o[i]) / d[i];
    double s = -1.0;
    if (t1 > t2) {
      std::swap(t1, t2);
      s = 1.0;
    }
    if (t1 > tmin) {
      tmin = t1;
      axis_in = i;
      sign_in = s;
    }
    tmax = std::min(tmax, t2);
    if (tmin > tmax) return;
  }
  if (tmin > kEps && tmin < best.t && axis_in >= 0) {
    best.t = tmin;
    best.normal = {axis_in == 0 ? sign_in : 0.0, axis_in == 1 ? sign_in : 0.0,
                   axis_in == 2 ? sign_in : 0.0};
  }
}

inline void hit_cylinder(const Ray& r, const Vec3& c, double rad, double hz, Hit& best) {
  const Vec3 o = r.origin - c;
  const Vec3& d = r.dir;
  const double a = d.x * d.x + d.y * d.y;
  if (a > 1e-300) {
    const double b = o.x * d.x + o.y * d.y;
    const double cc = o.x * o.x + o.y * o.y - rad * rad;
    const double disc = b * b - a * cc;
    if (disc >= 0.0) {
      const double sq = std::sqrt(disc);
      for (double t : {(-b - sq) / a, (-b + sq) / a}) {
        const double z = o.z + t * d.z;
        if (t > kEps && t < best.t && std::abs(z) <= hz) {
          best.t = t;
          best.normal = Vec3{o.x + t * d.x, o.y + t * d.y, 0.0} * (1.0 / rad);
          break;
        }
      }
    }
  }
  if (std::abs(d.z) > 1e-300) {
    for (double cap : {hz, -hz}) {
      const double t = (cap - o.z) / d.z;
      const double x = o.x + t * d.x;
      const double y = o.y + t * d.y;
      if (t > kEps && t < best.t && x * x + y * y <= rad * rad) {
        best.t = t;
        best.normal = {0.0, 0.0, cap > 0 ? 1.0 : -1.0};
      }
    }
  }
}

// World-space ray against one object; returns true and updates `best` (normal in
// world frame) when the object is nearer.
inline bool hit_object(const SceneObject& obj, const Ray& world, Hit& best) {
  // Bounding sphere rejection.
  const double fr = obj.footprint_radius();
  const double top = obj.top_height();
  const Vec3 bc{obj.position.x, obj.position.y, top * 0.5};
  const double br = std::sqrt(fr * fr + 0.25 * top * top) + 1e-6;
  {
    const Vec3 oc = world.origin - bc;
    const double a = world.dir.dot(world.dir);
    const double b = oc.dot(world.dir);
    const double cc = oc.dot(oc) - br * br;
    if (b * b - a * cc < 0.0) return false;
  }
  const double yaw = deg_to_rad(obj.yaw);
  const double cy = std::cos(yaw), sy = std::sin(yaw);
  auto to_local = [&](const Vec3& v) {  // rotate by -yaw, then unscale
    return Vec3{(cy * v.x + sy * v.y) / obj.scale.x, (-sy * v.x + cy * v.y) / obj.scale.y,
                v.z / obj.scale.z};
  };
  const Ray local{to_local(world.origin - obj.position), to_local(world.dir)};
  Hit h;
  h.t = best.t;
  for (const auto& p : obj.primitives) {
    switch (p.shape) {
      case Primitive::Shape::box:
        hit_box(local, p.center, p.half, h);
        break;
      case Primitive::Shape::sphere:
        hit_sphere(local, p.center, p.half.x, h);
        break;
      case Primitive::Shape::cylinder:
        hit_cylinder(local, p.center, p.half.x, p.half.z, h);
        break;
    }
  }
  if (!(h.t < best.t)) return false;
  const Vec3 n{h.normal.x / obj.scale.x, h.normal.y / obj.scale.y, h.normal.z / obj.scale.z};
  best.t = h.t;
  best.normal = Vec3{cy * n.x - sy * n.y, sy * n.x + cy * n.y, n.z}.normalized();
  return true;
}

inline std::array<double, 3> hsv_to_rgb(double h, double s, double v) {
  const double hh = (h - std::floor(h)) * 6.0;
  const int i = static_cast<int>(hh) % 6;
  const double f = hh - std::floor(hh);
  const double p = v * (1 - s), q = v * (1 - s * f), t = v * (1 - s * (1 - f));
  switch (i) {
    case 0: return {v, t, p};
    case 1: return {q, v, p};
    case 2: return {p, v, t};
    case 3: return {p, q, v};
    case 4: return {t, p, v};
    default: return {v, p, q};
  }
}

inline constexpr double kSaturation = 0.8;
inline constexpr double kValue = 0.9;
inline constexpr double kAmbient = 0.35;
inline constexpr double kDiffuse = 0.65;
inline constexpr std::array<std::uint8_t, 3> kGroundColor{96, 112, 80};
inline constexpr std::array<std::uint8_t, 3> kSkyColor{150, 190, 230};

inline Vec3 light_direction() {
  const double az = deg_to_rad(40.0), el = deg_to_rad(55.0);
  return {std::cos(el) * std::cos(az), std::cos(el) * std::sin(az), std::sin(el)};
}

inline std::uint8_t to_byte(double v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

}  // namespace detail

// Per-pixel label of the nearest hit: -1 for ground/sky, otherwise an index
// into Scene::objects().
struct RenderBuffers {
  ViewImage image;
  std::vector<int> labels;
};

struct PinholeCamera {
  Vec3 origin, forward, right, up;
  double tan_half = 0.0;
  int size = 0;

  PinholeCamera(const CameraPose& pose, double fov_deg, int image_size)
      : origin(pose.position), tan_half(std::tan(deg_to_rad(fov_deg) * 0.5)), size(image_size) {
    forward = (pose.look_at - pose.position).normalized();
    right = forward.cross(Vec3{0, 0, 1}).normalized();
    up = right.cross(forward);
  }

  Vec3 ray_dir(int row, int col) const {
    const double u = (2.0 * (col + 0.5) / size - 1.0) * tan_half;
    const double v = (1.0 - 2.0 * (row + 0.5) / size) * tan_half;
    return forward + right * u + up * v;
  }

  // Continuous pixel coordinates (col, row) of a world point in front of the camera.
  std::optional<std::pair<double, double>> project(const Vec3& p) const {
    const Vec3 d = p - origin;
    const double z = d.dot(forward);
    if (z <= 0.0) return std::nullopt;
    const double u = d.dot(right) / z / tan_half;
    const double v = d.dot(up) / z / tan_half;
    return std::pair{(u + 1.0) * 0.5 * size, (1.0 - v) * 0.5 * size};
  }
};

// `only_subject` renders the subject alone over the ground (used for
// visibility accounting).
inline RenderBuffers ray_cast(const Scene& scene, const CameraPose& pose, const SceneConfig& cfg,
                              bool only_subject = false) {
  if (!(pose.position.z > 0.0)) throw std::invalid_argument("render: camera must be above ground");
  using namespace detail;
  const int n = cfg.image_size;
  const PinholeCamera cam(pose, cfg.fov, n);
  const auto objs = scene.objects();
  const std::size_t n_objs = only_subject ? 1 : objs.size();
  const Vec3 light = light_direction();

  std::vector<std::array<double, 3>> base(objs.size());
  for (std::size_t i = 0; i < objs.size(); ++i) base[i] = hsv_to_rgb(objs[i]->hue, kSaturation, kValue);

  RenderBuffers out{ViewImage(n), std::vector<int>(static_cast<std::size_t>(n) * n, -1)};
  for (int row = 0; row < n; ++row) {
    for (int col = 0; col < n; ++col) {
      const Ray ray{cam.origin, cam.ray_dir(row, col)};
      Hit best;
      if (ray.dir.z < 0.0) best.t = -ray.origin.z / ray.dir.z;
      int label = -1;
      for (std::size_t i = 0; i < n_objs; ++i)
        if (hit_object(*objs[i], ray, best)) label = static_cast<int>(i);
      out.labels[static_cast<std::size_t>(row) * n + col] = label;
      if (label >= 0) {
        const double shade = kAmbient + kDiffuse * std::max(0.0, best.normal.dot(light));
        for (int c = 0; c < 3; ++c) out.image.at(row, col, c) = to_byte(base[label][c] * shade);
      } else {
        const auto& bg = std::isfinite(best.t) ? kGroundColor : kSkyColor;
        for (int c = 0; c < 3; ++c) out.image.at(row, col, c) = bg[c];
      }
    }
  }
  return out;
}

inline ViewImage render_view(const Scene& scene, const CameraPose& pose, const SceneConfig& cfg) {
  return ray_cast(scene, pose, cfg).image;
}

// Integer pixel box: columns [x, x + w), rows [y, y + h).
struct PixelBox {
  int x = 0, y = 0, w = 0, h = 0;
  bool operator==(const PixelBox&) const = default;
};

struct GroundTruth {
  std::optional<PixelBox> bbox;
  double visible_fraction = 0.0;
  bool operator==(const GroundTruth&) const = default;
};

namespace detail {

inline std::pair<std::optional<PixelBox>, int> label_box(const std::vector<int>& labels, int n, int target) {
  int x0 = n, y0 = n, x1 = -1, y1 = -1, count = 0;
  for (int row = 0; row < n; ++row)
    for (int col = 0; col < n; ++col)
      if (labels[static_cast<std::size_t>(row) * n + col] == target) {
        ++count;
        x0 = std::min(x0, col);
        x1 = std::max(x1, col);
        y0 = std::min(y0, row);
        y1 = std::max(y1, row);
      }
  if (count == 0) return {std::nullopt, 0};
  return {PixelBox{x0, y0, x1 - x0 + 1, y1 - y0 + 1}, count};
}

inline GroundTruth ground_truth_from(const RenderBuffers& full, const RenderBuffers& alone, int n) {
  const auto [box, visible] = label_box(full.labels, n, 0);
  const auto [unused, unoccluded] = label_box(alone.labels, n, 0);
  GroundTruth gt;
  gt.bbox = box;
  gt.visible_fraction = unoccluded > 0 ? static_cast<double>(visible) / unoccluded : 0.0;
  return gt;
}

}  // namespace detail

// Tight box around the subject's visible pixels; absent when none are visible.
inline GroundTruth ground_truth_bbox(const Scene& scene, const CameraPose& pose, const SceneConfig& cfg) {
  const auto full = ray_cast(scene, pose, cfg);
  const auto alone = ray_cast(scene, pose, cfg, true);
  return detail::ground_truth_from(full, alone, cfg.image_size);
}

struct LabeledView {
  ViewImage image;
  GroundTruth truth;
};

inline LabeledView render_labeled(const Scene& scene, const CameraPose& pose, const SceneConfig& cfg) {
  auto full = ray_cast(scene, pose, cfg);
  const auto alone = ray_cast(scene, pose, cfg, true);
  auto gt = detail::ground_truth_from(full, alone, cfg.image_size);
  return {std::move(full.image), gt};
}

inline std::string debug_image_name(std::uint64_t seed, GridPosition p) {
  return "scene" + std::to_string(seed) + "_k" + std::to_string(p.k) + "_j" + std::to_string(p.j) + ".ppm";
}

// Writes one PPM per grid point of the exploration space; returns the file count.
inline int dump_scene_views(const Scene& scene, const DerivedGeometry& geom, const SceneConfig& cfg,
                            const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  int count = 0;
  for (int v = 0; v < geom.n_views(); ++v) {
    const auto p = position_of_view(v, geom);
    write_ppm(dir / debug_image_name(scene.seed, p),
              render_view(scene, camera_pose(p, geom, scene.aim_point()), cfg));
    ++count;
  }
  return count;
}

}  // namespace curiosity
