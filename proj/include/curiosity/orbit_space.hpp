#pragma once

#include <cmath>
#include <utility>

#include "curiosity/common.hpp"

namespace curiosity {

// Parameters of the planar flight disk centered above the subject.
struct OrbitSpaceConfig {
  double d = 60.0;             // line-of-sight distance to the outer orbit, m
  double theta = 30.0;         // elevation angle, degrees
  double delta_alpha = 12.0;   // angular step, degrees
  int n_orbits = 6;
};

struct DerivedGeometry {
  double r_max = 0.0;
  double delta_r = 0.0;
  double height = 0.0;
  int n_angles = 0;
  int n_orbits = 0;
  double delta_alpha = 0.0;

  double radius(int k) const { return k * delta_r; }
  double angle_deg(int j) const { return j * delta_alpha; }
  int n_views() const { return n_angles * n_orbits; }
};

// Orbit index k is 1-based (1 = innermost, radius delta_r); angle index j
// counts delta_alpha steps counter-clockwise from +x.
struct GridPosition {
  int k = 1;
  int j = 0;
  auto operator<=>(const GridPosition&) const = default;
};

enum class Move { left, right, forward, backward };

struct CameraPose {
  Vec3 position;
  Vec3 look_at;
};

inline DerivedGeometry derive_geometry(const OrbitSpaceConfig& cfg) {
  if (!(cfg.d > 0.0)) throw ConfigError("orbit: d must be positive");
  if (!(cfg.theta > 0.0 && cfg.theta < 90.0))
    throw ConfigError("orbit: theta must lie in (0, 90) degrees");
  if (cfg.n_orbits < 1) throw ConfigError("orbit: n_orbits must be >= 1");
  if (!(cfg.delta_alpha > 0.0)) throw ConfigError("orbit: delta_alpha must be positive");
  const double steps = 360.0 / cfg.delta_alpha;
  const double rounded = std::round(steps);
  if (std::abs(steps - rounded) > 1e-9 || rounded < 1.0)
    throw ConfigError("orbit: delta_alpha must divide 360");

  DerivedGeometry g;
  const double th = deg_to_rad(cfg.theta);
  g.r_max = cfg.d * std::cos(th);
  g.height = cfg.d * std::sin(th);
  g.n_orbits = cfg.n_orbits;
  g.delta_r = g.r_max / cfg.n_orbits;
  g.n_angles = static_cast<int>(rounded);
  g.delta_alpha = cfg.delta_alpha;
  return g;
}

inline bool is_valid(GridPosition p, const DerivedGeometry& g) {
  return p.k >= 1 && p.k <= g.n_orbits && p.j >= 0 && p.j < g.n_angles;
}

// Left/right wrap around the orbit; forward/backward clamp at the innermost
// and outermost orbit.
inline GridPosition apply_move(GridPosition p, Move m, const DerivedGeometry& g) {
  switch (m) {
    case Move::left:
      p.j = (p.j + 1) % g.n_angles;
      break;
    case Move::right:
      p.j = (p.j + g.n_angles - 1) % g.n_angles;
      break;
    case Move::forward:
      if (p.k > 1) --p.k;
      break;
    case Move::backward:
      if (p.k < g.n_orbits) ++p.k;
      break;
  }
  return p;
}

inline CameraPose camera_pose(GridPosition p, const DerivedGeometry& g, const Vec3& aim_point) {
  const double r = g.radius(p.k);
  const double a = deg_to_rad(g.angle_deg(p.j));
  return {Vec3{r * std::cos(a), r * std::sin(a), g.height}, aim_point};
}

// (p0, p1) = (alpha / 360, r / r_max)
inline std::pair<double, double> normalized_position(GridPosition p, const DerivedGeometry& g) {
  return {g.angle_deg(p.j) / 360.0, static_cast<double>(p.k) / g.n_orbits};
}

// Row-major index over (orbit, angle), orbit 1 first.
inline int view_index(GridPosition p, const DerivedGeometry& g) {
  return (p.k - 1) * g.n_angles + p.j;
}

inline GridPosition position_of_view(int index, const DerivedGeometry& g) {
  return {index / g.n_angles + 1, index % g.n_angles};
}

inline double arc_length(int k, const DerivedGeometry& g) {
  return 2.0 * kPi * g.radius(k) * g.delta_alpha / 360.0;
}

}  // namespace curiosity
