#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "curiosity/common.hpp"
#include "curiosity/trace.hpp"

namespace curiosity {

namespace detail {

inline void check_range(const EpisodeTrace& t, std::size_t i, std::size_t j) {
  if (!(i < j && j < t.records.size())) throw std::out_of_range("metrics: record indices out of range");
}

}  // namespace detail

// (P_j - P_i) / sum of u over records i..j; none without interactions.
inline std::optional<double> itb_user(const EpisodeTrace& t, std::size_t i, std::size_t j) {
  detail::check_range(t, i, j);
  int interactions = 0;
  for (std::size_t x = i; x <= j; ++x) interactions += t.records[x].u_i;
  if (interactions == 0) return std::nullopt;
  return (t.records[j].ap - t.records[i].ap) / interactions;
}

inline double itb_time(const EpisodeTrace& t, std::size_t i, std::size_t j) {
  detail::check_range(t, i, j);
  const double dt = t.records[j].t_elapsed - t.records[i].t_elapsed;
  if (!(dt > 0.0)) throw std::invalid_argument("itb_time: zero elapsed interval");
  return (t.records[j].ap - t.records[i].ap) / dt;
}

// Index of the last record with t_elapsed <= limit (record 0 at least).
inline std::size_t last_index_within(const EpisodeTrace& t, double limit) {
  if (t.records.empty()) throw std::invalid_argument("metrics: empty trace");
  std::size_t idx = 0;
  for (std::size_t x = 0; x < t.records.size(); ++x)
    if (t.records[x].t_elapsed <= limit) idx = x;
  return idx;
}

struct BinnedCurve {
  int horizon = 0;
  std::vector<double> mean_ap;  // one entry per 1-second bin
};

inline BinnedCurve bin_performance(std::span<const EpisodeTrace> traces, int horizon) {
  if (traces.empty()) throw std::invalid_argument("bin_performance: empty trace set");
  if (horizon <= 0) throw std::invalid_argument("bin_performance: horizon must be positive");
  std::vector<double> sum(static_cast<std::size_t>(horizon), 0.0);
  std::vector<int> count(static_cast<std::size_t>(horizon), 0);
  double initial = 0.0;
  for (const auto& t : traces) {
    if (t.records.empty()) throw std::invalid_argument("bin_performance: empty trace");
    initial += t.records.front().ap;
    for (const auto& r : t.records) {
      const double b = std::floor(r.t_elapsed);
      if (b < 0.0 || b >= horizon) continue;
      sum[static_cast<std::size_t>(b)] += r.ap;
      ++count[static_cast<std::size_t>(b)];
    }
  }
  BinnedCurve c{horizon, std::vector<double>(static_cast<std::size_t>(horizon))};
  double carry = initial / static_cast<double>(traces.size());
  for (std::size_t b = 0; b < c.mean_ap.size(); ++b) {
    if (count[b] > 0) carry = sum[b] / count[b];
    c.mean_ap[b] = carry;
  }
  return c;
}

inline double curve_auc(const BinnedCurve& c) {
  double s = 0.0;
  for (double v : c.mean_ap) s += v;
  return s / static_cast<double>(c.mean_ap.size());
}

enum class ActionCategory { dont_move = 0, request_user = 1, motion = 2 };
inline constexpr std::array<const char*, 3> kCategoryNames{"DontMove", "RequestUser", "Motion"};

// Fractions over {DontMove, RequestUser, Motion}; the step-0 record is skipped.
inline std::array<double, 3> action_distribution(std::span<const EpisodeTrace> traces) {
  if (traces.empty()) throw std::invalid_argument("action_distribution: empty input");
  std::array<double, 3> counts{0, 0, 0};
  double total = 0.0;
  for (const auto& t : traces)
    for (const auto& r : t.records) {
      if (r.action_id < 0) continue;
      const int cat = r.action_id >= 2 ? 2 : r.action_id;
      counts[static_cast<std::size_t>(cat)] += 1.0;
      total += 1.0;
    }
  if (total == 0.0) throw std::invalid_argument("action_distribution: no actions");
  for (auto& c : counts) c /= total;
  return counts;
}

inline double interaction_fraction(std::span<const EpisodeTrace> traces) {
  return action_distribution(traces)[static_cast<std::size_t>(ActionCategory::request_user)];
}

struct WindowItb {
  std::optional<double> itb_time;
  std::optional<double> itb_user;
};

// Per-episode ITB over [0, window] seconds, averaged over the episodes where
// each ratio is defined.
inline WindowItb mean_itb(std::span<const EpisodeTrace> traces, double window) {
  double st = 0.0, su = 0.0;
  int nt = 0, nu = 0;
  for (const auto& t : traces) {
    const std::size_t j = last_index_within(t, window);
    if (j == 0) continue;
    if (t.records[j].t_elapsed > t.records[0].t_elapsed) {
      st += itb_time(t, 0, j);
      ++nt;
    }
    if (auto u = itb_user(t, 0, j)) {
      su += *u;
      ++nu;
    }
  }
  WindowItb w;
  if (nt > 0) w.itb_time = st / nt;
  if (nu > 0) w.itb_user = su / nu;
  return w;
}

namespace detail {

inline std::string csv_number(const std::optional<double>& v) {
  if (!v) return "";
  std::ostringstream os;
  os << std::setprecision(10) << *v;
  return os.str();
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os << text;
  if (!os) throw IoError("failed writing " + path.string());
}

}  // namespace detail

struct StrategyTraces {
  std::string name;
  std::vector<EpisodeTrace> traces;
};

struct ReportOptions {
  int horizon = 300;
  double short_window = 60.0;
};

// Writes itb_summary.csv, curve_<strategy>.csv and actions_<strategy>.csv.
inline void write_report(std::span<const StrategyTraces> strategies, const ReportOptions& opt,
                         const std::filesystem::path& out_dir) {
  if (strategies.empty()) throw std::invalid_argument("report: no strategies");
  std::filesystem::create_directories(out_dir);
  std::string summary = "strategy,window,itb_time,itb_user\n";
  for (const auto& s : strategies) {
    if (s.traces.empty()) throw std::invalid_argument("report: strategy " + s.name + " has no traces");
    const auto full = mean_itb(s.traces, std::numeric_limits<double>::infinity());
    const auto first = mean_itb(s.traces, opt.short_window);
    const std::string short_name = "first_" + detail::csv_number(opt.short_window) + "s";
    summary += s.name + ",full," + detail::csv_number(full.itb_time) + "," + detail::csv_number(full.itb_user) + "\n";
    summary += s.name + "," + short_name + "," + detail::csv_number(first.itb_time) + "," +
               detail::csv_number(first.itb_user) + "\n";

    const auto curve = bin_performance(s.traces, opt.horizon);
    std::string c = "bin_seconds,mean_ap\n";
    for (std::size_t b = 0; b < curve.mean_ap.size(); ++b)
      c += std::to_string(b) + "," + detail::csv_number(curve.mean_ap[b]) + "\n";
    detail::write_text(out_dir / ("curve_" + s.name + ".csv"), c);

    const auto dist = action_distribution(s.traces);
    std::string a = "category,fraction\n";
    for (std::size_t i = 0; i < dist.size(); ++i)
      a += std::string(kCategoryNames[i]) + "," + detail::csv_number(dist[i]) + "\n";
    detail::write_text(out_dir / ("actions_" + s.name + ".csv"), a);
  }
  detail::write_text(out_dir / "itb_summary.csv", summary);
}

}  // namespace curiosity
