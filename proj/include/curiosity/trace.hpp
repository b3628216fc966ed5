#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "curiosity/common.hpp"
#include "curiosity/episode_env.hpp"

namespace curiosity {

// One JSON Lines record per action-step; step 0 (action_id -1) carries the
// fresh trainee's AP.
struct StepRecord {
  int episode_id = 0;
  int step = 0;
  int action_id = -1;
  double t_i = 0.0;
  double t_elapsed = 0.0;
  int u_i = 0;
  double ap = 0.0;
  double r_total = 0.0;
  double r_learn = 0.0;
  double r_behave = 0.0;
  double r_time = 0.0;
  int k = 0;
  int j = 0;
  bool win = false;
  bool done = false;

  bool operator==(const StepRecord&) const = default;
};

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(StepRecord, episode_id, step, action_id, t_i, t_elapsed, u_i, ap, r_total,
                                   r_learn, r_behave, r_time, k, j, win, done)

struct EpisodeTrace {
  std::vector<StepRecord> records;
};

inline StepRecord initial_record(int episode_id, const CuriosityEnv& env) {
  StepRecord r;
  r.episode_id = episode_id;
  r.ap = env.initial_ap();
  r.k = env.position().k;
  r.j = env.position().j;
  return r;
}

inline StepRecord make_record(int episode_id, const StepOutcome& o) {
  StepRecord r;
  r.episode_id = episode_id;
  r.step = o.step;
  r.action_id = static_cast<int>(o.action);
  r.t_i = o.t_i;
  r.t_elapsed = o.t_elapsed;
  r.u_i = o.user_interaction;
  r.ap = o.ap;
  r.r_total = o.rewards.r_total;
  r.r_learn = o.rewards.r_learn;
  r.r_behave = o.rewards.r_behave;
  r.r_time = o.rewards.r_time;
  r.k = o.position.k;
  r.j = o.position.j;
  r.win = o.win;
  r.done = o.done;
  return r;
}

inline std::string to_jsonl(const EpisodeTrace& trace) {
  std::string out;
  for (const auto& r : trace.records) {
    out += nlohmann::json(r).dump();
    out += '\n';
  }
  return out;
}

inline void write_trace(const std::filesystem::path& path, const EpisodeTrace& trace) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os << to_jsonl(trace);
  if (!os) throw IoError("failed writing " + path.string());
}

inline EpisodeTrace read_trace(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  EpisodeTrace trace;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      trace.records.push_back(nlohmann::json::parse(line).get<StepRecord>());
    } catch (const nlohmann::json::exception& e) {
      throw IoError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return trace;
}

// Trace files in a directory, sorted by file name.
inline std::vector<EpisodeTrace> read_trace_dir(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw IoError("not a directory: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".jsonl") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::vector<EpisodeTrace> traces;
  for (const auto& f : files) traces.push_back(read_trace(f));
  return traces;
}

}  // namespace curiosity
