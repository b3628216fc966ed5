#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "acceptance/criteria.hpp"
#include "curiosity/harness.hpp"

using namespace curiosity;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitAcceptance = 4;

NamedTraceDir parse_named_dir(const std::string& arg) {
  const auto eq = arg.find('=');
  if (eq == std::string::npos) {
    std::filesystem::path p(arg);
    return {p.filename().string(), p};
  }
  return {arg.substr(0, eq), arg.substr(eq + 1)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"curiosity agent simulator and experiment harness"};
  app.require_subcommand(1);

  std::string config_path, out_dir, policy = "random";
  int n_scenes = 0;
  double time_budget = 0.0;
  std::string time_from;

  auto* train = app.add_subcommand("train", "train a curiosity agent");
  train->add_option("-c,--config", config_path, "experiment config")->required();
  train->add_option("-o,--out", out_dir, "output directory")->required();

  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint or the random policy");
  eval->add_option("-c,--config", config_path, "experiment config")->required();
  eval->add_option("-o,--out", out_dir, "trace output directory")->required();
  eval->add_option("-p,--policy", policy, "checkpoint path or 'random'");
  eval->add_option("-n,--n-scenes", n_scenes, "override eval.n_scenes");
  eval->add_option("-t,--time-budget", time_budget, "override eval.time_budget (seconds)");
  eval->add_option("--time-from", time_from, "take the [time] section from another config (cross-evaluation)");

  std::vector<std::string> trace_dirs;
  int horizon = 300;
  double short_window = 60.0;
  auto* report = app.add_subcommand("report", "write ITB summary, curves and action distributions");
  report->add_option("-t,--traces", trace_dirs, "trace directories, as name=dir or dir")->required();
  report->add_option("-o,--out", out_dir, "report directory")->required();
  report->add_option("--horizon", horizon, "curve horizon in seconds");
  report->add_option("--short-window", short_window, "early ITB window in seconds");

  std::uint64_t scene_seed = 0;
  auto* render = app.add_subcommand("render-scene", "dump every view of a scene as PPM");
  render->add_option("-c,--config", config_path, "experiment config")->required();
  render->add_option("-s,--seed", scene_seed, "scene seed");
  render->add_option("-o,--out", out_dir, "output directory")->required();

  bool extended = false;
  std::string configs_dir = "configs", work_dir = "acceptance_work";
  auto* selftest = app.add_subcommand("selftest", "run the acceptance suite");
  selftest->add_flag("--extended", extended, "also train and compare mini agents (hours)");
  selftest->add_option("--configs", configs_dir, "directory with the mini_*.cfg presets");
  selftest->add_option("--work", work_dir, "scratch directory for the extended tier");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? EXIT_SUCCESS : kExitConfig;
  }

  try {
    if (*train) {
      const auto cfg = load_config(config_path);
      run_train(cfg, out_dir, [](const nn::EpisodeLog& l) {
        std::cout << "episode " << l.episode << " win " << l.win << " steps " << l.steps << " t " << l.t_elapsed
                  << " interactions " << l.interactions << " final_ap " << l.final_ap << " loss " << l.mean_loss
                  << " eps " << l.epsilon << std::endl;
      });
    } else if (*eval) {
      auto cfg = load_config(config_path);
      if (!time_from.empty()) {
        cfg.env.time = load_config(time_from).env.time;
        validate(cfg);
      }
      if (n_scenes > 0) cfg.eval.n_scenes = n_scenes;
      if (time_budget > 0.0) cfg.eval.time_budget = time_budget;
      validate(cfg);
      auto pol = load_policy(policy, cfg);
      run_eval(std::move(pol), cfg, out_dir, [](int i, const EpisodeTrace& t) {
        std::cout << "scene " << i << " steps " << t.records.size() - 1 << " final_ap " << t.records.back().ap
                  << std::endl;
      });
    } else if (*report) {
      std::vector<NamedTraceDir> inputs;
      for (const auto& d : trace_dirs) inputs.push_back(parse_named_dir(d));
      run_report(inputs, {horizon, short_window}, out_dir);
    } else if (*render) {
      const auto cfg = load_config(config_path);
      const auto g = derive_geometry(cfg.env.orbit);
      const auto scene = generate_scene(cfg.env.scene, g, scene_seed);
      std::filesystem::create_directories(out_dir);
      std::cout << dump_scene_views(scene, g, cfg.env.scene, out_dir) << " views written" << std::endl;
    } else if (*selftest) {
      namespace acc = acceptance;
      bool ok = true;
      for (const auto& r : acc::core()) {
        std::cout << acc::format(r) << std::endl;
        ok = ok && r.pass;
      }
      if (extended) {
        for (const auto& r : acc::extended(configs_dir, work_dir, [](const std::string& s) { std::cout << s << std::endl; })) {
          std::cout << acc::format(r) << std::endl;
          ok = ok && r.pass;
        }
      }
      return ok ? EXIT_SUCCESS : kExitAcceptance;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kExitIo;
  }
  return EXIT_SUCCESS;
}
