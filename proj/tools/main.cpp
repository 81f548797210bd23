// Command-line front end: dataset generation, model training, evaluation
// protocols and reporting. All outputs land under --out with a manifest.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "hainav/harness/config.hpp"
#include "hainav/harness/dataset.hpp"
#include "hainav/harness/eval.hpp"
#include "hainav/harness/report.hpp"
#include "hainav/harness/trainer.hpp"
#include "hainav/nn/checkpoint.hpp"

namespace fs = std::filesystem;
using namespace hainav;

namespace {

struct GlobalArgs {
  uint64_t seed = 0;
  std::string out = "out";
  std::string profile = "desk";
  std::string config_file;
};

void update_manifest(const GlobalArgs& g, const std::string& command,
                     const nlohmann::json& config_echo,
                     const std::vector<std::string>& artifacts) {
  const fs::path path = fs::path(g.out) / "manifest.json";
  nlohmann::json manifest;
  if (fs::exists(path)) manifest = nlohmann::json::parse(harness::read_text_file(path.string()));
  nlohmann::json entry;
  entry["seed"] = g.seed;
  entry["profile"] = g.profile;
  entry["config"] = config_echo;
  nlohmann::json sums;
  for (const std::string& a : artifacts)
    if (fs::exists(a)) sums[a] = harness::file_checksum(a);
  entry["checksums"] = sums;
  manifest[command] = entry;
  harness::write_text_file(path.string(), manifest.dump(2));
}

planner::AgentConfig load_agent_config(const GlobalArgs& g, int room_width) {
  planner::AgentConfig cfg = harness::default_agent_config(room_width);
  if (g.profile == "desk") cfg.efe.mc_samples = 2;  // desk-scale planner sampling
  const fs::path calib = fs::path(g.out) / "calib.json";
  if (fs::exists(calib)) {
    const auto c = harness::calibration_from_json(harness::read_text_file(calib.string()));
    cfg.reset_threshold = c.reset_threshold;
    cfg.recog.newplace_mse = c.median_mse;
  }
  if (!g.config_file.empty())
    harness::apply_agent_config_json(harness::read_text_file(g.config_file), cfg);
  cfg.seed = g.seed;
  return cfg;
}

void write_agent_artifacts(planner::Agent& agent, const allo::AlloModel& allo_model,
                           const std::string& dir, int run_id) {
  harness::write_text_file(dir + "/graph_" + std::to_string(run_id) + ".txt",
                           agent.graph().export_text());
  {
    std::ofstream trace(dir + "/trace_" + std::to_string(run_id) + ".csv");
    trace << "step,n_hypotheses,new_place_prob,node_probs,resolved_node\n";
    for (const auto& row : agent.hypothesis_trace()) {
      trace << row.step << ',' << row.n_hypotheses << ',' << row.new_place_prob << ',';
      for (size_t i = 0; i < row.node_probs.size(); ++i) {
        if (i) trace << ';';
        trace << row.node_probs[i].first << ':' << row.node_probs[i].second;
      }
      trace << ',' << row.resolved_node << '\n';
    }
  }
  if (!agent.graph().empty()) {
    cogmap::AlloPlaceDecoder decoder(allo_model);
    const auto map = cogmap::stitch_map(agent.graph(), decoder,
                                        agent.raster_of(0) ? agent.raster_of(0)->radius : 6);
    if (!map.image.empty())
      sim::write_ppm(dir + "/stitched_" + std::to_string(run_id) + ".ppm", map.image, map.height,
                     map.width);
  }
}

std::vector<std::string> dataset_files(const GlobalArgs& g, const harness::Profile& profile,
                                       const std::string& kind) {
  std::vector<std::string> files;
  for (int w : profile.room_widths)
    files.push_back((fs::path(g.out) / "dataset" / (kind + "_w" + std::to_string(w) + ".bin"))
                        .string());
  return files;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hierarchical active-inference navigation in room mazes"};
  app.require_subcommand(1);

  GlobalArgs g;
  app.add_option("--seed", g.seed, "master seed");
  app.add_option("--out", g.out, "run directory");
  app.add_option("--profile", g.profile, "desk|paper")->check(CLI::IsMember({"desk", "paper"}));
  app.add_option("--config", g.config_file, "agent config JSON overrides");

  auto* gen = app.add_subcommand("gen-data", "collect training datasets");
  auto* tego = app.add_subcommand("train-ego", "train the egocentric world model");
  auto* tallo = app.add_subcommand("train-allo", "train the allocentric place model");
  auto* explore = app.add_subcommand("explore", "exploration protocol evaluation");
  auto* goal = app.add_subcommand("goal", "goal-reaching protocol evaluation");
  auto* report = app.add_subcommand("report", "aggregate metrics into tables and images");

  int train_steps = -1;
  tego->add_option("--steps", train_steps, "override training steps");
  int allo_steps = -1;
  tallo->add_option("--steps", allo_steps, "override training steps");

  int eval_runs = -1, eval_rows = 3, eval_cols = 3, eval_width = 4, eval_max_steps = 1500;
  for (auto* cmd : {explore, goal}) {
    cmd->add_option("--runs", eval_runs, "number of evaluation runs");
    cmd->add_option("--rows", eval_rows, "room rows");
    cmd->add_option("--cols", eval_cols, "room cols");
    cmd->add_option("--width", eval_width, "room width");
    cmd->add_option("--max-steps", eval_max_steps, "step budget per run");
  }
  bool no_random_baseline = false;
  explore->add_flag("--no-random-baseline", no_random_baseline,
                    "skip the uniform-random comparison runs");

  CLI11_PARSE(app, argc, argv);

  try {
    const harness::Profile profile = harness::profile_by_name(g.profile);
    fs::create_directories(g.out);

    if (*gen) {
      const fs::path dir = fs::path(g.out) / "dataset";
      fs::create_directories(dir);
      const auto paths = harness::collect_dataset(profile, g.seed, dir.string());
      std::vector<std::string> artifacts = paths.allo_files;
      artifacts.insert(artifacts.end(), paths.ego_files.begin(), paths.ego_files.end());
      nlohmann::json echo;
      echo["room_widths"] = profile.room_widths;
      echo["envs_per_width"] = profile.envs_per_width;
      echo["allo_sequences_per_width"] = profile.allo_sequences_per_width;
      echo["ego_sequences_per_width"] = profile.ego_sequences_per_width;
      update_manifest(g, "gen-data", echo, artifacts);
      std::printf("dataset written under %s\n", dir.string().c_str());
    }

    if (*tego) {
      ego::EgoModel model(ego::EgoConfig{}, mix_seed(g.seed, 0xE60));
      harness::TrainOptions opts;
      opts.steps = train_steps > 0 ? train_steps : profile.ego_train_steps;
      opts.batch = profile.ego_batch;
      opts.lr = profile.ego_lr;
      opts.seed = g.seed;
      opts.out_checkpoint = (fs::path(g.out) / "ego.ckpt").string();
      opts.curve_csv = (fs::path(g.out) / "ego_curve.csv").string();
      harness::train_ego_model(model, dataset_files(g, profile, "ego"), opts);
      nlohmann::json echo;
      echo["steps"] = opts.steps;
      echo["batch"] = opts.batch;
      echo["lr"] = opts.lr;
      update_manifest(g, "train-ego", echo, {opts.out_checkpoint, opts.curve_csv});
      std::printf("ego checkpoint at %s\n", opts.out_checkpoint.c_str());
    }

    if (*tallo) {
      allo::AlloModel model(allo::AlloConfig{}, mix_seed(g.seed, 0xA110));
      harness::TrainOptions opts;
      opts.steps = allo_steps > 0 ? allo_steps : profile.allo_train_steps;
      opts.batch = profile.allo_batch;
      opts.lr = profile.allo_lr;
      opts.seed = g.seed;
      opts.out_checkpoint = (fs::path(g.out) / "allo.ckpt").string();
      opts.curve_csv = (fs::path(g.out) / "allo_curve.csv").string();
      const auto calib = harness::train_allo_model(model, dataset_files(g, profile, "allo"),
                                                   opts, profile.val_fraction);
      const std::string calib_path = (fs::path(g.out) / "calib.json").string();
      harness::write_text_file(calib_path, harness::calibration_to_json(calib));

      // Unseen-pose generalization curve on fresh rooms.
      const auto curve =
          harness::eval_unseen_pose_mse(model, profile.room_widths.front(), 25, 10, mix_seed(g.seed, 5));
      const std::string mse_path = (fs::path(g.out) / "allo_val_mse.csv").string();
      std::ofstream mse(mse_path);
      mse << "observations,mean_unseen_pose_mse\n";
      for (size_t k = 0; k < curve.mean_mse.size(); ++k)
        mse << k << ',' << curve.mean_mse[k] << '\n';

      nlohmann::json echo;
      echo["steps"] = opts.steps;
      echo["batch"] = opts.batch;
      echo["lr"] = opts.lr;
      echo["calibration"] = nlohmann::json::parse(harness::calibration_to_json(calib));
      update_manifest(g, "train-allo", echo,
                      {opts.out_checkpoint, opts.curve_csv, calib_path, mse_path});
      std::printf("allo checkpoint at %s (reset threshold %.4f)\n", opts.out_checkpoint.c_str(),
                  calib.reset_threshold);
    }

    if (*explore || *goal) {
      ego::EgoModel ego_model(ego::EgoConfig{}, 0);
      nn::load_checkpoint((fs::path(g.out) / "ego.ckpt").string(), ego_model.params());
      allo::AlloModel allo_model(allo::AlloConfig{}, 0);
      nn::load_checkpoint((fs::path(g.out) / "allo.ckpt").string(), allo_model.params());
      planner::AgentConfig agent_cfg = load_agent_config(g, eval_width);

      harness::EvalOptions opts;
      opts.maze.rows = eval_rows;
      opts.maze.cols = eval_cols;
      opts.maze.room_width = eval_width;
      opts.runs = eval_runs > 0 ? eval_runs : profile.eval_runs;
      opts.max_steps = eval_max_steps;
      opts.seed = g.seed;

      if (*explore) {
        opts.out_dir = (fs::path(g.out) / "explore").string();
        fs::create_directories(opts.out_dir);
        const auto runs = harness::eval_exploration(ego_model, allo_model, agent_cfg, opts);
        int succ = 0;
        for (const auto& r : runs) succ += r.success ? 1 : 0;
        std::printf("exploration: %d/%d runs reached %.0f%% coverage\n", succ, opts.runs,
                    opts.coverage_target * 100);

        // Artifact pass: replay the first run and export its map products.
        planner::Agent agent(ego_model, allo_model, agent_cfg);
        harness::run_exploration_once(ego_model, allo_model, agent_cfg, opts.maze,
                                      mix_seed(opts.seed, 100), opts.max_steps,
                                      opts.coverage_target, &agent);
        write_agent_artifacts(agent, allo_model, opts.out_dir, 0);

        if (!no_random_baseline) {
          const std::string rdir = (fs::path(g.out) / "explore_random").string();
          std::vector<harness::RunRecord> rruns(opts.runs);
          for (int i = 0; i < opts.runs; ++i) {
            rruns[i] = harness::run_random_exploration(opts.maze, mix_seed(opts.seed, 100 + i),
                                                       opts.max_steps, opts.coverage_target);
            rruns[i].run_id = i;
          }
          harness::write_run_csvs(rruns, rdir, "explore");
        }
        nlohmann::json echo = nlohmann::json::parse(harness::agent_config_to_json(agent_cfg));
        echo["runs"] = opts.runs;
        echo["maze"] = {eval_rows, eval_cols, eval_width};
        update_manifest(g, "explore", echo, {opts.out_dir + "/summary.csv"});
      }

      if (*goal) {
        opts.out_dir = (fs::path(g.out) / "goal").string();
        fs::create_directories(opts.out_dir);
        const auto runs = harness::eval_goal(ego_model, allo_model, agent_cfg, opts);
        int succ = 0;
        double steps = 0;
        for (const auto& r : runs)
          if (r.success) {
            ++succ;
            steps += r.steps_to_goal;
          }
        std::printf("goal: %d/%d successful, mean steps %.1f\n", succ, opts.runs,
                    succ ? steps / succ : -1.0);
        nlohmann::json echo = nlohmann::json::parse(harness::agent_config_to_json(agent_cfg));
        echo["runs"] = opts.runs;
        echo["maze"] = {eval_rows, eval_cols, eval_width};
        update_manifest(g, "goal", echo, {opts.out_dir + "/summary.csv"});
      }
    }

    if (*report) {
      if (!harness::build_report(g.out)) {
        std::fprintf(stderr, "report: no metrics under %s\n", g.out.c_str());
        return 2;
      }
      update_manifest(g, "report", nlohmann::json::object(),
                      {(fs::path(g.out) / "report" / "coverage_curves.csv").string()});
      std::printf("report written under %s/report\n", g.out.c_str());
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
