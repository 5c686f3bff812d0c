// wdlt command-line tool: synthetic scene generation, weighted-DLT pose
// solving, LM refinement, weight fitting, photometric adaptation, and batch
// evaluation. Every subcommand is a thin shell over the library; all file
// formats are documented in the README.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "wdlt/adapt.hpp"
#include "wdlt/config.hpp"
#include "wdlt/dlt.hpp"
#include "wdlt/errors.hpp"
#include "wdlt/io.hpp"
#include "wdlt/lm_refine.hpp"
#include "wdlt/losses.hpp"
#include "wdlt/metrics.hpp"
#include "wdlt/simulator.hpp"
#include "wdlt/weight_fit.hpp"

namespace fs = std::filesystem;

namespace {

wdlt::KeyValueConfig load_kv(const std::string& path) {
  return path.empty() ? wdlt::KeyValueConfig{}
                      : wdlt::KeyValueConfig::from_file(path);
}

void reject_unused(const wdlt::KeyValueConfig& kv) {
  const auto unused = kv.unused_keys();
  if (unused.empty()) return;
  std::string msg = "unknown config keys:";
  for (const auto& k : unused) msg += " " + k;
  throw wdlt::Error(msg);
}

std::string indexed_name(const std::string& dir, const char* stem, int index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s_%03d.json", stem, index);
  return (fs::path(dir) / buf).string();
}

// A per-frame scene file: shared points, that frame's pose and observations.
wdlt::SyntheticScene frame_scene(const wdlt::SceneSequence& seq, int k) {
  wdlt::SyntheticScene s = seq.scene;
  s.gt_pose = seq.poses[k];
  s.pixel_obs = seq.pixel_obs[k];
  return s;
}

std::vector<std::string> collect_json_files(const std::string& path) {
  if (!fs::exists(path)) throw wdlt::Error("no such file or directory: " + path);
  std::vector<std::string> files;
  if (fs::is_directory(path)) {
    for (const auto& e : fs::directory_iterator(path))
      if (e.is_regular_file() && e.path().extension() == ".json")
        files.push_back(e.path().string());
    std::sort(files.begin(), files.end());
    if (files.empty()) throw wdlt::Error("no .json files in " + path);
  } else {
    files.push_back(path);
  }
  return files;
}

struct SimulateArgs {
  int n = 100;
  double outliers = 0.0;
  double pixel_noise = 0.0;
  double coord_noise = 0.0;
  std::uint64_t seed = 0;
  std::string out;
  int frames = 0;
  double baseline = 0.025;
  std::string frames_dir;
  int pairs = 0;
  std::string pairs_dir;
  int interval = 1;
};

void run_simulate(const SimulateArgs& a) {
  wdlt::SceneParams sp;
  sp.n_points = a.n;
  sp.outlier_fraction = a.outliers;
  sp.pixel_noise_sigma = a.pixel_noise;
  sp.coord_noise_sigma = a.coord_noise;
  sp.seed = a.seed;

  if (a.pairs > 0) {
    if (a.pairs_dir.empty())
      throw wdlt::Error("--pairs requires --pairs-dir");
    wdlt::AdaptScenarioParams ap;
    ap.scene = sp;
    ap.n_pairs = a.pairs;
    ap.frame_baseline_m = a.baseline;
    ap.pair.seed = a.seed;
    const int used = a.pairs + a.interval;
    ap.n_heldout = a.frames > 0 ? a.frames - used : 0;
    if (ap.n_heldout < 0)
      throw wdlt::Error("--frames must be at least pairs + interval = " +
                        std::to_string(used));
    const wdlt::AdaptScenario sc = wdlt::make_adapt_scenario(ap, a.interval);
    wdlt::write_scene(a.out, sc.seq.scene);
    fs::create_directories(a.pairs_dir);
    for (size_t k = 0; k < sc.frames.size(); ++k)
      wdlt::write_adapt_frame(indexed_name(a.pairs_dir, "pair", static_cast<int>(k)),
                              sc.frames[k]);
    if (!a.frames_dir.empty()) {
      fs::create_directories(a.frames_dir);
      for (size_t k = 0; k < sc.seq.poses.size(); ++k)
        wdlt::write_scene(indexed_name(a.frames_dir, "frame", static_cast<int>(k)),
                          frame_scene(sc.seq, static_cast<int>(k)));
    }
    return;
  }

  if (a.frames > 0) {
    if (a.frames_dir.empty())
      throw wdlt::Error("--frames requires --frames-dir (or --pairs)");
    const wdlt::SceneSequence seq =
        wdlt::generate_sequence(sp, a.frames, a.baseline);
    wdlt::write_scene(a.out, seq.scene);
    fs::create_directories(a.frames_dir);
    for (size_t k = 0; k < seq.poses.size(); ++k)
      wdlt::write_scene(indexed_name(a.frames_dir, "frame", static_cast<int>(k)),
                        frame_scene(seq, static_cast<int>(k)));
    return;
  }

  wdlt::write_scene(a.out, wdlt::generate_scene(sp));
}

struct SolveArgs {
  std::string scene;
  std::string theta;
  std::string out;
  bool ransac = false;
  int iterations = 256;
  double threshold = 10.0;
  std::uint64_t seed = 0;
};

void run_solve(const SolveArgs& a) {
  const wdlt::SyntheticScene scene = wdlt::read_scene(a.scene);
  wdlt::Pose pose;
  if (a.ransac) {
    pose = wdlt::ransac_dlt(scene.predicted_coords, scene.pixel_obs,
                            scene.intrinsics, a.iterations, a.threshold, a.seed);
  } else {
    Eigen::VectorXd w = Eigen::VectorXd::Ones(scene.size());
    if (!a.theta.empty()) {
      const Eigen::VectorXd theta = wdlt::read_theta(a.theta);
      if (theta.size() != scene.size())
        throw wdlt::Error("theta length " + std::to_string(theta.size()) +
                          " does not match scene size " +
                          std::to_string(scene.size()));
      w = wdlt::weight_activation(theta);
    }
    pose = wdlt::wdlt_solve(scene.predicted_coords, scene.pixel_obs, w,
                            scene.intrinsics);
  }
  wdlt::write_pose(a.out, pose);
}

struct RefineArgs {
  std::string scene;
  std::string init;
  std::string config;
  std::string out;
};

void run_refine(const RefineArgs& a) {
  const wdlt::KeyValueConfig kv = load_kv(a.config);
  const wdlt::RefineConfig cfg = wdlt::load_refine_config(kv);
  reject_unused(kv);
  const wdlt::SyntheticScene scene = wdlt::read_scene(a.scene);
  const wdlt::Pose init =
      a.init.empty()
          ? wdlt::wdlt_solve(scene.predicted_coords, scene.pixel_obs,
                             Eigen::VectorXd::Ones(scene.size()), scene.intrinsics)
          : wdlt::read_pose(a.init);
  const wdlt::RefineResult res = wdlt::lm_refine(
      init, scene.predicted_coords, scene.pixel_obs, scene.intrinsics, cfg);
  wdlt::write_pose(a.out, res.pose);
  const char* status = res.status == wdlt::RefineStatus::converged
                           ? "converged"
                           : res.status == wdlt::RefineStatus::max_iterations
                                 ? "max-iterations"
                                 : "stalled";
  std::cerr << "refine: " << res.outer_iterations << " outer iterations, "
            << res.final_inliers.size() << " inliers, " << status << "\n";
}

struct FitArgs {
  std::string scene;
  std::string mode = "cls+reg";
  int iters = 2000;
  std::uint64_t seed = 0;
  std::string config;
  std::string out;
  std::string csv;
  std::string theta_out;
  bool e2e = false;
  int e2e_iters = 500;
};

void run_fit(const FitArgs& a) {
  const wdlt::KeyValueConfig kv = load_kv(a.config);
  const wdlt::LossConfig cfg = wdlt::load_loss_config(kv);
  const wdlt::OptSettings opt = wdlt::load_opt_settings(kv);
  reject_unused(kv);
  wdlt::FitMode mode;
  if (a.mode == "cls+reg")
    mode = wdlt::FitMode::classification_regression;
  else if (a.mode == "reg")
    mode = wdlt::FitMode::regression_only;
  else
    throw wdlt::Error("unknown --mode `" + a.mode + "` (use cls+reg or reg)");

  const wdlt::SyntheticScene scene = wdlt::read_scene(a.scene);
  wdlt::FitReport report =
      wdlt::fit_weights(scene, cfg, opt, mode, a.iters, a.seed);
  std::cerr << "fit: " << a.iters << " iterations in " << report.wall_clock_ms
            << " ms\n";
  if (a.e2e) {
    report = wdlt::e2e_refine(scene, cfg, opt, report.theta, a.e2e_iters, a.seed);
    std::cerr << "joint refinement: " << a.e2e_iters << " iterations in "
              << report.wall_clock_ms << " ms\n";
  }
  if (!a.out.empty()) wdlt::write_fit_report(a.out, report);
  if (!a.csv.empty()) wdlt::write_fit_csv(a.csv, report);
  if (!a.theta_out.empty()) wdlt::write_theta(a.theta_out, report.theta);
}

struct AdaptArgs {
  std::string pairs_dir;
  std::string theta;
  std::string config;
  std::string out;
  std::string csv;
};

void run_adapt(const AdaptArgs& a) {
  const wdlt::KeyValueConfig kv = load_kv(a.config);
  const wdlt::AdaptConfig cfg = wdlt::load_adapt_config(kv);
  reject_unused(kv);
  std::vector<wdlt::AdaptFrame> frames;
  for (const std::string& f : collect_json_files(a.pairs_dir))
    frames.push_back(wdlt::read_adapt_frame(f));
  const Eigen::Index n = static_cast<Eigen::Index>(frames.front().target_corrs.size());
  const Eigen::VectorXd theta0 = a.theta.empty()
                                     ? Eigen::VectorXd::Constant(n, 1.5)
                                     : wdlt::read_theta(a.theta);
  const wdlt::AdaptResult res = wdlt::adapt_weights(frames, theta0, cfg);
  wdlt::write_theta(a.out, res.theta);
  if (!a.csv.empty()) wdlt::write_loss_curve_csv(a.csv, res.loss_curve);
  std::cerr << "adapt: " << res.loss_curve.size() << " iterations, loss "
            << res.loss_curve.front() << " -> " << res.loss_curve.back()
            << ", " << res.skipped_frame_evals << " skipped frame evals\n";
}

struct EvalArgs {
  std::string poses;
  std::string gt;
  std::string theta;
  std::string out;
};

void run_eval(const EvalArgs& a) {
  const std::vector<std::string> pose_files = collect_json_files(a.poses);
  const std::vector<std::string> gt_files = collect_json_files(a.gt);
  if (pose_files.size() != gt_files.size())
    throw wdlt::Error("pose/gt count mismatch: " +
                      std::to_string(pose_files.size()) + " vs " +
                      std::to_string(gt_files.size()));
  std::optional<Eigen::VectorXd> weights;
  if (!a.theta.empty())
    weights = wdlt::weight_activation(wdlt::read_theta(a.theta));

  std::vector<wdlt::FrameEval> frames;
  for (size_t i = 0; i < pose_files.size(); ++i) {
    const wdlt::SyntheticScene scene = wdlt::read_scene(gt_files[i]);
    const wdlt::Pose est = wdlt::read_pose(pose_files[i]);
    wdlt::FrameEval fe;
    fe.name = fs::path(gt_files[i]).stem().string();
    fe.error = wdlt::pose_error(est, scene.gt_pose);
    if (weights) {
      if (weights->size() != scene.size())
        throw wdlt::Error("theta length does not match scene " + fe.name);
      std::vector<double> errs(scene.size());
      for (int p = 0; p < scene.size(); ++p)
        errs[p] = wdlt::reproj_error(scene.gt_pose, scene.intrinsics,
                                     scene.predicted_coords[p],
                                     scene.pixel_obs[p])
                      .error_px;
      fe.pearson = wdlt::weight_interpretability(*weights, errs);
    }
    frames.push_back(std::move(fe));
  }
  const wdlt::EvalSummary summary = wdlt::summarize(std::move(frames));
  wdlt::write_eval_summary(a.out, summary);
  std::cerr << "eval: median " << summary.median_translation_m << " m / "
            << summary.median_rotation_deg << " deg, recall "
            << summary.recall_5cm_5deg << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"weighted-DLT camera pose estimation on synthetic scenes"};
  app.require_subcommand(1);

  SimulateArgs sim;
  CLI::App* simulate = app.add_subcommand("simulate", "generate a synthetic scene");
  simulate->add_option("--n", sim.n, "number of points");
  simulate->add_option("--outliers", sim.outliers, "outlier fraction in [0,1]");
  simulate->add_option("--pixel-noise", sim.pixel_noise, "pixel noise sigma (px)");
  simulate->add_option("--coord-noise", sim.coord_noise, "coordinate noise sigma (m)");
  simulate->add_option("--seed", sim.seed, "RNG seed")->required();
  simulate->add_option("--out", sim.out, "scene JSON output")->required();
  simulate->add_option("--frames", sim.frames, "total camera-track frames");
  simulate->add_option("--baseline", sim.baseline, "per-frame camera baseline (m)");
  simulate->add_option("--frames-dir", sim.frames_dir, "write per-frame scene JSONs here");
  simulate->add_option("--pairs", sim.pairs, "number of adaptation view pairs");
  simulate->add_option("--pairs-dir", sim.pairs_dir, "write pair JSONs here");
  simulate->add_option("--interval", sim.interval, "pair frame interval");
  simulate->callback([&] { run_simulate(sim); });

  SolveArgs solve;
  CLI::App* solve_cmd = app.add_subcommand("solve", "weighted-DLT pose from a scene");
  solve_cmd->add_option("scene", solve.scene, "scene JSON")->required();
  solve_cmd->add_option("--theta", solve.theta, "weight parameters JSON (default: uniform)");
  solve_cmd->add_option("--out", solve.out, "pose JSON output")->required();
  CLI::Option* ransac_flag =
      solve_cmd->add_flag("--ransac", solve.ransac, "uniform-weight RANSAC baseline");
  solve_cmd->add_option("--iterations", solve.iterations, "RANSAC iterations");
  solve_cmd->add_option("--threshold", solve.threshold, "RANSAC inlier threshold (px)");
  CLI::Option* solve_seed = solve_cmd->add_option("--seed", solve.seed, "RANSAC seed");
  ransac_flag->needs(solve_seed);
  solve_cmd->callback([&] { run_solve(solve); });

  RefineArgs refine;
  CLI::App* refine_cmd = app.add_subcommand("refine", "LM pose refinement");
  refine_cmd->add_option("scene", refine.scene, "scene JSON")->required();
  refine_cmd->add_option("--init", refine.init, "initial pose JSON (default: uniform DLT)");
  refine_cmd->add_option("--config", refine.config, "key-value config (refine.*)");
  refine_cmd->add_option("--out", refine.out, "pose JSON output")->required();
  refine_cmd->callback([&] { run_refine(refine); });

  FitArgs fit;
  CLI::App* fit_cmd = app.add_subcommand("fit", "fit correspondence weights");
  fit_cmd->add_option("scene", fit.scene, "scene JSON")->required();
  fit_cmd->add_option("--mode", fit.mode, "cls+reg (default) or reg");
  fit_cmd->add_option("--iters", fit.iters, "iterations");
  fit_cmd->add_option("--seed", fit.seed, "seed (used when fit.init_jitter > 0)")->required();
  fit_cmd->add_option("--config", fit.config, "key-value config (loss.*, fit.*)");
  fit_cmd->add_option("--out", fit.out, "fit report JSON output");
  fit_cmd->add_option("--csv", fit.csv, "loss-curve CSV output");
  fit_cmd->add_option("--theta-out", fit.theta_out, "fitted theta JSON output");
  fit_cmd->add_flag("--e2e", fit.e2e, "run joint weight+coordinate refinement after");
  fit_cmd->add_option("--e2e-iters", fit.e2e_iters, "joint refinement iterations");
  fit_cmd->callback([&] { run_fit(fit); });

  AdaptArgs adapt;
  CLI::App* adapt_cmd = app.add_subcommand("adapt", "photometric weight adaptation");
  adapt_cmd->add_option("--pairs-dir", adapt.pairs_dir, "directory of pair JSONs")->required();
  adapt_cmd->add_option("--theta", adapt.theta, "initial theta JSON (default: 1.5)");
  adapt_cmd->add_option("--config", adapt.config, "key-value config (adapt.*)");
  adapt_cmd->add_option("--out", adapt.out, "adapted theta JSON output")->required();
  adapt_cmd->add_option("--csv", adapt.csv, "loss-curve CSV output");
  adapt_cmd->callback([&] { run_adapt(adapt); });

  EvalArgs eval;
  CLI::App* eval_cmd = app.add_subcommand("eval", "pose error metrics over frames");
  eval_cmd->add_option("--poses", eval.poses, "pose JSON file or directory")->required();
  eval_cmd->add_option("--gt", eval.gt, "scene JSON file or directory")->required();
  eval_cmd->add_option("--theta", eval.theta, "theta JSON for weight interpretability");
  eval_cmd->add_option("--out", eval.out, "summary JSON output")->required();
  eval_cmd->callback([&] { run_eval(eval); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help();
    return 2;
  } catch (const wdlt::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
