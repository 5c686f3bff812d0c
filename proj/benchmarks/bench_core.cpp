// Microbenchmarks for the hot paths: normal-matrix assembly, the eigensolve,
// the full weighted solve, loss gradients, LM refinement, and the photometric
// objective. Scene setup happens outside the timed loops.

#include <benchmark/benchmark.h>

#include "wdlt/adapt.hpp"
#include "wdlt/dlt.hpp"
#include "wdlt/lm_refine.hpp"
#include "wdlt/losses.hpp"
#include "wdlt/simulator.hpp"

using namespace wdlt;

namespace {

SyntheticScene bench_scene(int n, double pixel_noise = 0.0) {
  SceneParams p;
  p.n_points = n;
  p.pixel_noise_sigma = pixel_noise;
  p.coord_noise_sigma = 0.01;
  p.seed = 42;
  return generate_scene(p);
}

void BM_assemble_normal_matrix(benchmark::State& state) {
  const SyntheticScene sc = bench_scene(static_cast<int>(state.range(0)));
  const DltSystem sys = DltSystem::build(scene_correspondences(sc));
  const Eigen::VectorXd w = Eigen::VectorXd::Constant(sc.size(), 0.8);
  for (auto _ : state) {
    benchmark::DoNotOptimize(assemble_normal_matrix(sys, w));
  }
  state.SetItemsProcessed(state.iterations() * sc.size());
}
BENCHMARK(BM_assemble_normal_matrix)->Arg(100)->Arg(1000);

void BM_smallest_eigvec(benchmark::State& state) {
  const SyntheticScene sc = bench_scene(100);
  const DltSystem sys = DltSystem::build(scene_correspondences(sc));
  const Mat12 M =
      assemble_normal_matrix(sys, Eigen::VectorXd::Ones(sc.size()));
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_smallest_eigvec(M));
  }
}
BENCHMARK(BM_smallest_eigvec);

void BM_wdlt_solve(benchmark::State& state) {
  const SyntheticScene sc = bench_scene(static_cast<int>(state.range(0)));
  const auto corrs = scene_correspondences(sc);
  const Eigen::VectorXd w = Eigen::VectorXd::Ones(sc.size());
  for (auto _ : state) {
    benchmark::DoNotOptimize(wdlt_solve(corrs, w));
  }
  state.SetItemsProcessed(state.iterations() * sc.size());
}
BENCHMARK(BM_wdlt_solve)->Arg(100)->Arg(1000);

void BM_grad_regression_loss_wrt_w(benchmark::State& state) {
  const SyntheticScene sc = bench_scene(100);
  const DltSystem sys = DltSystem::build(scene_correspondences(sc));
  const Eigen::VectorXd w = Eigen::VectorXd::Constant(sc.size(), 0.8);
  const Vec12 t = unit_pose_vector(sc.gt_pose);
  const LossConfig cfg;
  for (auto _ : state) {
    benchmark::DoNotOptimize(grad_regression_loss_wrt_w(sys, w, t, cfg));
  }
}
BENCHMARK(BM_grad_regression_loss_wrt_w);

void BM_grad_pose_wrt_w(benchmark::State& state) {
  const SyntheticScene sc = bench_scene(100);
  const DltSystem sys = DltSystem::build(scene_correspondences(sc));
  const Eigen::VectorXd w = Eigen::VectorXd::Constant(sc.size(), 0.8);
  const DltSolution sol = solve_smallest_eigvec(assemble_normal_matrix(sys, w));
  for (auto _ : state) {
    benchmark::DoNotOptimize(grad_pose_wrt_w(sys, w, sol));
  }
}
BENCHMARK(BM_grad_pose_wrt_w);

void BM_lm_refine(benchmark::State& state) {
  const SyntheticScene sc = bench_scene(100, 1.0);
  const Pose init =
      wdlt_solve(sc.predicted_coords, sc.pixel_obs,
                 Eigen::VectorXd::Ones(sc.size()), sc.intrinsics);
  const RefineConfig cfg;
  for (auto _ : state) {
    benchmark::DoNotOptimize(lm_refine(init, sc.predicted_coords, sc.pixel_obs,
                                       sc.intrinsics, cfg));
  }
}
BENCHMARK(BM_lm_refine);

void BM_photometric_loss(benchmark::State& state) {
  const SyntheticImagePair pair = generate_image_pair(ImagePairParams{});
  for (auto _ : state) {
    benchmark::DoNotOptimize(photometric_loss(pair, pair.target_pose));
  }
  state.SetItemsProcessed(state.iterations() * pair.source_image.width *
                          pair.source_image.height);
}
BENCHMARK(BM_photometric_loss);

}  // namespace

BENCHMARK_MAIN();
