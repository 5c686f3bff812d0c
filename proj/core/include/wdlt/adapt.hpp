#pragma once

// Self-supervised adaptation: fine-tunes weight parameters against the
// photometric loss of warped view pairs, with scene coordinates held fixed.
//
// The gradient reaches theta only through the pose: photometric loss ->
// pose -> smallest eigenvector of the weighted normal matrix -> w -> theta.
// The eigenvector sensitivity is the analytic perturbation formula
//   dv/dw_i = (lambda I - M)^+ (dM/dw_i) v,
// while the smooth but SVD-shaped map from the eigenvector through Procrustes
// to the warp is differentiated by central finite differences.

#include <cstdint>
#include <span>
#include <vector>

#include "wdlt/dlt.hpp"
#include "wdlt/losses.hpp"
#include "wdlt/simulator.hpp"

namespace wdlt {

struct AdaptConfig {
  int frame_interval = 1;  // pair spacing, in sequence frames
  int iterations = 250;
  double learning_rate = 5e-2;  // Adam on theta; artifact choice (pilot-tuned)
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  double pose_fd_step = 1e-5;  // photometric loss vs pose increment
  double vec_fd_step = 1e-6;   // pose vector vs pose increment
  double divergence_factor = 1e6;
};

// One supervision unit: a rendered source/target view pair plus the target
// frame's 2D-3D correspondences (already normalized) for the pose solve.
struct AdaptFrame {
  SyntheticImagePair pair;
  std::vector<Correspondence> target_corrs;
};

struct AdaptResult {
  Eigen::VectorXd theta;
  std::vector<double> loss_curve;  // mean photometric loss per iteration
  int skipped_frame_evals = 0;     // eigengap-degenerate frame evaluations
};

// Sensitivity of the sign-fixed smallest eigenvector to each weight, one row
// per correspondence (N x 12). Throws DegenerateSystemError when the two
// smallest eigenvalues of M are closer than 1e-10 * trace ("ed-gradient-
// unstable"); adaptation responds by skipping the frame.
Eigen::MatrixXd grad_pose_wrt_w(const DltSystem& sys, const Eigen::VectorXd& w,
                                const DltSolution& solution);

// dL_ph/dtheta for a single frame, pose path only. Optionally reports the
// photometric loss at the current theta.
Eigen::VectorXd adapt_gradient(const AdaptFrame& frame,
                               const Eigen::VectorXd& theta,
                               const AdaptConfig& cfg,
                               double* loss_out = nullptr);

// Adam on theta over all frames (offline: the full pair list every
// iteration). Degenerate frames are skipped and counted; an iteration where
// every frame is degenerate throws, as does the divergence guard.
// NoOverlapError from the photometric loss propagates.
AdaptResult adapt_weights(std::span<const AdaptFrame> frames,
                          const Eigen::VectorXd& theta0,
                          const AdaptConfig& cfg);

// Test/CLI scenario: one box scene observed along a camera track, image pairs
// of a shared textured plane between frames (k, k + interval), and trailing
// held-out frames never used for adaptation.
struct AdaptScenarioParams {
  SceneParams scene;
  int n_pairs = 4;
  int n_heldout = 4;
  double frame_baseline_m = 0.025;
  ImagePairParams pair;  // poses/baseline/anchor overwritten per pair
};

struct AdaptScenario {
  SceneSequence seq;
  std::vector<AdaptFrame> frames;
  std::vector<int> heldout_frames;  // indices into seq.poses / seq.pixel_obs
};

AdaptScenario make_adapt_scenario(const AdaptScenarioParams& params,
                                  int frame_interval);

}  // namespace wdlt
