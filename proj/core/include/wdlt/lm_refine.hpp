#pragma once

// Levenberg-Marquardt pose refinement over an adaptively re-selected inlier
// set. The outer loop alternates inlier selection and damped Gauss-Newton on
// the summed squared reprojection error; it stops when the selected index set
// repeats exactly, or at max_iterations.
//
// Pose increments are 6-vectors [omega; nu] applied on the right:
// T <- T * exp_se3(delta), with the rotation re-orthonormalized after every
// accepted composition.

#include <span>
#include <vector>

#include "wdlt/geometry.hpp"

namespace wdlt {

struct RefineConfig {
  double inlier_threshold_px = 10.0;
  int max_iterations = 100;      // outer re-selection rounds
  int max_inner_iterations = 50; // LM steps per round
  double lambda_init = 1e-3;
  double lambda_up = 10.0;
  double lambda_down = 10.0;
  double lambda_max = 1e10;
  double gradient_tolerance = 1e-14;  // scaled by (1 + cost)
  double relative_decrease_tolerance = 1e-14;
};

enum class RefineStatus {
  converged,       // inlier set repeated
  max_iterations,  // set still changing at the cap
  stalled,         // normal equations unsolvable at maximum damping
};

struct RefineResult {
  Pose pose;
  int outer_iterations = 0;
  std::vector<int> final_inliers;
  RefineStatus status = RefineStatus::converged;
  double final_cost = 0.0;  // sum of squared residuals on final_inliers
  // Accepted-step costs per outer round; strictly decreasing within a round.
  std::vector<std::vector<double>> accepted_costs;
};

// Indices whose reprojection error under `pose` is at most threshold_px and
// whose depth is positive. An empty result is valid.
std::vector<int> find_inliers(const Pose& pose, std::span<const Vec3> coords,
                              std::span<const Vec2> pixels,
                              const CameraIntrinsics& intr, double threshold_px);

// 2x6 Jacobian of the pixel residual at `coord` with respect to a right-
// multiplied pose increment [omega; nu], evaluated at delta = 0. Requires
// positive depth.
Mat2x6 reprojection_jacobian(const Pose& pose, const CameraIntrinsics& intr,
                             const Vec3& coord);

// Throws InsufficientCorrespondencesError when fewer than 6 inliers are
// available at any outer iteration.
RefineResult lm_refine(const Pose& pose_init, std::span<const Vec3> coords,
                       std::span<const Vec2> pixels,
                       const CameraIntrinsics& intr, const RefineConfig& cfg);

}  // namespace wdlt
