#pragma once

// Training losses for correspondence weights, with analytic gradients.
//
// The regression loss scores a weight vector against a known pose without
// eigendecomposition: with M(w) = X^T diag(w) X and t the unit-norm flattened
// ground-truth [R|t],
//
//   L_r(w) = t^T M(w) t + alpha * exp(-beta * (tr M(w) - t^T M(w) t))
//
// The first term pushes the ground truth toward the null space, the second
// keeps the remaining spectrum from collapsing (the barrier against the
// all-zero weight solution). The classification loss is a per-point BCE
// against threshold-based inlier labels. The photometric loss scores a pose
// by warping per-pixel scene coordinates into a target view.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "wdlt/dlt.hpp"
#include "wdlt/geometry.hpp"
#include "wdlt/simulator.hpp"

namespace wdlt {

struct LossConfig {
  double tau_px = 1.0;       // inlier label threshold
  double alpha = 5.0;        // trace barrier magnitude
  double beta = 1e-4;        // trace barrier decay
  double gamma = 5.0;        // regression weight in L = L_cls + gamma * L_reg
  double depth_heuristic_m = 10.0;   // fallback depth for invalid points
  double valid_depth_min_m = 0.1;    // validity set bounds
  double valid_depth_max_m = 1000.0;
  double valid_max_reproj_px = 1000.0;
};

// Flattened row-major [R|t], normalized to unit length.
Vec12 unit_pose_vector(const Pose& pose);

struct ReprojResult {
  double error_px = 0.0;  // +inf when behind the camera, never NaN
  double depth = 0.0;     // camera-frame z
  bool behind_camera = false;
};

ReprojResult reproj_error(const Pose& pose, const CameraIntrinsics& intr,
                          const Vec3& coord, const Vec2& pixel);

struct ReprojectionLossResult {
  double value = 0.0;             // mean over all points
  std::vector<double> per_point;  // reprojection error or L1 fallback
  std::vector<std::uint8_t> valid;
};

// Points inside the validity set (depth within bounds, error under the cap)
// contribute their reprojection error; the rest contribute the L1 distance to
// the point at depth_heuristic_m along their observed ray.
ReprojectionLossResult reprojection_loss(std::span<const Vec3> coords,
                                         std::span<const Vec2> pixels,
                                         const Pose& pose,
                                         const CameraIntrinsics& intr,
                                         const LossConfig& cfg);

// 1 where the reprojection under `pose` is at most tau_px (and in front of
// the camera).
std::vector<std::uint8_t> inlier_labels(std::span<const Vec3> coords,
                                        std::span<const Vec2> pixels,
                                        const Pose& pose,
                                        const CameraIntrinsics& intr,
                                        double tau_px);

// Mean binary cross-entropy of w against the labels, with w clamped to
// [1e-7, 1 - 1e-7]. The gradient is zero in the clamped regions.
double classification_loss(const Eigen::VectorXd& w,
                           std::span<const std::uint8_t> labels);
Eigen::VectorXd grad_classification_loss_wrt_w(
    const Eigen::VectorXd& w, std::span<const std::uint8_t> labels);

struct RegressionLossResult {
  double value = 0.0;
  double residual_term = 0.0;  // t^T M t
  double barrier_term = 0.0;   // alpha * exp(-beta * trace)
  double trace = 0.0;          // tr M - t^T M t
};

// t_unit must have unit norm (checked to 1e-9).
RegressionLossResult regression_loss(const DltSystem& sys,
                                     const Eigen::VectorXd& w,
                                     const Vec12& t_unit,
                                     const LossConfig& cfg);

// dL_r/dw_i = (X_{2i} t)^2 + (X_{2i+1} t)^2
//             - alpha*beta*exp(-beta*trace) * (||Xbar_{2i}||^2 + ||Xbar_{2i+1}||^2)
// with Xbar = X (I - t t^T).
Eigen::VectorXd grad_regression_loss_wrt_w(const DltSystem& sys,
                                           const Eigen::VectorXd& w,
                                           const Vec12& t_unit,
                                           const LossConfig& cfg);

// Full gradient of L_r with respect to each scene coordinate (rows of the
// result), barrier term included.
Eigen::Matrix<double, Eigen::Dynamic, 3> grad_regression_loss_wrt_coords(
    std::span<const Correspondence> corrs, const Eigen::VectorXd& w,
    const Vec12& t_unit, const LossConfig& cfg);

// Gradient of the residual term t^T M t alone. This is the part that vanishes
// on exact data; end-to-end coordinate refinement steps with it so that exact
// scenes stay fixed points.
Eigen::Matrix<double, Eigen::Dynamic, 3> grad_residual_term_wrt_coords(
    std::span<const Correspondence> corrs, const Eigen::VectorXd& w,
    const Vec12& t_unit);

struct PhotometricResult {
  double total = 0.0;  // l1 + ssim
  double l1 = 0.0;
  double ssim = 0.0;   // mean (1 - SSIM)/2 over fully valid 3x3 windows
  int valid_pixels = 0;
};

// Projects every source pixel's scene coordinate with pose_t, samples the
// target image bilinearly, and compares against the source intensities.
// weights_mask optionally weights both terms per source pixel. Throws
// NoOverlapError when fewer than 1% of pixels warp inside the target.
PhotometricResult photometric_loss(const SyntheticImagePair& pair,
                                   const Pose& pose_t,
                                   const Image* weights_mask = nullptr);

}  // namespace wdlt
