#pragma once

// Weighted direct linear transform for camera pose from 2D-3D matches.
//
// Each correspondence pairs a scene coordinate (x, y, z) in meters with a
// normalized image observation (u, v) = ((px - cx)/fx, (py - cy)/fy). A
// correspondence contributes two rows to the homogeneous system X vec(T) = 0,
// where T is the 3x4 world-to-camera projective matrix flattened row-major
// (p1..p12). Per-correspondence weights scale both of its rows, the pose is
// read off the smallest eigenvector of M = X^T diag(w) X (each weight applied
// to both rows of its pair), and an orthogonal-Procrustes step snaps the
// projective solution back onto SE(3).

#include <cstdint>
#include <span>
#include <vector>

#include "wdlt/geometry.hpp"

namespace wdlt {

struct Correspondence {
  double x = 0.0, y = 0.0, z = 0.0;  // scene coordinate, world frame
  double u = 0.0, v = 0.0;           // normalized image coordinates
};

using RowPair = Eigen::Matrix<double, 2, 12>;

Vec2 normalize_pixel(const Vec2& px, const CameraIntrinsics& intr);

// The two rows contributed by one correspondence:
//   [x y z 1 0 0 0 0 -ux -uy -uz -u]
//   [0 0 0 0 x y z 1 -vx -vy -vz -v]
RowPair build_rows(const Correspondence& c);

struct DltSystem {
  Eigen::Matrix<double, Eigen::Dynamic, 12> X;  // 2N x 12, rows 2i, 2i+1 from point i
  int n = 0;

  static DltSystem build(std::span<const Correspondence> corrs);
};

// M = sum_i w_i * (X_{2i}^T X_{2i} + X_{2i+1}^T X_{2i+1}); the 2Nx2N diagonal
// is never materialized. Requires w.size() == sys.n and finite non-negative
// weights.
Mat12 assemble_normal_matrix(const DltSystem& sys, const Eigen::VectorXd& w);

struct DltSolution {
  Vec12 v = Vec12::Zero();  // unit norm; the largest-magnitude entry is positive
  double lambda_min = 0.0;  // smallest eigenvalue of M

  Mat34 T() const {
    Mat34 m;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 4; ++c) m(r, c) = v[4 * r + c];
    return m;
  }
};

// Full symmetric eigendecomposition of M; throws DegenerateSystemError when
// the two smallest eigenvalues are separated by less than 1e-12 * trace(M).
DltSolution solve_smallest_eigvec(const Mat12& M);

// Upgrades the projective solution to a rigid pose: SVD of the rotation block
// fixes scale (3 / tr(Sigma)) and orthogonality, the highest-weight
// correspondence (lowest index on ties) disambiguates the sign via its depth,
// and a reflection in U is corrected through the column of the smallest
// singular value. Throws CheiralityError when the reference point sits exactly
// on the principal plane or ends up behind the camera, DegenerateSystemError
// when tr(Sigma) < 1e-12.
Pose procrustes_regularize(const DltSolution& solution,
                           const Eigen::VectorXd& weights,
                           std::span<const Correspondence> corrs);

// The full pipeline: rows -> weighted normal matrix -> smallest eigenvector ->
// Procrustes. Requires more than 6 correspondences and at least 6 weights
// above 1e-6.
Pose wdlt_solve(std::span<const Correspondence> corrs,
                const Eigen::VectorXd& weights);
Pose wdlt_solve(std::span<const Vec3> coords, std::span<const Vec2> pixels,
                const Eigen::VectorXd& weights, const CameraIntrinsics& intr);

// Uniform-weight RANSAC baseline: 7-point hypotheses, consensus by pixel
// reprojection error <= threshold_px with positive depth, best hypothesis
// (first on ties) refit on its consensus set. Throws
// InsufficientCorrespondencesError when no hypothesis reaches 7 inliers.
Pose ransac_dlt(std::span<const Vec3> coords, std::span<const Vec2> pixels,
                const CameraIntrinsics& intr, int iterations,
                double threshold_px, std::uint64_t seed);

}  // namespace wdlt
