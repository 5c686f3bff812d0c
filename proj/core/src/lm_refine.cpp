#include "wdlt/lm_refine.hpp"

#include <cmath>
#include <limits>

#include "wdlt/errors.hpp"

namespace wdlt {

std::vector<int> find_inliers(const Pose& pose, std::span<const Vec3> coords,
                              std::span<const Vec2> pixels,
                              const CameraIntrinsics& intr,
                              double threshold_px) {
  if (coords.size() != pixels.size()) throw Error("coords/pixels size mismatch");
  std::vector<int> inliers;
  for (size_t i = 0; i < coords.size(); ++i) {
    const Vec3 pc = pose.to_camera(coords[i]);
    if (pc.z() <= 0.0) continue;
    const Vec2 proj(intr.fx * pc.x() / pc.z() + intr.cx,
                    intr.fy * pc.y() / pc.z() + intr.cy);
    if ((proj - pixels[i]).norm() <= threshold_px)
      inliers.push_back(static_cast<int>(i));
  }
  return inliers;
}

Mat2x6 reprojection_jacobian(const Pose& pose, const CameraIntrinsics& intr,
                             const Vec3& coord) {
  const Vec3 pc = pose.to_camera(coord);
  if (pc.z() <= 0.0)
    throw Error("reprojection Jacobian undefined behind the camera");
  const double inv_z = 1.0 / pc.z();
  // d(pixel)/d(camera point)
  Eigen::Matrix<double, 2, 3> d_px;
  d_px << intr.fx * inv_z, 0.0, -intr.fx * pc.x() * inv_z * inv_z,
          0.0, intr.fy * inv_z, -intr.fy * pc.y() * inv_z * inv_z;
  // Right increment: T * exp([omega; nu]) gives
  // d(camera point)/d omega = -R [coord]_x, d/d nu = R.
  Eigen::Matrix<double, 3, 6> d_pc;
  d_pc.leftCols<3>() = -pose.R * skew(coord);
  d_pc.rightCols<3>() = pose.R;
  return d_px * d_pc;
}

namespace {

// Sum of squared pixel residuals over the index set; +inf when a point falls
// behind the camera (such a trial step is simply rejected).
double inlier_cost(const Pose& pose, std::span<const Vec3> coords,
                   std::span<const Vec2> pixels, const CameraIntrinsics& intr,
                   const std::vector<int>& set) {
  double cost = 0.0;
  for (int i : set) {
    const Vec3 pc = pose.to_camera(coords[i]);
    if (pc.z() <= 0.0) return std::numeric_limits<double>::infinity();
    const Vec2 proj(intr.fx * pc.x() / pc.z() + intr.cx,
                    intr.fy * pc.y() / pc.z() + intr.cy);
    cost += (proj - pixels[i]).squaredNorm();
  }
  return cost;
}

Pose apply_step(const Pose& pose, const Vec6& delta) {
  Pose next = compose(pose, exp_se3(delta));
  next.R = nearest_rotation(next.R);  // keep composition drift out
  return next;
}

struct InnerResult {
  Pose pose;
  double cost;
  bool stalled = false;
  std::vector<double> accepted_costs;
};

InnerResult lm_inner(const Pose& start, std::span<const Vec3> coords,
                     std::span<const Vec2> pixels, const CameraIntrinsics& intr,
                     const std::vector<int>& set, const RefineConfig& cfg) {
  InnerResult res{start, inlier_cost(start, coords, pixels, intr, set)};
  double lambda = cfg.lambda_init;
  bool tiny_progress = false;
  for (int it = 0; it < cfg.max_inner_iterations && !tiny_progress; ++it) {
    Eigen::Matrix<double, 6, 6> H = Eigen::Matrix<double, 6, 6>::Zero();
    Vec6 g = Vec6::Zero();
    for (int i : set) {
      const Vec3 pc = res.pose.to_camera(coords[i]);
      const Vec2 proj(intr.fx * pc.x() / pc.z() + intr.cx,
                      intr.fy * pc.y() / pc.z() + intr.cy);
      const Vec2 r = proj - pixels[i];
      const Mat2x6 J = reprojection_jacobian(res.pose, intr, coords[i]);
      H.noalias() += J.transpose() * J;
      g.noalias() += J.transpose() * r;
    }
    if (g.lpNorm<Eigen::Infinity>() < cfg.gradient_tolerance * (1.0 + res.cost))
      break;

    bool accepted = false;
    int solve_failures = 0;
    while (lambda <= cfg.lambda_max) {
      const Eigen::Matrix<double, 6, 6> A =
          H + lambda * Eigen::Matrix<double, 6, 6>::Identity();
      const Vec6 delta = A.ldlt().solve(-g);
      if (!delta.allFinite()) {
        ++solve_failures;
        lambda *= cfg.lambda_up;
        continue;
      }
      const Pose candidate = apply_step(res.pose, delta);
      const double cost = inlier_cost(candidate, coords, pixels, intr, set);
      if (cost < res.cost) {
        res.pose = candidate;
        const double decrease = (res.cost - cost) / std::max(res.cost, 1e-300);
        res.cost = cost;
        res.accepted_costs.push_back(cost);
        lambda = std::max(lambda / cfg.lambda_down, 1e-12);
        accepted = true;
        tiny_progress = decrease < cfg.relative_decrease_tolerance;
        break;
      }
      lambda *= cfg.lambda_up;
    }
    if (!accepted) {
      // Exhausted the damping schedule. Persistent solve failures mean the
      // normal equations themselves are sick; otherwise this is an ordinary
      // local minimum.
      res.stalled = solve_failures > 0 && res.accepted_costs.empty();
      break;
    }
  }
  return res;
}

}  // namespace

RefineResult lm_refine(const Pose& pose_init, std::span<const Vec3> coords,
                       std::span<const Vec2> pixels,
                       const CameraIntrinsics& intr, const RefineConfig& cfg) {
  if (!pose_init.is_rigid(1e-9)) throw Error("initial pose is not rigid");
  if (cfg.max_iterations < 1) throw Error("max_iterations must be >= 1");
  if (cfg.inlier_threshold_px <= 0.0) throw Error("threshold must be positive");

  std::vector<int> set =
      find_inliers(pose_init, coords, pixels, intr, cfg.inlier_threshold_px);
  if (set.size() < 6)
    throw InsufficientCorrespondencesError(
        "refinement needs at least 6 inliers, got " + std::to_string(set.size()));

  RefineResult out;
  out.pose = pose_init;
  for (int outer = 1; outer <= cfg.max_iterations; ++outer) {
    InnerResult inner = lm_inner(out.pose, coords, pixels, intr, set, cfg);
    out.pose = inner.pose;
    out.final_cost = inner.cost;
    out.accepted_costs.push_back(std::move(inner.accepted_costs));
    out.outer_iterations = outer;
    if (inner.stalled) {
      out.status = RefineStatus::stalled;
      out.final_inliers = set;
      return out;
    }
    std::vector<int> next =
        find_inliers(out.pose, coords, pixels, intr, cfg.inlier_threshold_px);
    if (next.size() < 6)
      throw InsufficientCorrespondencesError(
          "inlier set collapsed below 6 during refinement");
    if (next == set) {
      out.status = RefineStatus::converged;
      out.final_inliers = std::move(next);
      return out;
    }
    set = std::move(next);
  }
  out.status = RefineStatus::max_iterations;
  out.final_inliers = std::move(set);
  out.final_cost = inlier_cost(out.pose, coords, pixels, intr, out.final_inliers);
  return out;
}

}  // namespace wdlt
