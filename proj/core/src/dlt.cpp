#include "wdlt/dlt.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "wdlt/errors.hpp"
#include "wdlt/rng.hpp"

namespace wdlt {

namespace {

void check_weights(const Eigen::VectorXd& w, int n) {
  if (w.size() != n)
    throw Error("weight vector length " + std::to_string(w.size()) +
                " does not match correspondence count " + std::to_string(n));
  int positive = 0;
  for (int i = 0; i < n; ++i) {
    if (!std::isfinite(w[i]) || w[i] < 0.0)
      throw Error("weights must be finite and non-negative");
    if (w[i] > 1e-6) ++positive;
  }
  if (positive < 6)
    throw InsufficientCorrespondencesError(
        "need at least 6 weights above 1e-6, got " + std::to_string(positive));
}

int argmax_weight(const Eigen::VectorXd& w) {
  int best = 0;
  for (int i = 1; i < w.size(); ++i)
    if (w[i] > w[best]) best = i;  // strict, so ties keep the lowest index
  return best;
}

}  // namespace

Vec2 normalize_pixel(const Vec2& px, const CameraIntrinsics& intr) {
  return Vec2((px.x() - intr.cx) / intr.fx, (px.y() - intr.cy) / intr.fy);
}

RowPair build_rows(const Correspondence& c) {
  RowPair rows = RowPair::Zero();
  rows(0, 0) = c.x;
  rows(0, 1) = c.y;
  rows(0, 2) = c.z;
  rows(0, 3) = 1.0;
  rows(0, 8) = -c.u * c.x;
  rows(0, 9) = -c.u * c.y;
  rows(0, 10) = -c.u * c.z;
  rows(0, 11) = -c.u;
  rows(1, 4) = c.x;
  rows(1, 5) = c.y;
  rows(1, 6) = c.z;
  rows(1, 7) = 1.0;
  rows(1, 8) = -c.v * c.x;
  rows(1, 9) = -c.v * c.y;
  rows(1, 10) = -c.v * c.z;
  rows(1, 11) = -c.v;
  return rows;
}

DltSystem DltSystem::build(std::span<const Correspondence> corrs) {
  DltSystem sys;
  sys.n = static_cast<int>(corrs.size());
  sys.X.resize(2 * sys.n, 12);
  for (int i = 0; i < sys.n; ++i)
    sys.X.middleRows<2>(2 * i) = build_rows(corrs[i]);
  return sys;
}

Mat12 assemble_normal_matrix(const DltSystem& sys, const Eigen::VectorXd& w) {
  if (w.size() != sys.n)
    throw Error("weight vector length " + std::to_string(w.size()) +
                " does not match system size " + std::to_string(sys.n));
  for (int i = 0; i < sys.n; ++i) {
    if (!std::isfinite(w[i]) || w[i] < 0.0)
      throw Error("weight " + std::to_string(i) +
                  " must be finite and non-negative, got " +
                  std::to_string(w[i]));
  }
  Mat12 M = Mat12::Zero();
  for (int i = 0; i < sys.n; ++i) {
    const auto rows = sys.X.middleRows<2>(2 * i);
    M.noalias() += w[i] * (rows.transpose() * rows);
  }
  return M;
}

DltSolution solve_smallest_eigvec(const Mat12& M) {
  Eigen::SelfAdjointEigenSolver<Mat12> eig(M);
  if (eig.info() != Eigen::Success)
    throw DegenerateSystemError("eigendecomposition of the normal matrix failed");
  const auto& vals = eig.eigenvalues();  // ascending
  const double tr = M.trace();
  if (!(tr > 0.0) || vals[1] - vals[0] < 1e-12 * tr)
    throw DegenerateSystemError(
        "smallest eigenvalue of the normal matrix is not isolated "
        "(gap " + std::to_string(vals[1] - vals[0]) + ", trace " +
        std::to_string(tr) + ")");

  DltSolution sol;
  sol.v = eig.eigenvectors().col(0);
  sol.lambda_min = vals[0];
  int k = 0;
  for (int i = 1; i < 12; ++i)
    if (std::abs(sol.v[i]) > std::abs(sol.v[k])) k = i;
  if (sol.v[k] < 0.0) sol.v = -sol.v;
  return sol;
}

Pose procrustes_regularize(const DltSolution& solution,
                           const Eigen::VectorXd& weights,
                           std::span<const Correspondence> corrs) {
  if (weights.size() != static_cast<Eigen::Index>(corrs.size()))
    throw Error("weights/correspondences size mismatch");
  const Mat34 T = solution.T();
  const Mat3 Rbar = T.leftCols<3>();
  const Vec3 tbar = T.col(3);

  Eigen::JacobiSVD<Mat3> svd(Rbar, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vec3 sigma = svd.singularValues();  // descending
  const double tr_sigma = sigma.sum();
  if (tr_sigma < 1e-12)
    throw DegenerateSystemError("rotation block of the DLT solution is ~0, scale undefined");

  double s = 3.0 / tr_sigma;

  // Depth of the highest-weight point under the raw projective solution
  // decides the global sign (the eigenvector is only defined up to one).
  const int ref = argmax_weight(weights);
  const Correspondence& c = corrs[ref];
  const double raw_depth = T(2, 0) * c.x + T(2, 1) * c.y + T(2, 2) * c.z + T(2, 3);
  const double signed_depth = s * raw_depth;
  if (signed_depth == 0.0)
    throw CheiralityError("reference correspondence lies on the principal plane");
  if (signed_depth < 0.0) s = -s;

  const double sign_s = s < 0.0 ? -1.0 : 1.0;
  Mat3 R = sign_s * svd.matrixU() * svd.matrixV().transpose();
  if (R.determinant() < 0.0) {
    Mat3 U = svd.matrixU();
    U.col(2) *= -1.0;  // column of the smallest singular value
    R = sign_s * U * svd.matrixV().transpose();
  }
  const Vec3 t = s * tbar;

  const double final_depth = (R.row(2) * Vec3(c.x, c.y, c.z))(0) + t.z();
  if (final_depth <= 0.0)
    throw CheiralityError("reference correspondence behind the camera after regularization");

  return Pose{R, t};
}

Pose wdlt_solve(std::span<const Correspondence> corrs,
                const Eigen::VectorXd& weights) {
  if (corrs.size() <= 6)
    throw InsufficientCorrespondencesError(
        "weighted DLT needs more than 6 correspondences, got " +
        std::to_string(corrs.size()));
  check_weights(weights, static_cast<int>(corrs.size()));
  const DltSystem sys = DltSystem::build(corrs);
  const Mat12 M = assemble_normal_matrix(sys, weights);
  const DltSolution sol = solve_smallest_eigvec(M);
  return procrustes_regularize(sol, weights, corrs);
}

Pose wdlt_solve(std::span<const Vec3> coords, std::span<const Vec2> pixels,
                const Eigen::VectorXd& weights, const CameraIntrinsics& intr) {
  if (coords.size() != pixels.size())
    throw Error("coords/pixels size mismatch");
  std::vector<Correspondence> corrs(coords.size());
  for (size_t i = 0; i < coords.size(); ++i) {
    const Vec2 uv = normalize_pixel(pixels[i], intr);
    corrs[i] = Correspondence{coords[i].x(), coords[i].y(), coords[i].z(),
                              uv.x(), uv.y()};
  }
  return wdlt_solve(corrs, weights);
}

Pose ransac_dlt(std::span<const Vec3> coords, std::span<const Vec2> pixels,
                const CameraIntrinsics& intr, int iterations,
                double threshold_px, std::uint64_t seed) {
  const int n = static_cast<int>(coords.size());
  if (coords.size() != pixels.size()) throw Error("coords/pixels size mismatch");
  if (n <= 6)
    throw InsufficientCorrespondencesError(
        "RANSAC needs more than 6 correspondences, got " + std::to_string(n));
  if (iterations < 1) throw Error("RANSAC needs at least one iteration");

  Rng rng(seed);
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);

  const Eigen::VectorXd w7 = Eigen::VectorXd::Ones(7);
  std::vector<Vec3> sample_coords(7);
  std::vector<Vec2> sample_pixels(7);

  auto count_inliers = [&](const Pose& pose, std::vector<int>* out) {
    int count = 0;
    for (int i = 0; i < n; ++i) {
      const auto px = project(pose, intr, coords[i]);
      if (!px) continue;
      if ((*px - pixels[i]).norm() <= threshold_px) {
        ++count;
        if (out) out->push_back(i);
      }
    }
    return count;
  };

  int best_count = 0;
  Pose best_pose;
  for (int it = 0; it < iterations; ++it) {
    // Draw 7 distinct indices (partial Fisher-Yates).
    for (int j = 0; j < 7; ++j) {
      const int k = j + static_cast<int>(rng.uniform_int(n - j));
      std::swap(idx[j], idx[k]);
      sample_coords[j] = coords[idx[j]];
      sample_pixels[j] = pixels[idx[j]];
    }
    Pose hypothesis;
    try {
      hypothesis = wdlt_solve(sample_coords, sample_pixels, w7, intr);
    } catch (const Error&) {
      continue;  // degenerate minimal sample
    }
    const int count = count_inliers(hypothesis, nullptr);
    if (count > best_count) {
      best_count = count;
      best_pose = hypothesis;
    }
  }

  if (best_count < 7)
    throw InsufficientCorrespondencesError(
        "no RANSAC hypothesis reached a 7-point consensus");

  std::vector<int> consensus;
  count_inliers(best_pose, &consensus);
  std::vector<Vec3> in_coords(consensus.size());
  std::vector<Vec2> in_pixels(consensus.size());
  for (size_t i = 0; i < consensus.size(); ++i) {
    in_coords[i] = coords[consensus[i]];
    in_pixels[i] = pixels[consensus[i]];
  }
  return wdlt_solve(in_coords, in_pixels,
                    Eigen::VectorXd::Ones(static_cast<int>(consensus.size())),
                    intr);
}

}  // namespace wdlt
