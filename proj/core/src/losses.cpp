#include "wdlt/losses.hpp"

#include <cmath>
#include <limits>

#include "wdlt/errors.hpp"

namespace wdlt {

namespace {

constexpr double kBceClamp = 1e-7;

void check_unit(const Vec12& t) {
  if (std::abs(t.norm() - 1.0) > 1e-9)
    throw Error("pose vector must be unit norm");
}

}  // namespace

Vec12 unit_pose_vector(const Pose& pose) {
  const Mat34 m = pose.matrix();
  Vec12 v;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 4; ++c) v[4 * r + c] = m(r, c);
  return v / v.norm();
}

ReprojResult reproj_error(const Pose& pose, const CameraIntrinsics& intr,
                          const Vec3& coord, const Vec2& pixel) {
  const Vec3 pc = pose.to_camera(coord);
  ReprojResult res;
  res.depth = pc.z();
  if (pc.z() <= 0.0) {
    res.behind_camera = true;
    res.error_px = std::numeric_limits<double>::infinity();
    return res;
  }
  const Vec2 proj(intr.fx * pc.x() / pc.z() + intr.cx,
                  intr.fy * pc.y() / pc.z() + intr.cy);
  res.error_px = (proj - pixel).norm();
  return res;
}

ReprojectionLossResult reprojection_loss(std::span<const Vec3> coords,
                                         std::span<const Vec2> pixels,
                                         const Pose& pose,
                                         const CameraIntrinsics& intr,
                                         const LossConfig& cfg) {
  if (coords.size() != pixels.size()) throw Error("coords/pixels size mismatch");
  if (coords.empty()) throw Error("reprojection loss needs at least one point");
  ReprojectionLossResult out;
  out.per_point.resize(coords.size());
  out.valid.resize(coords.size());
  double sum = 0.0;
  for (size_t i = 0; i < coords.size(); ++i) {
    const ReprojResult r = reproj_error(pose, intr, coords[i], pixels[i]);
    const bool valid = !r.behind_camera && r.depth >= cfg.valid_depth_min_m &&
                       r.depth <= cfg.valid_depth_max_m &&
                       r.error_px < cfg.valid_max_reproj_px;
    out.valid[i] = valid ? 1 : 0;
    if (valid) {
      out.per_point[i] = r.error_px;
    } else {
      // Surrogate target: the point at the heuristic depth along the ray the
      // pixel actually observed.
      const Vec3 dir_c((pixels[i].x() - intr.cx) / intr.fx,
                       (pixels[i].y() - intr.cy) / intr.fy, 1.0);
      const Vec3 anchor = pose.to_world(cfg.depth_heuristic_m * dir_c);
      out.per_point[i] = (coords[i] - anchor).lpNorm<1>();
    }
    sum += out.per_point[i];
  }
  out.value = sum / static_cast<double>(coords.size());
  return out;
}

std::vector<std::uint8_t> inlier_labels(std::span<const Vec3> coords,
                                        std::span<const Vec2> pixels,
                                        const Pose& pose,
                                        const CameraIntrinsics& intr,
                                        double tau_px) {
  if (coords.size() != pixels.size()) throw Error("coords/pixels size mismatch");
  std::vector<std::uint8_t> labels(coords.size());
  for (size_t i = 0; i < coords.size(); ++i) {
    const ReprojResult r = reproj_error(pose, intr, coords[i], pixels[i]);
    labels[i] = (!r.behind_camera && r.error_px <= tau_px) ? 1 : 0;
  }
  return labels;
}

double classification_loss(const Eigen::VectorXd& w,
                           std::span<const std::uint8_t> labels) {
  if (w.size() != static_cast<Eigen::Index>(labels.size()))
    throw Error("weights/labels size mismatch");
  if (labels.empty()) throw Error("classification loss needs at least one point");
  double sum = 0.0;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    const double wc = std::clamp(w[i], kBceClamp, 1.0 - kBceClamp);
    sum -= labels[i] ? std::log(wc) : std::log(1.0 - wc);
  }
  return sum / static_cast<double>(w.size());
}

Eigen::VectorXd grad_classification_loss_wrt_w(
    const Eigen::VectorXd& w, std::span<const std::uint8_t> labels) {
  if (w.size() != static_cast<Eigen::Index>(labels.size()))
    throw Error("weights/labels size mismatch");
  Eigen::VectorXd g = Eigen::VectorXd::Zero(w.size());
  const double inv_n = 1.0 / static_cast<double>(w.size());
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (w[i] <= kBceClamp || w[i] >= 1.0 - kBceClamp) continue;  // clamp plateau
    g[i] = inv_n * (labels[i] ? -1.0 / w[i] : 1.0 / (1.0 - w[i]));
  }
  return g;
}

RegressionLossResult regression_loss(const DltSystem& sys,
                                     const Eigen::VectorXd& w,
                                     const Vec12& t_unit,
                                     const LossConfig& cfg) {
  check_unit(t_unit);
  const Mat12 M = assemble_normal_matrix(sys, w);
  RegressionLossResult out;
  out.residual_term = t_unit.dot(M * t_unit);
  out.trace = M.trace() - out.residual_term;
  out.barrier_term = cfg.alpha * std::exp(-cfg.beta * out.trace);
  out.value = out.residual_term + out.barrier_term;
  return out;
}

Eigen::VectorXd grad_regression_loss_wrt_w(const DltSystem& sys,
                                           const Eigen::VectorXd& w,
                                           const Vec12& t_unit,
                                           const LossConfig& cfg) {
  check_unit(t_unit);
  if (w.size() != sys.n) throw Error("weights/system size mismatch");
  const Eigen::VectorXd proj = sys.X * t_unit;  // 2N
  double trace = 0.0;
  Eigen::VectorXd barrier_coeff(sys.n);
  for (int i = 0; i < sys.n; ++i) {
    const double row_sq = sys.X.row(2 * i).squaredNorm() +
                          sys.X.row(2 * i + 1).squaredNorm();
    const double res_sq =
        proj[2 * i] * proj[2 * i] + proj[2 * i + 1] * proj[2 * i + 1];
    barrier_coeff[i] = row_sq - res_sq;  // ||Xbar rows||^2
    trace += w[i] * barrier_coeff[i];
  }
  const double scale = cfg.alpha * cfg.beta * std::exp(-cfg.beta * trace);
  Eigen::VectorXd g(sys.n);
  for (int i = 0; i < sys.n; ++i) {
    const double res_sq =
        proj[2 * i] * proj[2 * i] + proj[2 * i + 1] * proj[2 * i + 1];
    g[i] = res_sq - scale * barrier_coeff[i];
  }
  return g;
}

namespace {

// Shared by the coordinate-gradient routines. For correspondence i with rows
// r_u, r_v of X and residuals e_u = r_u . t, e_v = r_v . t:
//   d e_u / d(x,y,z) = (t1 - u t9, t2 - u t10, t3 - u t11)
//   d e_v / d(x,y,z) = (t5 - v t9, t6 - v t10, t7 - v t11)
// (t components 1-indexed as in the flattened pose vector).
struct CoordGradTerms {
  double e_u, e_v;
  Vec3 de_u, de_v;
  double u, v;
};

CoordGradTerms coord_terms(const Correspondence& c, const Vec12& t) {
  CoordGradTerms ct;
  const RowPair rows = build_rows(c);
  ct.e_u = rows.row(0) * t;
  ct.e_v = rows.row(1) * t;
  ct.de_u = Vec3(t[0] - c.u * t[8], t[1] - c.u * t[9], t[2] - c.u * t[10]);
  ct.de_v = Vec3(t[4] - c.v * t[8], t[5] - c.v * t[9], t[6] - c.v * t[10]);
  ct.u = c.u;
  ct.v = c.v;
  return ct;
}

}  // namespace

Eigen::Matrix<double, Eigen::Dynamic, 3> grad_residual_term_wrt_coords(
    std::span<const Correspondence> corrs, const Eigen::VectorXd& w,
    const Vec12& t_unit) {
  check_unit(t_unit);
  if (w.size() != static_cast<Eigen::Index>(corrs.size()))
    throw Error("weights/correspondences size mismatch");
  Eigen::Matrix<double, Eigen::Dynamic, 3> g(corrs.size(), 3);
  for (size_t i = 0; i < corrs.size(); ++i) {
    const CoordGradTerms ct = coord_terms(corrs[i], t_unit);
    g.row(i) = 2.0 * w[i] * (ct.e_u * ct.de_u + ct.e_v * ct.de_v).transpose();
  }
  return g;
}

Eigen::Matrix<double, Eigen::Dynamic, 3> grad_regression_loss_wrt_coords(
    std::span<const Correspondence> corrs, const Eigen::VectorXd& w,
    const Vec12& t_unit, const LossConfig& cfg) {
  check_unit(t_unit);
  if (w.size() != static_cast<Eigen::Index>(corrs.size()))
    throw Error("weights/correspondences size mismatch");

  // One pass for the trace (needed by the barrier factor), one for gradients.
  double trace = 0.0;
  std::vector<CoordGradTerms> terms(corrs.size());
  for (size_t i = 0; i < corrs.size(); ++i) {
    terms[i] = coord_terms(corrs[i], t_unit);
    const Correspondence& c = corrs[i];
    const double sq = c.x * c.x + c.y * c.y + c.z * c.z + 1.0;
    const double row_sq = (1.0 + c.u * c.u) * sq + (1.0 + c.v * c.v) * sq;
    trace += w[i] * (row_sq - terms[i].e_u * terms[i].e_u -
                     terms[i].e_v * terms[i].e_v);
  }
  const double barrier_scale = cfg.alpha * cfg.beta * std::exp(-cfg.beta * trace);

  Eigen::Matrix<double, Eigen::Dynamic, 3> g(corrs.size(), 3);
  for (size_t i = 0; i < corrs.size(); ++i) {
    const Correspondence& c = corrs[i];
    const CoordGradTerms& ct = terms[i];
    const Vec3 d_res = 2.0 * (ct.e_u * ct.de_u + ct.e_v * ct.de_v);
    // d(||rows||^2)/d coord = 2 * coord * (2 + u^2 + v^2)
    const Vec3 d_rowsq =
        2.0 * (2.0 + ct.u * ct.u + ct.v * ct.v) * Vec3(c.x, c.y, c.z);
    const Vec3 d_trace = d_rowsq - d_res;
    g.row(i) = (w[i] * (d_res - barrier_scale * d_trace)).transpose();
  }
  return g;
}

PhotometricResult photometric_loss(const SyntheticImagePair& pair,
                                   const Pose& pose_t,
                                   const Image* weights_mask) {
  const CameraIntrinsics& intr = pair.intrinsics;
  const int w = pair.source_image.width;
  const int h = pair.source_image.height;
  const size_t n = static_cast<size_t>(w) * h;
  if (pair.source_coords.size() != n)
    throw Error("source coordinate buffer does not match image size");
  if (weights_mask &&
      (weights_mask->width != w || weights_mask->height != h))
    throw Error("weight mask size mismatch");

  std::vector<double> warped(n, 0.0);
  std::vector<std::uint8_t> valid(n, 0);
  int valid_count = 0;

  const Mat3& R = pose_t.R;
  const Vec3& t = pose_t.t;
  for (size_t i = 0; i < n; ++i) {
    const Vec3 pc = R * pair.source_coords[i] + t;
    if (pc.z() <= 0.0) continue;
    const double px = intr.fx * pc.x() / pc.z() + intr.cx;
    const double py = intr.fy * pc.y() / pc.z() + intr.cy;
    if (!(px >= 0.0 && px <= w - 1.0 && py >= 0.0 && py <= h - 1.0)) continue;
    const int x0 = std::min(static_cast<int>(px), w - 2);
    const int y0 = std::min(static_cast<int>(py), h - 2);
    const double ax = px - x0;
    const double ay = py - y0;
    const Image& tgt = pair.target_image;
    warped[i] = (1.0 - ax) * (1.0 - ay) * tgt.at(x0, y0) +
                ax * (1.0 - ay) * tgt.at(x0 + 1, y0) +
                (1.0 - ax) * ay * tgt.at(x0, y0 + 1) +
                ax * ay * tgt.at(x0 + 1, y0 + 1);
    valid[i] = 1;
    ++valid_count;
  }

  PhotometricResult out;
  out.valid_pixels = valid_count;
  if (valid_count < 0.01 * static_cast<double>(n))
    throw NoOverlapError("only " + std::to_string(valid_count) + " of " +
                         std::to_string(n) + " pixels warp into the target");

  double l1_sum = 0.0, l1_weight = 0.0;
  for (size_t i = 0; i < n; ++i) {
    if (!valid[i]) continue;
    const double m = weights_mask ? weights_mask->pixels[i] : 1.0;
    l1_sum += m * std::abs(pair.source_image.pixels[i] - warped[i]);
    l1_weight += m;
  }
  out.l1 = l1_weight > 0.0 ? l1_sum / l1_weight : 0.0;

  // SSIM over 3x3 windows whose 9 pixels all warped successfully.
  constexpr double kC1 = 0.01 * 0.01;
  constexpr double kC2 = 0.03 * 0.03;
  double ssim_sum = 0.0, ssim_weight = 0.0;
  for (int y = 1; y + 1 < h; ++y) {
    for (int x = 1; x + 1 < w; ++x) {
      bool ok = true;
      double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
      for (int dy = -1; dy <= 1 && ok; ++dy) {
        const size_t row = static_cast<size_t>(y + dy) * w + x;
        for (int dx = -1; dx <= 1; ++dx) {
          const size_t i = row + dx;
          if (!valid[i]) {
            ok = false;
            break;
          }
          const double a = pair.source_image.pixels[i];
          const double b = warped[i];
          sa += a;
          sb += b;
          saa += a * a;
          sbb += b * b;
          sab += a * b;
        }
      }
      if (!ok) continue;
      const double mu_a = sa / 9.0, mu_b = sb / 9.0;
      const double var_a = saa / 9.0 - mu_a * mu_a;
      const double var_b = sbb / 9.0 - mu_b * mu_b;
      const double cov = sab / 9.0 - mu_a * mu_b;
      const double ssim = (2.0 * mu_a * mu_b + kC1) * (2.0 * cov + kC2) /
                          ((mu_a * mu_a + mu_b * mu_b + kC1) *
                           (var_a + var_b + kC2));
      const double m =
          weights_mask ? weights_mask->pixels[static_cast<size_t>(y) * w + x] : 1.0;
      ssim_sum += m * 0.5 * (1.0 - ssim);
      ssim_weight += m;
    }
  }
  out.ssim = ssim_weight > 0.0 ? ssim_sum / ssim_weight : 0.0;
  out.total = out.l1 + out.ssim;
  return out;
}

}  // namespace wdlt
