#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "wdlt/dlt.hpp"
#include "wdlt/errors.hpp"
#include "wdlt/losses.hpp"
#include "wdlt/rng.hpp"
#include "wdlt/simulator.hpp"

using namespace wdlt;

namespace {

std::vector<Correspondence> random_corrs(int n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Correspondence> corrs(n);
  for (auto& c : corrs) {
    c.x = rng.uniform(-2.0, 2.0);
    c.y = rng.uniform(-2.0, 2.0);
    c.z = rng.uniform(2.0, 8.0);
    c.u = rng.uniform(-0.5, 0.5);
    c.v = rng.uniform(-0.4, 0.4);
  }
  return corrs;
}

Pose random_pose(std::uint64_t seed) {
  Rng rng(seed);
  const Vec3 axis =
      Vec3(rng.normal(), rng.normal(), rng.normal()).normalized();
  Pose p;
  p.R = exp_so3(rng.uniform(0.1, 1.0) * axis);
  p.t = Vec3(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0),
             rng.uniform(4.0, 7.0));
  return p;
}

// Independent oracle: the normal matrix entry by entry with scalar loops.
Mat12 normal_matrix_by_hand(const std::vector<Correspondence>& corrs,
                            const Eigen::VectorXd& w) {
  Mat12 M;
  for (int a = 0; a < 12; ++a)
    for (int b = 0; b < 12; ++b) M(a, b) = 0.0;
  for (size_t i = 0; i < corrs.size(); ++i) {
    const Correspondence& c = corrs[i];
    double ru[12] = {c.x, c.y, c.z, 1.0, 0, 0, 0, 0,
                     -c.u * c.x, -c.u * c.y, -c.u * c.z, -c.u};
    double rv[12] = {0, 0, 0, 0, c.x, c.y, c.z, 1.0,
                     -c.v * c.x, -c.v * c.y, -c.v * c.z, -c.v};
    for (int a = 0; a < 12; ++a)
      for (int b = 0; b < 12; ++b)
        M(a, b) += w[i] * (ru[a] * ru[b] + rv[a] * rv[b]);
  }
  return M;
}

double rel_err(double got, double want) {
  return std::abs(got - want) / std::max(1.0, std::abs(want));
}

}  // namespace

TEST_CASE("unit pose vector flattens row-major and normalizes") {
  Pose p;
  p.t = Vec3(1.0, 2.0, 3.0);
  const Vec12 v = unit_pose_vector(p);
  const double s = std::sqrt(17.0);  // 3 ones from R, t = (1,2,3)
  CHECK(v[0] == doctest::Approx(1.0 / s).epsilon(1e-12));
  CHECK(v[1] == 0.0);
  CHECK(v[3] == doctest::Approx(1.0 / s).epsilon(1e-12));
  CHECK(v[5] == doctest::Approx(1.0 / s).epsilon(1e-12));
  CHECK(v[7] == doctest::Approx(2.0 / s).epsilon(1e-12));
  CHECK(v[10] == doctest::Approx(1.0 / s).epsilon(1e-12));
  CHECK(v[11] == doctest::Approx(3.0 / s).epsilon(1e-12));
  CHECK(std::abs(v.norm() - 1.0) < 1e-12);
}

TEST_CASE("reprojection error matches similar-triangle hand values") {
  const CameraIntrinsics intr{500.0, 500.0, 320.0, 240.0, 640, 480};
  const Pose identity;

  ReprojResult r = reproj_error(identity, intr, Vec3(0, 0, 5), Vec2(320, 240));
  CHECK(r.error_px == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(r.depth == 5.0);
  CHECK(!r.behind_camera);

  // 0.01 m lateral offset at depth 1 under fx = 500 is 5 px.
  r = reproj_error(identity, intr, Vec3(0.01, 0, 1), Vec2(320, 240));
  CHECK(r.error_px == doctest::Approx(5.0).epsilon(1e-12));

  // 3-4-5 triangle in pixel space.
  r = reproj_error(identity, intr, Vec3(0.006, 0.008, 1), Vec2(320, 240));
  CHECK(r.error_px == doctest::Approx(5.0).epsilon(1e-12));

  r = reproj_error(identity, intr, Vec3(0, 0, -5), Vec2(320, 240));
  CHECK(r.behind_camera);
  CHECK(std::isinf(r.error_px));
  CHECK(r.error_px > 0.0);
  CHECK(r.depth == -5.0);
}

TEST_CASE("reprojection loss falls back to an L1 anchor for invalid points") {
  const CameraIntrinsics intr{100.0, 100.0, 0.0, 0.0, 640, 480};
  const Pose identity;
  LossConfig cfg;

  // First point sits behind the camera; observed at the principal point, so
  // the anchor is 10 m straight down the axis and the L1 gap is 15.
  const std::vector<Vec3> coords{Vec3(0, 0, -5), Vec3(0, 0, 2)};
  const std::vector<Vec2> pixels{Vec2(0, 0), Vec2(0, 0)};
  const ReprojectionLossResult res =
      reprojection_loss(coords, pixels, identity, intr, cfg);
  REQUIRE(res.per_point.size() == 2);
  CHECK(res.valid[0] == 0);
  CHECK(res.valid[1] == 1);
  CHECK(res.per_point[0] == doctest::Approx(15.0).epsilon(1e-12));
  CHECK(res.per_point[1] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(res.value == doctest::Approx(7.5).epsilon(1e-12));
}

TEST_CASE("reprojection loss validity set enforces depth and error caps") {
  const CameraIntrinsics intr{100.0, 100.0, 0.0, 0.0, 640, 480};
  const Pose identity;
  LossConfig cfg;

  // Too close, too far, error over the cap, and one healthy point.
  const std::vector<Vec3> coords{
      Vec3(0, 0, 0.05),              // depth below 0.1
      Vec3(0, 0, 2000.0),            // depth above 1000
      Vec3(30.0, 0, 2.0),            // projects 1500 px off the observation
      Vec3(0.02, 0, 2.0),            // 1 px off, valid
  };
  const std::vector<Vec2> pixels{Vec2(0, 0), Vec2(0, 0), Vec2(0, 0),
                                 Vec2(0, 0)};
  const ReprojectionLossResult res =
      reprojection_loss(coords, pixels, identity, intr, cfg);
  CHECK(res.valid[0] == 0);
  CHECK(res.valid[1] == 0);
  CHECK(res.valid[2] == 0);
  CHECK(res.valid[3] == 1);
  // Anchor for the principal-point ray is (0, 0, 10).
  CHECK(res.per_point[0] == doctest::Approx(9.95).epsilon(1e-12));
  CHECK(res.per_point[1] == doctest::Approx(1990.0).epsilon(1e-12));
  CHECK(res.per_point[2] == doctest::Approx(30.0 + 8.0).epsilon(1e-12));
  CHECK(res.per_point[3] == doctest::Approx(1.0).epsilon(1e-12));

  CHECK_THROWS_AS((void)reprojection_loss({}, {}, identity, intr, cfg), Error);
}

TEST_CASE("inlier labels use an inclusive pixel threshold") {
  const CameraIntrinsics intr{100.0, 100.0, 0.0, 0.0, 640, 480};
  const Pose identity;
  const std::vector<Vec3> coords{
      Vec3(0.01, 0, 1),   // exactly 1 px from the observation
      Vec3(0.011, 0, 1),  // 1.1 px
      Vec3(0, 0, -1),     // behind
  };
  const std::vector<Vec2> pixels{Vec2(0, 0), Vec2(0, 0), Vec2(0, 0)};
  const auto labels = inlier_labels(coords, pixels, identity, intr, 1.0);
  REQUIRE(labels.size() == 3);
  CHECK(labels[0] == 1);  // error == tau counts as inlier
  CHECK(labels[1] == 0);
  CHECK(labels[2] == 0);
}

TEST_CASE("classification loss hand values and clamping") {
  std::vector<std::uint8_t> labels{1, 0, 1, 0};

  Eigen::VectorXd exact(4);
  exact << 1.0, 0.0, 1.0, 0.0;
  CHECK(classification_loss(exact, labels) < 1e-6);

  Eigen::VectorXd half = Eigen::VectorXd::Constant(4, 0.5);
  CHECK(classification_loss(half, labels) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-12));

  // Clamped endpoints stay finite and their gradient entries vanish.
  Eigen::VectorXd wrong(4);
  wrong << 0.0, 1.0, 0.0, 1.0;
  const double loss = classification_loss(wrong, labels);
  CHECK(std::isfinite(loss));
  CHECK(loss == doctest::Approx(-std::log(1e-7)).epsilon(1e-6));
  const Eigen::VectorXd g = grad_classification_loss_wrt_w(wrong, labels);
  for (int i = 0; i < 4; ++i) CHECK(g[i] == 0.0);

  Eigen::VectorXd bad(3);
  bad.setConstant(0.5);
  CHECK_THROWS_AS((void)classification_loss(bad, labels), Error);
  CHECK_THROWS_AS((void)classification_loss(Eigen::VectorXd(), {}), Error);
}

TEST_CASE("classification loss matches a scalar BCE loop") {
  Rng rng(11);
  const int n = 40;
  Eigen::VectorXd w(n);
  std::vector<std::uint8_t> labels(n);
  for (int i = 0; i < n; ++i) {
    w[i] = rng.uniform01();
    labels[i] = rng.uniform01() < 0.5 ? 0 : 1;
  }
  double want = 0.0;
  for (int i = 0; i < n; ++i) {
    const double wc = std::clamp(w[i], 1e-7, 1.0 - 1e-7);
    want += labels[i] ? -std::log(wc) : -std::log(1.0 - wc);
  }
  want /= n;
  CHECK(classification_loss(w, labels) == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("classification gradient matches central differences") {
  Rng rng(17);
  const int n = 25;
  Eigen::VectorXd w(n);
  std::vector<std::uint8_t> labels(n);
  for (int i = 0; i < n; ++i) {
    w[i] = rng.uniform(0.1, 0.9);  // interior, away from the clamp
    labels[i] = rng.uniform01() < 0.5 ? 0 : 1;
  }
  const Eigen::VectorXd g = grad_classification_loss_wrt_w(w, labels);
  const double h = 1e-6;
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd wp = w, wm = w;
    wp[i] += h;
    wm[i] -= h;
    const double fd =
        (classification_loss(wp, labels) - classification_loss(wm, labels)) /
        (2.0 * h);
    CHECK(rel_err(g[i], fd) < 1e-6);
  }
}

TEST_CASE("regression loss matches a scalar brute-force evaluation") {
  const auto corrs = random_corrs(30, 3);
  const DltSystem sys = DltSystem::build(corrs);
  const Vec12 t_unit = unit_pose_vector(random_pose(4));
  Rng rng(5);
  Eigen::VectorXd w(30);
  for (int i = 0; i < 30; ++i) w[i] = rng.uniform01();
  LossConfig cfg;

  const RegressionLossResult res = regression_loss(sys, w, t_unit, cfg);

  const Mat12 M = normal_matrix_by_hand(corrs, w);
  double residual = 0.0, diag = 0.0;
  for (int a = 0; a < 12; ++a) {
    diag += M(a, a);
    for (int b = 0; b < 12; ++b) residual += t_unit[a] * M(a, b) * t_unit[b];
  }
  const double trace = diag - residual;
  const double barrier = cfg.alpha * std::exp(-cfg.beta * trace);

  CHECK(rel_err(res.residual_term, residual) < 1e-10);
  CHECK(rel_err(res.trace, trace) < 1e-10);
  CHECK(rel_err(res.barrier_term, barrier) < 1e-10);
  CHECK(rel_err(res.value, residual + barrier) < 1e-10);

  Vec12 not_unit = t_unit * 1.5;
  CHECK_THROWS_AS((void)regression_loss(sys, w, not_unit, cfg), Error);
}

TEST_CASE("regression loss at zero weights is exactly the barrier magnitude") {
  const auto corrs = random_corrs(12, 9);
  const DltSystem sys = DltSystem::build(corrs);
  const Vec12 t_unit = unit_pose_vector(random_pose(2));
  LossConfig cfg;
  const RegressionLossResult res =
      regression_loss(sys, Eigen::VectorXd::Zero(12), t_unit, cfg);
  CHECK(res.residual_term == 0.0);
  CHECK(res.trace == 0.0);
  CHECK(res.value == cfg.alpha);
}

TEST_CASE("regression loss is permutation invariant and non-negative") {
  auto corrs = random_corrs(20, 21);
  const Vec12 t_unit = unit_pose_vector(random_pose(22));
  Rng rng(23);
  Eigen::VectorXd w(20);
  for (int i = 0; i < 20; ++i) w[i] = rng.uniform01();
  LossConfig cfg;
  const double base =
      regression_loss(DltSystem::build(corrs), w, t_unit, cfg).value;
  CHECK(base >= 0.0);

  std::vector<int> perm(20);
  std::iota(perm.begin(), perm.end(), 0);
  std::reverse(perm.begin(), perm.end());
  std::swap(perm[3], perm[11]);
  std::vector<Correspondence> shuffled(20);
  Eigen::VectorXd wp(20);
  for (int i = 0; i < 20; ++i) {
    shuffled[i] = corrs[perm[i]];
    wp[i] = w[perm[i]];
  }
  const double permuted =
      regression_loss(DltSystem::build(shuffled), wp, t_unit, cfg).value;
  CHECK(rel_err(permuted, base) < 1e-9);

  for (std::uint64_t seed = 30; seed < 40; ++seed) {
    const auto c = random_corrs(15, seed);
    Rng r(seed * 3 + 1);
    Eigen::VectorXd ww(15);
    for (int i = 0; i < 15; ++i) ww[i] = r.uniform01();
    CHECK(regression_loss(DltSystem::build(c), ww,
                          unit_pose_vector(random_pose(seed + 100)), cfg)
              .value >= 0.0);
  }
}

TEST_CASE("regression gradient wrt weights matches central differences") {
  const auto corrs = random_corrs(25, 31);
  const DltSystem sys = DltSystem::build(corrs);
  const Vec12 t_unit = unit_pose_vector(random_pose(32));
  Rng rng(33);
  Eigen::VectorXd w(25);
  for (int i = 0; i < 25; ++i) w[i] = rng.uniform(0.05, 1.0);
  LossConfig cfg;

  const Eigen::VectorXd g = grad_regression_loss_wrt_w(sys, w, t_unit, cfg);
  const double h = 1e-6;
  for (int i = 0; i < 25; ++i) {
    Eigen::VectorXd wp = w, wm = w;
    wp[i] += h;
    wm[i] -= h;
    const double fd = (regression_loss(sys, wp, t_unit, cfg).value -
                       regression_loss(sys, wm, t_unit, cfg).value) /
                      (2.0 * h);
    CHECK(rel_err(g[i], fd) < 1e-5);
  }
}

TEST_CASE("regression gradient is strictly negative at the true pose on exact data") {
  SceneParams p;
  p.seed = 7;
  const SyntheticScene sc = generate_scene(p);
  const auto corrs = scene_correspondences(sc);
  const DltSystem sys = DltSystem::build(corrs);
  const Vec12 t_unit = unit_pose_vector(sc.gt_pose);
  LossConfig cfg;
  const Eigen::VectorXd g = grad_regression_loss_wrt_w(
      sys, Eigen::VectorXd::Constant(sys.n, 0.5), t_unit, cfg);
  // Residual rows vanish on exact data, so only the barrier pull remains:
  // increasing any weight grows the trace and lowers the loss.
  for (int i = 0; i < sys.n; ++i) CHECK(g[i] < 0.0);
}

TEST_CASE("barrier term behaves like its small-beta expansion") {
  const auto corrs = random_corrs(18, 41);
  const DltSystem sys = DltSystem::build(corrs);
  const Vec12 t_unit = unit_pose_vector(random_pose(42));
  Rng rng(43);
  Eigen::VectorXd w(18);
  for (int i = 0; i < 18; ++i) w[i] = rng.uniform01();

  LossConfig cfg;
  cfg.beta = 0.0;
  const RegressionLossResult at_zero = regression_loss(sys, w, t_unit, cfg);
  CHECK(at_zero.barrier_term == cfg.alpha);  // exp(0) exactly

  cfg.beta = 1e-9;
  const RegressionLossResult near_zero = regression_loss(sys, w, t_unit, cfg);
  const double slope = (near_zero.barrier_term - cfg.alpha) / cfg.beta;
  CHECK(rel_err(slope, -cfg.alpha * near_zero.trace) < 1e-3);
}

TEST_CASE("regression gradient wrt coordinates matches central differences") {
  auto corrs = random_corrs(50, 51);
  const Vec12 t_unit = unit_pose_vector(random_pose(52));
  Rng rng(53);
  Eigen::VectorXd w(50);
  for (int i = 0; i < 50; ++i) w[i] = rng.uniform01();
  w[7] = 0.0;
  w[19] = 0.0;
  LossConfig cfg;

  const Eigen::Matrix<double, Eigen::Dynamic, 3> g =
      grad_regression_loss_wrt_coords(corrs, w, t_unit, cfg);

  // Zero-weight points contribute nothing, bitwise.
  CHECK(g.row(7).norm() == 0.0);
  CHECK(g.row(19).norm() == 0.0);

  const double h = 1e-6;
  auto loss_at = [&](const std::vector<Correspondence>& cs) {
    return regression_loss(DltSystem::build(cs), w, t_unit, cfg).value;
  };
  for (int i = 0; i < 50; i += 7) {
    for (int k = 0; k < 3; ++k) {
      auto cp = corrs, cm = corrs;
      double* fp = k == 0 ? &cp[i].x : k == 1 ? &cp[i].y : &cp[i].z;
      double* fm = k == 0 ? &cm[i].x : k == 1 ? &cm[i].y : &cm[i].z;
      *fp += h;
      *fm -= h;
      const double fd = (loss_at(cp) - loss_at(cm)) / (2.0 * h);
      CHECK(rel_err(g(i, k), fd) < 1e-4);
    }
  }
}

TEST_CASE("residual rows are invariant to a coordinate/translation shift") {
  // Shifting every coordinate by delta while replacing t with t - R*delta
  // reproduces the same residual rows exactly; the coordinate gradient of the
  // residual term must integrate to zero along that direction.
  const auto corrs = random_corrs(10, 61);
  const Pose pose = random_pose(62);
  const Vec3 delta(0.37, -0.21, 0.54);

  Pose shifted = pose;
  shifted.t = pose.t - pose.R * delta;

  Vec12 vec_orig, vec_shift;
  {
    const Mat34 a = pose.matrix(), b = shifted.matrix();
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 4; ++c) {
        vec_orig[4 * r + c] = a(r, c);
        vec_shift[4 * r + c] = b(r, c);
      }
  }

  for (const Correspondence& c : corrs) {
    Correspondence cs = c;
    cs.x += delta.x();
    cs.y += delta.y();
    cs.z += delta.z();
    const RowPair rows = build_rows(c);
    const RowPair rows_s = build_rows(cs);
    for (int r = 0; r < 2; ++r) {
      const double orig = rows.row(r) * vec_orig;
      const double shift = rows_s.row(r) * vec_shift;
      CHECK(std::abs(orig - shift) < 1e-12);
    }
  }
}

TEST_CASE("residual-term coordinate gradient matches central differences") {
  auto corrs = random_corrs(30, 71);
  const Vec12 t_unit = unit_pose_vector(random_pose(72));
  Rng rng(73);
  Eigen::VectorXd w(30);
  for (int i = 0; i < 30; ++i) w[i] = rng.uniform01();

  const Eigen::Matrix<double, Eigen::Dynamic, 3> g =
      grad_residual_term_wrt_coords(corrs, w, t_unit);

  LossConfig cfg;
  const double h = 1e-6;
  auto term_at = [&](const std::vector<Correspondence>& cs) {
    return regression_loss(DltSystem::build(cs), w, t_unit, cfg).residual_term;
  };
  for (int i = 0; i < 30; i += 5) {
    for (int k = 0; k < 3; ++k) {
      auto cp = corrs, cm = corrs;
      double* fp = k == 0 ? &cp[i].x : k == 1 ? &cp[i].y : &cp[i].z;
      double* fm = k == 0 ? &cm[i].x : k == 1 ? &cm[i].y : &cm[i].z;
      *fp += h;
      *fm -= h;
      const double fd = (term_at(cp) - term_at(cm)) / (2.0 * h);
      CHECK(rel_err(g(i, k), fd) < 1e-5);
    }
  }
}

TEST_CASE("photometric loss vanishes at the true pose of a generated pair") {
  ImagePairParams p;
  p.seed = 5;
  const SyntheticImagePair pair = generate_image_pair(p);

  const PhotometricResult at_gt = photometric_loss(pair, pair.target_pose);
  CHECK(at_gt.total < 1e-12);
  // Default geometry shifts by exactly 2 px, so 2 source columns fall outside.
  CHECK(at_gt.valid_pixels == 126 * 96);

  Pose off = pair.target_pose;
  off.t.x() += 0.01;
  CHECK(photometric_loss(pair, off).total > 1e-4);
}

TEST_CASE("photometric loss has a local minimum at the true pose") {
  ImagePairParams p;
  p.seed = 8;
  const SyntheticImagePair pair = generate_image_pair(p);
  const double base = photometric_loss(pair, pair.target_pose).total;

  for (int axis = 0; axis < 3; ++axis) {
    for (double sign : {-1.0, 1.0}) {
      Pose pt = pair.target_pose;
      pt.t[axis] += sign * 0.01;
      CHECK(photometric_loss(pair, pt).total > base + 1e-6);

      Vec3 omega = Vec3::Zero();
      omega[axis] = sign * 0.5 * M_PI / 180.0;
      Pose pr = pair.target_pose;
      pr.R = pair.target_pose.R * exp_so3(omega);
      CHECK(photometric_loss(pair, pr).total > base + 1e-6);
    }
  }
}

namespace {

// 4x4 pair whose coordinates project each source pixel exactly onto the same
// target pixel, making the warped image equal the target image bitwise.
SyntheticImagePair exact_grid_pair() {
  SyntheticImagePair pair;
  pair.intrinsics = CameraIntrinsics{10.0, 10.0, 1.5, 1.5, 4, 4};
  pair.source_image.width = pair.target_image.width = 4;
  pair.source_image.height = pair.target_image.height = 4;
  pair.source_image.pixels.resize(16);
  pair.target_image.pixels.resize(16);
  pair.source_coords.resize(16);
  const double z = 4.0;
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 4; ++x)
      pair.source_coords[y * 4 + x] =
          Vec3((x - 1.5) / 10.0 * z, (y - 1.5) / 10.0 * z, z);
  return pair;
}

}  // namespace

TEST_CASE("photometric L1 term matches a hand-computed mean") {
  SyntheticImagePair pair = exact_grid_pair();
  Rng rng(81);
  for (int i = 0; i < 16; ++i) {
    pair.source_image.pixels[i] = rng.uniform01();
    pair.target_image.pixels[i] = rng.uniform01();
  }

  const PhotometricResult res = photometric_loss(pair, Pose{});
  CHECK(res.valid_pixels == 16);
  double want = 0.0;
  for (int i = 0; i < 16; ++i)
    want += std::abs(pair.source_image.pixels[i] - pair.target_image.pixels[i]);
  want /= 16.0;
  CHECK(res.l1 == doctest::Approx(want).epsilon(1e-12));
  CHECK(res.ssim >= 0.0);
  CHECK(res.ssim <= 1.0);
  CHECK(res.total == res.l1 + res.ssim);

  // Weighted mean: mask concentrates everything on the first row.
  Image mask;
  mask.width = mask.height = 4;
  mask.pixels.assign(16, 0.0);
  for (int x = 0; x < 4; ++x) mask.pixels[x] = 1.0;
  const PhotometricResult masked = photometric_loss(pair, Pose{}, &mask);
  double want_masked = 0.0;
  for (int x = 0; x < 4; ++x)
    want_masked +=
        std::abs(pair.source_image.pixels[x] - pair.target_image.pixels[x]);
  want_masked /= 4.0;
  CHECK(masked.l1 == doctest::Approx(want_masked).epsilon(1e-12));

  // A uniform mask must not change either term.
  Image uniform;
  uniform.width = uniform.height = 4;
  uniform.pixels.assign(16, 0.7);
  const PhotometricResult um = photometric_loss(pair, Pose{}, &uniform);
  CHECK(um.l1 == doctest::Approx(res.l1).epsilon(1e-12));
  CHECK(um.ssim == doctest::Approx(res.ssim).epsilon(1e-12));

  Image bad;
  bad.width = bad.height = 2;
  bad.pixels.assign(4, 1.0);
  CHECK_THROWS_AS((void)photometric_loss(pair, Pose{}, &bad), Error);
}

TEST_CASE("photometric loss is exactly zero when target equals source") {
  SyntheticImagePair pair = exact_grid_pair();
  Rng rng(82);
  for (int i = 0; i < 16; ++i) {
    pair.source_image.pixels[i] = rng.uniform01();
    pair.target_image.pixels[i] = pair.source_image.pixels[i];
  }
  const PhotometricResult res = photometric_loss(pair, Pose{});
  CHECK(res.l1 == 0.0);
  CHECK(res.ssim == 0.0);
  CHECK(res.total == 0.0);
}

TEST_CASE("photometric loss reports missing overlap") {
  ImagePairParams p;
  p.seed = 9;
  const SyntheticImagePair pair = generate_image_pair(p);
  Pose behind;
  behind.t = Vec3(0, 0, -100.0);  // plane ends up behind the camera
  CHECK_THROWS_WITH_AS(
      (void)photometric_loss(pair, behind),
      "only 0 of 12288 pixels warp into the target", NoOverlapError);
}
