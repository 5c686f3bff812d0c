#include <algorithm>
#include <vector>

#include "doctest.h"
#include "wdlt/errors.hpp"
#include "wdlt/losses.hpp"
#include "wdlt/metrics.hpp"
#include "wdlt/simulator.hpp"

using namespace wdlt;

namespace {
bool scenes_identical(const SyntheticScene& a, const SyntheticScene& b) {
  if (a.size() != b.size() || a.seed != b.seed) return false;
  for (int i = 0; i < a.size(); ++i) {
    if (a.gt_points[i] != b.gt_points[i]) return false;
    if (a.predicted_coords[i] != b.predicted_coords[i]) return false;
    if (a.pixel_obs[i] != b.pixel_obs[i]) return false;
    if (a.outlier_mask[i] != b.outlier_mask[i]) return false;
  }
  return a.gt_pose.R == b.gt_pose.R && a.gt_pose.t == b.gt_pose.t;
}
}  // namespace

TEST_CASE("zero-noise scene projects exactly onto its observations") {
  SceneParams p;
  p.seed = 1;
  const SyntheticScene sc = generate_scene(p);
  REQUIRE(sc.size() == 100);
  for (int i = 0; i < sc.size(); ++i) {
    CHECK(sc.predicted_coords[i] == sc.gt_points[i]);
    CHECK(sc.outlier_mask[i] == 0);
    const auto px = project(sc.gt_pose, sc.intrinsics, sc.predicted_coords[i]);
    REQUIRE(px.has_value());
    CHECK((*px - sc.pixel_obs[i]).norm() < 1e-12);
    CHECK(sc.intrinsics.contains(sc.pixel_obs[i]));
    CHECK(sc.gt_pose.to_camera(sc.gt_points[i]).z() > 0.0);
  }
}

TEST_CASE("outlier count is exact and flags mark the replaced points") {
  SceneParams p;
  p.outlier_fraction = 0.3;
  p.seed = 2;
  const SyntheticScene sc = generate_scene(p);
  int flagged = 0;
  for (int i = 0; i < sc.size(); ++i) {
    if (sc.outlier_mask[i]) {
      ++flagged;
      CHECK(sc.predicted_coords[i] != sc.gt_points[i]);
    } else {
      CHECK(sc.predicted_coords[i] == sc.gt_points[i]);  // no coord noise here
    }
  }
  CHECK(flagged == 30);

  SceneParams half = p;
  half.n_points = 15;
  half.outlier_fraction = 0.5;
  int flagged15 = 0;
  for (std::uint8_t m : generate_scene(half).outlier_mask) flagged15 += m;
  CHECK(flagged15 == 8);  // round(0.5 * 15)
}

TEST_CASE("outlier reprojection errors dwarf inlier ones") {
  SceneParams p;
  p.outlier_fraction = 0.3;
  p.coord_noise_sigma = 0.01;
  p.seed = 3;
  const SyntheticScene sc = generate_scene(p);
  std::vector<double> in_err, out_err;
  for (int i = 0; i < sc.size(); ++i) {
    const ReprojResult r =
        reproj_error(sc.gt_pose, sc.intrinsics, sc.predicted_coords[i], sc.pixel_obs[i]);
    const double e = r.behind_camera ? 1e9 : r.error_px;
    (sc.outlier_mask[i] ? out_err : in_err).push_back(e);
  }
  CHECK(median(out_err) > 10.0 * median(in_err));
}

TEST_CASE("generation is byte-identical for a fixed seed") {
  SceneParams p;
  p.n_points = 200;
  p.coord_noise_sigma = 0.01;
  p.seed = 7;
  CHECK(scenes_identical(generate_scene(p), generate_scene(p)));

  SceneParams q = p;
  q.seed = 8;
  CHECK(!scenes_identical(generate_scene(p), generate_scene(q)));
}

TEST_CASE("pixel noise has the requested magnitude") {
  SceneParams p;
  p.n_points = 400;
  p.pixel_noise_sigma = 1.0;
  p.seed = 3;
  const SyntheticScene sc = generate_scene(p);
  double ss = 0.0;
  int n = 0;
  for (int i = 0; i < sc.size(); ++i) {
    const auto px = project(sc.gt_pose, sc.intrinsics, sc.gt_points[i]);
    REQUIRE(px.has_value());
    const Vec2 r = sc.pixel_obs[i] - *px;
    ss += r.squaredNorm();
    n += 2;
  }
  const double sigma = std::sqrt(ss / n);
  CHECK(sigma > 0.85);
  CHECK(sigma < 1.15);
}

TEST_CASE("parameter validation") {
  SceneParams p;
  p.n_points = 6;
  CHECK_THROWS_AS((void)generate_scene(p), Error);
  p.n_points = 100;
  p.outlier_fraction = 1.5;
  CHECK_THROWS_AS((void)generate_scene(p), Error);
}

TEST_CASE("sequences slide the camera along its own x axis") {
  SceneParams p;
  p.seed = 4;
  const double b = 0.025;
  const SceneSequence seq = generate_sequence(p, 5, b);
  REQUIRE(seq.poses.size() == 5);
  REQUIRE(seq.pixel_obs.size() == 5);
  CHECK(seq.poses[0].R == seq.scene.gt_pose.R);
  CHECK(seq.poses[0].t == seq.scene.gt_pose.t);

  for (int k = 0; k < 5; ++k) {
    CHECK(seq.poses[k].R == seq.poses[0].R);
    const Vec3 step =
        seq.poses[0].R * (seq.poses[k].camera_center() - seq.poses[0].camera_center());
    CHECK((step - k * b * Vec3::UnitX()).norm() < 1e-12);

    // Zero noise: each frame's observations are exact in-bounds projections.
    for (int i = 0; i < seq.scene.size(); ++i) {
      const auto px = project(seq.poses[k], seq.scene.intrinsics, seq.scene.gt_points[i]);
      REQUIRE(px.has_value());
      CHECK((*px - seq.pixel_obs[k][i]).norm() < 1e-12);
      CHECK(seq.scene.intrinsics.contains(seq.pixel_obs[k][i]));
    }
  }
  for (int i = 0; i < seq.scene.size(); ++i)
    CHECK(seq.scene.pixel_obs[i] == seq.pixel_obs[0][i]);
}

TEST_CASE("correspondences carry normalized observations") {
  SceneParams p;
  p.seed = 5;
  const SyntheticScene sc = generate_scene(p);
  const auto corrs = scene_correspondences(sc);
  REQUIRE(corrs.size() == static_cast<size_t>(sc.size()));
  for (int i = 0; i < sc.size(); ++i) {
    CHECK(corrs[i].x == sc.predicted_coords[i].x());
    const Vec2 uv = normalize_pixel(sc.pixel_obs[i], sc.intrinsics);
    CHECK(corrs[i].u == uv.x());
    CHECK(corrs[i].v == uv.y());
  }
}

TEST_CASE("image pairs warp by an exact integer shift at the defaults") {
  ImagePairParams pp;
  pp.seed = 9;
  const SyntheticImagePair pair = generate_image_pair(pp);
  const int w = pair.source_image.width, h = pair.source_image.height;
  REQUIRE(w == 128);
  REQUIRE(h == 96);
  REQUIRE(pair.source_coords.size() == static_cast<size_t>(w) * h);

  for (double v : pair.source_image.pixels) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }

  // fx * baseline / depth = 160 * 0.05 / 4 = 2 px, straight along -x.
  for (int y = 0; y < h; y += 7) {
    for (int x = 0; x < w; x += 11) {
      const Vec3& s = pair.source_coords[static_cast<size_t>(y) * w + x];
      const auto src = project(pair.source_pose, pair.intrinsics, s);
      REQUIRE(src.has_value());
      CHECK((*src - Vec2(x, y)).norm() < 1e-9);
      const auto tgt = project(pair.target_pose, pair.intrinsics, s);
      REQUIRE(tgt.has_value());
      CHECK((*tgt - Vec2(x - 2, y)).norm() < 1e-9);
    }
  }
}

TEST_CASE("zero baseline makes the two views identical") {
  ImagePairParams pp;
  pp.seed = 10;
  pp.baseline_m = 0.0;
  const SyntheticImagePair pair = generate_image_pair(pp);
  CHECK(pair.source_image.pixels == pair.target_image.pixels);
  CHECK(pair.source_pose.t == pair.target_pose.t);
}

TEST_CASE("image pair generation is deterministic and rejects disjoint views") {
  ImagePairParams pp;
  pp.seed = 11;
  const SyntheticImagePair a = generate_image_pair(pp);
  const SyntheticImagePair b = generate_image_pair(pp);
  CHECK(a.source_image.pixels == b.source_image.pixels);
  CHECK(a.target_image.pixels == b.target_image.pixels);

  pp.baseline_m = 200.0;  // shifts the plane thousands of pixels
  CHECK_THROWS_AS((void)generate_image_pair(pp), NoOverlapError);
}
