#pragma once

// Synthetic data with exact ground truth: box scenes of 2D-3D correspondences
// (optionally noisy and outlier-contaminated), constant-rotation camera
// sequences, and textured fronto-parallel plane image pairs for photometric
// supervision.
//
// Everything is driven by wdlt::Rng with a documented draw order, so a given
// parameter set reproduces byte-identical data on any platform.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "wdlt/dlt.hpp"
#include "wdlt/geometry.hpp"

namespace wdlt {

CameraIntrinsics default_intrinsics();  // 640x480, f = 525, centered
Pose default_scene_pose();              // mild rotation + offset, world-to-camera

struct SceneParams {
  int n_points = 100;
  double pixel_noise_sigma = 0.0;   // px, Gaussian on observations
  double coord_noise_sigma = 0.0;   // m, Gaussian on predicted coordinates
  double outlier_fraction = 0.0;    // rounded to the nearest count
  std::uint64_t seed = 0;
  CameraIntrinsics intrinsics = default_intrinsics();
  Pose pose = default_scene_pose();
};

struct SyntheticScene {
  std::vector<Vec3> gt_points;         // world frame
  std::vector<Vec3> predicted_coords;  // noisy / outlier-replaced
  std::vector<Vec2> pixel_obs;
  std::vector<std::uint8_t> outlier_mask;
  Pose gt_pose;
  CameraIntrinsics intrinsics;
  std::uint64_t seed = 0;

  int size() const { return static_cast<int>(gt_points.size()); }
};

// Points are drawn in the camera frustum (x, y in [-2, 2], z in [2, 6] meters,
// resampled until the exact projection lands inside the image), mapped to the
// world frame through the ground-truth pose. Exactly
// round(outlier_fraction * N) predicted coordinates are replaced by uniform
// draws from the scene bounding box grown to twice its half-extents.
// Requires n_points >= 7; throws when the frustum rejection cap is hit.
SyntheticScene generate_scene(const SceneParams& params);

// Frames share one point cloud and rotation; the camera slides along its own
// x axis by frame_baseline_m per frame. scene holds frame 0's observations.
struct SceneSequence {
  SyntheticScene scene;
  std::vector<Pose> poses;                  // world-to-camera, one per frame
  std::vector<std::vector<Vec2>> pixel_obs; // [frame][point]
};

SceneSequence generate_sequence(const SceneParams& params, int n_frames,
                                double frame_baseline_m);

// Correspondences a solver consumes: predicted coordinates + normalized
// observations.
std::vector<Correspondence> scene_correspondences(const SyntheticScene& scene);
std::vector<Correspondence> make_correspondences(std::span<const Vec3> coords,
                                                 std::span<const Vec2> pixels,
                                                 const CameraIntrinsics& intr);

struct Image {
  int width = 0;
  int height = 0;
  std::vector<double> pixels;  // row-major, intensities in [0, 1]

  double at(int x, int y) const { return pixels[y * width + x]; }
  double& at(int x, int y) { return pixels[y * width + x]; }
};

struct ImagePairParams {
  CameraIntrinsics intrinsics{160.0, 160.0, 64.0, 48.0, 128, 96};
  Pose source_pose;  // identity by default
  // Frame the textured plane is anchored to; defaults to source_pose. A
  // multi-pair scenario passes one shared anchor so every pair images the
  // same world surface.
  std::optional<Pose> plane_frame_pose;
  double plane_depth_m = 4.0;  // along the anchor frame's optical axis
  double baseline_m = 0.05;    // target camera offset along the source x axis
  int texture_waves = 3;
  double texture_amplitude = 0.08;
  std::uint64_t seed = 0;
};

// With the defaults the ground-truth warp is a uniform integer pixel shift
// (fx * baseline / depth = 160 * 0.05 / 4 = 2 px), so bilinear resampling of
// the target reproduces the source exactly; photometric-zero tests lean on
// this. Texture = affine ramp + seeded low-frequency waves, which keeps a
// nonzero gradient everywhere and a wide basin around the true pose.
struct SyntheticImagePair {
  Image source_image;
  Image target_image;
  Pose source_pose;  // world-to-camera
  Pose target_pose;
  std::vector<Vec3> source_coords;  // world point behind each source pixel, row-major
  CameraIntrinsics intrinsics;
};

// Throws NoOverlapError when less than half of the source pixels project into
// the target view, and Error when the plane is not in front of a camera.
SyntheticImagePair generate_image_pair(const ImagePairParams& params);

}  // namespace wdlt
