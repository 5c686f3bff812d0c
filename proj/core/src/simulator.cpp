#include "wdlt/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "wdlt/errors.hpp"
#include "wdlt/rng.hpp"

namespace wdlt {

CameraIntrinsics default_intrinsics() {
  return CameraIntrinsics{525.0, 525.0, 320.0, 240.0, 640, 480};
}

Pose default_scene_pose() {
  return Pose{exp_so3(Vec3(0.12, -0.20, 0.08)), Vec3(0.30, -0.20, 0.50)};
}

namespace {

void validate_scene_params(const SceneParams& p) {
  if (p.n_points < 7)
    throw Error("scene needs at least 7 points, got " +
                std::to_string(p.n_points));
  if (!(p.outlier_fraction >= 0.0 && p.outlier_fraction <= 1.0))
    throw Error("outlier_fraction must be in [0, 1]");
  if (p.pixel_noise_sigma < 0.0 || p.coord_noise_sigma < 0.0)
    throw Error("noise sigmas must be non-negative");
  if (!p.intrinsics.valid()) throw Error("invalid intrinsics");
  if (!p.pose.is_rigid(1e-9)) throw Error("ground-truth pose is not rigid");
}

Vec2 project_camera_point(const Vec3& pc, const CameraIntrinsics& intr) {
  return Vec2(intr.fx * pc.x() / pc.z() + intr.cx,
              intr.fy * pc.y() / pc.z() + intr.cy);
}

}  // namespace

SceneSequence generate_sequence(const SceneParams& params, int n_frames,
                                double frame_baseline_m) {
  validate_scene_params(params);
  if (n_frames < 1) throw Error("sequence needs at least one frame");

  const int n = params.n_points;
  const CameraIntrinsics& intr = params.intrinsics;
  Rng rng(params.seed);

  // Frame poses: identical rotation, camera center slides b meters along its
  // own x axis per frame, which in world-to-camera terms is t_k = t0 - k*b*ex.
  std::vector<Pose> poses(n_frames);
  for (int k = 0; k < n_frames; ++k)
    poses[k] = Pose{params.pose.R,
                    params.pose.t - k * frame_baseline_m * Vec3::UnitX()};

  // Draw order, fixed for reproducibility:
  //   1. per accepted point: 3 uniforms (x, y, z), repeated on rejection
  //   2. per frame, per point: 2 normals of pixel noise (+ redraws)
  //   3. per point: 3 normals of coordinate noise
  //   4. outlier index selection: k uniform ints
  //   5. per outlier (ascending index): 3 uniforms for the replacement coord
  std::vector<Vec3> cam_points;      // frame-0 camera coordinates
  std::vector<Vec3> world_points;
  cam_points.reserve(n);
  world_points.reserve(n);
  long attempts = 0;
  const long max_attempts = 1000 + 200L * n;
  while (static_cast<int>(cam_points.size()) < n) {
    if (++attempts > max_attempts)
      throw Error("frustum sampling failed: fewer than " + std::to_string(n) +
                  " points visible in all frames");
    const double x = rng.uniform(-2.0, 2.0);
    const double y = rng.uniform(-2.0, 2.0);
    const double z = rng.uniform(2.0, 6.0);
    const Vec3 pc(x, y, z);
    bool visible = true;
    for (int k = 0; k < n_frames && visible; ++k) {
      const Vec3 pk = pc - k * frame_baseline_m * Vec3::UnitX();
      visible = pk.z() > 0.0 && intr.contains(project_camera_point(pk, intr));
    }
    if (!visible) continue;
    cam_points.push_back(pc);
    world_points.push_back(params.pose.to_world(pc));
  }

  std::vector<std::vector<Vec2>> obs(n_frames, std::vector<Vec2>(n));
  for (int k = 0; k < n_frames; ++k) {
    for (int i = 0; i < n; ++i) {
      const Vec3 pk = cam_points[i] - k * frame_baseline_m * Vec3::UnitX();
      const Vec2 exact = project_camera_point(pk, intr);
      Vec2 noisy = exact + params.pixel_noise_sigma * Vec2(rng.normal(), rng.normal());
      int tries = 0;
      while (!intr.contains(noisy)) {
        if (++tries > 100)
          throw Error("pixel noise pushed an observation out of the image");
        noisy = exact + params.pixel_noise_sigma * Vec2(rng.normal(), rng.normal());
      }
      obs[k][i] = noisy;
    }
  }

  std::vector<Vec3> predicted(n);
  for (int i = 0; i < n; ++i)
    predicted[i] = world_points[i] +
                   params.coord_noise_sigma *
                       Vec3(rng.normal(), rng.normal(), rng.normal());

  const int n_outliers =
      static_cast<int>(std::llround(params.outlier_fraction * n));
  std::vector<std::uint8_t> mask(n, 0);
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  for (int j = 0; j < n_outliers; ++j) {
    const int k = j + static_cast<int>(rng.uniform_int(n - j));
    std::swap(idx[j], idx[k]);
  }
  std::vector<int> outliers(idx.begin(), idx.begin() + n_outliers);
  std::sort(outliers.begin(), outliers.end());

  if (n_outliers > 0) {
    Vec3 lo = world_points[0], hi = world_points[0];
    for (const Vec3& p : world_points) {
      lo = lo.cwiseMin(p);
      hi = hi.cwiseMax(p);
    }
    const Vec3 center = 0.5 * (lo + hi);
    const Vec3 half = hi - center;  // expanded box: center +- 2 * half
    for (int i : outliers) {
      mask[i] = 1;
      for (int a = 0; a < 3; ++a)
        predicted[i][a] =
            rng.uniform(center[a] - 2.0 * half[a], center[a] + 2.0 * half[a]);
    }
  }

  SceneSequence seq;
  seq.poses = std::move(poses);
  seq.pixel_obs = std::move(obs);
  seq.scene.gt_points = std::move(world_points);
  seq.scene.predicted_coords = std::move(predicted);
  seq.scene.pixel_obs = seq.pixel_obs[0];
  seq.scene.outlier_mask = std::move(mask);
  seq.scene.gt_pose = seq.poses[0];
  seq.scene.intrinsics = intr;
  seq.scene.seed = params.seed;
  return seq;
}

SyntheticScene generate_scene(const SceneParams& params) {
  return generate_sequence(params, 1, 0.0).scene;
}

std::vector<Correspondence> make_correspondences(std::span<const Vec3> coords,
                                                 std::span<const Vec2> pixels,
                                                 const CameraIntrinsics& intr) {
  if (coords.size() != pixels.size())
    throw Error("coords/pixels size mismatch");
  std::vector<Correspondence> corrs(coords.size());
  for (size_t i = 0; i < coords.size(); ++i) {
    const Vec2 uv = normalize_pixel(pixels[i], intr);
    corrs[i] = Correspondence{coords[i].x(), coords[i].y(), coords[i].z(),
                              uv.x(), uv.y()};
  }
  return corrs;
}

std::vector<Correspondence> scene_correspondences(const SyntheticScene& scene) {
  return make_correspondences(scene.predicted_coords, scene.pixel_obs,
                              scene.intrinsics);
}

namespace {

struct PlaneTexture {
  double gx = 0.0, gy = 0.0;
  struct Wave {
    double amp, kx, ky, phase;
  };
  std::vector<Wave> waves;

  double value(double x, double y) const {
    double v = 0.5 + gx * x + gy * y;
    for (const Wave& w : waves)
      v += w.amp * std::sin(w.kx * x + w.ky * y + w.phase);
    return std::clamp(v, 0.0, 1.0);
  }
};

PlaneTexture draw_texture(Rng& rng, int n_waves, double amplitude) {
  PlaneTexture tex;
  const double sx = rng.uniform01() < 0.5 ? -1.0 : 1.0;
  tex.gx = sx * rng.uniform(0.04, 0.10);
  const double sy = rng.uniform01() < 0.5 ? -1.0 : 1.0;
  tex.gy = sy * rng.uniform(0.04, 0.10);
  for (int j = 0; j < n_waves; ++j) {
    PlaneTexture::Wave w;
    w.amp = amplitude * rng.uniform(0.5, 1.0);
    const double wavelength = rng.uniform(0.8, 2.5);
    const double angle = rng.uniform(0.0, 2.0 * M_PI);
    const double k = 2.0 * M_PI / wavelength;
    w.kx = k * std::cos(angle);
    w.ky = k * std::sin(angle);
    w.phase = rng.uniform(0.0, 2.0 * M_PI);
    tex.waves.push_back(w);
  }
  return tex;
}

}  // namespace

SyntheticImagePair generate_image_pair(const ImagePairParams& params) {
  const CameraIntrinsics& intr = params.intrinsics;
  if (!intr.valid()) throw Error("invalid intrinsics");
  if (params.plane_depth_m <= 0.0) throw Error("plane depth must be positive");
  if (!params.source_pose.is_rigid(1e-9))
    throw Error("source pose is not rigid");

  const Pose anchor = params.plane_frame_pose.value_or(params.source_pose);
  // Plane z = depth in the anchor camera; in the world it is n . q = n . p0.
  const Vec3 n_world = anchor.R.row(2).transpose();
  const Vec3 p0 = anchor.to_world(Vec3(0.0, 0.0, params.plane_depth_m));
  const double plane_offset = n_world.dot(p0);

  Rng rng(params.seed);
  const PlaneTexture tex =
      draw_texture(rng, params.texture_waves, params.texture_amplitude);

  SyntheticImagePair pair;
  pair.intrinsics = intr;
  pair.source_pose = params.source_pose;
  pair.target_pose = Pose{params.source_pose.R,
                          params.source_pose.t - params.baseline_m * Vec3::UnitX()};

  auto render = [&](const Pose& pose, Image& img, std::vector<Vec3>* coords) {
    img.width = intr.width;
    img.height = intr.height;
    img.pixels.resize(static_cast<size_t>(intr.width) * intr.height);
    const Vec3 center = pose.camera_center();
    const double denom_offset = plane_offset - n_world.dot(center);
    for (int y = 0; y < intr.height; ++y) {
      for (int x = 0; x < intr.width; ++x) {
        const Vec3 dir_c((x - intr.cx) / intr.fx, (y - intr.cy) / intr.fy, 1.0);
        const Vec3 dir_w = pose.R.transpose() * dir_c;
        const double denom = n_world.dot(dir_w);
        if (std::abs(denom) < 1e-12)
          throw Error("image plane parallel to a viewing ray");
        const double lambda = denom_offset / denom;
        if (lambda <= 0.0)
          throw Error("textured plane is behind the camera");
        const Vec3 q = center + lambda * dir_w;
        const Vec3 pc = anchor.to_camera(q);
        img.at(x, y) = tex.value(pc.x(), pc.y());
        if (coords) (*coords)[y * intr.width + x] = q;
      }
    }
  };

  pair.source_coords.resize(static_cast<size_t>(intr.width) * intr.height);
  render(pair.source_pose, pair.source_image, &pair.source_coords);
  render(pair.target_pose, pair.target_image, nullptr);

  int overlapping = 0;
  for (const Vec3& q : pair.source_coords) {
    const auto px = project(pair.target_pose, intr, q);
    if (px && intr.contains(*px)) ++overlapping;
  }
  const double frac =
      static_cast<double>(overlapping) / static_cast<double>(pair.source_coords.size());
  if (frac < 0.5)
    throw NoOverlapError("only " + std::to_string(100.0 * frac) +
                         "% of source pixels project into the target view");
  return pair;
}

}  // namespace wdlt
