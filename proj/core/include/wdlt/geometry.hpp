#pragma once

// Camera model and SE(3) utilities.
//
// Pose convention: world-to-camera throughout, x_cam = R * x_world + t.
// Camera-to-world quantities are exposed through explicit accessors and file
// formats carry a "convention" tag, so nothing has to guess.

#include <Eigen/Dense>
#include <optional>

namespace wdlt {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Vec12 = Eigen::Matrix<double, 12, 1>;
using Mat3 = Eigen::Matrix3d;
using Mat12 = Eigen::Matrix<double, 12, 12>;
using Mat34 = Eigen::Matrix<double, 3, 4>;
using Mat2x6 = Eigen::Matrix<double, 2, 6>;

struct CameraIntrinsics {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 0;
  int height = 0;

  bool valid() const {
    return fx > 0.0 && fy > 0.0 && width > 0 && height > 0;
  }
  // Inside the pixel grid [0, w-1] x [0, h-1] (continuous coordinates, so a
  // bilinear lookup at an inside point never reads out of bounds).
  bool contains(const Vec2& px) const {
    return px.x() >= 0.0 && px.x() <= width - 1.0 && px.y() >= 0.0 &&
           px.y() <= height - 1.0;
  }
};

struct Pose {
  Mat3 R = Mat3::Identity();  // world-to-camera rotation
  Vec3 t = Vec3::Zero();      // world-to-camera translation

  static Pose from_world_to_camera(const Mat3& R, const Vec3& t) {
    return Pose{R, t};
  }
  static Pose from_camera_to_world(const Mat3& R_c2w, const Vec3& t_c2w) {
    return Pose{R_c2w.transpose(), -R_c2w.transpose() * t_c2w};
  }

  Vec3 to_camera(const Vec3& p_world) const { return R * p_world + t; }
  Vec3 to_world(const Vec3& p_camera) const {
    return R.transpose() * (p_camera - t);
  }
  Vec3 camera_center() const { return -R.transpose() * t; }

  Pose inverse() const { return Pose{R.transpose(), -R.transpose() * t}; }

  Mat34 matrix() const {
    Mat34 m;
    m.leftCols<3>() = R;
    m.col(3) = t;
    return m;
  }

  // ||R^T R - I||_F and |det R - 1| both within tol.
  bool is_rigid(double tol = 1e-9) const;
};

Mat3 skew(const Vec3& v);

// Rodrigues exponential / logarithm on SO(3), with series fallbacks near 0.
Mat3 exp_so3(const Vec3& omega);
Vec3 log_so3(const Mat3& R);

// SE(3) exponential of [omega; nu] and its inverse. The returned Pose is the
// increment transform itself (applied by composition, not a camera pose).
Pose exp_se3(const Vec6& xi);
Vec6 log_se3(const Pose& T);

// Matrix product a * b as 4x4 rigid transforms: result maps p to
// a.R*(b.R*p + b.t) + a.t. Right-multiplying an increment lives here too.
Pose compose(const Pose& a, const Pose& b);

// Projects a world point. Empty when the camera-frame depth is <= 0.
std::optional<Vec2> project(const Pose& pose, const CameraIntrinsics& intr,
                            const Vec3& p_world);

// Geodesic distance between two rotations, in degrees.
double rotation_angle_deg(const Mat3& a, const Mat3& b);

// Nearest rotation matrix in the Frobenius sense (SVD projection).
Mat3 nearest_rotation(const Mat3& m);

}  // namespace wdlt
