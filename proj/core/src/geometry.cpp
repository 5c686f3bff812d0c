#include "wdlt/geometry.hpp"

#include <cmath>

namespace wdlt {

bool Pose::is_rigid(double tol) const {
  const double ortho = (R.transpose() * R - Mat3::Identity()).norm();
  return ortho < tol && std::abs(R.determinant() - 1.0) <= tol &&
         R.allFinite() && t.allFinite();
}

Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return m;
}

Mat3 exp_so3(const Vec3& omega) {
  const double theta2 = omega.squaredNorm();
  const double theta = std::sqrt(theta2);
  const Mat3 w = skew(omega);
  double a, b;  // sin(t)/t and (1-cos(t))/t^2
  if (theta < 1e-8) {
    a = 1.0 - theta2 / 6.0;
    b = 0.5 - theta2 / 24.0;
  } else {
    a = std::sin(theta) / theta;
    b = (1.0 - std::cos(theta)) / theta2;
  }
  return Mat3::Identity() + a * w + b * w * w;
}

Vec3 log_so3(const Mat3& R) {
  const double cos_theta =
      std::clamp((R.trace() - 1.0) * 0.5, -1.0, 1.0);
  const double theta = std::acos(cos_theta);
  Vec3 axis(R(2, 1) - R(1, 2), R(0, 2) - R(2, 0), R(1, 0) - R(0, 1));
  if (theta < 1e-8) {
    return 0.5 * axis;  // R ~ I + skew(omega)
  }
  if (theta > M_PI - 1e-4) {
    // Near pi the off-diagonal difference cancels and acos loses digits.
    // The quaternion extraction stays well conditioned there.
    Eigen::Quaterniond q(R);
    Vec3 vec(q.x(), q.y(), q.z());
    const double vn = vec.norm();
    if (vn < 1e-12) return Vec3::Zero();
    const double angle = 2.0 * std::atan2(vn, std::abs(q.w()));
    Vec3 ax = vec / vn;
    if (q.w() < 0.0) ax = -ax;
    return angle * ax;
  }
  return (theta / (2.0 * std::sin(theta))) * axis;
}

namespace {

// Left Jacobian of SO(3): V such that exp_se3([w; v]).t = V(w) * v.
Mat3 so3_left_jacobian(const Vec3& omega) {
  const double theta2 = omega.squaredNorm();
  const double theta = std::sqrt(theta2);
  const Mat3 w = skew(omega);
  double b, c;  // (1-cos)/t^2 and (t-sin)/t^3
  if (theta < 1e-8) {
    b = 0.5 - theta2 / 24.0;
    c = 1.0 / 6.0 - theta2 / 120.0;
  } else {
    b = (1.0 - std::cos(theta)) / theta2;
    c = (theta - std::sin(theta)) / (theta2 * theta);
  }
  return Mat3::Identity() + b * w + c * w * w;
}

}  // namespace

Pose exp_se3(const Vec6& xi) {
  const Vec3 omega = xi.head<3>();
  const Vec3 nu = xi.tail<3>();
  Pose T;
  T.R = exp_so3(omega);
  T.t = so3_left_jacobian(omega) * nu;
  return T;
}

Vec6 log_se3(const Pose& T) {
  const Vec3 omega = log_so3(T.R);
  Vec6 xi;
  xi.head<3>() = omega;
  xi.tail<3>() = so3_left_jacobian(omega).lu().solve(T.t);
  return xi;
}

Pose compose(const Pose& a, const Pose& b) {
  return Pose{a.R * b.R, a.R * b.t + a.t};
}

std::optional<Vec2> project(const Pose& pose, const CameraIntrinsics& intr,
                            const Vec3& p_world) {
  const Vec3 pc = pose.to_camera(p_world);
  if (pc.z() <= 0.0) return std::nullopt;
  return Vec2(intr.fx * pc.x() / pc.z() + intr.cx,
              intr.fy * pc.y() / pc.z() + intr.cy);
}

double rotation_angle_deg(const Mat3& a, const Mat3& b) {
  const double c = std::clamp(((a.transpose() * b).trace() - 1.0) * 0.5,
                              -1.0, 1.0);
  return std::acos(c) * 180.0 / M_PI;
}

Mat3 nearest_rotation(const Mat3& m) {
  Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 r = svd.matrixU() * svd.matrixV().transpose();
  if (r.determinant() < 0.0) {
    Mat3 u = svd.matrixU();
    u.col(2) *= -1.0;
    r = u * svd.matrixV().transpose();
  }
  return r;
}

}  // namespace wdlt
