#include "wdlt/weight_fit.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include "wdlt/errors.hpp"
#include "wdlt/metrics.hpp"
#include "wdlt/rng.hpp"

namespace wdlt {

double weight_activation(double theta) {
  return theta > 0.0 ? std::tanh(theta) : 0.0;
}

double weight_activation_derivative(double theta) {
  if (theta <= 0.0) return 0.0;
  const double t = std::tanh(theta);
  return 1.0 - t * t;
}

Eigen::VectorXd weight_activation(const Eigen::VectorXd& theta) {
  return theta.unaryExpr([](double x) { return weight_activation(x); });
}

Eigen::VectorXd weight_activation_derivative(const Eigen::VectorXd& theta) {
  return theta.unaryExpr([](double x) { return weight_activation_derivative(x); });
}

namespace {

struct Adam {
  Eigen::VectorXd m, v;
  double beta1, beta2, eps;
  long k = 0;

  Adam(Eigen::Index n, const OptSettings& opt)
      : m(Eigen::VectorXd::Zero(n)),
        v(Eigen::VectorXd::Zero(n)),
        beta1(opt.adam_beta1),
        beta2(opt.adam_beta2),
        eps(opt.adam_eps) {}

  void step(Eigen::VectorXd& x, const Eigen::VectorXd& g, double lr) {
    ++k;
    m = beta1 * m + (1.0 - beta1) * g;
    v = beta2 * v + (1.0 - beta2) * g.cwiseProduct(g);
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(k));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(k));
    x -= (lr / bc1) * m.cwiseQuotient(((v / bc2).cwiseSqrt().array() + eps).matrix());
  }
};

Eigen::VectorXd initial_theta(int n, const OptSettings& opt, std::uint64_t seed) {
  Eigen::VectorXd theta = Eigen::VectorXd::Constant(n, opt.theta_init);
  if (opt.init_jitter > 0.0) {
    Rng rng(seed);
    for (int i = 0; i < n; ++i) theta[i] += opt.init_jitter * rng.normal();
  }
  return theta;
}

// Mean gt-pose reprojection error over points not flagged as outliers; the
// quantity joint refinement is supposed to drive down.
double mean_inlier_reproj(const SyntheticScene& scene,
                          const std::vector<Vec3>& coords) {
  double sum = 0.0;
  int count = 0;
  for (int i = 0; i < scene.size(); ++i) {
    if (scene.outlier_mask[i]) continue;
    const ReprojResult r = reproj_error(scene.gt_pose, scene.intrinsics,
                                        coords[i], scene.pixel_obs[i]);
    sum += r.behind_camera ? 1e6 : r.error_px;
    ++count;
  }
  return count > 0 ? sum / count : 0.0;
}

void record_pose_errors(const std::vector<Correspondence>& corrs,
                        const Eigen::VectorXd& w, const Pose& gt,
                        FitReport& report) {
  try {
    const Pose est = wdlt_solve(corrs, w);
    const PoseError err = pose_error(est, gt);
    report.trans_err_m.push_back(err.translation_m);
    report.rot_err_deg.push_back(err.rotation_deg);
  } catch (const Error&) {
    const double prev_t = report.trans_err_m.empty()
                              ? std::numeric_limits<double>::infinity()
                              : report.trans_err_m.back();
    const double prev_r = report.rot_err_deg.empty()
                              ? std::numeric_limits<double>::infinity()
                              : report.rot_err_deg.back();
    report.trans_err_m.push_back(prev_t);
    report.rot_err_deg.push_back(prev_r);
  }
}

void check_divergence(double loss, double initial, double factor) {
  if (!std::isfinite(loss) ||
      loss > factor * std::max(initial, 1e-12))
    throw DivergenceError("loss " + std::to_string(loss) +
                          " exceeded the divergence guard (initial " +
                          std::to_string(initial) + ")");
}

}  // namespace

FitReport fit_weights(const SyntheticScene& scene, const LossConfig& cfg,
                      const OptSettings& opt, FitMode mode, int iterations,
                      std::uint64_t seed) {
  if (iterations < 1) throw Error("fit needs at least one iteration");
  const auto start = std::chrono::steady_clock::now();

  const std::vector<Correspondence> corrs = scene_correspondences(scene);
  const DltSystem sys = DltSystem::build(corrs);
  const Vec12 t_gt = unit_pose_vector(scene.gt_pose);
  const std::vector<std::uint8_t> labels =
      inlier_labels(scene.predicted_coords, scene.pixel_obs, scene.gt_pose,
                    scene.intrinsics, cfg.tau_px);
  const double inlier_err = mean_inlier_reproj(scene, scene.predicted_coords);

  Eigen::VectorXd theta = initial_theta(scene.size(), opt, seed);
  Adam adam(scene.size(), opt);

  FitReport report;
  report.iterations = iterations;
  double initial_loss = 0.0;
  for (int it = 0; it < iterations; ++it) {
    const Eigen::VectorXd w = weight_activation(theta);
    const RegressionLossResult reg = regression_loss(sys, w, t_gt, cfg);
    double cls = 0.0;
    Eigen::VectorXd grad_w = cfg.gamma * grad_regression_loss_wrt_w(sys, w, t_gt, cfg);
    if (mode == FitMode::classification_regression) {
      cls = classification_loss(w, labels);
      grad_w += grad_classification_loss_wrt_w(w, labels);
    }
    const double loss = cls + cfg.gamma * reg.value;
    if (it == 0) initial_loss = loss;
    check_divergence(loss, initial_loss, opt.divergence_factor);

    report.loss.push_back(loss);
    report.loss_cls.push_back(cls);
    report.loss_reg.push_back(reg.value);
    report.inlier_reproj_err.push_back(inlier_err);
    record_pose_errors(corrs, w, scene.gt_pose, report);

    const Eigen::VectorXd grad_theta =
        grad_w.cwiseProduct(weight_activation_derivative(theta));
    adam.step(theta, grad_theta, opt.learning_rate);
  }

  report.theta = theta;
  report.weights = weight_activation(theta);
  report.wall_clock_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                start)
          .count();
  return report;
}

FitReport e2e_refine(const SyntheticScene& scene, const LossConfig& cfg,
                     const OptSettings& opt, const Eigen::VectorXd& theta_start,
                     int iterations, std::uint64_t /*seed*/) {
  if (iterations < 1) throw Error("refinement needs at least one iteration");
  if (theta_start.size() != scene.size())
    throw Error("theta size does not match the scene");
  const auto start = std::chrono::steady_clock::now();

  const Vec12 t_gt = unit_pose_vector(scene.gt_pose);
  std::vector<Vec3> coords = scene.predicted_coords;
  // Labels frozen at entry, matching the fixed-coordinate fit.
  const std::vector<std::uint8_t> labels =
      inlier_labels(coords, scene.pixel_obs, scene.gt_pose, scene.intrinsics,
                    cfg.tau_px);

  Eigen::VectorXd theta = theta_start;
  Adam adam_theta(scene.size(), opt);
  Adam adam_coords(3 * scene.size(), opt);

  FitReport report;
  report.iterations = iterations;
  double initial_loss = 0.0;
  std::vector<Correspondence> corrs = scene_correspondences(scene);
  for (int it = 0; it < iterations; ++it) {
    for (int i = 0; i < scene.size(); ++i) {
      corrs[i].x = coords[i].x();
      corrs[i].y = coords[i].y();
      corrs[i].z = coords[i].z();
    }
    const DltSystem sys = DltSystem::build(corrs);
    const Eigen::VectorXd w = weight_activation(theta);
    const RegressionLossResult reg = regression_loss(sys, w, t_gt, cfg);
    const double cls = classification_loss(w, labels);
    const double loss = cls + cfg.gamma * reg.value;
    if (it == 0) initial_loss = loss;
    check_divergence(loss, initial_loss, opt.divergence_factor);

    report.loss.push_back(loss);
    report.loss_cls.push_back(cls);
    report.loss_reg.push_back(reg.value);
    report.inlier_reproj_err.push_back(mean_inlier_reproj(scene, coords));
    record_pose_errors(corrs, w, scene.gt_pose, report);

    const bool step_theta = !opt.alternate_updates || it % 2 == 0;
    const bool step_coords = !opt.alternate_updates || it % 2 == 1;
    if (step_theta) {
      const Eigen::VectorXd grad_w =
          grad_classification_loss_wrt_w(w, labels) +
          cfg.gamma * grad_regression_loss_wrt_w(sys, w, t_gt, cfg);
      adam_theta.step(theta, grad_w.cwiseProduct(weight_activation_derivative(theta)),
                      opt.learning_rate);
    }
    if (step_coords) {
      Eigen::Matrix<double, Eigen::Dynamic, 3> grad_c =
          cfg.gamma * grad_residual_term_wrt_coords(corrs, w, t_gt);
      // Rounding-noise gradients (exact data) must not reach Adam: its
      // normalization turns any coherent residue into full lr-sized steps and
      // the optimizer ends up orbiting the optimum at that radius. Rows this
      // small are zeros that cancellation failed to deliver.
      for (int i = 0; i < scene.size(); ++i)
        if (grad_c.row(i).norm() < 1e-12) grad_c.row(i).setZero();
      Eigen::VectorXd flat(3 * scene.size());
      for (int i = 0; i < scene.size(); ++i)
        flat.segment<3>(3 * i) = grad_c.row(i).transpose();
      Eigen::VectorXd coords_flat(3 * scene.size());
      for (int i = 0; i < scene.size(); ++i)
        coords_flat.segment<3>(3 * i) = coords[i];
      adam_coords.step(coords_flat, flat, opt.coord_learning_rate);
      for (int i = 0; i < scene.size(); ++i)
        coords[i] = coords_flat.segment<3>(3 * i);
    }
  }

  report.theta = theta;
  report.weights = weight_activation(theta);
  report.coords = std::move(coords);
  report.wall_clock_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                start)
          .count();
  return report;
}

}  // namespace wdlt
