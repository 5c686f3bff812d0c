#include "wdlt/adapt.hpp"

#include <cmath>

#include "wdlt/errors.hpp"
#include "wdlt/weight_fit.hpp"

namespace wdlt {

Eigen::MatrixXd grad_pose_wrt_w(const DltSystem& sys, const Eigen::VectorXd& w,
                                const DltSolution& solution) {
  if (w.size() != sys.n) throw Error("weights/system size mismatch");
  const Mat12 M = assemble_normal_matrix(sys, w);
  Eigen::SelfAdjointEigenSolver<Mat12> eig(M);
  if (eig.info() != Eigen::Success)
    throw DegenerateSystemError("eigendecomposition failed");
  const auto& vals = eig.eigenvalues();
  const double tr = M.trace();
  if (!(tr > 0.0) || vals[1] - vals[0] < 1e-10 * tr)
    throw DegenerateSystemError(
        "ed-gradient-unstable: eigenvalue gap " +
        std::to_string(vals[1] - vals[0]) + " below 1e-10 * trace");

  // dv/dw_i = (lambda I - M)^+ A_i v with A_i = dM/dw_i. A_i v collapses to
  // r_u (r_u . v) + r_v (r_v . v), so no 12x12 per-point product is needed,
  // and the pseudo-inverse is applied in the eigenbasis with the lambda-mode
  // zeroed out.
  const Mat12& U = eig.eigenvectors();
  Vec12 inv_gap;
  inv_gap[0] = 0.0;
  for (int j = 1; j < 12; ++j) inv_gap[j] = 1.0 / (vals[0] - vals[j]);

  Eigen::MatrixXd Y(sys.n, 12);
  for (int i = 0; i < sys.n; ++i) {
    const auto rows = sys.X.middleRows<2>(2 * i);
    const Eigen::Vector2d proj = rows * solution.v;
    Y.row(i) = proj[0] * rows.row(0) + proj[1] * rows.row(1);
  }
  return (Y * U) * inv_gap.asDiagonal() * U.transpose();
}

namespace {

// Maps the photometric loss through Procrustes as a function of the raw
// 12-vector: g_v = J_vp^T g_pose, both factors by central differences.
Eigen::VectorXd loss_gradient_wrt_vec(const AdaptFrame& frame,
                                      const Eigen::VectorXd& w,
                                      const DltSolution& sol, const Pose& pose,
                                      const AdaptConfig& cfg) {
  Vec6 g_pose;
  for (int k = 0; k < 6; ++k) {
    Vec6 delta = Vec6::Zero();
    delta[k] = cfg.pose_fd_step;
    const double f_plus =
        photometric_loss(frame.pair, compose(pose, exp_se3(delta))).total;
    delta[k] = -cfg.pose_fd_step;
    const double f_minus =
        photometric_loss(frame.pair, compose(pose, exp_se3(delta))).total;
    g_pose[k] = (f_plus - f_minus) / (2.0 * cfg.pose_fd_step);
  }

  Eigen::Matrix<double, 6, 12> J_vp;
  const Pose inv = pose.inverse();
  for (int j = 0; j < 12; ++j) {
    DltSolution perturbed = sol;
    perturbed.v[j] += cfg.vec_fd_step;
    const Vec6 xi_plus =
        log_se3(compose(inv, procrustes_regularize(perturbed, w, frame.target_corrs)));
    perturbed.v[j] = sol.v[j] - cfg.vec_fd_step;
    const Vec6 xi_minus =
        log_se3(compose(inv, procrustes_regularize(perturbed, w, frame.target_corrs)));
    J_vp.col(j) = (xi_plus - xi_minus) / (2.0 * cfg.vec_fd_step);
  }
  return J_vp.transpose() * g_pose;
}

}  // namespace

Eigen::VectorXd adapt_gradient(const AdaptFrame& frame,
                               const Eigen::VectorXd& theta,
                               const AdaptConfig& cfg, double* loss_out) {
  if (theta.size() != static_cast<Eigen::Index>(frame.target_corrs.size()))
    throw Error("theta size does not match the frame's correspondences");
  const Eigen::VectorXd w = weight_activation(theta);
  const DltSystem sys = DltSystem::build(frame.target_corrs);
  const Mat12 M = assemble_normal_matrix(sys, w);
  const DltSolution sol = solve_smallest_eigvec(M);
  const Eigen::MatrixXd dv_dw = grad_pose_wrt_w(sys, w, sol);  // N x 12
  const Pose pose = procrustes_regularize(sol, w, frame.target_corrs);
  if (loss_out) *loss_out = photometric_loss(frame.pair, pose).total;

  const Eigen::VectorXd g_v = loss_gradient_wrt_vec(frame, w, sol, pose, cfg);
  const Eigen::VectorXd g_w = dv_dw * g_v;
  return g_w.cwiseProduct(weight_activation_derivative(theta));
}

AdaptResult adapt_weights(std::span<const AdaptFrame> frames,
                          const Eigen::VectorXd& theta0,
                          const AdaptConfig& cfg) {
  if (frames.empty()) throw Error("adaptation needs at least one pair");
  if (cfg.iterations < 1) throw Error("adaptation needs at least one iteration");
  for (const AdaptFrame& f : frames)
    if (static_cast<Eigen::Index>(f.target_corrs.size()) != theta0.size())
      throw Error("all frames must share the scene's correspondence count");

  AdaptResult out;
  out.theta = theta0;
  Eigen::VectorXd m = Eigen::VectorXd::Zero(theta0.size());
  Eigen::VectorXd v = Eigen::VectorXd::Zero(theta0.size());
  double initial_loss = 0.0;

  for (int it = 0; it < cfg.iterations; ++it) {
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(theta0.size());
    double loss_sum = 0.0;
    int used = 0;
    for (const AdaptFrame& frame : frames) {
      double frame_loss = 0.0;
      try {
        grad += adapt_gradient(frame, out.theta, cfg, &frame_loss);
      } catch (const DegenerateSystemError&) {
        ++out.skipped_frame_evals;
        continue;
      } catch (const CheiralityError&) {
        ++out.skipped_frame_evals;
        continue;
      }
      loss_sum += frame_loss;
      ++used;
    }
    if (used == 0)
      throw DegenerateSystemError("every pair was degenerate this iteration");
    grad /= used;
    const double loss = loss_sum / used;
    if (it == 0) initial_loss = loss;
    if (!std::isfinite(loss) ||
        loss > cfg.divergence_factor * std::max(initial_loss, 1e-12))
      throw DivergenceError("adaptation loss diverged");
    out.loss_curve.push_back(loss);

    m = cfg.adam_beta1 * m + (1.0 - cfg.adam_beta1) * grad;
    v = cfg.adam_beta2 * v + (1.0 - cfg.adam_beta2) * grad.cwiseProduct(grad);
    const double k = it + 1.0;
    const double bc1 = 1.0 - std::pow(cfg.adam_beta1, k);
    const double bc2 = 1.0 - std::pow(cfg.adam_beta2, k);
    out.theta -=
        (cfg.learning_rate / bc1) *
        m.cwiseQuotient(((v / bc2).cwiseSqrt().array() + cfg.adam_eps).matrix());
  }
  return out;
}

AdaptScenario make_adapt_scenario(const AdaptScenarioParams& params,
                                  int frame_interval) {
  if (frame_interval < 1) throw Error("frame_interval must be >= 1");
  if (params.n_pairs < 1) throw Error("scenario needs at least one pair");
  if (params.n_heldout < 0) throw Error("negative held-out count");

  const int total = params.n_pairs + frame_interval + params.n_heldout;
  AdaptScenario sc;
  sc.seq = generate_sequence(params.scene, total, params.frame_baseline_m);

  for (int k = 0; k < params.n_pairs; ++k) {
    ImagePairParams pp = params.pair;
    pp.source_pose = sc.seq.poses[k];
    pp.plane_frame_pose = sc.seq.poses[0];  // one world surface for every pair
    pp.baseline_m = frame_interval * params.frame_baseline_m;
    AdaptFrame frame;
    frame.pair = generate_image_pair(pp);
    frame.target_corrs = make_correspondences(
        sc.seq.scene.predicted_coords, sc.seq.pixel_obs[k + frame_interval],
        params.scene.intrinsics);
    sc.frames.push_back(std::move(frame));
  }
  for (int h = params.n_pairs + frame_interval; h < total; ++h)
    sc.heldout_frames.push_back(h);
  return sc;
}

}  // namespace wdlt
