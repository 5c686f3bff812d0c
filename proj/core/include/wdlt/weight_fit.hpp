#pragma once

// Gradient-based fitting of per-correspondence weight parameters under
// pose-only supervision, plus the joint weight+coordinate refinement stage.
//
// Weights are free parameters theta passed through w = tanh(relu(theta)),
// optimized with Adam on L = L_cls + gamma * L_reg (or the regression term
// alone). No pose solve enters the gradient; the solver only runs to record
// the pose-error trajectory.

#include <cstdint>
#include <vector>

#include "wdlt/losses.hpp"
#include "wdlt/simulator.hpp"

namespace wdlt {

// w = tanh(relu(theta)), range [0, 1). The derivative is defined as 0 at
// theta = 0 (subgradient choice), which makes theta = 0 a dead parameter:
// useful as a degenerate-init probe, and consistent with the activation
// being exactly 0 there.
double weight_activation(double theta);
double weight_activation_derivative(double theta);
Eigen::VectorXd weight_activation(const Eigen::VectorXd& theta);
Eigen::VectorXd weight_activation_derivative(const Eigen::VectorXd& theta);

enum class FitMode {
  classification_regression,  // L = L_cls + gamma * L_reg
  regression_only,            // pose-only supervision
};

struct OptSettings {
  double learning_rate = 1e-4;
  double coord_learning_rate = 1e-5;  // joint-refinement coordinate step
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  double theta_init = 1.5;    // activation ~0.905, optimistic start
  double init_jitter = 0.0;   // stddev of seeded Gaussian jitter on theta_init
  double divergence_factor = 1e6;
  bool alternate_updates = false;  // joint refinement: alternate theta/coord steps
};

struct FitReport {
  std::vector<double> loss;         // one entry per iteration, pre-update
  std::vector<double> loss_cls;     // 0 in regression-only mode
  std::vector<double> loss_reg;
  std::vector<double> trans_err_m;  // +inf when the solve failed that iteration
  std::vector<double> rot_err_deg;
  std::vector<double> inlier_reproj_err;  // mean gt-pose reprojection error of
                                          // non-outlier points (moves only
                                          // when coordinates do)
  Eigen::VectorXd theta;
  Eigen::VectorXd weights;
  std::vector<Vec3> coords;  // refined coordinates (joint stage only)
  int iterations = 0;
  double wall_clock_ms = 0.0;
};

// Stage-2 fit: scene coordinates fixed, inlier labels computed once from the
// ground-truth pose. Deterministic for a given (scene, cfg, opt, seed); the
// seed only matters when opt.init_jitter > 0. Throws DivergenceError when the
// loss exceeds divergence_factor times its initial value.
FitReport fit_weights(const SyntheticScene& scene, const LossConfig& cfg,
                      const OptSettings& opt, FitMode mode, int iterations,
                      std::uint64_t seed);

// Stage-3 joint refinement, starting from a stage-2 theta. Coordinates are
// stepped with the gradient of the pose-residual term only (the barrier term
// has a small but nonzero coordinate gradient even on exact data, and exact
// scenes must stay fixed points); theta keeps the full gradient. Labels are
// frozen at entry.
FitReport e2e_refine(const SyntheticScene& scene, const LossConfig& cfg,
                     const OptSettings& opt, const Eigen::VectorXd& theta_start,
                     int iterations, std::uint64_t seed);

}  // namespace wdlt
