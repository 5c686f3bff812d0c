#pragma once

// Pose-error metrics and batch evaluation summaries.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wdlt/geometry.hpp"

namespace wdlt {

struct PoseError {
  double translation_m = 0.0;  // distance between camera centers
  double rotation_deg = 0.0;   // geodesic angle, in [0, 180]
};

// Both poses must satisfy the rigidity invariants (checked to 1e-9).
PoseError pose_error(const Pose& est, const Pose& gt);

// Fraction of frames with translation < t_thresh AND rotation < r_thresh
// (strict, so an error exactly at the threshold does not count).
double recall(std::span<const PoseError> errors, double t_thresh_m = 0.05,
              double r_thresh_deg = 5.0);

// Pearson correlation; throws when either series has zero variance.
double pearson_correlation(std::span<const double> a, std::span<const double> b);

// Pearson r between weights and 1/(1 + reprojection error). Requires N >= 3.
// Infinite errors (behind-camera points) map to 0 inverse error.
double weight_interpretability(const Eigen::VectorXd& w,
                               std::span<const double> reproj_errors);

// Mann-Whitney ranking AUC with tie correction: the probability that a
// positive-labeled score ranks above a negative one (+1/2 per tie). All-tied
// scores give exactly 0.5. Requires at least one positive and one negative.
double ranking_auc(std::span<const double> scores,
                   std::span<const std::uint8_t> positive);

// Median with the even-count average convention.
double median(std::vector<double> values);

struct FrameEval {
  std::string name;
  PoseError error;
  std::optional<double> pearson;  // present when weights were available
};

struct EvalSummary {
  double median_translation_m = 0.0;
  double median_rotation_deg = 0.0;
  double recall_5cm_5deg = 0.0;
  std::optional<double> mean_pearson;
  std::vector<FrameEval> frames;
};

EvalSummary summarize(std::vector<FrameEval> frames);

}  // namespace wdlt
