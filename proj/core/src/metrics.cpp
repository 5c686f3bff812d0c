#include "wdlt/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "wdlt/errors.hpp"

namespace wdlt {

PoseError pose_error(const Pose& est, const Pose& gt) {
  if (!est.is_rigid(1e-9) || !gt.is_rigid(1e-9))
    throw Error("pose_error requires rigid poses");
  PoseError e;
  e.translation_m = (est.camera_center() - gt.camera_center()).norm();
  e.rotation_deg = rotation_angle_deg(est.R, gt.R);
  return e;
}

double recall(std::span<const PoseError> errors, double t_thresh_m,
              double r_thresh_deg) {
  if (errors.empty()) throw Error("recall over an empty list is undefined");
  int hits = 0;
  for (const PoseError& e : errors)
    if (e.translation_m < t_thresh_m && e.rotation_deg < r_thresh_deg) ++hits;
  return static_cast<double>(hits) / static_cast<double>(errors.size());
}

double pearson_correlation(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error("series length mismatch");
  const size_t n = a.size();
  if (n < 2) throw Error("correlation needs at least two samples");
  double ma = 0.0, mb = 0.0;
  for (size_t i = 0; i < n; ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double saa = 0.0, sbb = 0.0, sab = 0.0;
  for (size_t i = 0; i < n; ++i) {
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
    sab += (a[i] - ma) * (b[i] - mb);
  }
  if (saa <= 0.0 || sbb <= 0.0)
    throw Error("correlation undefined: a series has zero variance");
  return sab / std::sqrt(saa * sbb);
}

double weight_interpretability(const Eigen::VectorXd& w,
                               std::span<const double> reproj_errors) {
  if (w.size() < 3) throw Error("interpretability needs at least 3 points");
  if (w.size() != static_cast<Eigen::Index>(reproj_errors.size()))
    throw Error("weights/errors size mismatch");
  std::vector<double> wv(w.data(), w.data() + w.size());
  std::vector<double> inv(reproj_errors.size());
  for (size_t i = 0; i < reproj_errors.size(); ++i)
    inv[i] = std::isfinite(reproj_errors[i]) ? 1.0 / (1.0 + reproj_errors[i])
                                             : 0.0;
  return pearson_correlation(wv, inv);
}

double ranking_auc(std::span<const double> scores,
                   std::span<const std::uint8_t> positive) {
  if (scores.size() != positive.size()) throw Error("scores/labels size mismatch");
  const size_t n = scores.size();
  size_t n_pos = 0;
  for (std::uint8_t p : positive) n_pos += p ? 1 : 0;
  const size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0)
    throw Error("AUC needs both positive and negative samples");

  // Average ranks over tied groups (Mann-Whitney U with tie correction).
  std::vector<size_t> order(n);
  for (size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](size_t i, size_t j) { return scores[i] < scores[j]; });
  std::vector<double> rank(n);
  size_t i = 0;
  while (i < n) {
    size_t j = i;
    while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double avg = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
    for (size_t k = i; k <= j; ++k) rank[order[k]] = avg;
    i = j + 1;
  }
  double rank_sum_pos = 0.0;
  for (size_t k = 0; k < n; ++k)
    if (positive[k]) rank_sum_pos += rank[k];
  const double u = rank_sum_pos - 0.5 * n_pos * (n_pos + 1.0);
  return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

double median(std::vector<double> values) {
  if (values.empty()) throw Error("median of an empty list is undefined");
  std::sort(values.begin(), values.end());
  const size_t n = values.size();
  return n % 2 == 1 ? values[n / 2]
                    : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

EvalSummary summarize(std::vector<FrameEval> frames) {
  if (frames.empty()) throw Error("nothing to summarize");
  EvalSummary s;
  std::vector<double> trans, rot;
  std::vector<PoseError> errors;
  double pearson_sum = 0.0;
  int pearson_count = 0;
  for (const FrameEval& f : frames) {
    trans.push_back(f.error.translation_m);
    rot.push_back(f.error.rotation_deg);
    errors.push_back(f.error);
    if (f.pearson) {
      pearson_sum += *f.pearson;
      ++pearson_count;
    }
  }
  s.median_translation_m = median(std::move(trans));
  s.median_rotation_deg = median(std::move(rot));
  s.recall_5cm_5deg = recall(errors);
  if (pearson_count > 0) s.mean_pearson = pearson_sum / pearson_count;
  s.frames = std::move(frames);
  return s;
}

}  // namespace wdlt
