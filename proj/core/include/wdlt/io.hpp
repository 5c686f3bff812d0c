#pragma once

// JSON/CSV serialization for every file the pipeline reads or writes.
//
// All formats are documented in the README. Doubles are written with
// shortest-round-trip precision and outputs depend only on the inputs, so a
// rerun with the same arguments produces byte-identical files.

#include <string>
#include <vector>

#include "wdlt/adapt.hpp"
#include "wdlt/metrics.hpp"
#include "wdlt/simulator.hpp"
#include "wdlt/weight_fit.hpp"

namespace wdlt {

// Shortest representation that round-trips; "inf"/"-inf"/"nan" for
// non-finite values (CSV only; JSON stores them as null).
std::string format_double(double v);

void write_scene(const std::string& path, const SyntheticScene& scene);
SyntheticScene read_scene(const std::string& path);  // validates invariants

void write_pose(const std::string& path, const Pose& pose);
Pose read_pose(const std::string& path);

void write_theta(const std::string& path, const Eigen::VectorXd& theta);
Eigen::VectorXd read_theta(const std::string& path);

// Wall-clock is deliberately not serialized (outputs must be reproducible);
// it is reported on stderr by the CLI instead.
void write_fit_report(const std::string& path, const FitReport& report);
void write_fit_csv(const std::string& path, const FitReport& report);

void write_loss_curve_csv(const std::string& path,
                          const std::vector<double>& losses);

void write_adapt_frame(const std::string& path, const AdaptFrame& frame);
AdaptFrame read_adapt_frame(const std::string& path);

void write_eval_summary(const std::string& path, const EvalSummary& summary);

}  // namespace wdlt
