#include "wdlt/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

#include "json.hpp"
#include "wdlt/errors.hpp"

namespace wdlt {

using nlohmann::json;

namespace {

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open for writing: " + path);
  out << text;
  if (!out) throw Error("write failed: " + path);
}

json load_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open: " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
}

const json& field(const json& j, const char* name, const std::string& path) {
  const auto it = j.find(name);
  if (it == j.end())
    throw ParseError(path + ": missing field `" + std::string(name) + "`");
  return *it;
}

double number(const json& j, const std::string& context) {
  if (!j.is_number()) throw ParseError(context + ": expected a number");
  return j.get<double>();
}

std::vector<double> number_array(const json& j, size_t expect,
                                 const std::string& context) {
  if (!j.is_array() || (expect > 0 && j.size() != expect))
    throw ParseError(context + ": expected an array of " +
                     std::to_string(expect) + " numbers");
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& e : j) out.push_back(number(e, context));
  return out;
}

json pose_json(const Pose& pose) {
  json j;
  j["convention"] = "w2c";
  json r = json::array();
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) r.push_back(pose.R(a, b));
  j["R"] = std::move(r);
  j["t"] = {pose.t.x(), pose.t.y(), pose.t.z()};
  return j;
}

Pose pose_from_json(const json& j, const std::string& context) {
  const json& conv = field(j, "convention", context);
  if (!conv.is_string() || conv.get<std::string>() != "w2c")
    throw ParseError(context + ": pose convention must be \"w2c\"");
  const std::vector<double> r = number_array(field(j, "R", context), 9, context + ".R");
  const std::vector<double> t = number_array(field(j, "t", context), 3, context + ".t");
  Pose pose;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) pose.R(a, b) = r[3 * a + b];
  pose.t = Vec3(t[0], t[1], t[2]);
  if (!pose.is_rigid(1e-9))
    throw ParseError(context + ": rotation is not orthonormal (w2c [R|t] required)");
  return pose;
}

json intrinsics_json(const CameraIntrinsics& intr) {
  return json{{"fx", intr.fx}, {"fy", intr.fy}, {"cx", intr.cx},
              {"cy", intr.cy}, {"width", intr.width}, {"height", intr.height}};
}

CameraIntrinsics intrinsics_from_json(const json& j, const std::string& context) {
  CameraIntrinsics intr;
  intr.fx = number(field(j, "fx", context), context + ".fx");
  intr.fy = number(field(j, "fy", context), context + ".fy");
  intr.cx = number(field(j, "cx", context), context + ".cx");
  intr.cy = number(field(j, "cy", context), context + ".cy");
  intr.width = static_cast<int>(number(field(j, "width", context), context + ".width"));
  intr.height = static_cast<int>(number(field(j, "height", context), context + ".height"));
  if (!intr.valid()) throw ParseError(context + ": invalid intrinsics");
  return intr;
}

json image_json(const Image& img) {
  return json(img.pixels);
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

void write_scene(const std::string& path, const SyntheticScene& scene) {
  json j;
  j["intrinsics"] = intrinsics_json(scene.intrinsics);
  j["gt_pose"] = {{"R", json::array()}, {"t", json::array()}};
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) j["gt_pose"]["R"].push_back(scene.gt_pose.R(a, b));
  for (int a = 0; a < 3; ++a) j["gt_pose"]["t"].push_back(scene.gt_pose.t[a]);
  json points = json::array();
  for (int i = 0; i < scene.size(); ++i) {
    points.push_back(
        {{"gt", {scene.gt_points[i].x(), scene.gt_points[i].y(), scene.gt_points[i].z()}},
         {"pred",
          {scene.predicted_coords[i].x(), scene.predicted_coords[i].y(),
           scene.predicted_coords[i].z()}},
         {"px", {scene.pixel_obs[i].x(), scene.pixel_obs[i].y()}},
         {"outlier", scene.outlier_mask[i] != 0}});
  }
  j["points"] = std::move(points);
  j["seed"] = scene.seed;
  write_text(path, j.dump() + "\n");
}

SyntheticScene read_scene(const std::string& path) {
  const json j = load_json(path);
  SyntheticScene scene;
  scene.intrinsics = intrinsics_from_json(field(j, "intrinsics", path), path + ".intrinsics");

  const json& gp = field(j, "gt_pose", path);
  const std::vector<double> r =
      number_array(field(gp, "R", path), 9, path + ".gt_pose.R");
  const std::vector<double> t =
      number_array(field(gp, "t", path), 3, path + ".gt_pose.t");
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) scene.gt_pose.R(a, b) = r[3 * a + b];
  scene.gt_pose.t = Vec3(t[0], t[1], t[2]);
  if (!scene.gt_pose.is_rigid(1e-9))
    throw ParseError(path + ".gt_pose: rotation is not orthonormal");

  const json& points = field(j, "points", path);
  if (!points.is_array())
    throw ParseError(path + ".points: expected an array");
  if (points.size() <= 6)
    throw ParseError(path + ": " + std::to_string(points.size()) +
                     " points, but the weighted DLT requires N > 6");
  int i = 0;
  for (const auto& p : points) {
    const std::string ctx = path + ".points[" + std::to_string(i) + "]";
    const std::vector<double> gt = number_array(field(p, "gt", ctx), 3, ctx + ".gt");
    const std::vector<double> pred = number_array(field(p, "pred", ctx), 3, ctx + ".pred");
    const std::vector<double> px = number_array(field(p, "px", ctx), 2, ctx + ".px");
    const json& outlier = field(p, "outlier", ctx);
    if (!outlier.is_boolean()) throw ParseError(ctx + ".outlier: expected a boolean");
    for (double v : gt)
      if (!std::isfinite(v)) throw ParseError(ctx + ".gt: non-finite value");
    for (double v : pred)
      if (!std::isfinite(v)) throw ParseError(ctx + ".pred: non-finite value");
    const Vec2 obs(px[0], px[1]);
    if (!scene.intrinsics.contains(obs))
      throw ParseError(ctx + ".px: observation outside the image bounds");
    scene.gt_points.emplace_back(gt[0], gt[1], gt[2]);
    scene.predicted_coords.emplace_back(pred[0], pred[1], pred[2]);
    scene.pixel_obs.push_back(obs);
    scene.outlier_mask.push_back(outlier.get<bool>() ? 1 : 0);
    ++i;
  }

  const json& seed = field(j, "seed", path);
  if (!seed.is_number_unsigned() && !seed.is_number_integer())
    throw ParseError(path + ".seed: expected an integer");
  scene.seed = seed.get<std::uint64_t>();
  return scene;
}

void write_pose(const std::string& path, const Pose& pose) {
  write_text(path, pose_json(pose).dump() + "\n");
}

Pose read_pose(const std::string& path) {
  return pose_from_json(load_json(path), path);
}

void write_theta(const std::string& path, const Eigen::VectorXd& theta) {
  json j;
  j["theta"] = std::vector<double>(theta.data(), theta.data() + theta.size());
  write_text(path, j.dump() + "\n");
}

Eigen::VectorXd read_theta(const std::string& path) {
  const json j = load_json(path);
  const std::vector<double> v =
      number_array(field(j, "theta", path), 0, path + ".theta");
  if (v.empty()) throw ParseError(path + ".theta: empty");
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

namespace {

json finite_or_null_array(const std::vector<double>& v) {
  // JSON has no inf/nan literals; nlohmann would emit them raw. Map to null.
  json arr = json::array();
  for (double x : v) {
    if (std::isfinite(x))
      arr.push_back(x);
    else
      arr.push_back(nullptr);
  }
  return arr;
}

}  // namespace

void write_fit_report(const std::string& path, const FitReport& report) {
  json j;
  j["iterations"] = report.iterations;
  j["loss"] = finite_or_null_array(report.loss);
  j["loss_cls"] = finite_or_null_array(report.loss_cls);
  j["loss_reg"] = finite_or_null_array(report.loss_reg);
  j["trans_err_m"] = finite_or_null_array(report.trans_err_m);
  j["rot_err_deg"] = finite_or_null_array(report.rot_err_deg);
  j["inlier_reproj_err"] = finite_or_null_array(report.inlier_reproj_err);
  j["theta"] =
      std::vector<double>(report.theta.data(), report.theta.data() + report.theta.size());
  j["weights"] = std::vector<double>(report.weights.data(),
                                     report.weights.data() + report.weights.size());
  if (!report.coords.empty()) {
    json coords = json::array();
    for (const Vec3& c : report.coords)
      coords.push_back({c.x(), c.y(), c.z()});
    j["coords"] = std::move(coords);
  }
  write_text(path, j.dump() + "\n");
}

void write_fit_csv(const std::string& path, const FitReport& report) {
  std::string out = "iter,loss,L_c,L_r,trans_err_m,rot_err_deg\n";
  for (size_t i = 0; i < report.loss.size(); ++i) {
    out += std::to_string(i);
    out += ',';
    out += format_double(report.loss[i]);
    out += ',';
    out += format_double(report.loss_cls[i]);
    out += ',';
    out += format_double(report.loss_reg[i]);
    out += ',';
    out += format_double(report.trans_err_m[i]);
    out += ',';
    out += format_double(report.rot_err_deg[i]);
    out += '\n';
  }
  write_text(path, out);
}

void write_loss_curve_csv(const std::string& path,
                          const std::vector<double>& losses) {
  std::string out = "iter,loss\n";
  for (size_t i = 0; i < losses.size(); ++i) {
    out += std::to_string(i);
    out += ',';
    out += format_double(losses[i]);
    out += '\n';
  }
  write_text(path, out);
}

void write_adapt_frame(const std::string& path, const AdaptFrame& frame) {
  json j;
  j["intrinsics"] = intrinsics_json(frame.pair.intrinsics);
  j["source_pose"] = pose_json(frame.pair.source_pose);
  j["target_pose"] = pose_json(frame.pair.target_pose);
  j["source_image"] = image_json(frame.pair.source_image);
  j["target_image"] = image_json(frame.pair.target_image);
  json coords = json::array();
  for (const Vec3& c : frame.pair.source_coords) {
    coords.push_back(c.x());
    coords.push_back(c.y());
    coords.push_back(c.z());
  }
  j["source_coords"] = std::move(coords);
  json corrs = json::array();
  for (const Correspondence& c : frame.target_corrs)
    corrs.push_back({c.x, c.y, c.z, c.u, c.v});
  j["target_corrs"] = std::move(corrs);
  write_text(path, j.dump() + "\n");
}

AdaptFrame read_adapt_frame(const std::string& path) {
  const json j = load_json(path);
  AdaptFrame frame;
  frame.pair.intrinsics =
      intrinsics_from_json(field(j, "intrinsics", path), path + ".intrinsics");
  const size_t n =
      static_cast<size_t>(frame.pair.intrinsics.width) * frame.pair.intrinsics.height;
  frame.pair.source_pose = pose_from_json(field(j, "source_pose", path), path + ".source_pose");
  frame.pair.target_pose = pose_from_json(field(j, "target_pose", path), path + ".target_pose");

  auto read_image = [&](const char* name, Image& img) {
    const std::vector<double> px = number_array(field(j, name, path), n, path + "." + name);
    img.width = frame.pair.intrinsics.width;
    img.height = frame.pair.intrinsics.height;
    img.pixels = px;
  };
  read_image("source_image", frame.pair.source_image);
  read_image("target_image", frame.pair.target_image);

  const std::vector<double> coords =
      number_array(field(j, "source_coords", path), 3 * n, path + ".source_coords");
  frame.pair.source_coords.resize(n);
  for (size_t i = 0; i < n; ++i)
    frame.pair.source_coords[i] =
        Vec3(coords[3 * i], coords[3 * i + 1], coords[3 * i + 2]);

  const json& corrs = field(j, "target_corrs", path);
  if (!corrs.is_array() || corrs.size() <= 6)
    throw ParseError(path + ".target_corrs: need more than 6 correspondences");
  int i = 0;
  for (const auto& c : corrs) {
    const std::string ctx = path + ".target_corrs[" + std::to_string(i++) + "]";
    const std::vector<double> v = number_array(c, 5, ctx);
    frame.target_corrs.push_back(Correspondence{v[0], v[1], v[2], v[3], v[4]});
  }
  return frame;
}

void write_eval_summary(const std::string& path, const EvalSummary& summary) {
  json j;
  j["median_translation_m"] = summary.median_translation_m;
  j["median_rotation_deg"] = summary.median_rotation_deg;
  j["recall_5cm_5deg"] = summary.recall_5cm_5deg;
  if (summary.mean_pearson)
    j["mean_pearson"] = *summary.mean_pearson;
  else
    j["mean_pearson"] = nullptr;
  json frames = json::array();
  for (const FrameEval& f : summary.frames) {
    json fj;
    fj["name"] = f.name;
    fj["translation_m"] = f.error.translation_m;
    fj["rotation_deg"] = f.error.rotation_deg;
    if (f.pearson)
      fj["pearson"] = *f.pearson;
    else
      fj["pearson"] = nullptr;
    frames.push_back(std::move(fj));
  }
  j["frames"] = std::move(frames);
  write_text(path, j.dump() + "\n");
}

}  // namespace wdlt
