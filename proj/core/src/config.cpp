#include "wdlt/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "wdlt/errors.hpp"

namespace wdlt {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

}  // namespace

KeyValueConfig KeyValueConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return from_string(buf.str(), path);
}

KeyValueConfig KeyValueConfig::from_string(const std::string& text,
                                           const std::string& origin) {
  KeyValueConfig kv;
  kv.origin_ = origin;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ParseError(origin + ":" + std::to_string(lineno) +
                       ": expected `key = value`, got `" + t + "`");
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ParseError(origin + ":" + std::to_string(lineno) +
                       ": empty key or value");
    kv.values_[key] = value;
  }
  return kv;
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  touched_.insert(key);
  try {
    size_t pos = 0;
    const double v = std::stod(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("trailing junk");
    return v;
  } catch (const std::exception&) {
    throw ParseError(origin_ + ": key `" + key + "`: `" + it->second +
                     "` is not a number");
  }
}

int KeyValueConfig::get_int(const std::string& key, int fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  touched_.insert(key);
  int v = 0;
  const auto [ptr, ec] =
      std::from_chars(it->second.data(), it->second.data() + it->second.size(), v);
  if (ec != std::errc{} || ptr != it->second.data() + it->second.size())
    throw ParseError(origin_ + ": key `" + key + "`: `" + it->second +
                     "` is not an integer");
  return v;
}

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  touched_.insert(key);
  if (it->second == "true" || it->second == "1") return true;
  if (it->second == "false" || it->second == "0") return false;
  throw ParseError(origin_ + ": key `" + key + "`: expected true/false");
}

std::set<std::string> KeyValueConfig::unused_keys() const {
  std::set<std::string> unused;
  for (const auto& [key, _] : values_)
    if (!touched_.count(key)) unused.insert(key);
  return unused;
}

LossConfig load_loss_config(const KeyValueConfig& kv) {
  LossConfig cfg;
  cfg.tau_px = kv.get_double("loss.tau_px", cfg.tau_px);
  cfg.alpha = kv.get_double("loss.alpha", cfg.alpha);
  cfg.beta = kv.get_double("loss.beta", cfg.beta);
  cfg.gamma = kv.get_double("loss.gamma", cfg.gamma);
  cfg.depth_heuristic_m = kv.get_double("loss.depth_heuristic_m", cfg.depth_heuristic_m);
  cfg.valid_depth_min_m = kv.get_double("loss.valid_depth_min_m", cfg.valid_depth_min_m);
  cfg.valid_depth_max_m = kv.get_double("loss.valid_depth_max_m", cfg.valid_depth_max_m);
  cfg.valid_max_reproj_px =
      kv.get_double("loss.valid_max_reproj_px", cfg.valid_max_reproj_px);
  return cfg;
}

RefineConfig load_refine_config(const KeyValueConfig& kv) {
  RefineConfig cfg;
  cfg.inlier_threshold_px = kv.get_double("refine.threshold_px", cfg.inlier_threshold_px);
  cfg.max_iterations = kv.get_int("refine.max_iters", cfg.max_iterations);
  cfg.max_inner_iterations =
      kv.get_int("refine.max_inner_iters", cfg.max_inner_iterations);
  cfg.lambda_init = kv.get_double("refine.lambda_init", cfg.lambda_init);
  cfg.lambda_up = kv.get_double("refine.lambda_up", cfg.lambda_up);
  cfg.lambda_down = kv.get_double("refine.lambda_down", cfg.lambda_down);
  return cfg;
}

OptSettings load_opt_settings(const KeyValueConfig& kv) {
  OptSettings opt;
  opt.learning_rate = kv.get_double("fit.learning_rate", opt.learning_rate);
  opt.coord_learning_rate =
      kv.get_double("fit.coord_learning_rate", opt.coord_learning_rate);
  opt.adam_beta1 = kv.get_double("fit.adam_beta1", opt.adam_beta1);
  opt.adam_beta2 = kv.get_double("fit.adam_beta2", opt.adam_beta2);
  opt.adam_eps = kv.get_double("fit.adam_eps", opt.adam_eps);
  opt.theta_init = kv.get_double("fit.theta_init", opt.theta_init);
  opt.init_jitter = kv.get_double("fit.init_jitter", opt.init_jitter);
  opt.divergence_factor = kv.get_double("fit.divergence_factor", opt.divergence_factor);
  opt.alternate_updates = kv.get_bool("fit.alternate_updates", opt.alternate_updates);
  return opt;
}

AdaptConfig load_adapt_config(const KeyValueConfig& kv) {
  AdaptConfig cfg;
  cfg.frame_interval = kv.get_int("adapt.frame_interval", cfg.frame_interval);
  cfg.iterations = kv.get_int("adapt.iterations", cfg.iterations);
  cfg.learning_rate = kv.get_double("adapt.learning_rate", cfg.learning_rate);
  cfg.adam_beta1 = kv.get_double("adapt.adam_beta1", cfg.adam_beta1);
  cfg.adam_beta2 = kv.get_double("adapt.adam_beta2", cfg.adam_beta2);
  cfg.adam_eps = kv.get_double("adapt.adam_eps", cfg.adam_eps);
  cfg.pose_fd_step = kv.get_double("adapt.pose_fd_step", cfg.pose_fd_step);
  cfg.vec_fd_step = kv.get_double("adapt.vec_fd_step", cfg.vec_fd_step);
  cfg.divergence_factor =
      kv.get_double("adapt.divergence_factor", cfg.divergence_factor);
  return cfg;
}

}  // namespace wdlt
