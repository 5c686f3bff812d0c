#pragma once

// Key-value configuration files: one `key = value` per line, `#` comments.
// Module loaders pull their own keys; the CLI rejects files with keys nobody
// consumed so typos fail loudly.

#include <map>
#include <set>
#include <string>

#include "wdlt/adapt.hpp"
#include "wdlt/lm_refine.hpp"
#include "wdlt/losses.hpp"
#include "wdlt/weight_fit.hpp"

namespace wdlt {

class KeyValueConfig {
 public:
  KeyValueConfig() = default;
  static KeyValueConfig from_file(const std::string& path);
  static KeyValueConfig from_string(const std::string& text,
                                    const std::string& origin = "<string>");

  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  // Keys present in the file that no getter ever asked for.
  std::set<std::string> unused_keys() const;

 private:
  std::map<std::string, std::string> values_;
  mutable std::set<std::string> touched_;
  std::string origin_;
};

// Every default stated by the respective module, overridable per key.
LossConfig load_loss_config(const KeyValueConfig& kv);          // loss.*
RefineConfig load_refine_config(const KeyValueConfig& kv);      // refine.*
OptSettings load_opt_settings(const KeyValueConfig& kv);        // fit.*
AdaptConfig load_adapt_config(const KeyValueConfig& kv);        // adapt.*

}  // namespace wdlt
