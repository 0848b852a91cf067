// SPDX-License-Identifier: Apache-2.0

#include "passgym/config.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "passgym/error.hpp"

namespace passgym::config {

namespace {

// Flattened "section.key" -> raw string view of an INI file. Keys inside a
// section may themselves contain dots (shaping.enabled).
class FlatIni {
 public:
  explicit FlatIni(const std::filesystem::path& path) {
    boost::property_tree::ptree tree;
    try {
      boost::property_tree::ini_parser::read_ini(path.string(), tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
      throw ConfigError("config: " + std::string(e.what()));
    }
    for (const auto& section : tree) {
      if (section.second.empty()) {
        values_[section.first] = section.second.data();
        continue;
      }
      for (const auto& kv : section.second) {
        values_[section.first + "." + kv.first] = kv.second.data();
      }
    }
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string get_string(const std::string& key, const std::string& fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }

  double get_double(const std::string& key, double fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    try {
      return std::stod(it->second);
    } catch (const std::exception&) {
      throw ConfigError("config: '" + key + "' expects a number, got '" + it->second + "'");
    }
  }

  int64_t get_int(const std::string& key, int64_t fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    try {
      return std::stoll(it->second);
    } catch (const std::exception&) {
      throw ConfigError("config: '" + key + "' expects an integer, got '" + it->second + "'");
    }
  }

  bool get_bool(const std::string& key, bool fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    if (it->second == "true" || it->second == "1" || it->second == "yes") return true;
    if (it->second == "false" || it->second == "0" || it->second == "no") return false;
    throw ConfigError("config: '" + key + "' expects a boolean, got '" + it->second + "'");
  }

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

std::vector<int> parse_int_list(const std::string& text, const std::string& key) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      out.push_back(std::stoi(item));
    } catch (const std::exception&) {
      throw ConfigError("config: '" + key + "' expects a comma list of integers");
    }
  }
  return out;
}

std::pair<int64_t, int64_t> parse_range(const std::string& text, const std::string& key) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) {
    throw ConfigError("config: '" + key + "' expects lo:hi");
  }
  try {
    return {std::stoll(text.substr(0, colon)), std::stoll(text.substr(colon + 1))};
  } catch (const std::exception&) {
    throw ConfigError("config: '" + key + "' expects lo:hi");
  }
}

env::ShapingConfig read_shaping(const FlatIni& ini, double gamma) {
  env::ShapingConfig shaping;
  shaping.enabled = ini.get_bool("env.shaping.enabled", false);
  shaping.gamma = gamma;
  shaping.flop_weight = ini.get_double("env.shaping.flop_weight", 1.0);
  shaping.transcendental_weight = ini.get_double("env.shaping.transcendental_weight", 2.0);
  const std::string scale = ini.get_string("env.shaping.scale", "auto");
  if (scale != "auto") {
    try {
      shaping.scale = std::stod(scale);
    } catch (const std::exception&) {
      throw ConfigError("config: 'env.shaping.scale' expects a number or 'auto'");
    }
  }
  return shaping;
}

std::vector<int> read_hidden(const FlatIni& ini, const std::string& key) {
  std::vector<int> hidden = parse_int_list(ini.get_string(key, "256,256"), key);
  if (hidden.empty()) throw ConfigError("config: '" + key + "' must name at least one layer");
  return hidden;
}

}  // namespace

void SuiteConfig::check() const {
  if (size_min < 5 || size_max > 5000 || size_min > size_max) {
    throw ConfigError("suite size_range must lie within [5, 5000]");
  }
  if (train_seed_end <= train_seed_begin || test_seed_end <= test_seed_begin) {
    throw ConfigError("suite seed ranges must be non-empty (lo:hi, half-open)");
  }
  const bool disjoint =
      train_seed_end <= test_seed_begin || test_seed_end <= train_seed_begin;
  if (!disjoint) {
    throw ConfigError("train and test seed ranges overlap; they must be disjoint");
  }
}

RunConfig load_run_config(const std::filesystem::path& path) {
  FlatIni ini(path);
  RunConfig cfg;

  cfg.env.horizon = static_cast<int>(ini.get_int("env.horizon", 16));
  cfg.env.gamma = ini.get_double("env.gamma", 0.99);
  const std::string mode = ini.get_string("env.reward_mode", "scaled_opcount");
  if (mode != "scaled_opcount") {
    throw ConfigError("config: unknown env.reward_mode '" + mode + "'");
  }
  if (ini.has("env.action_subset")) {
    cfg.env.action_subset =
        parse_int_list(ini.get_string("env.action_subset", ""), "env.action_subset");
  }
  cfg.env.shaping = read_shaping(ini, cfg.env.gamma);

  cfg.ppo.gamma = ini.get_double("ppo.gamma", cfg.env.gamma);
  cfg.ppo.gae_lambda = ini.get_double("ppo.gae_lambda", 0.95);
  cfg.ppo.clip_range = ini.get_double("ppo.clip_range", 0.2);
  cfg.ppo.entropy_coef = ini.get_double("ppo.entropy_coef", 0.0);
  cfg.ppo.value_coef = ini.get_double("ppo.value_coef", 0.5);
  cfg.ppo.lr = ini.get_double("ppo.lr", 3e-4);
  cfg.ppo.batch_size = static_cast<int>(ini.get_int("ppo.batch_size", 256));
  cfg.ppo.n_epochs = static_cast<int>(ini.get_int("ppo.n_epochs", 10));
  cfg.ppo.n_steps = static_cast<int>(ini.get_int("ppo.n_steps", 2048));
  cfg.ppo.n_envs = static_cast<int>(ini.get_int("ppo.n_envs", 8));
  cfg.ppo.total_steps = ini.get_int("ppo.total_steps", 50000);
  cfg.ppo.hidden_dims = read_hidden(ini, "ppo.hidden_dims");
  const std::string vim = ini.get_string("ppo.value_input_mode", "obs_only");
  if (vim == "obs_only") {
    cfg.ppo.value_input_mode = agents::ValueInputMode::ObsOnly;
  } else if (vim == "obs_plus_cost_features") {
    cfg.ppo.value_input_mode = agents::ValueInputMode::ObsPlusCostFeatures;
  } else {
    throw ConfigError("config: unknown ppo.value_input_mode '" + vim + "'");
  }
  if (!(cfg.ppo.clip_range > 0.0 && cfg.ppo.clip_range < 1.0)) {
    throw ConfigError("config: ppo.clip_range must lie in (0,1)");
  }
  if (cfg.ppo.batch_size > cfg.ppo.n_steps) {
    throw ConfigError("config: ppo.batch_size must not exceed ppo.n_steps");
  }
  cfg.ppo.shaping = cfg.env.shaping;
  cfg.ppo.shaping.gamma = cfg.ppo.gamma;

  cfg.dqn.lr = ini.get_double("dqn.lr", 3e-4);
  cfg.dqn.gamma = ini.get_double("dqn.gamma", cfg.env.gamma);
  cfg.dqn.batch_size = static_cast<int>(ini.get_int("dqn.batch_size", 256));
  cfg.dqn.buffer_capacity =
      static_cast<size_t>(ini.get_int("dqn.buffer_capacity", 1000000));
  cfg.dqn.target_update_interval = ini.get_int("dqn.target_update_interval", 1000);
  cfg.dqn.eps_start = ini.get_double("dqn.eps_start", 1.0);
  cfg.dqn.eps_end = ini.get_double("dqn.eps_end", 0.05);
  cfg.dqn.eps_decay_fraction = ini.get_double("dqn.eps_decay_fraction", 0.2);
  cfg.dqn.total_steps = ini.get_int("dqn.total_steps", 50000);
  cfg.dqn.hidden_dims = read_hidden(ini, "dqn.hidden_dims");
  if (cfg.dqn.eps_start < 0 || cfg.dqn.eps_start > 1 || cfg.dqn.eps_end < 0 ||
      cfg.dqn.eps_end > 1) {
    throw ConfigError("config: dqn epsilon schedule endpoints must lie in [0,1]");
  }

  cfg.a2c.lr = ini.get_double("a2c.lr", 3e-4);
  cfg.a2c.gamma = ini.get_double("a2c.gamma", cfg.env.gamma);
  cfg.a2c.n_steps = static_cast<int>(ini.get_int("a2c.n_steps", 8));
  cfg.a2c.value_coef = ini.get_double("a2c.value_coef", 0.5);
  cfg.a2c.entropy_coef = ini.get_double("a2c.entropy_coef", 0.0);
  cfg.a2c.total_steps = ini.get_int("a2c.total_steps", 50000);
  cfg.a2c.hidden_dims = read_hidden(ini, "a2c.hidden_dims");

  if (ini.has("suite.size_range")) {
    auto [lo, hi] = parse_range(ini.get_string("suite.size_range", ""), "suite.size_range");
    cfg.suite.size_min = lo;
    cfg.suite.size_max = hi;
  }
  if (ini.has("suite.train_seed_range")) {
    auto [lo, hi] =
        parse_range(ini.get_string("suite.train_seed_range", ""), "suite.train_seed_range");
    cfg.suite.train_seed_begin = static_cast<uint64_t>(lo);
    cfg.suite.train_seed_end = static_cast<uint64_t>(hi);
  }
  if (ini.has("suite.test_seed_range")) {
    auto [lo, hi] =
        parse_range(ini.get_string("suite.test_seed_range", ""), "suite.test_seed_range");
    cfg.suite.test_seed_begin = static_cast<uint64_t>(lo);
    cfg.suite.test_seed_end = static_cast<uint64_t>(hi);
  }
  if (ini.has("suite.count")) {
    const int64_t count = ini.get_int("suite.count", 0);
    if (!ini.has("suite.train_seed_range")) {
      cfg.suite.train_seed_begin = 0;
      cfg.suite.train_seed_end = static_cast<uint64_t>(count);
    } else if (count != cfg.suite.train_count()) {
      throw ConfigError("config: suite.count disagrees with suite.train_seed_range");
    }
  }

  cfg.output.directory = ini.get_string("output.directory", "out");
  cfg.output.checkpoint = ini.get_string("output.checkpoint", "");

  cfg.seed = static_cast<uint64_t>(ini.get_int("run.seed", 0));
  cfg.workers = static_cast<int>(ini.get_int("run.workers", 1));
  if (cfg.workers < 1) throw ConfigError("config: run.workers must be >= 1");
  return cfg;
}

}  // namespace passgym::config
