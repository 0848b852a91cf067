// SPDX-License-Identifier: Apache-2.0

#ifndef PASSGYM_CONFIG_HPP
#define PASSGYM_CONFIG_HPP

#include <cstdint>
#include <filesystem>
#include <string>

#include "passgym/agents.hpp"
#include "passgym/env.hpp"

namespace passgym::config {

struct SuiteConfig {
  int64_t size_min = 24;
  int64_t size_max = 96;
  uint64_t train_seed_begin = 0;
  uint64_t train_seed_end = 100;  // half-open
  uint64_t test_seed_begin = 1000;
  uint64_t test_seed_end = 1050;

  int train_count() const { return static_cast<int>(train_seed_end - train_seed_begin); }
  int test_count() const { return static_cast<int>(test_seed_end - test_seed_begin); }

  // Train/test benchmark seeds must not intersect.
  void check() const;
};

struct OutputConfig {
  std::string directory = "out";
  std::string checkpoint;  // empty = <directory>/checkpoint.json
};

// Aggregated run configuration: INI sections [env], [ppo], [dqn], [a2c],
// [suite], [output], [run]; flags override file values.
struct RunConfig {
  env::EnvConfig env;
  agents::PpoConfig ppo;
  agents::DqnConfig dqn;
  agents::A2cConfig a2c;
  SuiteConfig suite;
  OutputConfig output;
  uint64_t seed = 0;
  int workers = 1;
};

RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace passgym::config

#endif  // PASSGYM_CONFIG_HPP
