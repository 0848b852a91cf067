// SPDX-License-Identifier: Apache-2.0
//
// passgym: generate benchmark suites, train pass-ordering agents, evaluate
// them against the default pipeline, and optimize single graphs.

#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "passgym/agents.hpp"
#include "passgym/bench.hpp"
#include "passgym/config.hpp"
#include "passgym/cost.hpp"
#include "passgym/error.hpp"
#include "passgym/interp.hpp"
#include "passgym/rng.hpp"
#include "passgym/text.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace passgym;

namespace {

struct GlobalOptions {
  std::string config_path;
  uint64_t seed = 0;
  bool seed_set = false;
  int workers = 0;  // 0 = from config
};

config::RunConfig resolve_config(const GlobalOptions& global) {
  config::RunConfig cfg;
  if (!global.config_path.empty()) {
    cfg = config::load_run_config(global.config_path);
  }
  if (global.seed_set) cfg.seed = global.seed;
  if (global.workers > 0) cfg.workers = global.workers;
  return cfg;
}

// Accepts either a suite directory itself or a parent holding train/ test/.
fs::path locate_suite(const fs::path& base, const std::string& preferred) {
  if (fs::exists(base / "manifest")) return base;
  if (fs::exists(base / preferred / "manifest")) return base / preferred;
  throw DataError("no suite manifest found under " + base.string());
}

json echo_env_config(const env::EnvConfig& e) {
  json j{{"horizon", e.horizon}, {"gamma", e.gamma}, {"reward_mode", "scaled_opcount"}};
  if (!e.action_subset.empty()) j["action_subset"] = e.action_subset;
  j["shaping"] = json{{"enabled", e.shaping.enabled},
                      {"flop_weight", e.shaping.flop_weight},
                      {"transcendental_weight", e.shaping.transcendental_weight},
                      {"scale", e.shaping.scale ? json(*e.shaping.scale) : json("auto")}};
  return j;
}

void write_training_log(const std::vector<agents::LogRecord>& log, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write training log: " + path.string());
  for (const agents::LogRecord& rec : log) {
    out << agents::log_record_to_json(rec).dump() << '\n';
  }
}

int cmd_gen(const config::RunConfig& cfg, const std::string& out_dir) {
  cfg.suite.check();
  const fs::path base = out_dir.empty() ? fs::path(cfg.output.directory) / "suite"
                                        : fs::path(out_dir);
  auto train = bench::generate_suite(cfg.suite.train_count(), cfg.suite.size_min,
                                     cfg.suite.size_max, cfg.suite.train_seed_begin);
  auto test = bench::generate_suite(cfg.suite.test_count(), cfg.suite.size_min,
                                    cfg.suite.size_max, cfg.suite.test_seed_begin);
  bench::write_suite(train, base / "train");
  bench::write_suite(test, base / "test");
  std::cout << "wrote " << train.size() << " train and " << test.size()
            << " test benchmarks to " << base.string() << "\n";
  return 0;
}

int cmd_train(config::RunConfig cfg, const std::string& algo, const std::string& suite_dir,
              const std::string& out_dir, long steps_override, bool shaping_flag,
              bool value_features_flag) {
  if (shaping_flag) {
    cfg.env.shaping.enabled = true;
    cfg.ppo.shaping.enabled = true;
  }
  if (value_features_flag) {
    cfg.ppo.value_input_mode = agents::ValueInputMode::ObsPlusCostFeatures;
  }
  if (steps_override > 0) {
    cfg.ppo.total_steps = steps_override;
    cfg.dqn.total_steps = steps_override;
    cfg.a2c.total_steps = steps_override;
  }

  const fs::path suite_path = locate_suite(
      suite_dir.empty() ? fs::path(cfg.output.directory) / "suite" : fs::path(suite_dir),
      "train");
  auto suite = bench::read_suite(suite_path);
  agents::TrainSetup setup;
  setup.env_config = cfg.env;
  for (const bench::Benchmark& b : suite) setup.graphs.push_back(b.graph);

  const auto& catalog = passes::Catalog::standard();
  agents::TrainResult result;
  long total_steps = 0;
  if (algo == "ppo") {
    result = agents::ppo_train(setup, cfg.ppo, cfg.seed, cfg.workers);
    total_steps = cfg.ppo.total_steps;
  } else if (algo == "dqn") {
    result = agents::dqn_train(setup, cfg.dqn, cfg.seed);
    total_steps = cfg.dqn.total_steps;
  } else if (algo == "a2c") {
    result = agents::a2c_train(setup, cfg.a2c, cfg.seed);
    total_steps = cfg.a2c.total_steps;
  } else {
    throw ConfigError("unknown algorithm '" + algo + "' (expected ppo|dqn|a2c)");
  }

  const fs::path out = out_dir.empty() ? fs::path(cfg.output.directory) : fs::path(out_dir);
  fs::create_directories(out);
  const fs::path checkpoint_path = cfg.output.checkpoint.empty()
                                       ? out / "checkpoint.json"
                                       : fs::path(cfg.output.checkpoint);

  agents::AgentCheckpoint cp;
  cp.algo = algo;
  cp.catalog_fingerprint = catalog.fingerprint();
  env::PassEnv probe(cfg.env);
  cp.action_count = probe.action_space_size();
  cp.value_input_mode = cfg.ppo.value_input_mode;
  cp.policy = result.policy;
  cp.value = result.value;
  cp.policy_opt = result.policy_opt;
  cp.value_opt = result.value_opt;
  cp.meta = json{{"algo", algo},
                 {"seed", cfg.seed},
                 {"total_steps", total_steps},
                 {"shaping", cfg.env.shaping.enabled || (algo == "ppo" && cfg.ppo.shaping.enabled)},
                 {"value_features",
                  cfg.ppo.value_input_mode == agents::ValueInputMode::ObsPlusCostFeatures},
                 {"suite", suite_path.string()},
                 {"env", echo_env_config(cfg.env)},
                 {"aborted", result.aborted}};
  agents::save_agent_checkpoint(cp, checkpoint_path);
  write_training_log(result.log, out / "train_log.jsonl");

  const double final_return =
      result.log.empty() ? 0.0 : result.log.back().mean_episode_return;
  std::cout << "algo=" << algo << " steps=" << total_steps
            << " final_mean_episode_return=" << ir::format_double(final_return) << "\n";
  std::cout << "checkpoint: " << checkpoint_path.string() << "\n";
  if (result.aborted) {
    std::cerr << "training aborted on numeric failure; last good checkpoint retained\n";
    return 3;
  }
  return 0;
}

int cmd_eval(const config::RunConfig& cfg, const std::string& checkpoint_path,
             const std::string& baseline, const std::string& suite_dir,
             const std::string& out_dir) {
  const fs::path suite_path = locate_suite(
      suite_dir.empty() ? fs::path(cfg.output.directory) / "suite" : fs::path(suite_dir),
      "test");
  auto suite = bench::read_suite(suite_path);

  env::EnvConfig env_config = cfg.env;
  std::unique_ptr<agents::ActionPolicy> policy;
  if (!baseline.empty()) {
    if (baseline != "greedy") throw ConfigError("unknown baseline '" + baseline + "'");
    policy = std::make_unique<agents::GreedyPolicy>();
  } else {
    auto cp = agents::load_agent_checkpoint(checkpoint_path);
    const auto& catalog = passes::Catalog::standard();
    if (cp.catalog_fingerprint != catalog.fingerprint()) {
      throw DataError("checkpoint was trained against a different pass catalog");
    }
    env::PassEnv probe(env_config);
    if (cp.action_count != probe.action_space_size()) {
      throw DataError("checkpoint action count " + std::to_string(cp.action_count) +
                      " does not match the configured action space " +
                      std::to_string(probe.action_space_size()));
    }
    policy = std::make_unique<agents::NetworkPolicy>(cp.policy);
  }

  bench::EvalReport report = bench::run_evaluation(*policy, suite, env_config, cfg.workers);

  const fs::path out = out_dir.empty() ? fs::path(cfg.output.directory) : fs::path(out_dir);
  fs::create_directories(out);
  bench::write_report_csv(report, out / "report.csv");
  bench::write_report_json(report, out / "report.json");

  double worst = std::numeric_limits<double>::infinity();
  std::string worst_name = "-";
  for (const auto& row : report.rows) {
    if (!row.failed && row.improvement < worst) {
      worst = row.improvement;
      worst_name = row.name;
    }
  }
  std::cout << "geometric_mean=" << ir::format_double(report.geometric_mean)
            << " excluded=" << report.excluded_count << "\n";
  if (std::isfinite(worst)) {
    std::cout << "worst_row=" << worst_name
              << " improvement_percent=" << ir::format_double(worst) << "\n";
  }
  std::cout << "reports: " << (out / "report.csv").string() << ", "
            << (out / "report.json").string() << "\n";
  return 0;
}

int cmd_compare(const std::string& a_path, const std::string& b_path) {
  bench::EvalReport a = bench::read_report_json(a_path);
  bench::EvalReport b = bench::read_report_json(b_path);
  std::map<std::string, double> a_ratio;
  for (const auto& row : a.rows) {
    if (!row.failed && row.ratio) a_ratio[row.name] = *row.ratio;
  }
  std::cout << "name\tratio_a\tratio_b\tdelta\n";
  for (const auto& row : b.rows) {
    if (row.failed || !row.ratio) continue;
    auto it = a_ratio.find(row.name);
    if (it == a_ratio.end()) continue;
    std::cout << row.name << '\t' << ir::format_double(it->second) << '\t'
              << ir::format_double(*row.ratio) << '\t'
              << ir::format_double(*row.ratio - it->second) << '\n';
  }
  std::cout << "geometric_mean: a=" << ir::format_double(a.geometric_mean)
            << " b=" << ir::format_double(b.geometric_mean)
            << " delta=" << ir::format_double(b.geometric_mean - a.geometric_mean) << "\n";
  return 0;
}

json cost_to_json(const ir::CostAnalysis& cost) {
  return json{{"op_count", cost.op_count},
              {"flop_count", cost.flop_count},
              {"transcendental_count", cost.transcendental_count}};
}

int cmd_optimize(const config::RunConfig& cfg, const std::string& checkpoint_path,
                 const std::string& graph_path, std::string out_path, bool verify) {
  ir::Graph graph = ir::read_graph_file(graph_path);
  auto cp = agents::load_agent_checkpoint(checkpoint_path);
  const auto& catalog = passes::Catalog::standard();
  if (cp.catalog_fingerprint != catalog.fingerprint()) {
    throw DataError("checkpoint was trained against a different pass catalog");
  }
  agents::NetworkPolicy policy(cp.policy);
  env::PassEnv env(cfg.env);
  agents::EpisodeResult episode = agents::evaluate_policy(policy, env, graph, true);
  const ir::Graph& optimized = env.graph();

  if (out_path.empty()) {
    fs::path p(graph_path);
    out_path = (p.parent_path() / (p.stem().string() + "_opt.mg")).string();
  }
  ir::write_graph_file(optimized, out_path);

  json passes_applied = json::array();
  for (passes::PassId id : episode.sequence) {
    passes_applied.push_back(catalog.info(id).name);
  }
  json sidecar{{"input", graph_path},
               {"output", out_path},
               {"passes", passes_applied},
               {"before", cost_to_json(ir::cost_analysis(graph))},
               {"after", cost_to_json(ir::cost_analysis(optimized))}};

  if (verify) {
    std::mt19937_64 rng = rl::make_rng(cfg.seed, 41);
    int checked = 0;
    for (int trial = 0; trial < 5; ++trial) {
      ir::Bindings bindings;
      for (const ir::Node& node : graph.nodes) {
        if (node.kind != ir::OpKind::Parameter) continue;
        ir::Tensor t = ir::Tensor::zeros(node.shape);
        for (double& v : t.data) v = rl::uniform_real(rng, -2.0, 2.0);
        bindings.emplace(node.id, std::move(t));
      }
      ir::Tensor before = ir::evaluate(graph, bindings);
      bool all_finite = true;
      for (double v : before.data) all_finite = all_finite && std::isfinite(v);
      if (!all_finite) continue;
      ir::Tensor after = ir::evaluate(optimized, bindings);
      for (size_t i = 0; i < before.data.size(); ++i) {
        const double scale = std::max({1.0, std::abs(before.data[i]), std::abs(after.data[i])});
        if (std::abs(before.data[i] - after.data[i]) > 1e-9 * scale) {
          throw DataError("verification failed: optimized graph diverges from input");
        }
      }
      ++checked;
    }
    sidecar["verified_bindings"] = checked;
    std::cout << "verified on " << checked << " random bindings\n";
  }

  const std::string sidecar_path = out_path + ".passes.json";
  std::ofstream side(sidecar_path);
  if (!side) throw DataError("cannot write sidecar: " + sidecar_path);
  side << sidecar.dump(2) << '\n';

  std::cout << "op_count " << sidecar["before"]["op_count"] << " -> "
            << sidecar["after"]["op_count"] << "; wrote " << out_path << "\n";
  return 0;
}

int cmd_show(const std::string& graph_path) {
  ir::Graph graph = ir::read_graph_file(graph_path);
  std::cout << ir::emit_text(graph);
  ir::CostAnalysis cost = ir::cost_analysis(graph);
  std::cout << "# op_count " << cost.op_count << "\n";
  std::cout << "# flop_count " << cost.flop_count << "\n";
  std::cout << "# transcendental_count " << cost.transcendental_count << "\n";
  for (int k = 0; k < ir::kOpKindCount; ++k) {
    if (cost.per_kind[static_cast<size_t>(k)] > 0) {
      std::cout << "# " << ir::op_kind_name(static_cast<ir::OpKind>(k)) << " "
                << cost.per_kind[static_cast<size_t>(k)] << "\n";
    }
  }
  return 0;
}

int cmd_catalog_list() {
  const auto& catalog = passes::Catalog::standard();
  for (int i = 0; i < catalog.size(); ++i) {
    const auto& info = catalog.info(i);
    std::cout << info.id << '\t' << info.name << '\t' << info.description << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pass-ordering RL toolkit over a miniature tensor-graph IR"};
  app.require_subcommand(1);
  app.fallthrough();  // global options may follow the subcommand

  GlobalOptions global;
  app.add_option("--config", global.config_path, "INI run configuration file");
  app.add_option("--seed", global.seed, "global seed")
      ->envname("PASSGYM_SEED")
      ->each([&](const std::string&) { global.seed_set = true; });
  app.add_option("--workers", global.workers, "parallelism cap");

  auto* gen = app.add_subcommand("gen", "generate train/test benchmark suites");
  std::string gen_out;
  std::string gen_size_range, gen_train_seeds, gen_test_seeds;
  gen->add_option("--out", gen_out, "output directory (default <output.directory>/suite)");
  gen->add_option("--size-range", gen_size_range, "op count range lo:hi");
  gen->add_option("--train-seeds", gen_train_seeds, "train seed range lo:hi (half-open)");
  gen->add_option("--test-seeds", gen_test_seeds, "test seed range lo:hi (half-open)");

  auto* train = app.add_subcommand("train", "train an agent on the train suite");
  std::string train_algo = "ppo", train_suite, train_out;
  long train_steps = 0;
  bool train_shaping = false, train_value_features = false;
  train->add_option("--algo", train_algo, "ppo|dqn|a2c");
  train->add_option("--suite", train_suite, "suite directory");
  train->add_option("--out", train_out, "output directory");
  train->add_option("--steps", train_steps, "total environment steps");
  train->add_flag("--shaping", train_shaping, "enable potential-based reward shaping");
  train->add_flag("--value-features", train_value_features,
                  "feed cost features into the value network");

  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint on the test suite");
  std::string eval_checkpoint, eval_baseline, eval_suite, eval_out;
  std::vector<std::string> eval_compare;
  eval->add_option("--checkpoint", eval_checkpoint, "trained checkpoint");
  eval->add_option("--baseline", eval_baseline, "evaluate a baseline (greedy)");
  eval->add_option("--suite", eval_suite, "suite directory");
  eval->add_option("--out", eval_out, "output directory");
  eval->add_option("--compare", eval_compare, "two report.json files to diff")
      ->expected(2);

  auto* optimize = app.add_subcommand("optimize", "optimize one .mg graph with a checkpoint");
  std::string opt_checkpoint, opt_graph, opt_out;
  bool opt_verify = false;
  optimize->add_option("--checkpoint", opt_checkpoint, "trained checkpoint")->required();
  optimize->add_option("--graph", opt_graph, "input .mg file")->required();
  optimize->add_option("--out", opt_out, "output .mg file");
  optimize->add_flag("--verify", opt_verify,
                     "check optimized output against the interpreter on random bindings");

  auto* show = app.add_subcommand("show", "print a graph and its cost analysis");
  std::string show_graph;
  show->add_option("file", show_graph, "graph .mg file")->required();

  auto* catalog_cmd = app.add_subcommand("catalog", "pass catalog introspection");
  auto* catalog_list = catalog_cmd->add_subcommand("list", "list all passes");
  catalog_cmd->require_subcommand(1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    config::RunConfig cfg = resolve_config(global);
    if (gen->parsed()) {
      auto parse_range_opt = [](const std::string& text, const char* what) {
        const auto colon = text.find(':');
        if (colon == std::string::npos) {
          throw ConfigError(std::string(what) + " expects lo:hi");
        }
        return std::pair<int64_t, int64_t>{std::stoll(text.substr(0, colon)),
                                           std::stoll(text.substr(colon + 1))};
      };
      if (!gen_size_range.empty()) {
        auto [lo, hi] = parse_range_opt(gen_size_range, "--size-range");
        cfg.suite.size_min = lo;
        cfg.suite.size_max = hi;
      }
      if (!gen_train_seeds.empty()) {
        auto [lo, hi] = parse_range_opt(gen_train_seeds, "--train-seeds");
        cfg.suite.train_seed_begin = static_cast<uint64_t>(lo);
        cfg.suite.train_seed_end = static_cast<uint64_t>(hi);
      }
      if (!gen_test_seeds.empty()) {
        auto [lo, hi] = parse_range_opt(gen_test_seeds, "--test-seeds");
        cfg.suite.test_seed_begin = static_cast<uint64_t>(lo);
        cfg.suite.test_seed_end = static_cast<uint64_t>(hi);
      }
      return cmd_gen(cfg, gen_out);
    }
    if (train->parsed()) {
      return cmd_train(cfg, train_algo, train_suite, train_out, train_steps, train_shaping,
                       train_value_features);
    }
    if (eval->parsed()) {
      if (!eval_compare.empty()) return cmd_compare(eval_compare[0], eval_compare[1]);
      if (eval_checkpoint.empty() && eval_baseline.empty()) {
        throw ConfigError("eval requires --checkpoint, --baseline, or --compare");
      }
      return cmd_eval(cfg, eval_checkpoint, eval_baseline, eval_suite, eval_out);
    }
    if (optimize->parsed()) {
      return cmd_optimize(cfg, opt_checkpoint, opt_graph, opt_out, opt_verify);
    }
    if (show->parsed()) return cmd_show(show_graph);
    if (catalog_cmd->parsed() && catalog_list->parsed()) return cmd_catalog_list();
    throw ConfigError("no subcommand given");
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 3;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
