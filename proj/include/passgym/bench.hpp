// SPDX-License-Identifier: Apache-2.0

#ifndef PASSGYM_BENCH_HPP
#define PASSGYM_BENCH_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "passgym/agents.hpp"
#include "passgym/env.hpp"
#include "passgym/graph.hpp"

namespace passgym::bench {

enum class Origin { MlpBlock, AttentionLike, ResidualChain, RandomDag };

std::string_view origin_name(Origin origin);
std::optional<Origin> origin_from_name(std::string_view name);

struct Benchmark {
  std::string name;
  ir::Graph graph;
  Origin origin = Origin::RandomDag;
  uint64_t seed = 0;
};

// Reproducible synthetic suite. Benchmark i uses seed base_seed + i, so two
// suites are disjoint exactly when their seed ranges are. Every graph is
// valid, has at least 5 ops, and is salted with reducible material (dead
// subgraphs, duplicate subexpressions, x*1 / x+0 wrappers, inverse
// transpose/reshape pairs, log(exp(x)) pairs, foldable constant islands) so
// the default pipeline strictly reduces it and pass ordering has headroom.
std::vector<Benchmark> generate_suite(int count, int64_t size_min, int64_t size_max,
                                      uint64_t base_seed);

ir::Graph generate_benchmark_graph(Origin origin, uint64_t seed, int64_t size_min,
                                   int64_t size_max);

// --- metric ---------------------------------------------------------------

struct MetricRow {
  double initial;        // I
  double rl_final;       // R
  double default_final;  // D
};

struct MetricResult {
  double geometric_mean = 1.0;
  int excluded = 0;
};

// (prod_b (I_b - R_b) / (I_b - D_b))^(1/B) computed via mean of logs.
// Degenerate rows: I==D==R contributes ratio 1; I==D with R<I is excluded
// (and counted); R>I or D>I is excluded. Throws DataError when every row is
// excluded.
MetricResult geometric_mean_metric(std::span<const MetricRow> rows);

// 100 * ((I-R) - (I-D)) / max(1, I-D): per-benchmark improvement of the
// agent's reduction over the default pipeline's.
double improvement_percent(double initial, double rl_final, double default_final);

// --- evaluation reports -----------------------------------------------------

struct EvalRow {
  std::string name;
  int64_t initial = 0;        // I
  int64_t rl_final = 0;       // R
  int64_t default_final = 0;  // D
  std::optional<double> ratio;  // absent when the metric excluded the row
  double improvement = 0.0;
  bool failed = false;  // per-row evaluation error; row carries no counts
  std::string error;
};

struct EvalReport {
  std::vector<EvalRow> rows;  // ordered by benchmark name
  double geometric_mean = 1.0;
  int excluded_count = 0;
};

// For every benchmark: I from cost analysis, D from the default pipeline,
// R from one deterministic episode of `policy`. A failing row is marked
// failed rather than aborting the suite. Rows are independent; `workers`
// caps parallel evaluation.
EvalReport run_evaluation(agents::ActionPolicy& policy, std::span<const Benchmark> suite,
                          const env::EnvConfig& env_config, int workers = 1);

// CSV: header, one row per benchmark, then a trailing GEOMEAN aggregate row.
void write_report_csv(const EvalReport& report, const std::filesystem::path& path);
void write_report_json(const EvalReport& report, const std::filesystem::path& path);
EvalReport read_report_json(const std::filesystem::path& path);

// A suite on disk is a directory of .mg files plus a manifest with one line
// per benchmark: name<TAB>origin<TAB>seed<TAB>file.
void write_suite(std::span<const Benchmark> suite, const std::filesystem::path& dir);
std::vector<Benchmark> read_suite(const std::filesystem::path& dir);

}  // namespace passgym::bench

#endif  // PASSGYM_BENCH_HPP
