#pragma once

#include "msp/adaptation.hpp"
#include "msp/solver.hpp"
#include "msp/synthetic.hpp"
#include "msp/types.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace msp::harness {

/// Invalid or inconsistent experiment configuration.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Solver selection plus per-method knobs, as read from a config file.
/// "anil" and "mom2" are reserved schema names so externally produced rows
/// can be merged; asking the harness to run them is a config error.
struct MethodSpec {
  std::string name;  // metasp | mom | altmin | altmingd | bm | nuc
  std::optional<double> step_size;
  int max_iters = 100;
  double rel_tol = 1e-10;
  std::optional<double> reg_coeff;
};

enum class Axis { Tasks, Samples, NoiseSd };

std::string axis_name(Axis axis);

/// One sweep: a base data-generating process, an axis with values to
/// substitute, methods to run, and trials per cell.
struct ExperimentConfig {
  Axis axis = Axis::Tasks;
  std::vector<double> values;
  DgpConfig base;
  std::vector<MethodSpec> methods;
  int trials = 5;
  std::uint64_t seed_base = 0;
  int threads = 1;
  bool record_timing = true;  // false writes wall_seconds as 0 for byte-stable output
  std::string output_dir = "out";
};

struct ResultRow {
  std::string method;
  Index d = 0, s = 0, m = 0, T = 0;
  double sigma = 0.0;
  std::uint64_t trial_seed = 0;
  double dist1 = 0.0;
  double dist2 = 0.0;
  int iterations = 0;
  double wall_seconds = 0.0;
  std::string status = "ok";  // ok | diverged | degenerate
};

/// Deterministic per-cell seed: mixes the base seed with the method name,
/// the axis value's bits, and the trial index, so adding or removing a
/// method never perturbs another method's data.
std::uint64_t derive_trial_seed(std::uint64_t seed_base, const std::string& method,
                                double axis_value, int trial);

/// Runs every (method, axis value, trial) cell, in a thread pool when
/// threads > 1. Rows come back sorted (method order, value order, trial),
/// independent of scheduling. Divergence becomes status=diverged with
/// metrics from the last finite iterate; it never aborts the sweep.
std::vector<ResultRow> run_sweep(const ExperimentConfig& cfg);

/// run_sweep plus results.csv and summary.csv under cfg.output_dir.
std::vector<ResultRow> run_sweep_to_dir(const ExperimentConfig& cfg);

void write_results_csv(const std::vector<ResultRow>& rows, const std::string& path);
void write_summary_csv(const ExperimentConfig& cfg, const std::vector<ResultRow>& rows,
                       const std::string& path);

/// Smallest task count, on a granularity-g grid, whose mean dist2 over the
/// configured trials meets the target. Doubles until feasible, then
/// bisects; nullopt when the ceiling is passed (reported as "/").
struct MinTasksConfig {
  DgpConfig base;           // T is ignored; the search sets it
  MethodSpec method;
  double target = 0.1;
  Index granularity = 0;    // 0 = auto: 10 below 1000, 100 at or above
  Index ceiling = 25600;
  int trials = 5;
  std::uint64_t seed_base = 0;
};
std::optional<Index> min_tasks_search(const MinTasksConfig& cfg);

/// Grid search driver behind min_tasks_search, exposed for testing: probe
/// maps a task count to a mean dist2.
std::optional<Index> min_tasks_grid_search(const std::function<double(Index)>& probe,
                                           double target, Index granularity,
                                           Index ceiling);

struct TraceRow {
  std::string method;
  int iter = 0;
  double loss = 0.0;
  double dist1 = 0.0;
  double dist2 = 0.0;
  double elapsed_seconds = 0.0;
};

/// One instrumented run against a known truth; per-iteration rows.
std::vector<TraceRow> trace_run(const MethodSpec& method, const DgpConfig& dgp,
                                std::uint64_t seed);
void write_trace_csv(const std::vector<TraceRow>& rows, const std::string& path);

/// Wraps a method spec as an adaptation-protocol learner. noise_sd feeds
/// methods that derive a penalty from it; pass 0 when unknown.
SubspaceLearner make_learner(const MethodSpec& method, double noise_sd = 0.0);

/// Single instrumented run described by a config file.
struct TraceConfig {
  DgpConfig dgp;
  MethodSpec method;
  std::uint64_t seed = 0;
  std::string output_dir = "out";
};

/// Adaptation experiment: a dataset (synthetic, or a CSV with an optional
/// preprocess sidecar), a split protocol, and the learner to compare against
/// the random-basis and unstructured reference arms.
struct AdaptConfig {
  std::optional<std::string> data_path;
  std::optional<std::string> preprocess_path;
  std::optional<DgpConfig> dgp;
  Index rank = 1;
  SplitProtocol split;
  MethodSpec learner;
  std::uint64_t seed = 0;
  std::string output_dir = "out";
};

struct AdaptReportRow {
  std::string arm;    // learner name | random_b | lsq_pinv
  std::string stage;  // meta_test | test_train | test_test
  double m_mre = 0.0;
  Index tasks = 0;
  Index skipped_points = 0;
};

/// Runs the learner through the full protocol and both reference arms over
/// the identical split, then flattens the stage reports.
std::vector<AdaptReportRow> run_adapt(const MultiTaskDataset& data, const AdaptConfig& cfg);
void write_adapt_csv(const std::vector<AdaptReportRow>& rows, const std::string& path);

/// Config file loaders (JSON; schema documented in the README).
ExperimentConfig load_sweep_config(const std::string& path);
MinTasksConfig load_min_tasks_config(const std::string& path);
TraceConfig load_trace_config(const std::string& path);
AdaptConfig load_adapt_config(const std::string& path);

/// Shortest round-trip decimal rendering used for all CSV numbers.
std::string format_double(double v);

}  // namespace msp::harness
