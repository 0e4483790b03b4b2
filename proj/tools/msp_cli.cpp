// Command-line front end for the sweep, search, trace, adaptation, and
// isometry-probe experiments. Exit codes: 0 ok, 2 bad config, 3 bad data,
// 4 numeric failure.

#include "msp/adaptation.hpp"
#include "msp/harness.hpp"
#include "msp/metrics.hpp"
#include "msp/rng.hpp"
#include "msp/solver.hpp"
#include "msp/synthetic.hpp"
#include "msp/table.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace {

using msp::harness::format_double;

struct CommonArgs {
  std::string config;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
};

void add_common(CLI::App* sub, CommonArgs& args, bool with_threads) {
  sub->add_option("--config", args.config, "JSON experiment description")->required();
  sub->add_option("--out", args.out, "output directory (overrides the config)");
  sub->add_option("--seed", args.seed, "base seed (overrides the config)");
  if (with_threads)
    sub->add_option("--threads", args.threads, "worker threads (overrides the config)");
}

int do_sweep(const CommonArgs& args) {
  msp::harness::ExperimentConfig cfg = msp::harness::load_sweep_config(args.config);
  if (args.out) cfg.output_dir = *args.out;
  if (args.seed) cfg.seed_base = *args.seed;
  if (args.threads) cfg.threads = *args.threads;
  const auto rows = msp::harness::run_sweep_to_dir(cfg);
  std::cout << "wrote " << cfg.output_dir << "/results.csv (" << rows.size()
            << " rows) and " << cfg.output_dir << "/summary.csv\n";
  return 0;
}

int do_min_tasks(const CommonArgs& args) {
  msp::harness::MinTasksConfig cfg = msp::harness::load_min_tasks_config(args.config);
  if (args.seed) cfg.seed_base = *args.seed;
  const std::optional<msp::Index> result = msp::harness::min_tasks_search(cfg);
  const std::string rendered = result ? std::to_string(*result) : std::string("/");
  std::cout << "min_tasks(" << cfg.method.name << ", m=" << cfg.base.m
            << ", target=" << format_double(cfg.target) << ") = " << rendered << "\n";
  if (args.out) {
    std::filesystem::create_directories(*args.out);
    const std::string path = *args.out + "/min_tasks.csv";
    std::ofstream file(path);
    if (!file) throw msp::harness::ConfigError("cannot write " + path);
    file << "method,d,s,m,sigma,target,min_tasks\n";
    file << cfg.method.name << ',' << cfg.base.d << ',' << cfg.base.s << ','
         << cfg.base.m << ',' << format_double(cfg.base.noise_sd) << ','
         << format_double(cfg.target) << ',' << rendered << '\n';
    std::cout << "wrote " << path << "\n";
  }
  return 0;
}

int do_trace(const CommonArgs& args) {
  msp::harness::TraceConfig cfg = msp::harness::load_trace_config(args.config);
  if (args.out) cfg.output_dir = *args.out;
  if (args.seed) cfg.seed = *args.seed;
  const auto rows = msp::harness::trace_run(cfg.method, cfg.dgp, cfg.seed);
  std::filesystem::create_directories(cfg.output_dir);
  const std::string path = cfg.output_dir + "/trace.csv";
  msp::harness::write_trace_csv(rows, path);
  std::cout << "wrote " << path << " (" << rows.size() << " iterations)\n";
  return 0;
}

int do_adapt(const CommonArgs& args) {
  msp::harness::AdaptConfig cfg = msp::harness::load_adapt_config(args.config);
  if (args.out) cfg.output_dir = *args.out;
  if (args.seed) cfg.seed = *args.seed;

  const msp::MultiTaskDataset data = [&]() {
    if (cfg.data_path) {
      const msp::RawTaskTable table = msp::read_task_table(*cfg.data_path);
      msp::PreprocessSpec spec;
      if (cfg.preprocess_path) {
        spec = msp::read_preprocess_spec(*cfg.preprocess_path);
      } else {
        for (const auto& col : table.columns)
          spec.columns.push_back({col, msp::Transform::Passthrough, 183.0});
      }
      msp::PreprocessResult pre = msp::preprocess(table, spec);
      if (pre.rejected_rows > 0 || pre.dropped_tasks > 0)
        std::cout << "preprocess rejected " << pre.rejected_rows << " rows, dropped "
                  << pre.dropped_tasks << " tasks\n";
      return std::move(pre.dataset);
    }
    msp::DgpConfig dgp = *cfg.dgp;
    dgp.seed = msp::splitmix64(cfg.seed ^ msp::fnv1a("dgp"));
    return msp::generate_dataset(msp::generate_ground_truth(dgp), dgp);
  }();

  const auto rows = msp::harness::run_adapt(data, cfg);
  std::filesystem::create_directories(cfg.output_dir);
  const std::string path = cfg.output_dir + "/adapt_report.csv";
  msp::harness::write_adapt_csv(rows, path);
  for (const auto& r : rows)
    std::cout << r.arm << " " << r.stage << " m_mre=" << format_double(r.m_mre) << "\n";
  std::cout << "wrote " << path << "\n";
  return 0;
}

int do_rip_probe(const CommonArgs& args) {
  // Reuses the trace config shape: a dgp block plus probe settings.
  std::ifstream in(args.config);
  if (!in) throw msp::harness::ConfigError("cannot open config: " + args.config);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw msp::harness::ConfigError(std::string("config parse: ") + e.what());
  }
  if (!j.contains("dgp")) throw msp::harness::ConfigError("rip-probe: missing 'dgp'");
  msp::DgpConfig dgp;
  dgp.d = j["dgp"].value("d", msp::Index{0});
  dgp.s = j["dgp"].value("s", msp::Index{1});
  dgp.T = j["dgp"].value("T", msp::Index{1});
  dgp.m = j["dgp"].value("m", msp::Index{1});
  dgp.noise_sd = j["dgp"].value("sigma", 0.0);
  const msp::Index rank = j.value("rank", dgp.s);
  const msp::Index samples = j.value("samples", msp::Index{100});
  std::uint64_t seed = j.value("seed", std::uint64_t{0});
  if (args.seed) seed = *args.seed;

  dgp.seed = msp::splitmix64(seed ^ msp::fnv1a("dgp"));
  const msp::MultiTaskDataset data =
      msp::generate_dataset(msp::generate_ground_truth(dgp), dgp);
  const msp::RipEstimate est = msp::rip_probe(data, rank, samples, seed);
  std::cout << "rank=" << est.rank_probed << " probes=" << est.samples
            << " min_ratio=" << format_double(est.min_ratio)
            << " max_ratio=" << format_double(est.max_ratio)
            << " delta_hat=" << format_double(est.delta_hat)
            << " theory_bound=" << format_double(est.theory_bound) << "\n";
  if (args.out) {
    std::filesystem::create_directories(*args.out);
    const std::string path = *args.out + "/rip_probe.csv";
    std::ofstream file(path);
    if (!file) throw msp::harness::ConfigError("cannot write " + path);
    file << "rank,probes,min_ratio,max_ratio,delta_hat,theory_bound\n";
    file << est.rank_probed << ',' << est.samples << ',' << format_double(est.min_ratio)
         << ',' << format_double(est.max_ratio) << ',' << format_double(est.delta_hat)
         << ',' << format_double(est.theory_bound) << '\n';
    std::cout << "wrote " << path << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multi-task low-rank regression experiments"};
  app.require_subcommand(1);

  CommonArgs sweep_args, min_args, trace_args, adapt_args, rip_args;
  CLI::App* sweep = app.add_subcommand("sweep", "run a config-driven method sweep");
  add_common(sweep, sweep_args, true);
  CLI::App* min_tasks =
      app.add_subcommand("min-tasks", "search the smallest task count hitting a target");
  add_common(min_tasks, min_args, false);
  CLI::App* trace = app.add_subcommand("trace", "per-iteration trace of one run");
  add_common(trace, trace_args, false);
  CLI::App* adapt =
      app.add_subcommand("adapt", "held-out task adaptation against reference arms");
  add_common(adapt, adapt_args, false);
  CLI::App* rip =
      app.add_subcommand("rip-probe", "empirical restricted-isometry ratios");
  add_common(rip, rip_args, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (sweep->parsed()) return do_sweep(sweep_args);
    if (min_tasks->parsed()) return do_min_tasks(min_args);
    if (trace->parsed()) return do_trace(trace_args);
    if (adapt->parsed()) return do_adapt(adapt_args);
    if (rip->parsed()) return do_rip_probe(rip_args);
  } catch (const msp::harness::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const msp::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const msp::DivergenceError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 4;
  } catch (const msp::DegeneracyError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 4;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
