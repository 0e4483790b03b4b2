#include "msp/harness.hpp"

#include "msp/adaptation.hpp"
#include "msp/baselines.hpp"
#include "msp/metasp.hpp"
#include "msp/metrics.hpp"
#include "msp/model.hpp"
#include "msp/rng.hpp"

#include <json.hpp>

#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <thread>

namespace msp::harness {

namespace {

constexpr const char* kResultsHeader =
    "method,d,s,m,T,sigma,trial_seed,dist1,dist2,iterations,wall_seconds,status";
constexpr const char* kTraceHeader = "method,iter,loss,dist1,dist2,elapsed_seconds";

const std::vector<std::string> kRunnable = {"metasp", "mom",      "altmin",
                                            "altmingd", "bm",     "nuc"};
const std::vector<std::string> kReserved = {"anil", "mom2"};

bool contains(const std::vector<std::string>& v, const std::string& s) {
  for (const auto& e : v)
    if (e == s) return true;
  return false;
}

void check_method_name(const std::string& name) {
  if (contains(kRunnable, name)) return;
  if (contains(kReserved, name))
    throw ConfigError("method '" + name + "' is reserved for external rows, not runnable");
  throw ConfigError("unknown method '" + name + "'");
}

}  // namespace

std::string axis_name(Axis axis) {
  switch (axis) {
    case Axis::Tasks: return "T";
    case Axis::Samples: return "m";
    case Axis::NoiseSd: return "sigma";
  }
  return "?";
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) return "nan";
  return std::string(buf, ptr);
}

std::uint64_t derive_trial_seed(std::uint64_t seed_base, const std::string& method,
                                double axis_value, int trial) {
  std::uint64_t bits = 0;
  static_assert(sizeof(bits) == sizeof(axis_value));
  std::memcpy(&bits, &axis_value, sizeof(bits));
  std::uint64_t h = splitmix64(seed_base ^ fnv1a(method));
  h = splitmix64(h ^ bits);
  h = splitmix64(h ^ static_cast<std::uint64_t>(trial));
  return h;
}

namespace {

DgpConfig with_axis(const DgpConfig& base, Axis axis, double value) {
  DgpConfig cfg = base;
  switch (axis) {
    case Axis::Tasks:
      cfg.T = static_cast<Index>(std::llround(value));
      cfg.m_per_task.clear();
      break;
    case Axis::Samples:
      cfg.m = static_cast<Index>(std::llround(value));
      cfg.m_per_task.clear();
      break;
    case Axis::NoiseSd:
      cfg.noise_sd = value;
      break;
  }
  return cfg;
}

struct CellOutcome {
  FitResult result;
  int iterations = 0;
  std::string status = "ok";
};

CellOutcome run_method(const MethodSpec& method, const MultiTaskDataset& data,
                       const DgpConfig& dgp, std::uint64_t trial_seed) {
  const std::uint64_t init_seed = splitmix64(trial_seed ^ fnv1a("init"));
  auto finish = [](FitResult&& r) {
    CellOutcome out{std::move(r)};
    out.iterations = static_cast<int>(out.result.trace.size());
    if (out.result.degenerate) out.status = "degenerate";
    return out;
  };
  try {
    if (method.name == "metasp") {
      MetaSpConfig cfg;
      cfg.rank = dgp.s;
      if (!method.step_size) throw ConfigError("metasp needs an explicit step_size");
      cfg.step_size = *method.step_size;
      cfg.max_iters = method.max_iters;
      cfg.rel_tol = method.rel_tol;
      return finish(meta_sp_fit(data, cfg));
    }
    if (method.name == "mom") {
      MomResult mom = mom_fit(data, dgp.s);
      // Per-task adaptation onto the moment subspace gives the coefficient
      // estimate this one-shot method is scored on.
      Matrix theta(data.task_count(), data.dim());
      for (Index t = 0; t < data.task_count(); ++t)
        theta.row(t) =
            adapt_task(mom.subspace, data.tasks[static_cast<std::size_t>(t)]).theta;
      FitResult r(Coefficients(std::move(theta)), mom.subspace);
      r.degenerate = mom.degenerate;
      return finish(std::move(r));
    }
    BaselineConfig cfg;
    cfg.rank = dgp.s;
    cfg.max_iters = method.max_iters;
    cfg.rel_tol = method.rel_tol;
    cfg.seed = init_seed;
    cfg.step_size = method.step_size;
    cfg.reg_coeff = method.reg_coeff;
    if (dgp.noise_sd > 0.0) cfg.noise_sd = dgp.noise_sd;
    if (method.name == "nuc" && !cfg.reg_coeff && !cfg.noise_sd)
      throw ConfigError("nuc with sigma=0 needs an explicit reg_coeff");
    if (method.name == "altmin") return finish(altmin_fit(data, cfg));
    if (method.name == "altmingd") {
      if (!method.step_size) throw ConfigError("altmingd needs an explicit step_size");
      return finish(altmingd_fit(data, cfg));
    }
    if (method.name == "bm") {
      if (!method.step_size) throw ConfigError("bm needs an explicit step_size");
      return finish(bm_fit(data, cfg));
    }
    if (method.name == "nuc") return finish(nuc_fit(data, cfg));
    throw ConfigError("unknown method '" + method.name + "'");
  } catch (DivergenceError& e) {
    if (!e.last_finite) throw;
    CellOutcome out{std::move(*e.last_finite)};
    out.iterations = static_cast<int>(out.result.trace.size());
    out.status = "diverged";
    return out;
  }
}

ResultRow run_cell(const ExperimentConfig& cfg, const MethodSpec& method, double value,
                   int trial) {
  const DgpConfig dgp_base = with_axis(cfg.base, cfg.axis, value);
  DgpConfig dgp = dgp_base;
  dgp.seed = derive_trial_seed(cfg.seed_base, method.name, value, trial);

  ResultRow row;
  row.method = method.name;
  row.d = dgp.d;
  row.s = dgp.s;
  row.m = dgp.m;
  row.T = dgp.T;
  row.sigma = dgp.noise_sd;
  row.trial_seed = dgp.seed;

  const GroundTruth truth = generate_ground_truth(dgp);
  const MultiTaskDataset data = generate_dataset(truth, dgp);

  const auto t0 = std::chrono::steady_clock::now();
  CellOutcome outcome = run_method(method, data, dgp, dgp.seed);
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  row.dist1 = dist1(outcome.result.coefficients, truth);
  row.dist2 = sine_angle(outcome.result.subspace, truth.factored.subspace);
  row.iterations = outcome.iterations;
  row.wall_seconds = cfg.record_timing ? wall : 0.0;
  row.status = outcome.status;
  return row;
}

void run_jobs(int threads, std::vector<std::function<void()>>& jobs) {
  if (threads <= 1) {
    for (auto& job : jobs) job();
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  const int workers = std::min<int>(threads, static_cast<int>(jobs.size()));
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&]() {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= jobs.size()) return;
        jobs[i]();
      }
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace

std::vector<ResultRow> run_sweep(const ExperimentConfig& cfg) {
  if (cfg.values.empty()) throw ConfigError("sweep needs at least one axis value");
  if (cfg.methods.empty()) throw ConfigError("sweep needs at least one method");
  if (cfg.trials < 1) throw ConfigError("sweep needs trials >= 1");
  for (const auto& m : cfg.methods) check_method_name(m.name);

  struct Cell {
    std::size_t method, value;
    int trial;
  };
  std::vector<Cell> cells;
  for (std::size_t mi = 0; mi < cfg.methods.size(); ++mi)
    for (std::size_t vi = 0; vi < cfg.values.size(); ++vi)
      for (int trial = 0; trial < cfg.trials; ++trial) cells.push_back({mi, vi, trial});

  std::vector<ResultRow> rows(cells.size());
  std::vector<std::exception_ptr> errors(cells.size());
  std::vector<std::function<void()>> jobs;
  jobs.reserve(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) {
    jobs.emplace_back([&, i]() {
      const Cell& cell = cells[i];
      try {
        rows[i] = run_cell(cfg, cfg.methods[cell.method], cfg.values[cell.value], cell.trial);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    });
  }
  run_jobs(cfg.threads, jobs);
  for (auto& err : errors)
    if (err) std::rethrow_exception(err);
  // Slot order is already (method, value, trial); scheduling cannot reorder it.
  return rows;
}

void write_results_csv(const std::vector<ResultRow>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  out << kResultsHeader << '\n';
  for (const auto& r : rows) {
    out << r.method << ',' << r.d << ',' << r.s << ',' << r.m << ',' << r.T << ','
        << format_double(r.sigma) << ',' << r.trial_seed << ',' << format_double(r.dist1)
        << ',' << format_double(r.dist2) << ',' << r.iterations << ','
        << format_double(r.wall_seconds) << ',' << r.status << '\n';
  }
}

void write_summary_csv(const ExperimentConfig& cfg, const std::vector<ResultRow>& rows,
                       const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  out << "method,axis,axis_value,d,s,m,T,sigma,trials,mean_dist1,mean_dist2,"
         "mean_iterations,mean_wall_seconds\n";
  for (const auto& method : cfg.methods) {
    for (double value : cfg.values) {
      const DgpConfig dgp = with_axis(cfg.base, cfg.axis, value);
      double n = 0, d1 = 0, d2 = 0, iters = 0, wall = 0;
      for (const auto& r : rows) {
        if (r.method != method.name) continue;
        if (r.T != dgp.T || r.m != dgp.m || r.sigma != dgp.noise_sd) continue;
        n += 1;
        d1 += r.dist1;
        d2 += r.dist2;
        iters += r.iterations;
        wall += r.wall_seconds;
      }
      if (n == 0) continue;
      out << method.name << ',' << axis_name(cfg.axis) << ',' << format_double(value) << ','
          << dgp.d << ',' << dgp.s << ',' << dgp.m << ',' << dgp.T << ','
          << format_double(dgp.noise_sd) << ',' << static_cast<int>(n) << ','
          << format_double(d1 / n) << ',' << format_double(d2 / n) << ','
          << format_double(iters / n) << ',' << format_double(wall / n) << '\n';
    }
  }
}

std::vector<ResultRow> run_sweep_to_dir(const ExperimentConfig& cfg) {
  std::filesystem::create_directories(cfg.output_dir);
  std::vector<ResultRow> rows = run_sweep(cfg);
  write_results_csv(rows, cfg.output_dir + "/results.csv");
  write_summary_csv(cfg, rows, cfg.output_dir + "/summary.csv");
  return rows;
}

std::optional<Index> min_tasks_grid_search(const std::function<double(Index)>& probe,
                                           double target, Index granularity,
                                           Index ceiling) {
  if (granularity < 1) throw ConfigError("min_tasks: granularity must be >= 1");
  ceiling -= ceiling % granularity;  // probes stay on the grid
  if (ceiling < granularity) throw ConfigError("min_tasks: ceiling below granularity");
  auto achieves = [&](Index t) { return probe(t) <= target; };

  Index hi = granularity;
  Index lo = 0;  // exclusive: known failing (0 = nothing known)
  while (!achieves(hi)) {
    lo = hi;
    if (hi > ceiling / 2) {
      if (hi >= ceiling) return std::nullopt;
      hi = ceiling;
      if (!achieves(hi)) return std::nullopt;
      break;
    }
    hi *= 2;
  }
  // Smallest achieving multiple of granularity in (lo, hi].
  Index lo_k = lo / granularity;  // grid index known failing (or 0)
  Index hi_k = (hi + granularity - 1) / granularity;
  while (hi_k - lo_k > 1) {
    const Index mid = lo_k + (hi_k - lo_k) / 2;
    if (achieves(mid * granularity))
      hi_k = mid;
    else
      lo_k = mid;
  }
  return hi_k * granularity;
}

std::optional<Index> min_tasks_search(const MinTasksConfig& cfg) {
  check_method_name(cfg.method.name);
  if (cfg.trials < 1) throw ConfigError("min_tasks: trials must be >= 1");
  auto probe = [&](Index T) {
    double sum = 0.0;
    for (int trial = 0; trial < cfg.trials; ++trial) {
      DgpConfig dgp = cfg.base;
      dgp.T = T;
      dgp.m_per_task.clear();
      dgp.seed = derive_trial_seed(cfg.seed_base, cfg.method.name,
                                   static_cast<double>(T), trial);
      const GroundTruth truth = generate_ground_truth(dgp);
      const MultiTaskDataset data = generate_dataset(truth, dgp);
      CellOutcome outcome = run_method(cfg.method, data, dgp, dgp.seed);
      sum += sine_angle(outcome.result.subspace, truth.factored.subspace);
    }
    return sum / static_cast<double>(cfg.trials);
  };

  Index granularity = cfg.granularity;
  if (granularity == 0) {
    // Auto grid: coarse for large task counts, fine below a thousand.
    std::optional<Index> coarse = min_tasks_grid_search(probe, cfg.target, 100, cfg.ceiling);
    if (!coarse) return std::nullopt;
    if (*coarse > 1000) return coarse;
    return min_tasks_grid_search(probe, cfg.target, 10,
                                 std::min<Index>(cfg.ceiling, *coarse + 100));
  }
  return min_tasks_grid_search(probe, cfg.target, granularity, cfg.ceiling);
}

std::vector<TraceRow> trace_run(const MethodSpec& method, const DgpConfig& dgp,
                                std::uint64_t seed) {
  check_method_name(method.name);
  DgpConfig cfg = dgp;
  cfg.seed = seed;
  const GroundTruth truth = generate_ground_truth(cfg);
  const MultiTaskDataset data = generate_dataset(truth, cfg);

  MethodSpec m = method;
  std::vector<TraceRow> rows;
  const std::uint64_t init_seed = splitmix64(seed ^ fnv1a("init"));
  auto collect = [&](const FitResult& result) {
    for (const auto& it : result.trace) {
      TraceRow row;
      row.method = method.name;
      row.iter = it.iter;
      row.loss = it.loss;
      row.dist1 = it.dist1.value_or(0.0);
      row.dist2 = it.dist2.value_or(0.0);
      row.elapsed_seconds = it.elapsed_seconds;
      rows.push_back(row);
    }
  };

  if (method.name == "metasp") {
    MetaSpConfig c;
    c.rank = cfg.s;
    if (!m.step_size) throw ConfigError("metasp needs an explicit step_size");
    c.step_size = *m.step_size;
    c.max_iters = m.max_iters;
    c.rel_tol = m.rel_tol;
    c.trace_against = &truth;
    collect(meta_sp_fit(data, c));
    return rows;
  }
  if (method.name == "mom")
    throw ConfigError("mom is one-shot; it has no per-iteration trace");
  BaselineConfig c;
  c.rank = cfg.s;
  c.max_iters = m.max_iters;
  c.rel_tol = m.rel_tol;
  c.seed = init_seed;
  c.step_size = m.step_size;
  c.reg_coeff = m.reg_coeff;
  if (cfg.noise_sd > 0.0) c.noise_sd = cfg.noise_sd;
  if (method.name == "nuc" && !c.reg_coeff && !c.noise_sd)
    throw ConfigError("nuc with sigma=0 needs an explicit reg_coeff");
  c.trace_against = &truth;
  if (method.name == "altmin") collect(altmin_fit(data, c));
  else if (method.name == "altmingd") collect(altmingd_fit(data, c));
  else if (method.name == "bm") collect(bm_fit(data, c));
  else collect(nuc_fit(data, c));
  return rows;
}

void write_trace_csv(const std::vector<TraceRow>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  out << kTraceHeader << '\n';
  for (const auto& r : rows) {
    out << r.method << ',' << r.iter << ',' << format_double(r.loss) << ','
        << format_double(r.dist1) << ',' << format_double(r.dist2) << ','
        << format_double(r.elapsed_seconds) << '\n';
  }
}

namespace {

nlohmann::json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config: " + path);
  try {
    nlohmann::json j;
    in >> j;
    return j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config " + path + ": " + e.what());
  }
}

template <typename T>
T get_required(const nlohmann::json& j, const std::string& key, const char* where) {
  if (!j.contains(key))
    throw ConfigError(std::string(where) + ": missing required key '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(std::string(where) + ": key '" + key + "' has the wrong type");
  }
}

DgpConfig parse_dgp(const nlohmann::json& j) {
  DgpConfig cfg;
  cfg.d = get_required<Index>(j, "d", "dgp");
  cfg.s = get_required<Index>(j, "s", "dgp");
  cfg.T = j.value("T", Index{1});
  cfg.m = j.value("m", Index{1});
  cfg.noise_sd = j.value("sigma", 0.0);
  if (j.contains("m_per_task")) cfg.m_per_task = j["m_per_task"].get<std::vector<Index>>();
  if (j.contains("features")) {
    const std::string f = j["features"].get<std::string>();
    if (f == "gaussian") cfg.features = FeatureDist::Gaussian;
    else if (f == "rademacher") cfg.features = FeatureDist::Rademacher;
    else throw ConfigError("dgp: unknown feature distribution '" + f + "'");
  }
  return cfg;
}

MethodSpec parse_method(const nlohmann::json& j) {
  MethodSpec m;
  m.name = get_required<std::string>(j, "name", "method");
  check_method_name(m.name);
  if (j.contains("step_size")) m.step_size = j["step_size"].get<double>();
  m.max_iters = j.value("max_iters", 100);
  m.rel_tol = j.value("rel_tol", 1e-10);
  if (j.contains("reg_coeff")) m.reg_coeff = j["reg_coeff"].get<double>();
  return m;
}

}  // namespace

ExperimentConfig load_sweep_config(const std::string& path) {
  const nlohmann::json j = load_json(path);
  ExperimentConfig cfg;
  const nlohmann::json sweep = get_required<nlohmann::json>(j, "sweep", "config");
  const std::string axis = get_required<std::string>(sweep, "axis", "sweep");
  if (axis == "T") cfg.axis = Axis::Tasks;
  else if (axis == "m") cfg.axis = Axis::Samples;
  else if (axis == "sigma") cfg.axis = Axis::NoiseSd;
  else throw ConfigError("sweep: axis must be one of T, m, sigma");
  cfg.values = get_required<std::vector<double>>(sweep, "values", "sweep");
  cfg.base = parse_dgp(get_required<nlohmann::json>(j, "dgp", "config"));
  const nlohmann::json methods = get_required<nlohmann::json>(j, "methods", "config");
  if (!methods.is_array() || methods.empty())
    throw ConfigError("config: 'methods' must be a non-empty array");
  for (const auto& mj : methods) cfg.methods.push_back(parse_method(mj));
  cfg.trials = j.value("trials", 5);
  cfg.seed_base = j.value("seed_base", std::uint64_t{0});
  cfg.record_timing = j.value("record_timing", true);
  cfg.output_dir = j.value("output_dir", std::string("out"));
  cfg.threads = j.value("threads", 1);
  return cfg;
}

MinTasksConfig load_min_tasks_config(const std::string& path) {
  const nlohmann::json j = load_json(path);
  MinTasksConfig cfg;
  cfg.base = parse_dgp(get_required<nlohmann::json>(j, "dgp", "config"));
  if (j.contains("m")) cfg.base.m = j["m"].get<Index>();
  cfg.method = parse_method(get_required<nlohmann::json>(j, "method", "config"));
  cfg.target = j.value("target", 0.1);
  cfg.granularity = j.value("granularity", Index{0});
  cfg.ceiling = j.value("ceiling", Index{25600});
  cfg.trials = j.value("trials", 5);
  cfg.seed_base = j.value("seed_base", std::uint64_t{0});
  return cfg;
}

TraceConfig load_trace_config(const std::string& path) {
  const nlohmann::json j = load_json(path);
  TraceConfig cfg;
  cfg.dgp = parse_dgp(get_required<nlohmann::json>(j, "dgp", "config"));
  cfg.method = parse_method(get_required<nlohmann::json>(j, "method", "config"));
  cfg.seed = j.value("seed", std::uint64_t{0});
  cfg.output_dir = j.value("output_dir", std::string("out"));
  return cfg;
}

AdaptConfig load_adapt_config(const std::string& path) {
  const nlohmann::json j = load_json(path);
  AdaptConfig cfg;
  if (j.contains("data")) cfg.data_path = j["data"].get<std::string>();
  if (j.contains("preprocess")) cfg.preprocess_path = j["preprocess"].get<std::string>();
  if (j.contains("dgp")) cfg.dgp = parse_dgp(j["dgp"]);
  if (cfg.data_path.has_value() == cfg.dgp.has_value())
    throw ConfigError("adapt: provide exactly one of 'data' and 'dgp'");
  if (cfg.preprocess_path && !cfg.data_path)
    throw ConfigError("adapt: 'preprocess' only applies to a 'data' table");
  cfg.rank = get_required<Index>(j, "rank", "adapt");
  const nlohmann::json split = get_required<nlohmann::json>(j, "split", "adapt");
  cfg.split.meta_fraction = split.value("meta_fraction", 0.8);
  cfg.split.train_points = get_required<Index>(split, "train_points", "split");
  cfg.split.seed = split.value("seed", std::uint64_t{0});
  cfg.learner = parse_method(get_required<nlohmann::json>(j, "learner", "adapt"));
  cfg.seed = j.value("seed", std::uint64_t{0});
  cfg.output_dir = j.value("output_dir", std::string("out"));
  return cfg;
}

SubspaceLearner make_learner(const MethodSpec& method, double noise_sd) {
  check_method_name(method.name);
  return [method, noise_sd](const MultiTaskDataset& data, Index rank,
                            std::uint64_t seed) {
    DgpConfig shape;
    shape.d = data.dim();
    shape.s = rank;
    shape.T = data.task_count();
    shape.m = data.min_samples();
    shape.noise_sd = noise_sd;
    CellOutcome out = run_method(method, data, shape, seed);
    return LearnedModel{std::move(out.result.coefficients),
                        std::move(out.result.subspace)};
  };
}

namespace {

const char* stage_name(Stage stage) {
  switch (stage) {
    case Stage::MetaTest: return "meta_test";
    case Stage::TestTrain: return "test_train";
    case Stage::TestTest: return "test_test";
  }
  return "?";
}

AdaptReportRow flatten_stage(const std::string& arm, const StageReport& report) {
  AdaptReportRow row;
  row.arm = arm;
  row.stage = stage_name(report.stage);
  row.m_mre = report.m_mre;
  row.tasks = static_cast<Index>(report.per_task_mre.size());
  row.skipped_points = report.skipped_points;
  return row;
}

}  // namespace

std::vector<AdaptReportRow> run_adapt(const MultiTaskDataset& data,
                                      const AdaptConfig& cfg) {
  const SubspaceLearner learner = make_learner(cfg.learner, 0.0);
  const std::uint64_t learner_seed = splitmix64(cfg.seed ^ fnv1a("learner"));
  const ProtocolResult res =
      run_protocol(data, cfg.split, learner, cfg.rank, learner_seed);

  // compute_split is deterministic, so the reference arms see the exact
  // split the learner was scored on.
  const ProtocolSplit split = compute_split(data, cfg.split);
  const std::uint64_t basis_seed = splitmix64(cfg.seed ^ fnv1a("random_basis"));
  const BaselineStages rnd = random_b_stages(data, split, cfg.rank, basis_seed);
  const BaselineStages lsq = lsq_pinv_stages(data, split);

  std::vector<AdaptReportRow> rows;
  rows.push_back(flatten_stage(cfg.learner.name, res.meta_test));
  rows.push_back(flatten_stage(cfg.learner.name, res.test_train));
  rows.push_back(flatten_stage(cfg.learner.name, res.test_test));
  rows.push_back(flatten_stage("random_b", rnd.test_train));
  rows.push_back(flatten_stage("random_b", rnd.test_test));
  rows.push_back(flatten_stage("lsq_pinv", lsq.test_train));
  rows.push_back(flatten_stage("lsq_pinv", lsq.test_test));
  return rows;
}

void write_adapt_csv(const std::vector<AdaptReportRow>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  out << "arm,stage,m_mre,tasks,skipped_points\n";
  for (const auto& r : rows) {
    out << r.arm << ',' << r.stage << ',' << format_double(r.m_mre) << ',' << r.tasks
        << ',' << r.skipped_points << '\n';
  }
}

}  // namespace msp::harness
