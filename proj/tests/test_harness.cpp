#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "msp/harness.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

using msp::Index;
using namespace msp::harness;

namespace {

ExperimentConfig small_sweep() {
  ExperimentConfig cfg;
  cfg.axis = Axis::Tasks;
  cfg.values = {20, 40};
  cfg.base.d = 10;
  cfg.base.s = 2;
  cfg.base.m = 12;
  cfg.base.noise_sd = 0.2;
  MethodSpec metasp;
  metasp.name = "metasp";
  metasp.step_size = 0.5;
  metasp.max_iters = 25;
  MethodSpec mom;
  mom.name = "mom";
  cfg.methods = {metasp, mom};
  cfg.trials = 2;
  cfg.seed_base = 5;
  cfg.record_timing = false;
  return cfg;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("trial seeds mix method, axis value, and trial") {
  const auto s = derive_trial_seed(1, "metasp", 100.0, 0);
  CHECK(s == derive_trial_seed(1, "metasp", 100.0, 0));
  CHECK(s != derive_trial_seed(1, "altmin", 100.0, 0));
  CHECK(s != derive_trial_seed(1, "metasp", 200.0, 0));
  CHECK(s != derive_trial_seed(1, "metasp", 100.0, 1));
  CHECK(s != derive_trial_seed(2, "metasp", 100.0, 0));
}

TEST_CASE("sweep rows arrive in method, value, trial order") {
  const auto cfg = small_sweep();
  const auto rows = run_sweep(cfg);
  REQUIRE(rows.size() == 8);
  int i = 0;
  for (const auto& method : {"metasp", "mom"})
    for (Index T : {20, 40})
      for (int trial = 0; trial < 2; ++trial) {
        CHECK(rows[static_cast<std::size_t>(i)].method == method);
        CHECK(rows[static_cast<std::size_t>(i)].T == T);
        (void)trial;
        ++i;
      }
}

TEST_CASE("adding a method never changes another method's rows") {
  auto cfg = small_sweep();
  const auto before = run_sweep(cfg);
  MethodSpec altmin;
  altmin.name = "altmin";
  altmin.max_iters = 10;
  cfg.methods.push_back(altmin);
  const auto after = run_sweep(cfg);
  REQUIRE(after.size() == before.size() + 4);
  for (std::size_t i = 0; i < before.size(); ++i) {
    CHECK(after[i].trial_seed == before[i].trial_seed);
    CHECK(after[i].dist1 == before[i].dist1);
    CHECK(after[i].dist2 == before[i].dist2);
  }
}

TEST_CASE("thread pool output matches the serial run") {
  auto cfg = small_sweep();
  const auto serial = run_sweep(cfg);
  cfg.threads = 4;
  const auto parallel = run_sweep(cfg);
  REQUIRE(parallel.size() == serial.size());
  for (std::size_t i = 0; i < serial.size(); ++i) {
    CHECK(parallel[i].method == serial[i].method);
    CHECK(parallel[i].dist1 == serial[i].dist1);
    CHECK(parallel[i].dist2 == serial[i].dist2);
    CHECK(parallel[i].trial_seed == serial[i].trial_seed);
  }
}

TEST_CASE("reserved and unknown method names are config errors") {
  auto cfg = small_sweep();
  cfg.methods[0].name = "anil";
  CHECK_THROWS_AS((void)run_sweep(cfg), ConfigError);
  cfg.methods[0].name = "mom2";
  CHECK_THROWS_AS((void)run_sweep(cfg), ConfigError);
  cfg.methods[0].name = "gradient_boost";
  CHECK_THROWS_AS((void)run_sweep(cfg), ConfigError);
  cfg = small_sweep();
  cfg.values.clear();
  CHECK_THROWS_AS((void)run_sweep(cfg), ConfigError);
}

TEST_CASE("divergent trials are reported, not fatal") {
  ExperimentConfig cfg;
  cfg.axis = Axis::Tasks;
  cfg.values = {20};
  cfg.base.d = 10;
  cfg.base.s = 2;
  cfg.base.m = 12;
  MethodSpec bm;
  bm.name = "bm";
  bm.step_size = 100.0;  // way past stable
  bm.max_iters = 200;
  cfg.methods = {bm};
  cfg.trials = 1;
  cfg.record_timing = false;
  const auto rows = run_sweep(cfg);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].status == "diverged");
  CHECK(std::isfinite(rows[0].dist1));
  CHECK(std::isfinite(rows[0].dist2));
}

TEST_CASE("results csv uses the pinned header and layout") {
  const auto cfg = small_sweep();
  const auto rows = run_sweep(cfg);
  const auto path = std::filesystem::temp_directory_path() / "msp_results_test.csv";
  write_results_csv(rows, path.string());
  const std::string text = slurp(path);
  CHECK(text.rfind("method,d,s,m,T,sigma,trial_seed,dist1,dist2,iterations,wall_seconds,status\n",
                   0) == 0);
  // One line per row plus the header, every wall_seconds zeroed.
  std::size_t lines = 0;
  for (char ch : text)
    if (ch == '\n') ++lines;
  CHECK(lines == rows.size() + 1);
  CHECK(text.find(",ok\n") != std::string::npos);
  std::filesystem::remove(path);
}

TEST_CASE("summary csv aggregates trial means per cell") {
  const auto cfg = small_sweep();
  const auto rows = run_sweep(cfg);
  const auto path = std::filesystem::temp_directory_path() / "msp_summary_test.csv";
  write_summary_csv(cfg, rows, path.string());
  std::ifstream in(path);
  std::string header, line;
  std::getline(in, header);
  CHECK(header ==
        "method,axis,axis_value,d,s,m,T,sigma,trials,mean_dist1,mean_dist2,"
        "mean_iterations,mean_wall_seconds");
  std::size_t count = 0;
  double first_mean = -1;
  while (std::getline(in, line)) {
    if (count == 0) {
      // metasp at T=20: mean of the two trial dist1 values.
      std::stringstream ss(line);
      std::string cell;
      for (int c = 0; c <= 9; ++c) std::getline(ss, cell, ',');
      first_mean = std::stod(cell);
    }
    ++count;
  }
  CHECK(count == 4);  // 2 methods x 2 values
  CHECK(first_mean == doctest::Approx((rows[0].dist1 + rows[1].dist1) / 2.0).epsilon(1e-12));
  std::filesystem::remove(path);
}

TEST_CASE("trace rows carry the per-iteration schema") {
  msp::DgpConfig dgp;
  dgp.d = 10;
  dgp.s = 2;
  dgp.T = 20;
  dgp.m = 12;
  MethodSpec spec;
  spec.name = "metasp";
  spec.step_size = 0.5;
  spec.max_iters = 7;
  const auto rows = trace_run(spec, dgp, 3);
  REQUIRE(rows.size() == 7);
  CHECK(rows.front().iter == 1);
  CHECK(rows.back().iter == 7);
  CHECK(rows.back().dist1 < rows.front().dist1);
  const auto path = std::filesystem::temp_directory_path() / "msp_trace_test.csv";
  write_trace_csv(rows, path.string());
  const std::string text = slurp(path);
  CHECK(text.rfind("method,iter,loss,dist1,dist2,elapsed_seconds\n", 0) == 0);
  std::filesystem::remove(path);

  MethodSpec mom;
  mom.name = "mom";
  CHECK_THROWS_AS((void)trace_run(mom, dgp, 3), ConfigError);
}

TEST_CASE("grid search finds the smallest passing multiple") {
  // Monotone probe: passes at exactly t >= 137.
  auto probe = [](Index t) { return t >= 137 ? 0.05 : 0.5; };
  CHECK(min_tasks_grid_search(probe, 0.1, 1, 10000) == Index{137});
  CHECK(min_tasks_grid_search(probe, 0.1, 10, 10000) == Index{140});
  CHECK(min_tasks_grid_search(probe, 0.1, 100, 10000) == Index{200});
  // Infeasible below the ceiling.
  auto never = [](Index) { return 0.5; };
  CHECK(min_tasks_grid_search(never, 0.1, 10, 1000) == std::nullopt);
  // Feasible only exactly at the ceiling.
  auto at_edge = [](Index t) { return t >= 1000 ? 0.05 : 0.5; };
  CHECK(min_tasks_grid_search(at_edge, 0.1, 10, 1000) == Index{1000});
  CHECK_THROWS_AS((void)min_tasks_grid_search(probe, 0.1, 0, 100), ConfigError);
}

TEST_CASE("min tasks search finds a threshold on real data") {
  MinTasksConfig cfg;
  cfg.base.d = 10;
  cfg.base.s = 2;
  cfg.base.m = 12;
  cfg.base.noise_sd = 0.5;
  cfg.method.name = "metasp";
  cfg.method.step_size = 0.5;
  cfg.method.max_iters = 40;
  cfg.target = 0.25;
  cfg.granularity = 10;
  cfg.ceiling = 2000;
  cfg.trials = 2;
  cfg.seed_base = 3;
  const auto found = min_tasks_search(cfg);
  REQUIRE(found.has_value());
  CHECK(*found % 10 == 0);
  CHECK(*found >= 10);
  CHECK(*found <= 2000);
  // Tight target that cannot be met under the ceiling.
  cfg.target = 1e-9;
  cfg.ceiling = 40;
  cfg.granularity = 10;
  CHECK(min_tasks_search(cfg) == std::nullopt);
}

TEST_CASE("doubles render as shortest round-trip decimals") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(0.0) == "0");
  CHECK(format_double(-2.5) == "-2.5");
  CHECK(format_double(1e-30) == "1e-30");
  const double third = 1.0 / 3.0;
  double back = 0;
  const std::string s = format_double(third);
  std::from_chars(s.data(), s.data() + s.size(), back);
  CHECK(back == third);
}

TEST_CASE("sweep configs load with defaults and validation") {
  const auto path = std::filesystem::temp_directory_path() / "msp_sweep_cfg.json";
  {
    std::ofstream out(path);
    out << R"({"sweep":{"axis":"m","values":[10,20]},)"
        << R"("dgp":{"d":8,"s":2,"T":10,"sigma":0.5},)"
        << R"("methods":[{"name":"metasp","step_size":0.4}],)"
        << R"("trials":3,"seed_base":11,"record_timing":false,"output_dir":"x"})";
  }
  const auto cfg = load_sweep_config(path.string());
  CHECK(cfg.axis == Axis::Samples);
  CHECK(cfg.values == std::vector<double>{10, 20});
  CHECK(cfg.base.d == 8);
  CHECK(cfg.base.noise_sd == 0.5);
  CHECK(cfg.methods.size() == 1);
  CHECK(cfg.methods[0].step_size == 0.4);
  CHECK(cfg.methods[0].max_iters == 100);  // default
  CHECK(cfg.trials == 3);
  CHECK_FALSE(cfg.record_timing);
  CHECK(cfg.output_dir == "x");

  {
    std::ofstream out(path);
    out << R"({"sweep":{"axis":"q","values":[1]},"dgp":{"d":4,"s":1},)"
        << R"("methods":[{"name":"metasp"}]})";
  }
  CHECK_THROWS_AS((void)load_sweep_config(path.string()), ConfigError);
  {
    std::ofstream out(path);
    out << R"({"sweep":{"axis":"T","values":[1]},"dgp":{"d":4,"s":1},"methods":[]})";
  }
  CHECK_THROWS_AS((void)load_sweep_config(path.string()), ConfigError);
  {
    std::ofstream out(path);
    out << R"({"sweep":{"axis":"T","values":[1]},"dgp":{"s":1},)"
        << R"("methods":[{"name":"metasp"}]})";
  }
  CHECK_THROWS_AS((void)load_sweep_config(path.string()), ConfigError);
  {
    std::ofstream out(path);
    out << R"({"sweep":{"axis":"T","values":[1]},"dgp":{"d":4,"s":1},)"
        << R"("methods":[{"name":"anil"}]})";
  }
  CHECK_THROWS_AS((void)load_sweep_config(path.string()), ConfigError);
  std::filesystem::remove(path);
  CHECK_THROWS_AS((void)load_sweep_config(path.string()), ConfigError);
}

TEST_CASE("min-tasks configs load their search knobs") {
  const auto path = std::filesystem::temp_directory_path() / "msp_mt_cfg.json";
  {
    std::ofstream out(path);
    out << R"({"dgp":{"d":8,"s":2,"m":12},"method":{"name":"metasp","step_size":0.5},)"
        << R"("target":0.2,"granularity":10,"ceiling":400,"trials":2,"seed_base":9})";
  }
  const auto cfg = load_min_tasks_config(path.string());
  CHECK(cfg.base.d == 8);
  CHECK(cfg.method.name == "metasp");
  CHECK(cfg.target == 0.2);
  CHECK(cfg.granularity == 10);
  CHECK(cfg.ceiling == 400);
  CHECK(cfg.trials == 2);
  CHECK(cfg.seed_base == 9);
  std::filesystem::remove(path);
}

TEST_CASE("adapt report rows cover every arm and stage") {
  msp::DgpConfig dgp;
  dgp.d = 12;
  dgp.s = 2;
  dgp.T = 30;
  dgp.m = 8;
  dgp.noise_sd = 0.05;
  dgp.seed = 77;
  const auto data = msp::generate_dataset(msp::generate_ground_truth(dgp), dgp);
  AdaptConfig cfg;
  cfg.rank = 2;
  cfg.split.train_points = 5;
  cfg.split.seed = 1;
  cfg.learner.name = "metasp";
  cfg.learner.step_size = 0.3;
  cfg.learner.max_iters = 150;
  cfg.seed = 4;
  const auto rows = run_adapt(data, cfg);
  REQUIRE(rows.size() == 7);
  CHECK(rows[0].arm == "metasp");
  CHECK(rows[0].stage == "meta_test");
  CHECK(rows[2].stage == "test_test");
  CHECK(rows[3].arm == "random_b");
  CHECK(rows[5].arm == "lsq_pinv");
  for (const auto& r : rows) CHECK(std::isfinite(r.m_mre));
}
