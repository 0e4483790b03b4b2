#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "msp/metasp.hpp"
#include "msp/metrics.hpp"
#include "msp/model.hpp"
#include "msp/rng.hpp"
#include "msp/synthetic.hpp"
#include "oracles.hpp"

#include <cmath>

using msp::Coefficients;
using msp::DgpConfig;
using msp::Index;
using msp::Matrix;
using msp::MetaSpConfig;
using msp::StreamRng;
using msp::Vector;

TEST_CASE("gd_step matches the hand-computed update") {
  Matrix x(2, 3);
  x << 1, 0, 2,
       0, 1, 1;
  Vector y(2);
  y << 4, 1;
  const msp::TaskData task(x, y);
  Vector theta(3);
  theta << 1, 0, 0;
  // residual r = y - X theta = (3, 1); update = theta + (g/2) X^T r.
  const Vector got = msp::gd_step(task, theta, 0.5);
  Vector want(3);
  want << 1 + 0.25 * 3, 0.25 * 1, 0.25 * (2 * 3 + 1);
  for (Index j = 0; j < 3; ++j) CHECK(got(j) == doctest::Approx(want(j)).epsilon(1e-14));
}

TEST_CASE("gd_step with unit step solves a scalar task in one move") {
  Matrix x(1, 1);
  x << 2;
  Vector y(1);
  y << 6;
  const msp::TaskData task(x, y);
  Vector theta(1);
  theta << 0;
  // m=1: theta' = 0 + 1 * 2 * 6 = 12, not the solution; the step is a plain
  // gradient move, not a Newton solve.
  CHECK(msp::gd_step(task, theta, 1.0)(0) == doctest::Approx(12.0));
}

TEST_CASE("hard threshold returns the best rank-s approximation") {
  StreamRng rng(17);
  const Matrix m = msp::gaussian_matrix(rng, 9, 6);
  for (Index s : {1, 2, 4}) {
    const auto got = msp::hard_threshold(Coefficients(m), s);
    const Matrix want = oracle::rank_truncate(m, s);
    CHECK((got.coefficients.theta - want).norm() <= 1e-9 * m.norm());
    CHECK(got.subspace.rank() == s);
    CHECK_FALSE(got.degenerate);
    // Row space of the truncation lies in the reported subspace.
    const Matrix b = got.subspace.basis();
    const Matrix proj = got.coefficients.theta * (Matrix::Identity(6, 6) - b.transpose() * b);
    CHECK(proj.norm() < 1e-9);
  }
}

TEST_CASE("hard threshold beats random rank-s competitors") {
  StreamRng rng(23);
  const Matrix m = msp::gaussian_matrix(rng, 10, 8);
  const Index s = 3;
  const auto got = msp::hard_threshold(Coefficients(m), s);
  const double best = (m - got.coefficients.theta).squaredNorm();
  for (int trial = 0; trial < 100; ++trial) {
    StreamRng comp(1000 + static_cast<std::uint64_t>(trial));
    const Matrix a = msp::gaussian_matrix(comp, 10, s);
    const Matrix b = msp::gaussian_matrix(comp, s, 8);
    const double other = (m - a * b).squaredNorm();
    CHECK(best <= other + 1e-9);
  }
}

TEST_CASE("hard threshold of zero is flagged degenerate") {
  const auto got = msp::hard_threshold(Coefficients(Matrix::Zero(5, 4)), 2);
  CHECK(got.degenerate);
  CHECK(got.coefficients.theta == Matrix::Zero(5, 4));
  CHECK(got.subspace.basis() == Matrix::Identity(4, 4).topRows(2));
}

TEST_CASE("gram fast path agrees with the direct decomposition") {
  // Wide task blocks: T >= 4 d triggers the gram route.
  StreamRng rng(31);
  const Matrix tall = msp::gaussian_matrix(rng, 60, 10);
  const auto got = msp::hard_threshold(Coefficients(tall), 3);
  const Matrix want = oracle::rank_truncate(tall, 3);
  CHECK((got.coefficients.theta - want).norm() <= 1e-8 * tall.norm());
}

TEST_CASE("noiseless fit recovers the planted model") {
  DgpConfig dgp;
  dgp.d = 30;
  dgp.s = 3;
  dgp.T = 60;
  dgp.m = 15;
  dgp.noise_sd = 0.0;
  dgp.seed = 7;
  const auto truth = msp::generate_ground_truth(dgp);
  const auto data = msp::generate_dataset(truth, dgp);

  MetaSpConfig cfg;
  cfg.rank = dgp.s;
  cfg.step_size = 0.25;
  cfg.max_iters = 500;
  const auto fit = msp::meta_sp_fit(data, cfg);
  CHECK(msp::dist1(fit.coefficients, truth) < 1e-10);
  CHECK(msp::sine_angle(fit.subspace, truth.factored.subspace) < 1e-6);
  CHECK_FALSE(fit.degenerate);
  REQUIRE_FALSE(fit.trace.empty());
  // Loss decreases to numerical zero.
  CHECK(fit.trace.back().loss < 1e-12);
}

TEST_CASE("relative tolerance stops the iteration early") {
  DgpConfig dgp;
  dgp.d = 20;
  dgp.s = 2;
  dgp.T = 40;
  dgp.m = 12;
  dgp.seed = 8;
  const auto truth = msp::generate_ground_truth(dgp);
  const auto data = msp::generate_dataset(truth, dgp);
  MetaSpConfig cfg;
  cfg.rank = 2;
  cfg.step_size = 0.25;
  cfg.max_iters = 5000;
  cfg.rel_tol = 1e-6;
  const auto fit = msp::meta_sp_fit(data, cfg);
  CHECK(static_cast<int>(fit.trace.size()) < 5000);
}

TEST_CASE("iteration trace carries truth distances when requested") {
  DgpConfig dgp;
  dgp.d = 15;
  dgp.s = 2;
  dgp.T = 30;
  dgp.m = 10;
  dgp.seed = 9;
  const auto truth = msp::generate_ground_truth(dgp);
  const auto data = msp::generate_dataset(truth, dgp);
  MetaSpConfig cfg;
  cfg.rank = 2;
  cfg.step_size = 0.8;
  cfg.max_iters = 12;
  cfg.trace_against = &truth;
  const auto fit = msp::meta_sp_fit(data, cfg);
  REQUIRE(fit.trace.size() == 12);
  int iter = 1;
  double prev = 0.0;
  for (const auto& row : fit.trace) {
    CHECK(row.iter == iter++);
    REQUIRE(row.dist1.has_value());
    REQUIRE(row.dist2.has_value());
    CHECK(row.elapsed_seconds >= prev);
    prev = row.elapsed_seconds;
  }
  // Errors shrink over the run.
  CHECK(*fit.trace.back().dist1 < *fit.trace.front().dist1);
}

TEST_CASE("oversized steps raise a divergence error carrying the last iterate") {
  DgpConfig dgp;
  dgp.d = 20;
  dgp.s = 2;
  dgp.T = 30;
  dgp.m = 10;
  dgp.seed = 10;
  const auto truth = msp::generate_ground_truth(dgp);
  const auto data = msp::generate_dataset(truth, dgp);
  MetaSpConfig cfg;
  cfg.rank = 2;
  cfg.step_size = 1e6;
  cfg.max_iters = 10000;
  try {
    (void)msp::meta_sp_fit(data, cfg);
    FAIL("expected divergence");
  } catch (const msp::DivergenceError& e) {
    CHECK(e.iteration >= 1);
    REQUIRE(e.last_finite.has_value());
    CHECK(e.last_finite->coefficients.theta.allFinite());
    CHECK(std::string(e.what()).find(std::to_string(e.iteration)) != std::string::npos);
  }
}

TEST_CASE("certificate reports the plug-in step bound") {
  DgpConfig dgp;
  dgp.d = 10;
  dgp.s = 2;
  dgp.T = 20;
  dgp.m = 3000;
  dgp.seed = 11;
  const auto truth = msp::generate_ground_truth(dgp);
  const auto data = msp::generate_dataset(truth, dgp);
  MetaSpConfig cfg;
  cfg.rank = 2;
  cfg.step_size = 1.0;
  cfg.max_iters = 3;
  const auto fit = msp::meta_sp_fit(data, cfg);
  REQUIRE(fit.certificate.has_value());
  const auto& cert = *fit.certificate;
  CHECK(cert.step_size == 1.0);
  CHECK(cert.delta_bound ==
        doctest::Approx(msp::rip_bound(3 * 2, 3000, cfg.cert_tail_scale,
                                       cfg.cert_failure_prob)).epsilon(1e-12));
  CHECK(cert.within_unit);
  if (cert.delta_bound < 1.0) {
    const double min_step = (1.0 - 1.0 / (2.0 * std::sqrt(2.0))) / (1.0 - cert.delta_bound);
    CHECK(cert.min_step == doctest::Approx(min_step).epsilon(1e-12));
    CHECK(cert.certified == (cert.within_unit && cert.step_size > cert.min_step));
  } else {
    CHECK_FALSE(cert.certified);
  }
}

TEST_CASE("config validation rejects bad ranks and steps") {
  DgpConfig dgp;
  dgp.d = 8;
  dgp.s = 2;
  dgp.T = 10;
  dgp.m = 5;
  dgp.seed = 12;
  const auto data = msp::generate_dataset(msp::generate_ground_truth(dgp), dgp);
  MetaSpConfig cfg;
  cfg.rank = 0;
  cfg.step_size = 1.0;
  cfg.max_iters = 5;
  CHECK_THROWS_AS((void)msp::meta_sp_fit(data, cfg), std::invalid_argument);
  cfg.rank = 9;
  CHECK_THROWS_AS((void)msp::meta_sp_fit(data, cfg), std::invalid_argument);
  cfg.rank = 2;
  cfg.step_size = -0.5;
  CHECK_THROWS_AS((void)msp::meta_sp_fit(data, cfg), std::invalid_argument);
  cfg.step_size = 1.0;
  cfg.max_iters = -1;
  CHECK_THROWS_AS((void)msp::meta_sp_fit(data, cfg), std::invalid_argument);
}

TEST_CASE("zero iteration budget returns the zero initialization") {
  DgpConfig dgp;
  dgp.d = 8;
  dgp.s = 2;
  dgp.T = 10;
  dgp.m = 5;
  dgp.seed = 12;
  const auto data = msp::generate_dataset(msp::generate_ground_truth(dgp), dgp);
  MetaSpConfig cfg;
  cfg.rank = 2;
  cfg.step_size = 1.0;
  cfg.max_iters = 0;
  const auto fit = msp::meta_sp_fit(data, cfg);
  CHECK(fit.coefficients.theta.norm() == 0.0);
  CHECK(fit.trace.empty());
  CHECK(fit.degenerate);
}
