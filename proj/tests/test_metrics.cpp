#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "msp/metasp.hpp"
#include "msp/metrics.hpp"
#include "msp/rng.hpp"
#include "msp/synthetic.hpp"
#include "oracles.hpp"

#include <cmath>

using msp::Coefficients;
using msp::Index;
using msp::Matrix;
using msp::StreamRng;
using msp::Subspace;

TEST_CASE("dist1 is the mean squared coefficient error") {
  Matrix w(2, 1);
  w << 1, 2;
  Matrix b(1, 3);
  b << 1, 0, 0;
  const msp::GroundTruth truth(msp::FactoredCoefficients(w, Subspace(b)), 0.0);
  Matrix est(2, 3);
  est << 2, 0, 0,   // off by (1,0,0)
         2, 1, 0;   // off by (0,1,0)
  CHECK(msp::dist1(Coefficients(est), truth) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("sine angle is zero for identical spans and one for orthogonal") {
  Matrix b1(2, 4);
  b1 << 1, 0, 0, 0,
        0, 1, 0, 0;
  Matrix b2(2, 4);
  b2 << 0, 0, 1, 0,
        0, 0, 0, 1;
  CHECK(msp::sine_angle(Subspace(b1), Subspace(b1)) == doctest::Approx(0.0));
  CHECK(msp::sine_angle(Subspace(b1), Subspace(b2)) == doctest::Approx(1.0));
  // Same span, different frame.
  const double c = std::sqrt(0.5);
  Matrix rotated(2, 4);
  rotated << c, c, 0, 0,
             c, -c, 0, 0;
  CHECK(msp::sine_angle(Subspace(b1), Subspace(rotated)) ==
        doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("sine angle of a planar rotation equals the rotation sine") {
  for (double angle : {0.1, 0.4, 1.0, 1.5}) {
    Matrix b1(1, 3);
    b1 << 1, 0, 0;
    Matrix b2(1, 3);
    b2 << std::cos(angle), std::sin(angle), 0;
    CHECK(msp::sine_angle(Subspace(b1), Subspace(b2)) ==
          doctest::Approx(std::sin(angle)).epsilon(1e-12));
  }
}

TEST_CASE("sine angle is symmetric for equal ranks and matches the projector form") {
  for (std::uint64_t seed : {3ull, 4ull, 5ull}) {
    StreamRng rng(seed);
    const Subspace a = msp::haar_subspace(9, 3, rng.stream("a"));
    const Subspace b = msp::haar_subspace(9, 3, rng.stream("b"));
    const double ab = msp::sine_angle(a, b);
    const double ba = msp::sine_angle(b, a);
    CHECK(ab == doctest::Approx(ba).epsilon(1e-10));
    CHECK(ab == doctest::Approx(oracle::projector_sine(a.basis(), b.basis())).epsilon(1e-9));
    CHECK(ab >= 0.0);
    CHECK(ab <= 1.0);
  }
}

TEST_CASE("unequal ranks use the one-sided containment measure") {
  Matrix small(1, 4);
  small << 0, 1, 0, 0;
  Matrix big(2, 4);
  big << 1, 0, 0, 0,
         0, 1, 0, 0;
  // small inside big: zero; big cannot fit inside small: positive.
  CHECK(msp::sine_angle(Subspace(small), Subspace(big)) ==
        doctest::Approx(0.0).epsilon(1e-12));
  CHECK(msp::sine_angle(Subspace(big), Subspace(small)) ==
        doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("isometry bound reproduces the closed form") {
  // sqrt((8 (a+1) r - 4) / (3 m) * log(2 r / eps)) with r=5, m=3000, a=10,
  // eps=0.1, computed independently.
  CHECK(msp::rip_bound(5, 3000, 10.0, 0.1) ==
        doctest::Approx(0.4723292402893473).epsilon(1e-12));
  CHECK(msp::rip_bound(5, 2000, 10.0, 0.1) ==
        doctest::Approx(0.5784828146526637).epsilon(1e-12));
  // Scaling: quadrupling m halves the bound.
  CHECK(msp::rip_bound(5, 12000, 10.0, 0.1) ==
        doctest::Approx(0.5 * 0.4723292402893473).epsilon(1e-12));
  CHECK_THROWS_AS((void)msp::rip_bound(0, 100, 10.0, 0.1), std::invalid_argument);
  CHECK_THROWS_AS((void)msp::rip_bound(5, 0, 10.0, 0.1), std::invalid_argument);
  CHECK_THROWS_AS((void)msp::rip_bound(5, 100, 10.0, 0.0), std::invalid_argument);
}

TEST_CASE("contraction factor flags the contracting region") {
  const double root8 = 2.0 * std::sqrt(2.0);
  auto at = [](double step, double delta) { return msp::contraction_factor(step, delta); };
  // Unit step at the critical isometry constant sits exactly at one.
  CHECK(at(1.0, 1.0 / root8).factor == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_FALSE(at(1.0, 1.0 / root8).contracts);
  // Zero step never contracts: factor 2 sqrt(2).
  CHECK(at(0.0, 0.2).factor == doctest::Approx(root8).epsilon(1e-12));
  CHECK_FALSE(at(0.0, 0.2).contracts);
  // Unit step with a small constant contracts.
  CHECK(at(1.0, 0.2).factor == doctest::Approx(0.5656854249492381).epsilon(1e-12));
  CHECK(at(1.0, 0.2).contracts);
  CHECK_THROWS_AS((void)at(-0.1, 0.2), std::invalid_argument);
  CHECK_THROWS_AS((void)at(1.0, 1.0), std::invalid_argument);
}

TEST_CASE("isometry probe concentrates for generous sample sizes") {
  msp::DgpConfig dgp;
  dgp.d = 20;
  dgp.s = 2;
  dgp.T = 30;
  dgp.m = 2000;
  dgp.seed = 5;
  const auto data = msp::generate_dataset(msp::generate_ground_truth(dgp), dgp);
  const auto est = msp::rip_probe(data, 2, 60, 9);
  CHECK(est.rank_probed == 2);
  CHECK(est.samples == 60);
  CHECK(est.min_ratio > 0.8);
  CHECK(est.max_ratio < 1.2);
  CHECK(est.delta_hat ==
        doctest::Approx(std::max(1.0 - est.min_ratio, est.max_ratio - 1.0)).epsilon(1e-12));
  CHECK(est.theory_bound ==
        doctest::Approx(msp::rip_bound(2, 2000, 10.0, 0.1)).epsilon(1e-12));
  // Deterministic in the probe seed.
  const auto again = msp::rip_probe(data, 2, 60, 9);
  CHECK(again.min_ratio == est.min_ratio);
  CHECK(again.max_ratio == est.max_ratio);
}

TEST_CASE("subspace error bound holds along a convergent run") {
  msp::DgpConfig dgp;
  dgp.d = 25;
  dgp.s = 3;
  dgp.T = 50;
  dgp.m = 20;
  dgp.seed = 6;
  const auto truth = msp::generate_ground_truth(dgp);
  const auto data = msp::generate_dataset(truth, dgp);
  msp::MetaSpConfig cfg;
  cfg.rank = 3;
  cfg.step_size = 1.0;
  cfg.max_iters = 30;
  const auto fit = msp::meta_sp_fit(data, cfg);
  const auto check = msp::subspace_error_check(fit.subspace, truth, fit.coefficients);
  CHECK(check.holds);
  CHECK(check.lhs == doctest::Approx(msp::sine_angle(fit.subspace, truth.factored.subspace)).epsilon(1e-12));
  const double lam = msp::task_diversity(truth);
  const double expected_rhs =
      (truth.coefficients().theta - fit.coefficients.theta).norm() /
      std::sqrt(lam * static_cast<double>(dgp.T));
  CHECK(check.rhs == doctest::Approx(expected_rhs).epsilon(1e-12));
}

TEST_CASE("subspace error bound rejects rank-deficient truths") {
  Matrix w(3, 2);
  w << 1, 0,
       2, 0,
       -1, 0;  // second direction unused
  StreamRng rng(15);
  const Subspace basis = msp::haar_subspace(6, 2, rng);
  const msp::GroundTruth truth(msp::FactoredCoefficients(w, basis), 0.0);
  const Coefficients est(Matrix::Zero(3, 6));
  CHECK_THROWS_AS((void)msp::subspace_error_check(basis, truth, est), msp::DegeneracyError);
}
