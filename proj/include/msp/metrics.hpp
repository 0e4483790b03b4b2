#pragma once

#include "msp/types.hpp"

#include <cstdint>

namespace msp {

/// Mean squared coefficient error ||theta_hat - theta*||_F^2 / T.
double dist1(const Coefficients& estimate, const GroundTruth& truth);

/// Sine of the largest principal angle between two row spans. For equal
/// ranks this is sqrt(1 - sigma_min(B1 B2^T)^2) and symmetric; for unequal
/// ranks it falls back to the one-sided projector form ||B1 (I - B2^T B2)||_2.
double sine_angle(const Subspace& b1, const Subspace& b2);

/// Closed-form high-probability bound on the rank-r restricted isometry
/// constant of the 1/sqrt(m)-scaled task operator:
/// sqrt((8(a+1)r - 4) / (3m) * log(2r / eps)).
double rip_bound(Index r, Index m, double tail_scale, double failure_prob);

/// Per-iteration contraction factor 2*sqrt(2)*(1 - step + step * delta) of
/// the hard-thresholding recursion; contracts iff the factor is below one.
struct ContractionRate {
  double factor = 0.0;
  bool contracts = false;
};
ContractionRate contraction_factor(double step, double delta_3s);

/// Empirical restricted-isometry probe: random rank-r coefficient matrices
/// through the scaled task operator. Ratios near one mean near-isometry.
struct RipEstimate {
  Index rank_probed = 0;
  Index samples = 0;
  double min_ratio = 0.0;
  double max_ratio = 0.0;
  double delta_hat = 0.0;    // max(1 - min_ratio, max_ratio - 1)
  double theory_bound = 0.0; // rip_bound at the dataset's smallest m
};
RipEstimate rip_probe(const MultiTaskDataset& data, Index r, Index samples,
                      std::uint64_t seed, double tail_scale = 10.0,
                      double failure_prob = 0.1);

/// Checks the subspace-error inequality
/// sin(B_k, B*) <= ||theta* - theta_k||_F / sqrt(lambda_s * T)
/// with lambda_s the task-diversity eigenvalue of the truth.
struct SubspaceErrorBound {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;  // lhs <= rhs + 1e-8
};
SubspaceErrorBound subspace_error_check(const Subspace& basis,
                                        const GroundTruth& truth,
                                        const Coefficients& iterate);

}  // namespace msp
