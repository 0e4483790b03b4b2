#pragma once

#include "msp/solver.hpp"
#include "msp/types.hpp"

namespace msp {

struct MetaSpConfig {
  Index rank = 0;            // shared subspace dimension s
  double step_size = 0.0;    // per-task gradient step, scaled by 1/m_t
  int max_iters = 0;
  double rel_tol = 1e-10;    // stop when rel Frobenius change drops below
  const GroundTruth* trace_against = nullptr;

  // Plug-in parameters for the step-size certificate.
  double cert_tail_scale = 10.0;
  double cert_failure_prob = 0.1;
};

/// One per-task gradient step on the squared residual:
/// theta + (step / m) * X^T (y - X theta), m = task.samples().
Vector gd_step(const TaskData& task, const Vector& theta, double step);

/// Best rank-s approximation and its row space.
struct HardThresholdResult {
  Coefficients coefficients;
  Subspace subspace;   // rows: top-s right singular vectors
  bool degenerate = false;  // set when the input was exactly zero
};
HardThresholdResult hard_threshold(const Coefficients& theta, Index s);

/// Iterative hard thresholding for multi-task regression with a shared
/// low-rank structure. From theta = 0, alternates a per-task gradient step
/// with a rank-s truncation, and reports the top-s right singular subspace
/// of the final iterate. Throws DivergenceError when an iterate overflows.
FitResult meta_sp_fit(const MultiTaskDataset& data, const MetaSpConfig& cfg);

}  // namespace msp
