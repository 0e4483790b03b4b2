#pragma once

#include "msp/solver.hpp"
#include "msp/types.hpp"

#include <cstdint>
#include <optional>

namespace msp {

/// Shared knobs for the comparison solvers. Fields that a method does not
/// use are ignored; required ones are validated by each fit.
struct BaselineConfig {
  Index rank = 0;
  int max_iters = 0;
  double rel_tol = 1e-10;
  std::uint64_t seed = 0;                    // random initialization
  std::optional<double> step_size;           // altmingd, bm
  std::optional<double> reg_coeff;           // nuc penalty weight
  std::optional<double> noise_sd;            // derives the nuc default penalty
  std::optional<Matrix> init_basis;          // start altmin/altmingd at a given basis
  const GroundTruth* trace_against = nullptr;
};

/// Method-of-moments subspace: top-s eigenvectors of the response-squared
/// weighted second moment (1/N) sum y^2 x x^T. One pass, no iterations.
struct MomResult {
  Subspace subspace;
  bool degenerate = false;   // all-zero moment matrix
};
MomResult mom_fit(const MultiTaskDataset& data, Index s);

/// Alternating minimization: exact per-task weights given the basis, then
/// the exact basis given the weights (a d*s least-squares solve), with the
/// triangular factor absorbed into the weights so each reported iterate is
/// the true alternating minimizer and the objective never increases.
FitResult altmin_fit(const MultiTaskDataset& data, const BaselineConfig& cfg);

/// Like altmin_fit but the basis update is a single gradient step followed
/// by row re-orthonormalization.
FitResult altmingd_fit(const MultiTaskDataset& data, const BaselineConfig& cfg);

/// Joint gradient descent on the factored objective L(W B) from random
/// normal initialization (the origin is a stationary point, so zero
/// initialization is not offered).
FitResult bm_fit(const MultiTaskDataset& data, const BaselineConfig& cfg);

/// Default nuclear-norm penalty weight for noise level sigma.
double nuc_default_reg(double sigma, Index d, Index m, Index T);

/// Proximal gradient on L(theta)/(2N) + reg * ||theta||_nuclear: gradient
/// step with the guaranteed-descent step size, then singular-value soft
/// thresholding. Reports the top-rank right singular subspace at exit.
FitResult nuc_fit(const MultiTaskDataset& data, const BaselineConfig& cfg);

}  // namespace msp
