#pragma once

#include "msp/rng.hpp"
#include "msp/types.hpp"

#include <cstdint>

namespace msp {

enum class FeatureDist { Gaussian, Rademacher };

/// Synthetic data-generating process: theta* = W* B* with W* iid standard
/// normal (T x s) and B* a uniformly random row-orthonormal s x d basis,
/// responses y = X theta* + noise_sd * eps.
struct DgpConfig {
  Index d = 0;
  Index s = 0;
  Index T = 0;
  Index m = 0;                        // uniform per-task sample count
  std::vector<Index> m_per_task;      // optional override, length T
  double noise_sd = 0.0;
  std::uint64_t seed = 0;
  FeatureDist features = FeatureDist::Gaussian;

  Index samples_for(Index task) const;
  void validate() const;
};

/// Uniformly random s-dimensional subspace of R^d: QR of a d x d standard
/// normal matrix, first s columns of Q, transposed to rows.
Subspace haar_subspace(Index d, Index s, StreamRng rng);

/// Deterministic in cfg.seed. W* and B* come from dedicated substreams, so
/// the truth does not depend on sample counts.
GroundTruth generate_ground_truth(const DgpConfig& cfg);

/// Designs and noise come from per-task substreams of cfg.seed keyed by task
/// index; task t's data is identical whether or not other tasks are made.
MultiTaskDataset generate_dataset(const GroundTruth& truth, const DgpConfig& cfg);

/// Smallest eigenvalue of W*^T W* / T. Positive iff the task weights span
/// all s directions.
double task_diversity(const GroundTruth& truth);

}  // namespace msp
