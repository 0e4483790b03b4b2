#pragma once

#include "msp/solver.hpp"
#include "msp/table.hpp"
#include "msp/types.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace msp {

/// Projected least squares onto a fixed basis: w solves the s-dimensional
/// normal equations for X B^T, theta = B^T w lives in the span of B.
struct AdaptResult {
  Vector weights;
  Vector theta;
  bool degenerate = false;  // rank-deficient projected design
};
AdaptResult adapt_task(const Subspace& basis, const TaskData& task);

/// Unstructured per-task estimate (X^T X)^+ X^T y; the minimum-norm
/// least-squares solution, defined even when samples < dim.
Vector lsq_pinv(const TaskData& task);

/// Random s-dimensional reference subspace, drawn like the synthetic truth.
Subspace random_b(Index d, Index s, std::uint64_t seed);

/// Mean relative error |pred - truth| / |truth|; entries with |truth| below
/// 1e-12 are skipped and counted. Throws DegeneracyError when every entry
/// is skipped.
struct MeanRelativeError {
  double value = 0.0;
  Index skipped = 0;
};
MeanRelativeError mre(const Vector& predictions, const Vector& truth);

enum class Stage { MetaTest, TestTrain, TestTest };

struct StageReport {
  Stage stage;
  std::vector<double> per_task_mre;
  double m_mre = 0.0;        // mean of per_task_mre
  Index skipped_points = 0;  // near-zero truths excluded from the MREs
};

/// Task-level split plus per-task train/holdout point selection.
struct SplitProtocol {
  double meta_fraction = 0.8;
  Index train_points = 0;
  std::uint64_t seed = 0;
};

/// Materialized split: which tasks are meta vs held-out, and per-task train
/// point indices. Deterministic in (dataset shape, protocol), so competing
/// adaptation arms see identical data.
struct ProtocolSplit {
  std::vector<Index> meta_tasks;
  std::vector<Index> test_tasks;
  std::vector<std::vector<Index>> train_points;  // indexed by original task
  std::vector<std::vector<Index>> test_points;
  Index dropped_tasks = 0;  // too few samples to keep a holdout point
};
ProtocolSplit compute_split(const MultiTaskDataset& data, const SplitProtocol& split);

/// Anything that learns a shared model from a multi-task training set.
struct LearnedModel {
  Coefficients theta;
  Subspace subspace;
};
using SubspaceLearner =
    std::function<LearnedModel(const MultiTaskDataset&, Index rank, std::uint64_t seed)>;

struct ProtocolResult {
  StageReport meta_test;
  StageReport test_train;
  StageReport test_test;
  Index dropped_tasks = 0;
};

/// Four-stage adaptation protocol: learn on the meta tasks' training points,
/// score the learned rows on the meta holdouts, adapt per held-out task on
/// its training points, score on its holdout.
ProtocolResult run_protocol(const MultiTaskDataset& data, const SplitProtocol& split,
                            const SubspaceLearner& learner, Index rank,
                            std::uint64_t learner_seed);

/// Reference arms over the same split: adaptation onto a random basis, and
/// the unstructured per-task estimate. Only the adaptation stages apply.
struct BaselineStages {
  StageReport test_train;
  StageReport test_test;
};
BaselineStages random_b_stages(const MultiTaskDataset& data, const ProtocolSplit& split,
                               Index rank, std::uint64_t seed);
BaselineStages lsq_pinv_stages(const MultiTaskDataset& data, const ProtocolSplit& split);

/// Per-column preprocessing transforms for raw task tables.
enum class Transform {
  Passthrough,
  MinMaxGlobal,           // affine map onto [-1, 1] using global min/max
  FoldStandardize,        // x -> |x - center|, then global standardization
  LogStandardizePerTask,  // log, then per-task standardization
  LogOnly,
};

struct ColumnTransform {
  std::string column;
  Transform transform = Transform::Passthrough;
  double fold_center = 183.0;
};

struct PreprocessSpec {
  std::vector<ColumnTransform> columns;  // one per feature column + response
  bool add_intercept = true;
};

/// Reads the sidecar file mapping each column to its transform.
PreprocessSpec read_preprocess_spec(const std::string& path);

struct PreprocessResult {
  MultiTaskDataset dataset;
  std::vector<std::string> task_ids;  // per dataset task, original id
  Index rejected_rows = 0;            // nonpositive values in log columns
  Index dropped_tasks = 0;            // tasks left empty after rejection
};

/// Applies the per-column transforms, appends an intercept column of ones
/// (unless disabled), and groups rows into per-task design/response pairs.
/// Constant columns under a standardizing transform are a degeneracy error.
PreprocessResult preprocess(const RawTaskTable& table, const PreprocessSpec& spec);

}  // namespace msp
