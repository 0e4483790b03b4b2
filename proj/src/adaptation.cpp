#include "msp/adaptation.hpp"

#include "msp/linalg.hpp"
#include "msp/rng.hpp"
#include "msp/synthetic.hpp"

#include <json.hpp>

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

namespace msp {

AdaptResult adapt_task(const Subspace& basis, const TaskData& task) {
  if (basis.ambient() != task.dim())
    throw std::invalid_argument("adapt_task: basis ambient dimension != task dimension");
  AdaptResult out;
  const Matrix p = task.design * basis.basis().transpose();
  const Matrix normal = p.transpose() * p;
  Eigen::JacobiSVD<Matrix> svd(normal, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vector& sv = svd.singularValues();
  const double cutoff = 1e-12 * sv(0);
  Vector inv = Vector::Zero(sv.size());
  for (Index i = 0; i < sv.size(); ++i)
    if (sv(i) > cutoff && sv(i) > 0.0) inv(i) = 1.0 / sv(i);
  out.degenerate = !(sv(0) > 0.0) || sv(sv.size() - 1) <= cutoff;
  out.weights = svd.matrixV() * inv.asDiagonal() *
                (svd.matrixU().transpose() * (p.transpose() * task.response));
  out.theta = basis.basis().transpose() * out.weights;
  return out;
}

Vector lsq_pinv(const TaskData& task) {
  const Matrix normal = task.design.transpose() * task.design;
  return linalg::pseudo_inverse(normal) * (task.design.transpose() * task.response);
}

Subspace random_b(Index d, Index s, std::uint64_t seed) {
  return haar_subspace(d, s, StreamRng(seed).stream("random_basis"));
}

MeanRelativeError mre(const Vector& predictions, const Vector& truth) {
  if (predictions.size() != truth.size())
    throw std::invalid_argument("mre: length mismatch");
  if (truth.size() == 0) throw std::invalid_argument("mre: empty input");
  MeanRelativeError out;
  double sum = 0.0;
  Index used = 0;
  for (Index i = 0; i < truth.size(); ++i) {
    if (std::abs(truth(i)) <= 1e-12) {
      ++out.skipped;
      continue;
    }
    sum += std::abs(predictions(i) - truth(i)) / std::abs(truth(i));
    ++used;
  }
  if (used == 0) throw DegeneracyError("mre: every truth entry is near zero");
  out.value = sum / static_cast<double>(used);
  return out;
}

ProtocolSplit compute_split(const MultiTaskDataset& data, const SplitProtocol& split) {
  if (!(split.meta_fraction > 0.0 && split.meta_fraction < 1.0))
    throw std::invalid_argument("compute_split: meta_fraction must be in (0, 1)");
  if (split.train_points < 1)
    throw std::invalid_argument("compute_split: train_points must be >= 1");

  ProtocolSplit out;
  out.train_points.resize(static_cast<std::size_t>(data.task_count()));
  out.test_points.resize(static_cast<std::size_t>(data.task_count()));

  StreamRng root(split.seed);
  std::vector<Index> keep;
  for (Index t = 0; t < data.task_count(); ++t) {
    // A kept task needs its training quota plus at least one holdout point.
    if (data.tasks[static_cast<std::size_t>(t)].samples() <= split.train_points) {
      ++out.dropped_tasks;
      continue;
    }
    keep.push_back(t);
  }
  if (keep.size() < 2)
    throw std::invalid_argument("compute_split: need at least two usable tasks");

  StreamRng perm_rng = root.stream("task_perm");
  std::vector<Index> perm = perm_rng.sample_without_replacement(
      static_cast<Index>(keep.size()), static_cast<Index>(keep.size()));
  const Index n = static_cast<Index>(keep.size());
  Index n_meta = static_cast<Index>(
      std::llround(split.meta_fraction * static_cast<double>(n)));
  n_meta = std::clamp<Index>(n_meta, 1, n - 1);
  for (Index i = 0; i < n; ++i) {
    const Index task = keep[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])];
    (i < n_meta ? out.meta_tasks : out.test_tasks).push_back(task);
  }
  std::sort(out.meta_tasks.begin(), out.meta_tasks.end());
  std::sort(out.test_tasks.begin(), out.test_tasks.end());

  for (Index t : keep) {
    const Index nt = data.tasks[static_cast<std::size_t>(t)].samples();
    StreamRng point_rng = root.stream("points", static_cast<std::uint64_t>(t));
    std::vector<Index> train =
        point_rng.sample_without_replacement(nt, split.train_points);
    std::sort(train.begin(), train.end());
    std::vector<bool> is_train(static_cast<std::size_t>(nt), false);
    for (Index i : train) is_train[static_cast<std::size_t>(i)] = true;
    auto& test = out.test_points[static_cast<std::size_t>(t)];
    for (Index i = 0; i < nt; ++i)
      if (!is_train[static_cast<std::size_t>(i)]) test.push_back(i);
    out.train_points[static_cast<std::size_t>(t)] = std::move(train);
  }
  return out;
}

namespace {

TaskData slice_task(const TaskData& task, const std::vector<Index>& rows) {
  Matrix x(static_cast<Index>(rows.size()), task.dim());
  Vector y(static_cast<Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    x.row(static_cast<Index>(i)) = task.design.row(rows[i]);
    y(static_cast<Index>(i)) = task.response(rows[i]);
  }
  return TaskData(std::move(x), std::move(y));
}

StageReport finish_stage(Stage stage, std::vector<double> per_task, Index skipped) {
  StageReport report;
  report.stage = stage;
  report.per_task_mre = std::move(per_task);
  report.skipped_points = skipped;
  double sum = 0.0;
  for (double v : report.per_task_mre) sum += v;
  report.m_mre = report.per_task_mre.empty()
                     ? 0.0
                     : sum / static_cast<double>(report.per_task_mre.size());
  return report;
}

// Adaptation stages for a fixed basis over the held-out tasks.
BaselineStages basis_stages(const MultiTaskDataset& data, const ProtocolSplit& split,
                            const Subspace& basis) {
  std::vector<double> train_mre, test_mre;
  Index train_skip = 0, test_skip = 0;
  for (Index t : split.test_tasks) {
    const TaskData& task = data.tasks[static_cast<std::size_t>(t)];
    const TaskData train = slice_task(task, split.train_points[static_cast<std::size_t>(t)]);
    const TaskData test = slice_task(task, split.test_points[static_cast<std::size_t>(t)]);
    const AdaptResult fit = adapt_task(basis, train);
    const MeanRelativeError on_train = mre(train.design * fit.theta, train.response);
    const MeanRelativeError on_test = mre(test.design * fit.theta, test.response);
    train_mre.push_back(on_train.value);
    test_mre.push_back(on_test.value);
    train_skip += on_train.skipped;
    test_skip += on_test.skipped;
  }
  BaselineStages out;
  out.test_train = finish_stage(Stage::TestTrain, std::move(train_mre), train_skip);
  out.test_test = finish_stage(Stage::TestTest, std::move(test_mre), test_skip);
  return out;
}

}  // namespace

ProtocolResult run_protocol(const MultiTaskDataset& data, const SplitProtocol& split,
                            const SubspaceLearner& learner, Index rank,
                            std::uint64_t learner_seed) {
  const ProtocolSplit plan = compute_split(data, split);

  std::vector<TaskData> meta_train;
  meta_train.reserve(plan.meta_tasks.size());
  for (Index t : plan.meta_tasks)
    meta_train.push_back(slice_task(data.tasks[static_cast<std::size_t>(t)],
                                    plan.train_points[static_cast<std::size_t>(t)]));
  const MultiTaskDataset meta_set(std::move(meta_train));
  const LearnedModel model = learner(meta_set, rank, learner_seed);
  if (model.theta.task_count() != meta_set.task_count() ||
      model.theta.dim() != meta_set.dim())
    throw std::invalid_argument("run_protocol: learner returned mismatched coefficients");

  // Learned per-task rows scored on the meta tasks' holdout points.
  std::vector<double> meta_mre;
  Index meta_skip = 0;
  for (std::size_t i = 0; i < plan.meta_tasks.size(); ++i) {
    const Index t = plan.meta_tasks[i];
    const TaskData holdout =
        slice_task(data.tasks[static_cast<std::size_t>(t)],
                   plan.test_points[static_cast<std::size_t>(t)]);
    const Vector pred =
        holdout.design * model.theta.theta.row(static_cast<Index>(i)).transpose();
    const MeanRelativeError e = mre(pred, holdout.response);
    meta_mre.push_back(e.value);
    meta_skip += e.skipped;
  }

  const BaselineStages adapted = basis_stages(data, plan, model.subspace);

  ProtocolResult out;
  out.meta_test = finish_stage(Stage::MetaTest, std::move(meta_mre), meta_skip);
  out.test_train = adapted.test_train;
  out.test_test = adapted.test_test;
  out.dropped_tasks = plan.dropped_tasks;
  return out;
}

BaselineStages random_b_stages(const MultiTaskDataset& data, const ProtocolSplit& split,
                               Index rank, std::uint64_t seed) {
  return basis_stages(data, split, random_b(data.dim(), rank, seed));
}

BaselineStages lsq_pinv_stages(const MultiTaskDataset& data, const ProtocolSplit& split) {
  std::vector<double> train_mre, test_mre;
  Index train_skip = 0, test_skip = 0;
  for (Index t : split.test_tasks) {
    const TaskData& task = data.tasks[static_cast<std::size_t>(t)];
    const TaskData train = slice_task(task, split.train_points[static_cast<std::size_t>(t)]);
    const TaskData test = slice_task(task, split.test_points[static_cast<std::size_t>(t)]);
    const Vector theta = lsq_pinv(train);
    const MeanRelativeError on_train = mre(train.design * theta, train.response);
    const MeanRelativeError on_test = mre(test.design * theta, test.response);
    train_mre.push_back(on_train.value);
    test_mre.push_back(on_test.value);
    train_skip += on_train.skipped;
    test_skip += on_test.skipped;
  }
  BaselineStages out;
  out.test_train = finish_stage(Stage::TestTrain, std::move(train_mre), train_skip);
  out.test_test = finish_stage(Stage::TestTest, std::move(test_mre), test_skip);
  return out;
}

namespace {

Transform parse_transform(const std::string& name) {
  if (name == "passthrough") return Transform::Passthrough;
  if (name == "minmax_global") return Transform::MinMaxGlobal;
  if (name == "fold_standardize") return Transform::FoldStandardize;
  if (name == "log_standardize_per_task") return Transform::LogStandardizePerTask;
  if (name == "log_only") return Transform::LogOnly;
  throw DataError("preprocess spec: unknown transform '" + name + "'");
}

bool uses_log(Transform t) {
  return t == Transform::LogStandardizePerTask || t == Transform::LogOnly;
}

}  // namespace

PreprocessSpec read_preprocess_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open preprocess spec: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("preprocess spec " + path + ": " + e.what());
  }
  PreprocessSpec spec;
  if (!j.contains("columns") || !j["columns"].is_array())
    throw DataError("preprocess spec: missing 'columns' array");
  for (const auto& col : j["columns"]) {
    ColumnTransform ct;
    if (!col.contains("column") || !col.contains("transform"))
      throw DataError("preprocess spec: each column needs 'column' and 'transform'");
    ct.column = col["column"].get<std::string>();
    ct.transform = parse_transform(col["transform"].get<std::string>());
    if (col.contains("center")) ct.fold_center = col["center"].get<double>();
    spec.columns.push_back(std::move(ct));
  }
  if (j.contains("add_intercept")) spec.add_intercept = j["add_intercept"].get<bool>();
  return spec;
}

PreprocessResult preprocess(const RawTaskTable& table, const PreprocessSpec& spec) {
  const std::size_t ncols = table.columns.size() - 1;  // numeric columns
  if (table.rows.empty()) throw DataError("preprocess: table has no rows");

  // Resolve a transform per numeric column, defaulting to passthrough.
  std::vector<ColumnTransform> transforms(ncols);
  for (std::size_t c = 0; c < ncols; ++c) transforms[c].column = table.columns[c + 1];
  for (const auto& ct : spec.columns) {
    bool found = false;
    for (std::size_t c = 0; c < ncols; ++c) {
      if (table.columns[c + 1] == ct.column) {
        transforms[c] = ct;
        found = true;
        break;
      }
    }
    if (!found) throw DataError("preprocess: spec names unknown column '" + ct.column + "'");
  }

  // Group by task id in order of first appearance, rejecting rows with
  // nonpositive entries in log columns. Tasks losing every row are dropped.
  std::vector<std::string> task_ids;
  std::map<std::string, std::size_t> task_index;
  std::vector<std::vector<const RawTaskTable::Row*>> by_task;
  std::vector<const RawTaskTable::Row*> kept;
  Index rejected = 0;
  for (const auto& row : table.rows) {
    auto it = task_index.find(row.task_id);
    if (it == task_index.end()) {
      it = task_index.emplace(row.task_id, by_task.size()).first;
      task_ids.push_back(row.task_id);
      by_task.emplace_back();
    }
    bool ok = true;
    for (std::size_t c = 0; c < ncols && ok; ++c)
      if (uses_log(transforms[c].transform) && !(row.values[c] > 0.0)) ok = false;
    if (ok) {
      by_task[it->second].push_back(&row);
      kept.push_back(&row);
    } else {
      ++rejected;
    }
  }
  if (kept.empty()) throw DataError("preprocess: every row was rejected");

  // Global statistics over kept rows.
  struct GlobalStat {
    double min = 0.0, max = 0.0, mean = 0.0, sd = 0.0;
  };
  std::vector<GlobalStat> stats(ncols);
  for (std::size_t c = 0; c < ncols; ++c) {
    const Transform tr = transforms[c].transform;
    if (tr == Transform::MinMaxGlobal) {
      double lo = kept.front()->values[c], hi = lo;
      for (const auto* row : kept) {
        lo = std::min(lo, row->values[c]);
        hi = std::max(hi, row->values[c]);
      }
      if (!(hi > lo))
        throw DegeneracyError("preprocess: constant column '" + table.columns[c + 1] +
                              "' under minmax_global");
      stats[c].min = lo;
      stats[c].max = hi;
    } else if (tr == Transform::FoldStandardize) {
      const double center = transforms[c].fold_center;
      double sum = 0.0;
      for (const auto* row : kept) sum += std::abs(row->values[c] - center);
      const double mean = sum / static_cast<double>(kept.size());
      double ss = 0.0;
      for (const auto* row : kept) {
        const double v = std::abs(row->values[c] - center) - mean;
        ss += v * v;
      }
      const double sd = std::sqrt(ss / static_cast<double>(kept.size()));
      if (!(sd > 0.0))
        throw DegeneracyError("preprocess: constant column '" + table.columns[c + 1] +
                              "' under fold_standardize");
      stats[c].mean = mean;
      stats[c].sd = sd;
    }
  }

  // Per-task statistics for per-task standardization (on the log scale).
  std::vector<std::vector<GlobalStat>> task_stats(by_task.size(),
                                                  std::vector<GlobalStat>(ncols));
  for (std::size_t ti = 0; ti < by_task.size(); ++ti) {
    if (by_task[ti].empty()) continue;
    for (std::size_t c = 0; c < ncols; ++c) {
      if (transforms[c].transform != Transform::LogStandardizePerTask) continue;
      double sum = 0.0;
      for (const auto* row : by_task[ti]) sum += std::log(row->values[c]);
      const double mean = sum / static_cast<double>(by_task[ti].size());
      double ss = 0.0;
      for (const auto* row : by_task[ti]) {
        const double v = std::log(row->values[c]) - mean;
        ss += v * v;
      }
      const double sd = std::sqrt(ss / static_cast<double>(by_task[ti].size()));
      if (!(sd > 0.0))
        throw DegeneracyError("preprocess: column '" + table.columns[c + 1] +
                              "' constant within task '" + task_ids[ti] +
                              "' under log_standardize_per_task");
      task_stats[ti][c].mean = mean;
      task_stats[ti][c].sd = sd;
    }
  }

  auto transform_value = [&](std::size_t ti, std::size_t c, double v) {
    const auto& ct = transforms[c];
    switch (ct.transform) {
      case Transform::Passthrough:
        return v;
      case Transform::MinMaxGlobal:
        return 2.0 * (v - stats[c].min) / (stats[c].max - stats[c].min) - 1.0;
      case Transform::FoldStandardize:
        return (std::abs(v - ct.fold_center) - stats[c].mean) / stats[c].sd;
      case Transform::LogStandardizePerTask:
        return (std::log(v) - task_stats[ti][c].mean) / task_stats[ti][c].sd;
      case Transform::LogOnly:
        return std::log(v);
    }
    return v;
  };

  const Index nfeat = static_cast<Index>(ncols) - 1;
  const Index width = nfeat + (spec.add_intercept ? 1 : 0);
  std::vector<TaskData> tasks;
  std::vector<std::string> final_ids;
  Index dropped = 0;
  for (std::size_t ti = 0; ti < by_task.size(); ++ti) {
    if (by_task[ti].empty()) {
      ++dropped;
      continue;
    }
    const Index rows = static_cast<Index>(by_task[ti].size());
    Matrix x(rows, width);
    Vector y(rows);
    for (Index i = 0; i < rows; ++i) {
      const auto* row = by_task[ti][static_cast<std::size_t>(i)];
      for (Index c = 0; c < nfeat; ++c)
        x(i, c) = transform_value(ti, static_cast<std::size_t>(c), row->values[static_cast<std::size_t>(c)]);
      if (spec.add_intercept) x(i, nfeat) = 1.0;
      y(i) = transform_value(ti, ncols - 1, row->values[ncols - 1]);
    }
    tasks.emplace_back(std::move(x), std::move(y));
    final_ids.push_back(task_ids[ti]);
  }
  if (tasks.empty()) throw DataError("preprocess: no tasks survived");

  PreprocessResult out{MultiTaskDataset(std::move(tasks)), std::move(final_ids), rejected,
                       dropped};
  return out;
}

}  // namespace msp
