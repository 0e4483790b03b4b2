#include "msp/types.hpp"

#include "msp/model.hpp"

namespace msp {

void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) throw std::invalid_argument(std::string(what) + ": non-finite entries");
}

void require_finite(const Vector& v, const char* what) {
  if (!v.allFinite()) throw std::invalid_argument(std::string(what) + ": non-finite entries");
}

TaskData::TaskData(Matrix x, Vector y) : design(std::move(x)), response(std::move(y)) {
  if (design.rows() < 1 || design.cols() < 1)
    throw std::invalid_argument("TaskData: empty design");
  if (response.size() != design.rows())
    throw std::invalid_argument("TaskData: response length != sample count");
  require_finite(design, "TaskData design");
  require_finite(response, "TaskData response");
}

MultiTaskDataset::MultiTaskDataset(std::vector<TaskData> t) : tasks(std::move(t)) {
  if (tasks.empty()) throw std::invalid_argument("MultiTaskDataset: no tasks");
  const Index d = tasks.front().dim();
  for (const auto& task : tasks)
    if (task.dim() != d)
      throw std::invalid_argument("MultiTaskDataset: inconsistent feature dimension");
}

Index MultiTaskDataset::total_samples() const {
  Index n = 0;
  for (const auto& task : tasks) n += task.samples();
  return n;
}

Index MultiTaskDataset::min_samples() const {
  Index m = tasks.front().samples();
  for (const auto& task : tasks) m = std::min(m, task.samples());
  return m;
}

Coefficients::Coefficients(Matrix th) : theta(std::move(th)) {
  if (theta.rows() < 1 || theta.cols() < 1)
    throw std::invalid_argument("Coefficients: empty matrix");
  require_finite(theta, "Coefficients");
}

Subspace::Subspace(Matrix basis) : basis_(std::move(basis)) {
  if (basis_.rows() < 1 || basis_.rows() > basis_.cols())
    throw std::invalid_argument("Subspace: need 1 <= rank <= ambient dimension");
  require_finite(basis_, "Subspace basis");
  const Index s = basis_.rows();
  const double residual =
      (basis_ * basis_.transpose() - Matrix::Identity(s, s)).norm();
  if (residual > kOrthTol)
    throw std::invalid_argument("Subspace: rows not orthonormal (residual " +
                                std::to_string(residual) + ")");
}

Subspace Subspace::identity_frame(Index s, Index d) {
  if (s < 1 || s > d) throw std::invalid_argument("identity_frame: need 1 <= s <= d");
  return Subspace(Matrix::Identity(s, d));
}

FactoredCoefficients::FactoredCoefficients(Matrix w, Subspace b)
    : weights(std::move(w)), subspace(std::move(b)) {
  if (weights.rows() < 1) throw std::invalid_argument("FactoredCoefficients: no tasks");
  if (weights.cols() != subspace.rank())
    throw std::invalid_argument("FactoredCoefficients: weight width != basis rank");
  require_finite(weights, "FactoredCoefficients weights");
}

GroundTruth::GroundTruth(FactoredCoefficients f, double sigma)
    : factored(std::move(f)), noise_sd(sigma) {
  if (!(noise_sd >= 0.0))
    throw std::invalid_argument("GroundTruth: noise_sd must be >= 0");
}

Coefficients GroundTruth::coefficients() const { return compose(factored); }

}  // namespace msp
