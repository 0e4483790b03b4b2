#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace msp {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Numerically rank-deficient or otherwise degenerate input.
struct DegeneracyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require_finite(const Matrix& m, const char* what);
void require_finite(const Vector& v, const char* what);

/// One task: design matrix (samples x dim) and response vector (samples).
struct TaskData {
  Matrix design;
  Vector response;

  TaskData(Matrix x, Vector y);

  Index samples() const { return design.rows(); }
  Index dim() const { return design.cols(); }
};

/// Ordered collection of tasks sharing a feature dimension. Per-task sample
/// counts may differ.
struct MultiTaskDataset {
  std::vector<TaskData> tasks;

  explicit MultiTaskDataset(std::vector<TaskData> t);

  Index task_count() const { return static_cast<Index>(tasks.size()); }
  Index dim() const { return tasks.front().dim(); }
  Index total_samples() const;
  Index min_samples() const;
};

/// Stacked per-task regression coefficients, one row per task (T x d).
struct Coefficients {
  Matrix theta;

  explicit Coefficients(Matrix th);

  Index task_count() const { return theta.rows(); }
  Index dim() const { return theta.cols(); }
};

/// An s-dimensional subspace of R^d stored as a row-orthonormal s x d basis.
class Subspace {
 public:
  static constexpr double kOrthTol = 1e-8;

  explicit Subspace(Matrix basis);

  /// First s canonical directions; the fallback frame for degenerate cases.
  static Subspace identity_frame(Index s, Index d);

  const Matrix& basis() const { return basis_; }
  Index rank() const { return basis_.rows(); }
  Index ambient() const { return basis_.cols(); }

 private:
  Matrix basis_;
};

/// Low-rank factorization theta = weights * basis (T x s times s x d).
struct FactoredCoefficients {
  Matrix weights;
  Subspace subspace;

  FactoredCoefficients(Matrix w, Subspace b);

  Index task_count() const { return weights.rows(); }
  Index rank() const { return subspace.rank(); }
  Index dim() const { return subspace.ambient(); }
};

/// True model behind a synthetic dataset: factored coefficients plus the
/// noise standard deviation.
struct GroundTruth {
  FactoredCoefficients factored;
  double noise_sd = 0.0;

  GroundTruth(FactoredCoefficients f, double sigma);

  Coefficients coefficients() const;
};

}  // namespace msp
