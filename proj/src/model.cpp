#include "msp/model.hpp"

namespace msp {

namespace {
void check_shapes(const MultiTaskDataset& data, const Coefficients& theta) {
  if (theta.task_count() != data.task_count())
    throw std::invalid_argument("coefficient rows != task count");
  if (theta.dim() != data.dim())
    throw std::invalid_argument("coefficient width != feature dimension");
}
}  // namespace

Vector apply_operator(const MultiTaskDataset& data, const Coefficients& theta) {
  check_shapes(data, theta);
  Vector out(data.total_samples());
  Index at = 0;
  for (Index t = 0; t < data.task_count(); ++t) {
    const TaskData& task = data.tasks[static_cast<std::size_t>(t)];
    out.segment(at, task.samples()) = task.design * theta.theta.row(t).transpose();
    at += task.samples();
  }
  return out;
}

double loss(const MultiTaskDataset& data, const Coefficients& theta) {
  check_shapes(data, theta);
  double total = 0.0;
  for (Index t = 0; t < data.task_count(); ++t) {
    const TaskData& task = data.tasks[static_cast<std::size_t>(t)];
    total += (task.response - task.design * theta.theta.row(t).transpose()).squaredNorm();
  }
  return total;
}

Coefficients compose(const FactoredCoefficients& factored) {
  return Coefficients(factored.weights * factored.subspace.basis());
}

}  // namespace msp
