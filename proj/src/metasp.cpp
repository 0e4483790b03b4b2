#include "msp/metasp.hpp"

#include "msp/linalg.hpp"
#include "msp/metrics.hpp"
#include "msp/model.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <chrono>
#include <cmath>

namespace msp {

DivergenceError::DivergenceError(int iter, std::optional<FitResult> last)
    : std::runtime_error("solver diverged at iteration " + std::to_string(iter)),
      iteration(iter),
      last_finite(std::move(last)) {}

Vector gd_step(const TaskData& task, const Vector& theta, double step) {
  if (theta.size() != task.dim())
    throw std::invalid_argument("gd_step: coefficient length != feature dimension");
  require_finite(theta, "gd_step theta");
  const double scale = step / static_cast<double>(task.samples());
  return theta + scale * (task.design.transpose() * (task.response - task.design * theta));
}

namespace {

// Rank-s truncation via the d x d (or T x T) Gram spectrum when one side is
// much shorter; falls back to a direct SVD otherwise. The iterates here are
// tall (many tasks, moderate dimension), which makes the Gram route the hot
// path.
HardThresholdResult threshold_gram_tall(const Matrix& theta, Index s) {
  const Matrix gram = theta.transpose() * theta;  // d x d
  Eigen::SelfAdjointEigenSolver<Matrix> es(gram);
  const Index d = theta.cols();
  Matrix v(d, s);
  for (Index i = 0; i < s; ++i) v.col(i) = es.eigenvectors().col(d - 1 - i);
  Matrix truncated = (theta * v) * v.transpose();
  return {Coefficients(std::move(truncated)), Subspace(v.transpose()), false};
}

HardThresholdResult threshold_svd(const Matrix& theta, Index s) {
  Eigen::BDCSVD<Matrix> svd(theta, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Matrix u = svd.matrixU().leftCols(s);
  const Vector sv = svd.singularValues().head(s);
  const Matrix v = svd.matrixV().leftCols(s);
  Matrix truncated = u * sv.asDiagonal() * v.transpose();
  return {Coefficients(std::move(truncated)), Subspace(v.transpose()), false};
}

}  // namespace

HardThresholdResult hard_threshold(const Coefficients& theta, Index s) {
  const Index T = theta.task_count();
  const Index d = theta.dim();
  if (s < 1 || s > std::min(T, d))
    throw std::invalid_argument("hard_threshold: need 1 <= s <= min(T, d)");
  if (theta.theta.norm() == 0.0) {
    return {Coefficients(Matrix::Zero(T, d)), Subspace::identity_frame(s, d), true};
  }
  if (T >= 4 * d) return threshold_gram_tall(theta.theta, s);
  return threshold_svd(theta.theta, s);
}

FitResult meta_sp_fit(const MultiTaskDataset& data, const MetaSpConfig& cfg) {
  const Index T = data.task_count();
  const Index d = data.dim();
  if (cfg.rank < 1 || cfg.rank > std::min(T, d))
    throw std::invalid_argument("meta_sp_fit: need 1 <= rank <= min(T, d)");
  if (!(cfg.step_size > 0.0))
    throw std::invalid_argument("meta_sp_fit: step_size must be > 0");
  if (cfg.max_iters < 0) throw std::invalid_argument("meta_sp_fit: max_iters must be >= 0");
  if (!(cfg.rel_tol >= 0.0)) throw std::invalid_argument("meta_sp_fit: rel_tol must be >= 0");

  StepCertificate cert;
  cert.step_size = cfg.step_size;
  cert.delta_bound =
      rip_bound(3 * cfg.rank, data.min_samples(), cfg.cert_tail_scale, cfg.cert_failure_prob);
  cert.within_unit = cfg.step_size <= 1.0;
  if (cert.delta_bound < 1.0) {
    cert.min_step = (1.0 - 1.0 / (2.0 * std::sqrt(2.0))) / (1.0 - cert.delta_bound);
    cert.certified = cert.within_unit && cfg.step_size > cert.min_step;
  }

  // Zero start: the first gradient step is data-driven, no random draw.
  FitResult result(Coefficients(Matrix::Zero(T, d)), Subspace::identity_frame(cfg.rank, d));
  result.degenerate = true;  // holds until the first nonzero truncation
  result.certificate = cert;

  const auto t0 = std::chrono::steady_clock::now();
  Matrix theta = Matrix::Zero(T, d);
  for (int k = 1; k <= cfg.max_iters; ++k) {
    Matrix stepped(T, d);
    for (Index t = 0; t < T; ++t) {
      const TaskData& task = data.tasks[static_cast<std::size_t>(t)];
      stepped.row(t) = gd_step(task, theta.row(t).transpose(), cfg.step_size).transpose();
    }
    if (!stepped.allFinite()) throw DivergenceError(k, std::move(result));

    HardThresholdResult ht = hard_threshold(Coefficients(std::move(stepped)), cfg.rank);
    const double prev_norm = theta.norm();
    const double change = (ht.coefficients.theta - theta).norm();
    // Entries can stay finite while the norm overflows; that would turn the
    // relative-change stop into inf <= inf and mask the blow-up.
    if (!ht.coefficients.theta.allFinite() || !std::isfinite(change))
      throw DivergenceError(k, std::move(result));
    theta = ht.coefficients.theta;

    IterationTrace row;
    row.iter = k;
    row.loss = loss(data, ht.coefficients);
    if (cfg.trace_against != nullptr) {
      row.dist1 = dist1(ht.coefficients, *cfg.trace_against);
      row.dist2 = sine_angle(ht.subspace, cfg.trace_against->factored.subspace);
    }
    row.elapsed_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    result.coefficients = std::move(ht.coefficients);
    result.subspace = std::move(ht.subspace);
    result.degenerate = ht.degenerate;
    result.trace.push_back(row);

    if (change <= cfg.rel_tol * std::max(prev_norm, 1e-30)) break;
  }
  return result;
}

}  // namespace msp
