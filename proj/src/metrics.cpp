#include "msp/metrics.hpp"

#include "msp/linalg.hpp"
#include "msp/model.hpp"
#include "msp/rng.hpp"
#include "msp/synthetic.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

namespace msp {

double dist1(const Coefficients& estimate, const GroundTruth& truth) {
  const Matrix star = truth.coefficients().theta;
  if (estimate.theta.rows() != star.rows() || estimate.theta.cols() != star.cols())
    throw std::invalid_argument("dist1: shape mismatch with truth");
  return (estimate.theta - star).squaredNorm() / static_cast<double>(star.rows());
}

double sine_angle(const Subspace& b1, const Subspace& b2) {
  if (b1.ambient() != b2.ambient())
    throw std::invalid_argument("sine_angle: ambient dimensions differ");
  const Matrix cross = b1.basis() * b2.basis().transpose();
  if (b1.rank() == b2.rank()) {
    Eigen::JacobiSVD<Matrix> svd(cross);
    const double c = svd.singularValues().minCoeff();
    return std::sqrt(std::clamp(1.0 - c * c, 0.0, 1.0));
  }
  // One-sided residual of b1 against the projector onto b2.
  const double v = linalg::spectral_norm(b1.basis() - cross * b2.basis());
  return std::clamp(v, 0.0, 1.0);
}

double rip_bound(Index r, Index m, double tail_scale, double failure_prob) {
  if (r < 1 || m < 1) throw std::invalid_argument("rip_bound: need r >= 1, m >= 1");
  if (!(tail_scale > 0.0)) throw std::invalid_argument("rip_bound: tail_scale must be > 0");
  if (!(failure_prob > 0.0 && failure_prob < 1.0))
    throw std::invalid_argument("rip_bound: failure_prob must be in (0, 1)");
  const double rr = static_cast<double>(r);
  const double num = 8.0 * (tail_scale + 1.0) * rr - 4.0;
  return std::sqrt(num / (3.0 * static_cast<double>(m)) * std::log(2.0 * rr / failure_prob));
}

ContractionRate contraction_factor(double step, double delta_3s) {
  if (!(step >= 0.0)) throw std::invalid_argument("contraction_factor: step must be >= 0");
  if (!(delta_3s >= 0.0 && delta_3s < 1.0))
    throw std::invalid_argument("contraction_factor: delta must be in [0, 1)");
  ContractionRate out;
  out.factor = 2.0 * std::sqrt(2.0) * (1.0 - step + step * delta_3s);
  out.contracts = out.factor < 1.0;
  return out;
}

RipEstimate rip_probe(const MultiTaskDataset& data, Index r, Index samples,
                      std::uint64_t seed, double tail_scale, double failure_prob) {
  const Index d = data.dim();
  const Index T = data.task_count();
  if (r < 1 || r > std::min(T, d))
    throw std::invalid_argument("rip_probe: need 1 <= r <= min(T, d)");
  if (samples < 1) throw std::invalid_argument("rip_probe: need samples >= 1");
  const Index m_min = data.min_samples();

  RipEstimate out;
  out.rank_probed = r;
  out.samples = samples;
  out.min_ratio = std::numeric_limits<double>::infinity();
  out.max_ratio = -std::numeric_limits<double>::infinity();

  StreamRng root(seed);
  for (Index i = 0; i < samples; ++i) {
    StreamRng probe = root.stream("probe", static_cast<std::uint64_t>(i));
    const Subspace basis = haar_subspace(d, r, probe.stream("basis"));
    StreamRng ws = probe.stream("weights");
    Matrix w = gaussian_matrix(ws, T, r);
    const Coefficients theta = compose(FactoredCoefficients(std::move(w), basis));
    const double den = theta.theta.squaredNorm();
    const double num =
        apply_operator(data, theta).squaredNorm() / static_cast<double>(m_min);
    const double ratio = num / den;
    out.min_ratio = std::min(out.min_ratio, ratio);
    out.max_ratio = std::max(out.max_ratio, ratio);
  }
  out.delta_hat = std::max({1.0 - out.min_ratio, out.max_ratio - 1.0, 0.0});
  out.theory_bound = rip_bound(r, m_min, tail_scale, failure_prob);
  return out;
}

SubspaceErrorBound subspace_error_check(const Subspace& basis, const GroundTruth& truth,
                                        const Coefficients& iterate) {
  const double lambda_s = task_diversity(truth);
  if (!(lambda_s > 0.0))
    throw DegeneracyError("subspace_error_check: task diversity is not positive");
  const double T = static_cast<double>(truth.factored.task_count());
  SubspaceErrorBound out;
  out.lhs = sine_angle(basis, truth.factored.subspace);
  out.rhs = (truth.coefficients().theta - iterate.theta).norm() / std::sqrt(lambda_s * T);
  out.holds = out.lhs <= out.rhs + 1e-8;
  return out;
}

}  // namespace msp
