#include "msp/synthetic.hpp"

#include <Eigen/QR>

namespace msp {

Index DgpConfig::samples_for(Index task) const {
  if (!m_per_task.empty()) return m_per_task[static_cast<std::size_t>(task)];
  return m;
}

void DgpConfig::validate() const {
  if (d < 1) throw std::invalid_argument("DgpConfig: d must be >= 1");
  if (s < 1 || s > d) throw std::invalid_argument("DgpConfig: need 1 <= s <= d");
  if (T < 1) throw std::invalid_argument("DgpConfig: T must be >= 1");
  if (!m_per_task.empty() && static_cast<Index>(m_per_task.size()) != T)
    throw std::invalid_argument("DgpConfig: m_per_task length != T");
  for (Index t = 0; t < T; ++t)
    if (samples_for(t) < 1) throw std::invalid_argument("DgpConfig: every task needs m >= 1");
  if (!(noise_sd >= 0.0)) throw std::invalid_argument("DgpConfig: noise_sd must be >= 0");
}

Subspace haar_subspace(Index d, Index s, StreamRng rng) {
  Matrix g = gaussian_matrix(rng, d, d);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(d, s);
  return Subspace(q.transpose());
}

GroundTruth generate_ground_truth(const DgpConfig& cfg) {
  cfg.validate();
  StreamRng root(cfg.seed);
  Subspace basis = haar_subspace(cfg.d, cfg.s, root.stream("basis"));
  StreamRng wstream = root.stream("weights");
  Matrix w = gaussian_matrix(wstream, cfg.T, cfg.s);
  return GroundTruth(FactoredCoefficients(std::move(w), std::move(basis)), cfg.noise_sd);
}

MultiTaskDataset generate_dataset(const GroundTruth& truth, const DgpConfig& cfg) {
  cfg.validate();
  if (truth.factored.task_count() != cfg.T || truth.factored.dim() != cfg.d)
    throw std::invalid_argument("generate_dataset: truth shape != config shape");
  const Matrix theta = truth.coefficients().theta;
  StreamRng root(cfg.seed);
  std::vector<TaskData> tasks;
  tasks.reserve(static_cast<std::size_t>(cfg.T));
  for (Index t = 0; t < cfg.T; ++t) {
    const Index mt = cfg.samples_for(t);
    StreamRng xs = root.stream("design", static_cast<std::uint64_t>(t));
    Matrix x = cfg.features == FeatureDist::Gaussian ? gaussian_matrix(xs, mt, cfg.d)
                                                     : rademacher_matrix(xs, mt, cfg.d);
    Vector y = x * theta.row(t).transpose();
    if (truth.noise_sd > 0.0) {
      StreamRng es = root.stream("noise", static_cast<std::uint64_t>(t));
      y += truth.noise_sd * gaussian_vector(es, mt);
    }
    tasks.emplace_back(std::move(x), std::move(y));
  }
  return MultiTaskDataset(std::move(tasks));
}

double task_diversity(const GroundTruth& truth) {
  const Matrix& w = truth.factored.weights;
  const Matrix gram = w.transpose() * w / static_cast<double>(w.rows());
  Eigen::SelfAdjointEigenSolver<Matrix> es(gram);
  return es.eigenvalues().minCoeff();
}

}  // namespace msp
