#include "msp/baselines.hpp"

#include "msp/linalg.hpp"
#include "msp/metrics.hpp"
#include "msp/model.hpp"
#include "msp/rng.hpp"
#include "msp/synthetic.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include <chrono>
#include <cmath>

namespace msp {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(const Clock::time_point& t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void validate_common(const MultiTaskDataset& data, const BaselineConfig& cfg) {
  if (cfg.rank < 1 || cfg.rank > std::min(data.task_count(), data.dim()))
    throw std::invalid_argument("baseline fit: need 1 <= rank <= min(T, d)");
  if (cfg.max_iters < 0) throw std::invalid_argument("baseline fit: max_iters must be >= 0");
  if (!(cfg.rel_tol >= 0.0)) throw std::invalid_argument("baseline fit: rel_tol must be >= 0");
}

Matrix initial_basis(const MultiTaskDataset& data, const BaselineConfig& cfg) {
  if (cfg.init_basis) {
    Subspace given(*cfg.init_basis);  // validates orthonormality
    if (given.rank() != cfg.rank || given.ambient() != data.dim())
      throw std::invalid_argument("baseline fit: init_basis shape mismatch");
    return given.basis();
  }
  return haar_subspace(data.dim(), cfg.rank, StreamRng(cfg.seed).stream("init")).basis();
}

/// Weights for one task against a fixed basis, via the pseudo-inverse of the
/// projected normal matrix. Flags numerical rank deficiency.
Vector projected_weights(const TaskData& task, const Matrix& basis, bool* degenerate) {
  const Matrix p = task.design * basis.transpose();
  const Matrix normal = p.transpose() * p;
  Eigen::JacobiSVD<Matrix> svd(normal, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vector& sv = svd.singularValues();
  const double cutoff = 1e-12 * sv(0);
  Vector inv = Vector::Zero(sv.size());
  for (Index i = 0; i < sv.size(); ++i)
    if (sv(i) > cutoff && sv(i) > 0.0) inv(i) = 1.0 / sv(i);
  if (!(sv(0) > 0.0) || sv(sv.size() - 1) <= cutoff) *degenerate = true;
  return svd.matrixV() * inv.asDiagonal() *
         (svd.matrixU().transpose() * (p.transpose() * task.response));
}

IterationTrace make_trace_row(const MultiTaskDataset& data, const Coefficients& theta,
                              const Subspace& basis, const GroundTruth* truth, int iter,
                              const Clock::time_point& t0) {
  IterationTrace row;
  row.iter = iter;
  row.loss = loss(data, theta);
  if (truth != nullptr) {
    row.dist1 = dist1(theta, *truth);
    row.dist2 = sine_angle(basis, truth->factored.subspace);
  }
  row.elapsed_seconds = seconds_since(t0);
  return row;
}

}  // namespace

MomResult mom_fit(const MultiTaskDataset& data, Index s) {
  const Index d = data.dim();
  if (s < 1 || s > d) throw std::invalid_argument("mom_fit: need 1 <= s <= d");
  Matrix moment = Matrix::Zero(d, d);
  double n = 0.0;
  for (const TaskData& task : data.tasks) {
    for (Index j = 0; j < task.samples(); ++j) {
      const double y = task.response(j);
      moment.selfadjointView<Eigen::Lower>().rankUpdate(task.design.row(j).transpose(),
                                                        y * y);
    }
    n += static_cast<double>(task.samples());
  }
  Matrix sym = moment.selfadjointView<Eigen::Lower>();
  sym /= n;
  if (sym.norm() == 0.0) return {Subspace::identity_frame(s, d), true};
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
  Matrix basis(s, d);
  for (Index i = 0; i < s; ++i) basis.row(i) = es.eigenvectors().col(d - 1 - i).transpose();
  return {Subspace(std::move(basis)), false};
}

FitResult altmin_fit(const MultiTaskDataset& data, const BaselineConfig& cfg) {
  validate_common(data, cfg);
  const Index T = data.task_count();
  const Index d = data.dim();
  const Index s = cfg.rank;

  Matrix basis = initial_basis(data, cfg);
  FitResult result(Coefficients(Matrix::Zero(T, d)), Subspace(basis));
  Matrix theta = Matrix::Zero(T, d);

  const auto t0 = Clock::now();
  for (int k = 1; k <= cfg.max_iters; ++k) {
    bool degen = false;
    Matrix weights(T, s);
    for (Index t = 0; t < T; ++t)
      weights.row(t) =
          projected_weights(data.tasks[static_cast<std::size_t>(t)], basis, &degen)
              .transpose();

    // Exact basis update: normal equations over the d*s unknowns of C = B^T,
    // built from per-task Gram blocks.
    Matrix normal = Matrix::Zero(d * s, d * s);
    Matrix rhs_mat = Matrix::Zero(d, s);
    for (Index t = 0; t < T; ++t) {
      const TaskData& task = data.tasks[static_cast<std::size_t>(t)];
      Matrix gram = Matrix::Zero(d, d);
      gram.selfadjointView<Eigen::Lower>().rankUpdate(task.design.transpose());
      const Matrix gram_full = gram.selfadjointView<Eigen::Lower>();
      rhs_mat += (task.design.transpose() * task.response) * weights.row(t);
      for (Index i = 0; i < s; ++i)
        for (Index j = i; j < s; ++j)
          normal.block(i * d, j * d, d, d) += weights(t, i) * weights(t, j) * gram_full;
    }
    for (Index i = 0; i < s; ++i)
      for (Index j = 0; j < i; ++j)
        normal.block(i * d, j * d, d, d) = normal.block(j * d, i * d, d, d).transpose();

    const Eigen::Map<const Vector> rhs(rhs_mat.data(), d * s);
    Eigen::LDLT<Matrix> ldlt(normal);
    Vector sol = ldlt.solve(rhs);
    bool ok = ldlt.info() == Eigen::Success && sol.allFinite();
    if (ok) {
      const double resid = (normal * sol - rhs).norm();
      ok = resid <= 1e-8 * std::max(1.0, rhs.norm());
    }
    if (!ok) {
      sol = linalg::pseudo_inverse(normal) * rhs;
      degen = true;
    }
    const Eigen::Map<const Matrix> c(sol.data(), d, s);

    // C = Q R; absorb R into the weights so theta stays the exact minimizer
    // while the reported basis is orthonormal.
    const Eigen::HouseholderQR<Matrix> qr{Matrix(c)};
    const Matrix q = qr.householderQ() * Matrix::Identity(d, s);
    const Matrix r = qr.matrixQR().topLeftCorner(s, s).triangularView<Eigen::Upper>();
    const double rmax = r.diagonal().cwiseAbs().maxCoeff();
    if (!(rmax > 0.0) || r.diagonal().cwiseAbs().minCoeff() <= 1e-12 * rmax) degen = true;

    basis = q.transpose();
    const Matrix new_theta = (weights * r.transpose()) * basis;
    const double change = (new_theta - theta).norm();
    const double prev_norm = theta.norm();
    theta = new_theta;
    // A non-finite change means the norms overflowed even if every entry is
    // still finite; the relative stop test would accept inf <= inf.
    if (!theta.allFinite() || !std::isfinite(change))
      throw DivergenceError(k, std::move(result));

    result.coefficients = Coefficients(theta);
    result.subspace = Subspace(basis);
    result.degenerate = result.degenerate || degen;
    result.trace.push_back(make_trace_row(data, result.coefficients, result.subspace,
                                          cfg.trace_against, k, t0));
    if (change <= cfg.rel_tol * std::max(prev_norm, 1e-30)) break;
  }
  return result;
}

FitResult altmingd_fit(const MultiTaskDataset& data, const BaselineConfig& cfg) {
  validate_common(data, cfg);
  if (!cfg.step_size || !(*cfg.step_size >= 0.0))
    throw std::invalid_argument("altmingd_fit: step_size must be set and >= 0");
  const Index T = data.task_count();
  const Index d = data.dim();
  const Index s = cfg.rank;
  const double step = *cfg.step_size;

  Matrix basis = initial_basis(data, cfg);
  FitResult result(Coefficients(Matrix::Zero(T, d)), Subspace(basis));
  Matrix theta = Matrix::Zero(T, d);

  const auto t0 = Clock::now();
  for (int k = 1; k <= cfg.max_iters; ++k) {
    bool degen = false;
    Matrix weights(T, s);
    Matrix grad_acc = Matrix::Zero(s, d);
    for (Index t = 0; t < T; ++t) {
      const TaskData& task = data.tasks[static_cast<std::size_t>(t)];
      const Vector w = projected_weights(task, basis, &degen);
      weights.row(t) = w.transpose();
      const Vector resid = task.response - task.design * (basis.transpose() * w);
      grad_acc += w * (resid.transpose() * task.design) / static_cast<double>(task.samples());
    }

    // Single averaged gradient step on the basis, then re-orthonormalize.
    const Matrix stepped = basis + (step / static_cast<double>(T)) * grad_acc;
    linalg::CompletedBasis cb = linalg::orthonormal_rows_completed(stepped, s);
    degen = degen || cb.degenerate;
    basis = cb.basis;

    const Matrix new_theta = weights * basis;
    const double change = (new_theta - theta).norm();
    const double prev_norm = theta.norm();
    theta = new_theta;
    // A non-finite change means the norms overflowed even if every entry is
    // still finite; the relative stop test would accept inf <= inf.
    if (!theta.allFinite() || !std::isfinite(change))
      throw DivergenceError(k, std::move(result));

    result.coefficients = Coefficients(theta);
    result.subspace = Subspace(basis);
    result.degenerate = result.degenerate || degen;
    result.trace.push_back(make_trace_row(data, result.coefficients, result.subspace,
                                          cfg.trace_against, k, t0));
    if (change <= cfg.rel_tol * std::max(prev_norm, 1e-30)) break;
  }
  return result;
}

FitResult bm_fit(const MultiTaskDataset& data, const BaselineConfig& cfg) {
  validate_common(data, cfg);
  if (!cfg.step_size || !(*cfg.step_size > 0.0))
    throw std::invalid_argument("bm_fit: step_size must be set and > 0");
  const Index T = data.task_count();
  const Index d = data.dim();
  const Index s = cfg.rank;
  const double step = *cfg.step_size;
  const double n = static_cast<double>(data.total_samples());

  // The origin is a stationary point of the factored objective, so the
  // factors start at standard normal draws, never at zero.
  StreamRng root(cfg.seed);
  StreamRng ws = root.stream("factor_weights");
  StreamRng bs = root.stream("factor_basis");
  Matrix weights = gaussian_matrix(ws, T, s);
  Matrix basis = gaussian_matrix(bs, s, d);

  linalg::CompletedBasis cb0 = linalg::orthonormal_rows_completed(basis, s);
  FitResult result(Coefficients(weights * basis), Subspace(cb0.basis));
  Matrix theta = weights * basis;

  const auto t0 = Clock::now();
  for (int k = 1; k <= cfg.max_iters; ++k) {
    Matrix grad_w(T, s);
    Matrix grad_b = Matrix::Zero(s, d);
    for (Index t = 0; t < T; ++t) {
      const TaskData& task = data.tasks[static_cast<std::size_t>(t)];
      const Vector w = weights.row(t).transpose();
      const Vector resid = task.response - task.design * (basis.transpose() * w);
      grad_w.row(t) = -(resid.transpose() * (task.design * basis.transpose())) / n;
      grad_b -= (w * (resid.transpose() * task.design)) / n;
    }
    weights -= step * grad_w;
    basis -= step * grad_b;

    const Matrix new_theta = weights * basis;
    if (!new_theta.allFinite()) throw DivergenceError(k, std::move(result));
    const double change = (new_theta - theta).norm();
    const double prev_norm = theta.norm();
    if (!std::isfinite(change)) throw DivergenceError(k, std::move(result));
    theta = new_theta;

    linalg::CompletedBasis cb = linalg::orthonormal_rows_completed(basis, s);
    result.coefficients = Coefficients(theta);
    result.subspace = Subspace(cb.basis);
    result.degenerate = cb.degenerate;
    result.trace.push_back(make_trace_row(data, result.coefficients, result.subspace,
                                          cfg.trace_against, k, t0));
    if (change <= cfg.rel_tol * std::max(prev_norm, 1e-30)) break;
  }
  return result;
}

double nuc_default_reg(double sigma, Index d, Index m, Index T) {
  if (!(sigma > 0.0)) throw std::invalid_argument("nuc_default_reg: sigma must be > 0");
  if (d < 1 || m < 1 || T < 1) throw std::invalid_argument("nuc_default_reg: bad dimensions");
  const double dd = static_cast<double>(d);
  const double dm = static_cast<double>(m);
  const double dT = static_cast<double>(T);
  return sigma / dT * std::sqrt((dT + dd * dd / dm) / (dm * dT));
}

namespace {

struct ProxSpectrum {
  Vector values;  // soft-thresholded singular values, descending
  Matrix right;   // d x k right singular vectors matching `values`
};

// Soft-thresholds every singular value of theta by tau and rebuilds the
// matrix. Tall inputs go through the d x d Gram spectrum.
ProxSpectrum nuclear_prox(Matrix& theta, double tau) {
  const Index T = theta.rows();
  const Index d = theta.cols();
  ProxSpectrum out;
  if (T >= 4 * d) {
    const Matrix gram = theta.transpose() * theta;
    Eigen::SelfAdjointEigenSolver<Matrix> es(gram);
    Matrix v(d, d);
    Vector sv(d);
    for (Index i = 0; i < d; ++i) {
      v.col(i) = es.eigenvectors().col(d - 1 - i);
      sv(i) = std::sqrt(std::max(es.eigenvalues()(d - 1 - i), 0.0));
    }
    Vector factor = Vector::Zero(d);
    Vector soft = Vector::Zero(d);
    for (Index i = 0; i < d; ++i) {
      soft(i) = std::max(sv(i) - tau, 0.0);
      factor(i) = sv(i) > 0.0 ? soft(i) / sv(i) : 0.0;
    }
    theta = (theta * v) * factor.asDiagonal() * v.transpose();
    out.values = soft;
    out.right = v;
    return out;
  }
  Eigen::BDCSVD<Matrix> svd(theta, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Vector soft = (svd.singularValues().array() - tau).cwiseMax(0.0).matrix();
  theta = svd.matrixU() * soft.asDiagonal() * svd.matrixV().transpose();
  out.values = soft;
  out.right = svd.matrixV();
  return out;
}

}  // namespace

FitResult nuc_fit(const MultiTaskDataset& data, const BaselineConfig& cfg) {
  validate_common(data, cfg);
  double reg = 0.0;
  if (cfg.reg_coeff) {
    reg = *cfg.reg_coeff;
  } else if (cfg.noise_sd && *cfg.noise_sd > 0.0) {
    reg = nuc_default_reg(*cfg.noise_sd, data.dim(), data.min_samples(), data.task_count());
  } else {
    throw std::invalid_argument("nuc_fit: need reg_coeff or a positive noise_sd");
  }
  if (!(reg > 0.0)) throw std::invalid_argument("nuc_fit: penalty weight must be > 0");

  const Index T = data.task_count();
  const Index d = data.dim();
  const double n = static_cast<double>(data.total_samples());

  // Smoothness of L/(2N) is the largest per-task design Gram norm over N.
  double lipschitz = 0.0;
  for (const TaskData& task : data.tasks) {
    const double smax = linalg::spectral_norm(task.design);
    lipschitz = std::max(lipschitz, smax * smax / n);
  }
  const double step = 1.0 / lipschitz;
  const double tau = reg * step;

  StreamRng init = StreamRng(cfg.seed).stream("init");
  Matrix theta = gaussian_matrix(init, T, d);
  ProxSpectrum spectrum;
  {
    Matrix probe = theta;
    spectrum = nuclear_prox(probe, 0.0);  // spectrum of the raw start
  }
  FitResult result(Coefficients(theta),
                   Subspace(spectrum.right.leftCols(cfg.rank).transpose()));

  const auto t0 = Clock::now();
  for (int k = 1; k <= cfg.max_iters; ++k) {
    Matrix stepped(T, d);
    for (Index t = 0; t < T; ++t) {
      const TaskData& task = data.tasks[static_cast<std::size_t>(t)];
      const Vector resid = task.design * theta.row(t).transpose() - task.response;
      stepped.row(t) =
          theta.row(t) - (step / n) * (task.design.transpose() * resid).transpose();
    }
    if (!stepped.allFinite()) throw DivergenceError(k, std::move(result));
    spectrum = nuclear_prox(stepped, tau);
    const double change = (stepped - theta).norm();
    const double prev_norm = theta.norm();
    if (!std::isfinite(change)) throw DivergenceError(k, std::move(result));
    theta = stepped;

    // The right factor is orthonormal even where the thresholded spectrum
    // hits zero; a short spectrum only means the leading frame is arbitrary.
    const bool rank_short = !(spectrum.values(cfg.rank - 1) > 0.0);
    result.coefficients = Coefficients(theta);
    result.subspace = Subspace(spectrum.right.leftCols(cfg.rank).transpose());
    result.degenerate = rank_short;
    result.trace.push_back(make_trace_row(data, result.coefficients, result.subspace,
                                          cfg.trace_against, k, t0));
    if (change <= cfg.rel_tol * std::max(prev_norm, 1e-30)) break;
  }
  return result;
}

}  // namespace msp
