#include "msp/linalg.hpp"

#include <Eigen/SVD>

#include <algorithm>

namespace msp::linalg {

namespace {
constexpr double kRankTol = 1e-12;  // relative singular-value cutoff
}

TruncatedSvd truncated_svd(const Matrix& m, Index s) {
  require_finite(m, "truncated_svd");
  const Index r = std::min(m.rows(), m.cols());
  if (s < 1 || s > r)
    throw std::invalid_argument("truncated_svd: need 1 <= s <= min(rows, cols)");
  Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  TruncatedSvd out;
  out.left = svd.matrixU().leftCols(s);
  out.singular_values = svd.singularValues().head(s);
  out.right = svd.matrixV().leftCols(s);
  return out;
}

Matrix orthonormalize_rows(const Matrix& m) {
  require_finite(m, "orthonormalize_rows");
  if (m.rows() < 1 || m.rows() > m.cols())
    throw std::invalid_argument("orthonormalize_rows: need 1 <= rows <= cols");
  Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeThinV);
  const Vector& sv = svd.singularValues();
  if (!(sv(0) > 0.0) || sv(m.rows() - 1) <= kRankTol * sv(0))
    throw DegeneracyError("orthonormalize_rows: numerically rank-deficient input");
  return svd.matrixV().transpose();
}

double spectral_norm(const Matrix& m) {
  require_finite(m, "spectral_norm");
  Eigen::BDCSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

Matrix pseudo_inverse(const Matrix& m) {
  require_finite(m, "pseudo_inverse");
  Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& sv = svd.singularValues();
  const double cutoff = kRankTol * (sv.size() > 0 ? sv(0) : 0.0);
  Vector inv = Vector::Zero(sv.size());
  for (Index i = 0; i < sv.size(); ++i)
    if (sv(i) > cutoff && sv(i) > 0.0) inv(i) = 1.0 / sv(i);
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

CompletedBasis orthonormal_rows_completed(const Matrix& m, Index s) {
  require_finite(m, "orthonormal_rows_completed");
  const Index d = m.cols();
  if (s < 1 || s > d)
    throw std::invalid_argument("orthonormal_rows_completed: need 1 <= s <= cols");
  Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeThinV);
  const Vector& sv = svd.singularValues();
  const double cutoff = (sv.size() > 0 ? sv(0) : 0.0) * kRankTol;
  Index r = 0;
  while (r < std::min<Index>(s, sv.size()) && sv(r) > cutoff && sv(r) > 0.0) ++r;

  CompletedBasis out;
  out.basis = Matrix::Zero(s, d);
  if (r > 0) out.basis.topRows(r) = svd.matrixV().leftCols(r).transpose();
  out.degenerate = r < s;

  // Fill missing rows with the canonical direction farthest from the span.
  for (Index k = r; k < s; ++k) {
    Index best = 0;
    double best_norm = -1.0;
    Vector best_res;
    for (Index j = 0; j < d; ++j) {
      Vector e = Vector::Zero(d);
      e(j) = 1.0;
      Vector res = e - out.basis.topRows(k).transpose() * (out.basis.topRows(k) * e);
      const double n = res.norm();
      if (n > best_norm) {
        best_norm = n;
        best_res = res;
        best = j;
      }
    }
    (void)best;
    out.basis.row(k) = (best_res / best_norm).transpose();
  }
  return out;
}

}  // namespace msp::linalg
