#pragma once

#include "msp/types.hpp"

namespace msp::linalg {

/// Top-s singular triplets, singular values nonincreasing.
struct TruncatedSvd {
  Matrix left;            // rows(M) x s, orthonormal columns
  Vector singular_values; // s, nonincreasing, >= 0
  Matrix right;           // cols(M) x s, orthonormal columns
};

/// Top-s singular triplets of a dense matrix. s must lie in
/// [1, min(rows, cols)]; non-finite input is rejected.
TruncatedSvd truncated_svd(const Matrix& m, Index s);

/// Row-orthonormal basis with the same row span as the input. Requires
/// rows <= cols and numerically full row rank
/// (smallest singular value > 1e-12 * largest).
Matrix orthonormalize_rows(const Matrix& m);

/// Largest singular value.
double spectral_norm(const Matrix& m);

/// Moore-Penrose pseudo-inverse; singular values <= 1e-12 * sigma_max are
/// treated as zero.
Matrix pseudo_inverse(const Matrix& m);

/// Row-orthonormal s x d basis whose leading rows span the row space of m.
/// When rank(m) < s the basis is completed with canonical directions and the
/// degenerate flag is set.
struct CompletedBasis {
  Matrix basis;
  bool degenerate = false;
};
CompletedBasis orthonormal_rows_completed(const Matrix& m, Index s);

}  // namespace msp::linalg
