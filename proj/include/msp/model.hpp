#pragma once

#include "msp/types.hpp"

namespace msp {

/// Block-diagonal application of the per-task designs: concatenates
/// X_t * theta_t over tasks into one vector of length sum(m_t).
Vector apply_operator(const MultiTaskDataset& data, const Coefficients& theta);

/// Squared residual sum over all tasks and samples.
double loss(const MultiTaskDataset& data, const Coefficients& theta);

/// theta = weights * basis.
Coefficients compose(const FactoredCoefficients& factored);

}  // namespace msp
