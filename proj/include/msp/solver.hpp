#pragma once

#include "msp/types.hpp"

#include <optional>
#include <vector>

namespace msp {

/// One iteration of any solver's trajectory. dist1/dist2 are present only
/// when the fit was given a ground truth to trace against.
struct IterationTrace {
  int iter = 0;
  double loss = 0.0;
  std::optional<double> dist1;
  std::optional<double> dist2;
  double elapsed_seconds = 0.0;
};

/// Whether the configured step size is covered by the solver's recovery
/// guarantee, using the closed-form isometry-constant bound as plug-in.
struct StepCertificate {
  double step_size = 0.0;
  double delta_bound = 0.0;   // plug-in bound on the rank-3s isometry constant
  double min_step = 0.0;      // smallest certified step, when delta_bound < 1
  bool within_unit = false;   // step <= 1
  bool certified = false;
};

struct FitResult {
  Coefficients coefficients;
  Subspace subspace;
  std::vector<IterationTrace> trace;
  bool degenerate = false;
  std::optional<StepCertificate> certificate;

  FitResult(Coefficients c, Subspace b) : coefficients(std::move(c)), subspace(std::move(b)) {}
};

/// Thrown when an iterate stops being finite. Carries the last finite
/// iterate so callers can still report partial metrics.
struct DivergenceError : std::runtime_error {
  int iteration;
  std::optional<FitResult> last_finite;

  DivergenceError(int iter, std::optional<FitResult> last);
};

}  // namespace msp
