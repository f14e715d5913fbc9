#pragma once

#include <optional>
#include <string>

namespace sgda {

/// Step sizes and smoothing parameters of the smoothed GDA family.
struct SolverParams {
  double p = 0.0;      ///< smoothing strength of the proximal term
  double c = 0.0;      ///< primal step
  double alpha = 0.0;  ///< dual step
  double beta = 1.0;   ///< averaging weight of the anchor z, in (0, 1]
  int N = 1;           ///< primal block count

  bool positive() const { return p >= 0 && c >= 0 && alpha >= 0 && beta > 0 && beta <= 1 && N >= 1; }
};

/// Upper bounds the theory places on alpha and beta for a given L, p, c, N.
struct ParamBounds {
  double alpha_max;  ///< strict for N = 1, non-strict for N > 1
  double beta_max;   ///< non-strict
};

ParamBounds param_bounds(double L, double p, double c, int N);

/// Whether params satisfy p > 3L, c < 1/(p+L) and the alpha/beta bounds.
bool theory_compliant(const SolverParams& params, double L);
/// Human-readable reason the params fail theory compliance; empty when compliant.
std::string compliance_violation(const SolverParams& params, double L);

/// Theory-compliant defaults: p = 4L, c = 1/(2(p+L)) and alpha, beta at
/// `safety` times their bounds. When `horizon_T` is given, beta is further
/// capped at 0.99/sqrt(T).
SolverParams derive_params(double L, int N = 1, double safety = 0.99,
                           std::optional<long> horizon_T = std::nullopt);

}  // namespace sgda
