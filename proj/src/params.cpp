#include "sgda/params.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sgda/types.hpp"

namespace sgda {

ParamBounds param_bounds(double L, double p, double c, int N) {
  const double gap = c * (p - L);
  double denom = 1.0 + gap;
  if (N > 1) denom += c * (p + L) * std::pow(static_cast<double>(N), 1.5);
  const double alpha_max = std::min(1.0 / (11.0 * L), c * c * (p - L) * (p - L) / (4.0 * L * denom * denom));
  const double beta_max = std::min(1.0 / 36.0, (p - L) * (p - L) / (384.0 * p * (p + L) * (p + L)));
  return {alpha_max, beta_max};
}

std::string compliance_violation(const SolverParams& params, double L) {
  std::ostringstream why;
  if (!(L > 0)) return "L must be positive";
  if (!(params.p > 3.0 * L)) {
    why << "p=" << params.p << " must exceed 3L=" << 3.0 * L;
    return why.str();
  }
  if (!(params.c > 0 && params.c < 1.0 / (params.p + L))) {
    why << "c=" << params.c << " must lie in (0, 1/(p+L)=" << 1.0 / (params.p + L) << ")";
    return why.str();
  }
  const ParamBounds b = param_bounds(L, params.p, params.c, params.N);
  const bool alpha_ok = params.N > 1 ? params.alpha <= b.alpha_max : params.alpha < b.alpha_max;
  if (!(params.alpha > 0) || !alpha_ok) {
    why << "alpha=" << params.alpha << " violates bound " << b.alpha_max;
    return why.str();
  }
  if (!(params.beta > 0 && params.beta <= b.beta_max)) {
    why << "beta=" << params.beta << " violates bound " << b.beta_max;
    return why.str();
  }
  return {};
}

bool theory_compliant(const SolverParams& params, double L) {
  return compliance_violation(params, L).empty();
}

SolverParams derive_params(double L, int N, double safety, std::optional<long> horizon_T) {
  if (!(L > 0) || !std::isfinite(L)) throw ParameterError("derive_params: L must be positive");
  if (N < 1) throw ParameterError("derive_params: N must be at least 1");
  if (!(safety > 0 && safety < 1)) throw ParameterError("derive_params: safety must lie in (0, 1)");
  SolverParams params;
  params.N = N;
  params.p = 4.0 * L;
  params.c = 1.0 / (2.0 * (params.p + L));
  const ParamBounds b = param_bounds(L, params.p, params.c, N);
  params.alpha = safety * b.alpha_max;
  params.beta = safety * b.beta_max;
  if (horizon_T) {
    if (*horizon_T < 1) throw ParameterError("derive_params: horizon T must be positive");
    params.beta = std::min(params.beta, 0.99 / std::sqrt(static_cast<double>(*horizon_T)));
  }
  return params;
}

}  // namespace sgda
