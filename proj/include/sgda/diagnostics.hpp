#pragma once

#include <limits>
#include <utility>
#include <vector>

#include "sgda/params.hpp"
#include "sgda/problem.hpp"
#include "sgda/trace.hpp"

namespace sgda {

/// Constants of the convergence analysis for a given (L, p, c, alpha, N).
struct Constants {
  double sigma1;        ///< p / (p - L)
  double sigma2;        ///< 2 (p + L) / (p - L)
  double sigma3;        ///< (1 + c (p - L)) / (c (p - L))
  double sigma3_multi;  ///< (c (p - L) + 1 + c (p + L) N^{3/2}) / (c (p - L))
  double L_d;           ///< Lipschitz constant of grad_y d(., z): L + L sigma2
  double kappa;         ///< alpha L sigma3 (sigma3_multi for N > 1)
  double lambda_bar;    ///< (2 + kappa)(L + 1/alpha) + p + 1/(2c)
};

/// Throws ParameterError when p <= L or c, alpha are not positive.
Constants constants(double L, double p, double c, double alpha, int N = 1);
inline Constants constants(double L, const SolverParams& params) {
  return constants(L, params.p, params.c, params.alpha, params.N);
}

/// Default tolerances of the inner solves.
inline constexpr double kInnerTol = 1e-10;
inline constexpr double kProxTol = 1e-8;
inline constexpr long kInnerIterationCap = 1'000'000;

/// x(y, z) = argmin_{x in X} f(x, y) + p/2 ||x - z||^2.
///
/// Projected gradient descent with step 1/(L + p), started at `warm` (or z),
/// stopped once the scaled gradient-mapping norm
/// (L + p) ||x - P_X(x - grad K / (L + p))|| drops below tol. Strong
/// convexity (modulus p - L) then places the returned point within
/// tol / (p - L) of the exact minimizer. Throws ParameterError for p < L.
Vector solve_x_of_yz(const MinMaxProblem& problem, const Vector& y, const Vector& z, double p,
                     double tol, const Vector* warm = nullptr);

/// y_+(z) = P_Y(y + alpha grad_y f(x(y, z), y)).
Vector y_plus(const MinMaxProblem& problem, const Vector& y, const Vector& z, double p,
              double alpha, double tol);

struct DualValue {
  double value;     ///< d(y, z) = min_x K(x, z; y)
  double accuracy;  ///< (L + p) / (2 (p - L)^2) tol^2
  Vector x;         ///< the inner minimizer used
};

DualValue dual_value(const MinMaxProblem& problem, const Vector& y, const Vector& z, double p,
                     double tol);

struct ProxValue {
  double P;       ///< P(z) = min_x max_y K(x, z; y)
  Vector x_star;  ///< x*(z)
  Vector y_star;  ///< maximizer of d(., z)
  double tol;
  long iterations;
};

/// Maximizes the concave d(., z) over a compact Y by projected gradient
/// ascent with step 1/L_d, each gradient evaluated through an inner argmin at
/// tol/10. Stops once the ascent displacement is at most tol.
ProxValue prox_value(const MinMaxProblem& problem, const Vector& z, double p, double tol,
                     const Vector* warm_y = nullptr);

struct PotentialRecord {
  double K_value;
  double d_value;
  double P_value;
  double phi;  ///< K - 2 d + 2 P
  double inner_tol;
};

PotentialRecord potential(const MinMaxProblem& problem, const SolverState& state, double p,
                          double tol);

/// Exact residual triple of the transition prev -> next.
Residuals residual_exact(const MinMaxProblem& problem, const SolverState& prev,
                         const SolverState& next, double p, double alpha, double tol);

struct DecreaseReport {
  std::vector<long> t;          ///< transition index of each margin
  std::vector<double> margins;  ///< (phi_t - phi_{t+1}) - required decrease
  double min_margin = std::numeric_limits<double>::infinity();
};

/// Per-step sufficient-decrease margins along a trace recorded with phi and
/// exact residuals at stride 1. Pairs of non-adjacent records are skipped.
DecreaseReport check_sufficient_decrease(const IterateTrace& trace, const SolverParams& params);

struct ErrorBoundProbe {
  double ratio;      ///< lhs / rhs
  double lhs;        ///< ||x(y_+, z) - x*(z)||
  double rhs;        ///< ||y - y_+||
  double weak_lhs;   ///< alpha (p - L) lhs^2
  double weak_rhs;   ///< (1 + alpha L + alpha L sigma2) rhs D(Y)
  bool weak_holds;   ///< weak_lhs <= weak_rhs + 1e-8
};

ErrorBoundProbe error_bound_ratio(const MinMaxProblem& problem, const Vector& y, const Vector& z,
                                  double p, double alpha, double tol);

/// Least-squares slope of log(r) against log(t) over points with t in
/// [t_lo, t_hi] and r > 0. Throws InsufficientDataError with fewer than 10
/// usable points.
double fit_rate(const std::vector<std::pair<double, double>>& points, double t_lo, double t_hi);

/// fit_rate applied to the best-so-far stopping residual of a trace.
double fit_rate(const IterateTrace& trace, double t_lo, double t_hi);

/// Running minimum of the stopping residual, as (t, best) pairs.
std::vector<std::pair<double, double>> best_so_far(const IterateTrace& trace);

}  // namespace sgda
