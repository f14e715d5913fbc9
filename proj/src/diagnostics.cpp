#include "sgda/diagnostics.hpp"

#include <cmath>
#include <string>

namespace sgda {

Constants constants(double L, double p, double c, double alpha, int N) {
  if (!(L > 0)) throw ParameterError("constants: L must be positive");
  if (!(p > L)) throw ParameterError("constants: p must exceed L");
  if (!(c > 0) || !(alpha > 0)) throw ParameterError("constants: c and alpha must be positive");
  if (N < 1) throw ParameterError("constants: N must be at least 1");
  Constants k{};
  const double gap = c * (p - L);
  k.sigma1 = p / (p - L);
  k.sigma2 = 2.0 * (p + L) / (p - L);
  k.sigma3 = (1.0 + gap) / gap;
  k.sigma3_multi = (gap + 1.0 + c * (L + p) * std::pow(static_cast<double>(N), 1.5)) / gap;
  k.L_d = L + L * k.sigma2;
  k.kappa = alpha * L * (N > 1 ? k.sigma3_multi : k.sigma3);
  k.lambda_bar = (2.0 + k.kappa) * (L + 1.0 / alpha) + p + 1.0 / (2.0 * c);
  return k;
}

Vector solve_x_of_yz(const MinMaxProblem& problem, const Vector& y, const Vector& z, double p,
                     double tol, const Vector* warm) {
  const double L = problem.lipschitz_L;
  // p = L is accepted: K is then only guaranteed convex, and the cap guards the loop.
  if (!(p >= L)) throw ParameterError("solve_x_of_yz: p below L, K(., z; y) may be nonconvex");
  const double curvature = L + p;
  const double step = 1.0 / curvature;
  Vector x = problem.proj_X(warm ? *warm : z);
  double residual = std::numeric_limits<double>::infinity();
  for (long k = 0; k < kInnerIterationCap; ++k) {
    const Vector g = problem.grad_x(x, y) + p * (x - z);
    Vector next = problem.proj_X(x - step * g);
    residual = curvature * (x - next).norm();
    if (!std::isfinite(residual)) throw DivergenceError("solve_x_of_yz: non-finite inner iterate");
    if (residual <= tol) return next;
    x = std::move(next);
  }
  throw ConvergenceError("solve_x_of_yz: iteration cap exceeded", residual);
}

Vector y_plus(const MinMaxProblem& problem, const Vector& y, const Vector& z, double p,
              double alpha, double tol) {
  const Vector x = solve_x_of_yz(problem, y, z, p, tol);
  return problem.proj_Y(y + alpha * problem.grad_y(x, y));
}

DualValue dual_value(const MinMaxProblem& problem, const Vector& y, const Vector& z, double p,
                     double tol) {
  Vector x = solve_x_of_yz(problem, y, z, p, tol);
  const double L = problem.lipschitz_L;
  const double value = problem.eval_f(x, y) + 0.5 * p * (x - z).squaredNorm();
  const double accuracy = (L + p) / (2.0 * (p - L) * (p - L)) * tol * tol;
  return {value, accuracy, std::move(x)};
}

ProxValue prox_value(const MinMaxProblem& problem, const Vector& z, double p, double tol,
                     const Vector* warm_y) {
  if (!problem.Y.bounded())
    throw ConfigError("prox_value: unsupported configuration, Y must be compact");
  const double L = problem.lipschitz_L;
  if (!(p > L)) throw ParameterError("prox_value: p must exceed L");
  const double L_d = L + L * 2.0 * (p + L) / (p - L);
  const double step = 1.0 / L_d;
  const double inner_tol = tol / 10.0;

  Vector y = warm_y ? problem.proj_Y(*warm_y) : problem.proj_Y(Vector::Zero(problem.m));
  Vector x = solve_x_of_yz(problem, y, z, p, inner_tol);
  double moved = std::numeric_limits<double>::infinity();
  for (long k = 0; k < kInnerIterationCap; ++k) {
    Vector next = problem.proj_Y(y + step * problem.grad_y(x, y));
    moved = (next - y).norm();
    y = std::move(next);
    x = solve_x_of_yz(problem, y, z, p, inner_tol, &x);
    if (moved <= tol) {
      const double P = problem.eval_f(x, y) + 0.5 * p * (x - z).squaredNorm();
      return {P, std::move(x), std::move(y), tol, k + 1};
    }
  }
  throw ConvergenceError("prox_value: iteration cap exceeded", moved);
}

PotentialRecord potential(const MinMaxProblem& problem, const SolverState& state, double p,
                          double tol) {
  PotentialRecord rec{};
  rec.inner_tol = tol;
  rec.K_value = problem.eval_f(state.x, state.y) + 0.5 * p * (state.x - state.z).squaredNorm();
  rec.d_value = dual_value(problem, state.y, state.z, p, tol).value;
  rec.P_value = prox_value(problem, state.z, p, tol).P;
  rec.phi = rec.K_value - 2.0 * rec.d_value + 2.0 * rec.P_value;
  return rec;
}

Residuals residual_exact(const MinMaxProblem& problem, const SolverState& prev,
                         const SolverState& next, double p, double alpha, double tol) {
  if (next.t != prev.t + 1) throw UsageError("residual_exact: states are not adjacent");
  Residuals r;
  r.kind = ResidualKind::exact;
  r.rx = (prev.x - next.x).norm();
  r.ry = (prev.y - y_plus(problem, prev.y, prev.z, p, alpha, tol)).norm();
  r.rz = (next.x - prev.z).norm();
  return r;
}

DecreaseReport check_sufficient_decrease(const IterateTrace& trace, const SolverParams& params) {
  bool any_phi = false;
  for (const auto& rec : trace.records) any_phi = any_phi || rec.phi.has_value();
  if (!any_phi) throw UsageError("check_sufficient_decrease: trace carries no potential values");

  DecreaseReport report;
  for (std::size_t i = 0; i + 1 < trace.records.size(); ++i) {
    const auto& cur = trace.records[i];
    const auto& nxt = trace.records[i + 1];
    if (nxt.t != cur.t + 1 || !cur.phi || !nxt.phi) continue;
    if (cur.ry_kind != ResidualKind::exact || !cur.rz)
      throw UsageError("check_sufficient_decrease: record t=" + std::to_string(cur.t) +
                       " lacks exact residuals");
    const double required = cur.rx * cur.rx / (16.0 * params.c) +
                            cur.ry * cur.ry / (16.0 * params.alpha) +
                            params.p * params.beta * (*cur.rz) * (*cur.rz) / 16.0;
    const double margin = (*cur.phi - *nxt.phi) - required;
    report.t.push_back(cur.t);
    report.margins.push_back(margin);
    report.min_margin = std::min(report.min_margin, margin);
  }
  return report;
}

ErrorBoundProbe error_bound_ratio(const MinMaxProblem& problem, const Vector& y, const Vector& z,
                                  double p, double alpha, double tol) {
  const double L = problem.lipschitz_L;
  const Vector yp = y_plus(problem, y, z, p, alpha, tol);
  const Vector x_at_yp = solve_x_of_yz(problem, yp, z, p, tol);
  const ProxValue prox = prox_value(problem, z, p, tol, &yp);

  ErrorBoundProbe probe{};
  probe.lhs = (x_at_yp - prox.x_star).norm();
  probe.rhs = (y - yp).norm();
  if (probe.lhs <= tol && probe.rhs <= tol) {
    probe.ratio = 0.0;
  } else if (probe.rhs == 0.0) {
    probe.ratio = std::numeric_limits<double>::infinity();
  } else {
    probe.ratio = probe.lhs / probe.rhs;
  }
  const double sigma2 = 2.0 * (p + L) / (p - L);
  probe.weak_lhs = alpha * (p - L) * probe.lhs * probe.lhs;
  probe.weak_rhs = (1.0 + alpha * L + alpha * L * sigma2) * probe.rhs * problem.diameter_Y();
  probe.weak_holds = probe.weak_lhs <= probe.weak_rhs + 1e-8;
  return probe;
}

double fit_rate(const std::vector<std::pair<double, double>>& points, double t_lo, double t_hi) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t count = 0;
  for (const auto& [t, r] : points) {
    if (t < t_lo || t > t_hi || !(t > 0) || !(r > 0) || !std::isfinite(r)) continue;
    const double lx = std::log(t);
    const double ly = std::log(r);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++count;
  }
  if (count < 10)
    throw InsufficientDataError("fit_rate: only " + std::to_string(count) +
                                " usable points in window");
  const double nn = static_cast<double>(count);
  const double denom = nn * sxx - sx * sx;
  if (!(denom > 0)) throw InsufficientDataError("fit_rate: degenerate window");
  return (nn * sxy - sx * sy) / denom;
}

std::vector<std::pair<double, double>> best_so_far(const IterateTrace& trace) {
  std::vector<std::pair<double, double>> out;
  out.reserve(trace.records.size());
  double best = std::numeric_limits<double>::infinity();
  for (const auto& rec : trace.records) {
    best = std::min(best, rec.residual);
    // Record t describes transition t -> t+1, i.e. t+1 completed iterations.
    out.emplace_back(static_cast<double>(rec.t + 1), best);
  }
  return out;
}

double fit_rate(const IterateTrace& trace, double t_lo, double t_hi) {
  return fit_rate(best_so_far(trace), t_lo, t_hi);
}

}  // namespace sgda
