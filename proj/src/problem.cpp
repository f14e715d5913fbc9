#include "sgda/problem.hpp"

#include <cmath>
#include <string>

namespace sgda {

void MinMaxProblem::validate() const {
  if (n < 1 || m < 1) throw ConfigError("problem '" + id + "': dimensions must be positive");
  if (!eval_f || !grad_x || !grad_y) throw ConfigError("problem '" + id + "': missing oracle");
  if (X.dimension() != n) throw ConfigError("problem '" + id + "': X dimension != n");
  if (Y.dimension() != m) throw ConfigError("problem '" + id + "': Y dimension != m");
  if (!(lipschitz_L > 0) || !std::isfinite(lipschitz_L))
    throw ConfigError("problem '" + id + "': lipschitz_L must be positive and finite");
  if (operating_region.lo.size() != n || operating_region.hi.size() != n)
    throw ConfigError("problem '" + id + "': operating region dimension != n");
  if ((operating_region.lo.array() > operating_region.hi.array()).any())
    throw ConfigError("problem '" + id + "': operating region has lo > hi");
  if (blocks) {
    if (blocks->empty()) throw ConfigError("problem '" + id + "': empty block list");
    Index next = 0;
    for (const auto& b : *blocks) {
      if (b.start != next || b.size < 1)
        throw ConfigError("problem '" + id + "': blocks must be contiguous, disjoint and cover [0, n)");
      next += b.size;
    }
    if (next != n) throw ConfigError("problem '" + id + "': blocks do not cover [0, n)");
    if (blocks->size() > 1 && !X.is_coordinate_product())
      throw ConfigError("problem '" + id + "': block structure requires a product set X");
  }
}

namespace {

void require_finite_oracle(const Vector& g, const char* which, Index offset) {
  for (Index i = 0; i < g.size(); ++i) {
    if (!std::isfinite(g(i)))
      throw OracleError(std::string(which) + " returned non-finite value at coordinate " +
                            std::to_string(i),
                        offset + i);
  }
}

}  // namespace

double check_gradients(const MinMaxProblem& problem, const Vector& x, const Vector& y, double h) {
  if (!(h >= 1e-8 && h <= 1e-3)) throw DomainError("check_gradients: step h outside [1e-8, 1e-3]");
  if (x.size() != problem.n || y.size() != problem.m)
    throw DomainError("check_gradients: dimension mismatch");
  if (!problem.operating_region.contains(x, 1e-12))
    throw DomainError("check_gradients: x outside the operating region");

  const Vector gx = problem.grad_x(x, y);
  const Vector gy = problem.grad_y(x, y);
  require_finite_oracle(gx, "grad_x", 0);
  require_finite_oracle(gy, "grad_y", problem.n);

  double worst = 0.0;
  auto central = [&](Vector& v, Index i, Index coordinate, bool primal) {
    const double saved = v(i);
    v(i) = saved + h;
    const double fp = primal ? problem.eval_f(v, y) : problem.eval_f(x, v);
    v(i) = saved - h;
    const double fm = primal ? problem.eval_f(v, y) : problem.eval_f(x, v);
    v(i) = saved;
    if (!std::isfinite(fp) || !std::isfinite(fm))
      throw OracleError("eval_f returned non-finite value perturbing coordinate " +
                            std::to_string(coordinate),
                        coordinate);
    return (fp - fm) / (2.0 * h);
  };

  Vector xp = x;
  for (Index i = 0; i < problem.n; ++i) {
    const double fd = central(xp, i, i, true);
    worst = std::max(worst, std::abs(gx(i) - fd) / std::max(1.0, std::abs(gx(i))));
  }
  Vector yp = y;
  for (Index j = 0; j < problem.m; ++j) {
    const double fd = central(yp, j, problem.n + j, false);
    worst = std::max(worst, std::abs(gy(j) - fd) / std::max(1.0, std::abs(gy(j))));
  }
  return worst;
}

Vector sample_region(const MinMaxProblem& problem, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Vector x(problem.n);
  for (Index i = 0; i < problem.n; ++i) {
    double lo = problem.operating_region.lo(i);
    double hi = problem.operating_region.hi(i);
    if (!std::isfinite(lo)) lo = -1.0;
    if (!std::isfinite(hi)) hi = 1.0;
    x(i) = lo + (hi - lo) * unit(rng);
  }
  return problem.proj_X(x);
}

Vector sample_dual(const MinMaxProblem& problem, std::mt19937_64& rng) {
  const auto& set = problem.Y.variant();
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector y(problem.m);
  if (std::holds_alternative<FeasibleSet::Simplex>(set)) {
    std::exponential_distribution<double> expo(1.0);
    for (Index j = 0; j < problem.m; ++j) y(j) = expo(rng);
    return y / y.sum();
  }
  if (const auto* box = std::get_if<FeasibleSet::Box>(&set)) {
    for (Index j = 0; j < problem.m; ++j) y(j) = box->lo(j) + (box->hi(j) - box->lo(j)) * unit(rng);
    return y;
  }
  if (const auto* ball = std::get_if<FeasibleSet::Ball>(&set)) {
    for (Index j = 0; j < problem.m; ++j) y(j) = normal(rng);
    const double r = ball->radius * std::pow(unit(rng), 1.0 / static_cast<double>(problem.m));
    return ball->center + r * y / std::max(y.norm(), 1e-300);
  }
  for (Index j = 0; j < problem.m; ++j) y(j) = normal(rng);
  return y;
}

double sample_lipschitz_ratio(const MinMaxProblem& problem, int samples, unsigned seed) {
  std::mt19937_64 rng(seed);
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    const Vector x1 = sample_region(problem, rng);
    const Vector x2 = sample_region(problem, rng);
    const Vector y = sample_dual(problem, rng);
    const double dist = (x1 - x2).norm();
    if (dist == 0.0) continue;
    worst = std::max(worst, (problem.grad_x(x1, y) - problem.grad_x(x2, y)).norm() / dist);
  }
  return worst;
}

}  // namespace sgda
