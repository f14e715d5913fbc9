#pragma once

#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "sgda/projections.hpp"
#include "sgda/types.hpp"

namespace sgda {

/// Axis-aligned box in primal space over which the Lipschitz constant holds.
struct Region {
  Vector lo, hi;

  static Region cube(Index n, double radius) {
    return {Vector::Constant(n, -radius), Vector::Constant(n, radius)};
  }
  static Region unbounded(Index n) {
    const double inf = std::numeric_limits<double>::infinity();
    return {Vector::Constant(n, -inf), Vector::Constant(n, inf)};
  }
  bool contains(const Vector& x, double slack = 0.0) const {
    return (x.array() >= lo.array() - slack).all() && (x.array() <= hi.array() + slack).all();
  }
  bool bounded() const { return lo.allFinite() && hi.allFinite(); }
  Vector center() const { return 0.5 * (lo + hi); }
  /// Euclidean half-diagonal.
  double radius() const { return 0.5 * (hi - lo).norm(); }
};

/// Contiguous index range [start, start + size) of the primal variable.
struct BlockRange {
  Index start = 0;
  Index size = 0;
};

/// Oracle bundle for min_x max_y f(x, y) over X x Y.
///
/// Objects are immutable after construction; all oracles must be pure.
struct MinMaxProblem {
  using Objective = std::function<double(const Vector&, const Vector&)>;
  using Gradient = std::function<Vector(const Vector&, const Vector&)>;

  std::string id;
  Index n = 0;
  Index m = 0;
  Objective eval_f;
  Gradient grad_x;
  Gradient grad_y;
  FeasibleSet X;
  FeasibleSet Y;
  double lipschitz_L = 1.0;
  Region operating_region;
  std::optional<std::vector<BlockRange>> blocks;
  std::optional<double> lower_bound;
  /// psi(x) = max_y f(x, y) when available in closed form.
  std::function<double(const Vector&)> psi;

  Vector proj_X(const Vector& x) const { return X.project(x); }
  Vector proj_Y(const Vector& y) const { return Y.project(y); }
  /// D(Y); +inf when Y is unbounded.
  double diameter_Y() const { return Y.diameter(); }
  Index block_count() const { return blocks ? static_cast<Index>(blocks->size()) : 1; }

  /// Throws ConfigError when dimensions, blocks or constants are inconsistent.
  void validate() const;
};

/// Max relative deviation between the analytic gradients and central
/// differences of eval_f with step h, over every coordinate of x and y.
/// Deviation is |g - fd| / max(1, |g|).
double check_gradients(const MinMaxProblem& problem, const Vector& x, const Vector& y, double h);

/// Largest ratio ||grad_x(x,y) - grad_x(x',y)|| / ||x - x'|| over `samples`
/// random pairs x, x' drawn from the operating region (clipped to X) and
/// y drawn from Y.
double sample_lipschitz_ratio(const MinMaxProblem& problem, int samples, unsigned seed);

/// Uniform sample from the operating region (whole-space dims use [-1, 1]).
Vector sample_region(const MinMaxProblem& problem, std::mt19937_64& rng);
/// Feasible dual sample.
Vector sample_dual(const MinMaxProblem& problem, std::mt19937_64& rng);

}  // namespace sgda
