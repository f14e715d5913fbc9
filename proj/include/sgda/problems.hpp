#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sgda/problem.hpp"

namespace sgda {

/// f(x) = 1/2 x^T A x + b^T x + c with symmetric A.
struct QuadraticMap {
  Matrix A;
  Vector b;
  double c = 0.0;

  double value(const Vector& x) const { return 0.5 * x.dot(A * x) + b.dot(x) + c; }
  Vector gradient(const Vector& x) const { return A * x + b; }
};

/// Generic smooth component with its gradient.
struct SmoothMap {
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> gradient;
};

/// Known KKT point of a finite-max instance.
struct ReferenceSolution {
  Vector x;
  Vector y;
  double value = 0.0;  ///< min-max value max_i f_i(x)
};

/// min_x max_{y in simplex} sum_i y_i f_i(x), i.e. min_x max_i f_i(x).
class FiniteMaxProblem {
 public:
  FiniteMaxProblem(std::string id, std::vector<SmoothMap> components, FeasibleSet X,
                   Region region, double L);
  /// Quadratic components; L is certified over `region` when not supplied.
  FiniteMaxProblem(std::string id, std::vector<QuadraticMap> components, FeasibleSet X,
                   Region region, std::optional<double> L = std::nullopt);

  const MinMaxProblem& problem() const { return problem_; }
  operator const MinMaxProblem&() const { return problem_; }

  Index n() const { return problem_.n; }
  Index m() const { return problem_.m; }
  double lipschitz_L() const { return problem_.lipschitz_L; }

  /// F(x) = (f_1(x), ..., f_m(x)).
  Vector values(const Vector& x) const;
  /// Rows are grad f_i(x)^T.
  Matrix jacobian(const Vector& x) const;
  /// psi(x) = max_i f_i(x).
  double psi(const Vector& x) const;

  /// Quadratic data when the instance was built from quadratic maps.
  const std::optional<std::vector<QuadraticMap>>& quadratics() const { return quadratics_; }

  std::optional<ReferenceSolution> reference;
  std::optional<std::uint64_t> seed;
  std::optional<Vector> default_x0;

  /// Adds contiguous primal blocks of (nearly) equal size; X must be a product set.
  void set_blocks(int count);
  void set_lower_bound(double value) { problem_.lower_bound = value; }

 private:
  void build(std::string id, FeasibleSet X, Region region, double L);

  std::shared_ptr<const std::vector<SmoothMap>> components_;
  std::optional<std::vector<QuadraticMap>> quadratics_;
  MinMaxProblem problem_;
};

/// Lipschitz constant of (grad_x f, grad_y f) for f = sum_i y_i f_i with
/// quadratic f_i, y in the simplex, x in `region`:
/// max_i ||A_i||_2 + max_i sup_region ||A_i x + b_i||.
double certify_lipschitz(const std::vector<QuadraticMap>& components, const Region& region);

/// f(x, y) = x^T A y + b^T x + d^T y with L = ||A||_2.
MinMaxProblem make_bilinear(const Matrix& A, const Vector& b, const Vector& d, FeasibleSet X,
                            FeasibleSet Y, std::optional<Region> region = std::nullopt);

/// f = 0 in the given dimensions (L is set to 1).
MinMaxProblem make_zero_problem(Index n, Index m);

/// Parameters of the seeded finite-max quadratic generator.
///
/// Component i is f_i(x) = 1/2 (x - a_i)^T A_i (x - a_i) + s_i with
/// A_i = Q diag(lambda) Q^T, Q a random orthogonal matrix, lambda uniform in
/// [eig_lo, eig_hi] (component 0 uses [anchor_eig, eig_hi] so that
/// max_i f_i is coercive), centers a_i uniform in [-center_scale, center_scale]
/// and offsets s_i uniform in [0, offset_scale].
struct FiniteMaxSpec {
  double eig_lo = -0.5;
  double eig_hi = 2.0;
  double anchor_eig = 0.5;
  double center_scale = 0.5;
  double offset_scale = 1.0;
  double region_radius = 3.0;
  double x0_scale = 1.0;
  bool strict_complementarity = false;
  double min_gap = 0.1;
  int max_attempts = 100;
};

FiniteMaxProblem make_finite_max_quadratic(Index n, Index m, std::uint64_t seed,
                                           const FiniteMaxSpec& spec = {});

/// Parametric model Psi(x, xi) with its x-gradient.
struct RegressionModel {
  std::function<double(const Vector& x, const Vector& xi)> value;
  std::function<Vector(const Vector& x, const Vector& xi)> gradient;
};

/// f_i(x) = 1/2 (l_i - Psi(x, xi_i))^2 over the simplex of sample weights.
/// Rows of `features` are the xi_i. A linear model (Psi = xi^T x) is used when
/// `model` is empty; a supplied model needs `L` and must pass a gradient check.
FiniteMaxProblem make_robust_regression(const Matrix& features, const Vector& labels,
                                        Region region,
                                        std::optional<RegressionModel> model = std::nullopt,
                                        std::optional<double> L = std::nullopt);

/// Hand-solved scalar instances: {(x-1)^2, (x+1)^2} and the same pair plus x^2 + 10.
FiniteMaxProblem make_hand_two_component();
FiniteMaxProblem make_hand_three_component();
/// f_1 = f_2 = x^2: strict complementarity fails at (0, (1, 0)).
FiniteMaxProblem make_degenerate_pair();

struct KKTReport {
  double grad_residual = 0.0;
  double feasibility = 0.0;
  double mu = 0.0;
  Vector nu;
  double complementarity = 0.0;
  std::vector<Index> active_set;
  std::vector<Index> support;

  double level() const { return std::max({grad_residual, feasibility, complementarity}); }
  bool approximate_kkt(double tol) const { return level() <= tol; }
};

inline constexpr double kTieTol = 1e-6;
inline constexpr double kSupportTol = 1e-8;

KKTReport kkt_residual(const FiniteMaxProblem& problem, const Vector& x, const Vector& y,
                       double tie_tol = kTieTol, double support_tol = kSupportTol);

/// Minimum multiplier nu_i over indices outside the support of y; +inf when
/// y has full support. Throws PreconditionError if (x, y) is not a KKT pair
/// at level `tol`.
double check_strict_complementarity(const FiniteMaxProblem& problem, const Vector& x,
                                    const Vector& y, double tol);

/// Smallest singular value of M(x), whose rows are [grad f_i(x)^T, 1] for the
/// near-maximal indices i.
double check_regularity(const FiniteMaxProblem& problem, const Vector& x, double tie_tol = kTieTol);

/// High-accuracy KKT point reached from x0: smoothed max minimization by
/// continuation, then Newton on the KKT system of the detected active set.
std::optional<ReferenceSolution> solve_finite_max_reference(const FiniteMaxProblem& problem,
                                                            const Vector& x0,
                                                            double kkt_tol = 1e-9);

}  // namespace sgda
