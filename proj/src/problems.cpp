#include "sgda/problems.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include <Eigen/Dense>
#include <Eigen/SVD>

namespace sgda {

namespace {

double spectral_norm(const Matrix& A) {
  if (A.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(A);
  return svd.singularValues()(0);
}

std::vector<SmoothMap> to_smooth(const std::vector<QuadraticMap>& quads) {
  std::vector<SmoothMap> out;
  out.reserve(quads.size());
  for (const auto& q : quads) {
    auto shared = std::make_shared<const QuadraticMap>(q);
    out.push_back({[shared](const Vector& x) { return shared->value(x); },
                   [shared](const Vector& x) { return shared->gradient(x); }});
  }
  return out;
}

}  // namespace

double certify_lipschitz(const std::vector<QuadraticMap>& components, const Region& region) {
  if (!region.bounded()) throw ConfigError("certify_lipschitz: operating region must be bounded");
  const Vector center = region.center();
  const double half_diagonal = region.radius();
  double curvature = 0.0;
  double cross = 0.0;
  for (const auto& q : components) {
    const double norm_A = spectral_norm(q.A);
    curvature = std::max(curvature, norm_A);
    // sup over the box of ||A x + b|| <= ||A c + b|| + ||A|| * half-diagonal.
    const double sup_grad = (q.A * center + q.b).norm() + norm_A * half_diagonal;
    cross = std::max(cross, sup_grad);
  }
  return curvature + cross;
}

FiniteMaxProblem::FiniteMaxProblem(std::string id, std::vector<SmoothMap> components,
                                   FeasibleSet X, Region region, double L)
    : components_(std::make_shared<const std::vector<SmoothMap>>(std::move(components))) {
  build(std::move(id), std::move(X), std::move(region), L);
}

FiniteMaxProblem::FiniteMaxProblem(std::string id, std::vector<QuadraticMap> components,
                                   FeasibleSet X, Region region, std::optional<double> L)
    : components_(std::make_shared<const std::vector<SmoothMap>>(to_smooth(components))),
      quadratics_(std::move(components)) {
  for (const auto& q : *quadratics_) {
    if (q.A.rows() != q.A.cols() || q.A.rows() != q.b.size())
      throw ConfigError("finite-max: inconsistent quadratic dimensions");
    if (!q.A.isApprox(q.A.transpose(), 1e-12))
      throw ConfigError("finite-max: quadratic matrices must be symmetric");
  }
  const double certified = L ? *L : certify_lipschitz(*quadratics_, region);
  build(std::move(id), std::move(X), std::move(region), certified);
}

void FiniteMaxProblem::build(std::string id, FeasibleSet X, Region region, double L) {
  if (components_->empty()) throw ConfigError("finite-max: at least one component required");
  const Index n = X.dimension();
  const Index m = static_cast<Index>(components_->size());
  auto comps = components_;

  problem_.id = std::move(id);
  problem_.n = n;
  problem_.m = m;
  problem_.eval_f = [comps](const Vector& x, const Vector& y) {
    double acc = 0.0;
    for (std::size_t i = 0; i < comps->size(); ++i) acc += y(static_cast<Index>(i)) * (*comps)[i].value(x);
    return acc;
  };
  problem_.grad_x = [comps, n](const Vector& x, const Vector& y) {
    Vector g = Vector::Zero(n);
    for (std::size_t i = 0; i < comps->size(); ++i) g += y(static_cast<Index>(i)) * (*comps)[i].gradient(x);
    return g;
  };
  problem_.grad_y = [comps, m](const Vector& x, const Vector&) {
    Vector F(m);
    for (Index i = 0; i < m; ++i) F(i) = (*comps)[static_cast<std::size_t>(i)].value(x);
    return F;
  };
  problem_.psi = [comps](const Vector& x) {
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& c : *comps) best = std::max(best, c.value(x));
    return best;
  };
  problem_.X = std::move(X);
  problem_.Y = FeasibleSet::simplex(m);
  problem_.lipschitz_L = L;
  problem_.operating_region = std::move(region);
  problem_.validate();
}

Vector FiniteMaxProblem::values(const Vector& x) const {
  return problem_.grad_y(x, Vector::Zero(problem_.m));
}

Matrix FiniteMaxProblem::jacobian(const Vector& x) const {
  Matrix J(problem_.m, problem_.n);
  for (Index i = 0; i < problem_.m; ++i)
    J.row(i) = (*components_)[static_cast<std::size_t>(i)].gradient(x).transpose();
  return J;
}

double FiniteMaxProblem::psi(const Vector& x) const { return problem_.psi(x); }

void FiniteMaxProblem::set_blocks(int count) {
  const Index n = problem_.n;
  if (count < 1 || count > n) throw ConfigError("set_blocks: block count must lie in [1, n]");
  if (count > 1 && !problem_.X.is_coordinate_product())
    throw ConfigError("set_blocks: X is not a product set");
  std::vector<BlockRange> blocks;
  Index start = 0;
  for (int b = 0; b < count; ++b) {
    const Index size = n / count + (b < n % count ? 1 : 0);
    blocks.push_back({start, size});
    start += size;
  }
  problem_.blocks = std::move(blocks);
  problem_.validate();
}

MinMaxProblem make_bilinear(const Matrix& A, const Vector& b, const Vector& d, FeasibleSet X,
                            FeasibleSet Y, std::optional<Region> region) {
  const Index n = A.rows();
  const Index m = A.cols();
  if (b.size() != n || d.size() != m || X.dimension() != n || Y.dimension() != m)
    throw ConfigError("make_bilinear: dimension mismatch");
  auto data = std::make_shared<const std::tuple<Matrix, Vector, Vector>>(A, b, d);
  MinMaxProblem p;
  p.id = "bilinear";
  p.n = n;
  p.m = m;
  p.eval_f = [data](const Vector& x, const Vector& y) {
    const auto& [A_, b_, d_] = *data;
    return x.dot(A_ * y) + b_.dot(x) + d_.dot(y);
  };
  p.grad_x = [data](const Vector&, const Vector& y) {
    const auto& [A_, b_, d_] = *data;
    return Vector(A_ * y + b_);
  };
  p.grad_y = [data](const Vector& x, const Vector&) {
    const auto& [A_, b_, d_] = *data;
    return Vector(A_.transpose() * x + d_);
  };
  p.X = std::move(X);
  p.Y = std::move(Y);
  const double norm_A = spectral_norm(A);
  // A zero coupling still needs a positive constant for step-size formulas.
  p.lipschitz_L = norm_A > 0 ? norm_A : 1.0;
  p.operating_region = region ? *region : Region::unbounded(n);
  p.validate();
  return p;
}

MinMaxProblem make_zero_problem(Index n, Index m) {
  MinMaxProblem p;
  p.id = "zero";
  p.n = n;
  p.m = m;
  p.eval_f = [](const Vector&, const Vector&) { return 0.0; };
  p.grad_x = [n](const Vector&, const Vector&) { return Vector(Vector::Zero(n)); };
  p.grad_y = [m](const Vector&, const Vector&) { return Vector(Vector::Zero(m)); };
  p.psi = [](const Vector&) { return 0.0; };
  p.X = FeasibleSet::whole_space(n);
  p.Y = FeasibleSet::simplex(m);
  p.lipschitz_L = 1.0;
  p.operating_region = Region::unbounded(n);
  p.lower_bound = 0.0;
  p.validate();
  return p;
}

namespace {

Matrix random_orthogonal(Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix G(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) G(i, j) = normal(rng);
  Eigen::HouseholderQR<Matrix> qr(G);
  Matrix Q = qr.householderQ();
  // Sign fix so Q is Haar distributed and deterministic.
  const Matrix R = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index j = 0; j < n; ++j)
    if (R(j, j) < 0) Q.col(j) *= -1.0;
  return Q;
}

std::vector<QuadraticMap> sample_components(Index n, Index m, std::mt19937_64& rng,
                                            const FiniteMaxSpec& spec) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<QuadraticMap> comps;
  comps.reserve(static_cast<std::size_t>(m));
  for (Index i = 0; i < m; ++i) {
    const Matrix Q = random_orthogonal(n, rng);
    const double lo = i == 0 ? spec.anchor_eig : spec.eig_lo;
    Vector lambda(n);
    for (Index k = 0; k < n; ++k) lambda(k) = lo + (spec.eig_hi - lo) * unit(rng);
    Matrix A = Q * lambda.asDiagonal() * Q.transpose();
    A = 0.5 * (A + A.transpose()).eval();
    Vector center(n);
    for (Index k = 0; k < n; ++k) center(k) = spec.center_scale * (2.0 * unit(rng) - 1.0);
    const double offset = spec.offset_scale * unit(rng);
    QuadraticMap q;
    q.b = -(A * center);
    q.c = 0.5 * center.dot(A * center) + offset;
    q.A = std::move(A);
    comps.push_back(std::move(q));
  }
  return comps;
}

}  // namespace

FiniteMaxProblem make_finite_max_quadratic(Index n, Index m, std::uint64_t seed,
                                           const FiniteMaxSpec& spec) {
  if (n < 1 || m < 1) throw ConfigError("make_finite_max_quadratic: n and m must be positive");
  if (!(spec.eig_lo <= spec.eig_hi) || !(spec.anchor_eig <= spec.eig_hi) ||
      !(spec.region_radius > 0))
    throw ConfigError("make_finite_max_quadratic: inconsistent generator spec");
  const int attempts = spec.strict_complementarity ? spec.max_attempts : 1;
  for (int attempt = 0; attempt < attempts; ++attempt) {
    // Sub-seeds are derived deterministically from (seed, attempt).
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(attempt), 0x5eedu};
    std::mt19937_64 rng(seq);
    auto comps = sample_components(n, m, rng, spec);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    Vector x0(n);
    for (Index k = 0; k < n; ++k) x0(k) = spec.x0_scale * unit(rng);

    std::ostringstream id;
    id << "finite-max-n" << n << "-m" << m << "-seed" << seed;
    if (attempt > 0) id << "-sub" << attempt;
    FiniteMaxProblem problem(id.str(), std::move(comps), FeasibleSet::whole_space(n),
                             Region::cube(n, spec.region_radius));
    problem.seed = seed;
    problem.default_x0 = x0;
    if (!spec.strict_complementarity) return problem;

    auto ref = solve_finite_max_reference(problem, x0);
    if (!ref) continue;
    if (!problem.problem().operating_region.contains(ref->x, -0.1 * spec.region_radius)) continue;
    double gap = 0.0;
    try {
      gap = check_strict_complementarity(problem, ref->x, ref->y, 1e-8);
    } catch (const PreconditionError&) {
      continue;
    }
    if (gap < spec.min_gap) continue;
    problem.reference = std::move(ref);
    problem.set_lower_bound(problem.reference->value);
    return problem;
  }
  throw GenerationError("make_finite_max_quadratic: no instance passed the strict-complementarity "
                        "filter after " + std::to_string(attempts) + " attempts");
}

FiniteMaxProblem make_robust_regression(const Matrix& features, const Vector& labels,
                                        Region region, std::optional<RegressionModel> model,
                                        std::optional<double> L) {
  const Index samples = features.rows();
  const Index n = features.cols();
  if (samples < 1 || n < 1 || labels.size() != samples)
    throw ConfigError("make_robust_regression: dimension mismatch");
  if (region.lo.size() != n) throw ConfigError("make_robust_regression: region dimension mismatch");

  if (!model) {
    std::vector<QuadraticMap> quads;
    for (Index i = 0; i < samples; ++i) {
      const Vector xi = features.row(i).transpose();
      quads.push_back({xi * xi.transpose(), -labels(i) * xi, 0.5 * labels(i) * labels(i)});
    }
    return FiniteMaxProblem("robust-regression-linear", std::move(quads),
                            FeasibleSet::whole_space(n), std::move(region), L);
  }

  if (!L) throw ConfigError("make_robust_regression: a nonlinear model needs a Lipschitz constant");
  auto psi = std::make_shared<const RegressionModel>(std::move(*model));
  std::vector<SmoothMap> comps;
  for (Index i = 0; i < samples; ++i) {
    const Vector xi = features.row(i).transpose();
    const double label = labels(i);
    comps.push_back({[psi, xi, label](const Vector& x) {
                       const double r = label - psi->value(x, xi);
                       return 0.5 * r * r;
                     },
                     [psi, xi, label](const Vector& x) {
                       const double r = label - psi->value(x, xi);
                       return Vector(-r * psi->gradient(x, xi));
                     }});
  }
  FiniteMaxProblem problem("robust-regression-model", std::move(comps), FeasibleSet::whole_space(n),
                           std::move(region), *L);
  std::mt19937_64 rng(0x9e3779b97f4a7c15ULL);
  for (int k = 0; k < 5; ++k) {
    const Vector x = sample_region(problem.problem(), rng);
    const Vector y = sample_dual(problem.problem(), rng);
    const double err = check_gradients(problem.problem(), x, y, 1e-5);
    if (err > 1e-6)
      throw ConfigError("make_robust_regression: supplied model gradient fails check (" +
                        std::to_string(err) + ")");
  }
  return problem;
}

namespace {

FiniteMaxProblem scalar_instance(std::string id, std::vector<QuadraticMap> comps) {
  return FiniteMaxProblem(std::move(id), std::move(comps), FeasibleSet::whole_space(1),
                          Region::cube(1, 3.0));
}

QuadraticMap scalar_quadratic(double a, double b, double c) {
  return {Matrix::Constant(1, 1, a), Vector::Constant(1, b), c};
}

}  // namespace

FiniteMaxProblem make_hand_two_component() {
  // (x - 1)^2 and (x + 1)^2
  FiniteMaxProblem p = scalar_instance(
      "hand-two", {scalar_quadratic(2.0, -2.0, 1.0), scalar_quadratic(2.0, 2.0, 1.0)});
  p.reference = ReferenceSolution{Vector::Zero(1), Vector::Constant(2, 0.5), 1.0};
  p.set_lower_bound(1.0);
  p.default_x0 = Vector::Constant(1, 1.0);
  return p;
}

FiniteMaxProblem make_hand_three_component() {
  FiniteMaxProblem p = scalar_instance("hand-three", {scalar_quadratic(2.0, -2.0, 1.0),
                                                      scalar_quadratic(2.0, 2.0, 1.0),
                                                      scalar_quadratic(2.0, 0.0, 10.0)});
  Vector y(3);
  y << 0.0, 0.0, 1.0;
  p.reference = ReferenceSolution{Vector::Zero(1), y, 10.0};
  p.set_lower_bound(10.0);
  p.default_x0 = Vector::Constant(1, 1.0);
  return p;
}

FiniteMaxProblem make_degenerate_pair() {
  FiniteMaxProblem p = scalar_instance(
      "degenerate-pair", {scalar_quadratic(2.0, 0.0, 0.0), scalar_quadratic(2.0, 0.0, 0.0)});
  Vector y(2);
  y << 1.0, 0.0;
  p.reference = ReferenceSolution{Vector::Zero(1), y, 0.0};
  p.set_lower_bound(0.0);
  p.default_x0 = Vector::Constant(1, 1.0);
  return p;
}

namespace {

// T(x): indices within tie_tol (relative to the value spread) of the maximum.
std::vector<Index> top_indices(const Vector& F, double tie_tol) {
  const double top = F.maxCoeff();
  const double threshold = top - tie_tol * std::max(1.0, top - F.minCoeff());
  std::vector<Index> out;
  for (Index i = 0; i < F.size(); ++i)
    if (F(i) >= threshold) out.push_back(i);
  return out;
}

}  // namespace

KKTReport kkt_residual(const FiniteMaxProblem& problem, const Vector& x, const Vector& y,
                       double tie_tol, double support_tol) {
  if (x.size() != problem.n() || y.size() != problem.m())
    throw DomainError("kkt_residual: dimension mismatch");
  KKTReport r;
  const Vector F = problem.values(x);
  const Matrix J = problem.jacobian(x);
  r.grad_residual = (J.transpose() * y).norm();
  r.feasibility = std::max(std::abs(y.sum() - 1.0), std::max(0.0, -y.minCoeff()));
  r.mu = F.maxCoeff();
  r.nu = (r.mu - F.array()).matrix();
  // Multipliers are nonnegative by construction; |.| keeps the residual a norm
  // when y has negative entries.
  r.complementarity = (y.array() * r.nu.array()).abs().sum();
  r.active_set = top_indices(F, tie_tol);
  for (Index i = 0; i < F.size(); ++i)
    if (y(i) > support_tol) r.support.push_back(i);
  return r;
}

double check_strict_complementarity(const FiniteMaxProblem& problem, const Vector& x,
                                    const Vector& y, double tol) {
  const KKTReport r = kkt_residual(problem, x, y);
  if (!r.approximate_kkt(tol)) {
    std::ostringstream msg;
    msg << "check_strict_complementarity: not a KKT pair at level " << tol
        << " (grad_residual=" << r.grad_residual << ", feasibility=" << r.feasibility
        << ", complementarity=" << r.complementarity << ")";
    throw PreconditionError(msg.str());
  }
  double gap = std::numeric_limits<double>::infinity();
  std::vector<bool> in_support(static_cast<std::size_t>(problem.m()), false);
  for (Index i : r.support) in_support[static_cast<std::size_t>(i)] = true;
  for (Index i = 0; i < problem.m(); ++i)
    if (!in_support[static_cast<std::size_t>(i)]) gap = std::min(gap, r.nu(i));
  return gap;
}

double check_regularity(const FiniteMaxProblem& problem, const Vector& x, double tie_tol) {
  const std::vector<Index> active = top_indices(problem.values(x), tie_tol);
  const Matrix J = problem.jacobian(x);
  Matrix M(static_cast<Index>(active.size()), problem.n() + 1);
  for (std::size_t k = 0; k < active.size(); ++k) {
    M.row(static_cast<Index>(k)).head(problem.n()) = J.row(active[k]);
    M(static_cast<Index>(k), problem.n()) = 1.0;
  }
  Eigen::JacobiSVD<Matrix> svd(M);
  return svd.singularValues().minCoeff();
}

namespace {

// Softmax weights of F / tau.
Vector soft_weights(const Vector& F, double tau) {
  const double top = F.maxCoeff();
  Vector w = ((F.array() - top) / tau).exp().matrix();
  return w / w.sum();
}

double smooth_max(const Vector& F, double tau) {
  const double top = F.maxCoeff();
  return top + tau * std::log(((F.array() - top) / tau).exp().sum());
}

}  // namespace

std::optional<ReferenceSolution> solve_finite_max_reference(const FiniteMaxProblem& problem,
                                                            const Vector& x0, double kkt_tol) {
  const Index n = problem.n();
  const Index m = problem.m();
  Vector x = x0;
  Vector w = Vector::Constant(m, 1.0 / m);

  // Continuation on the log-sum-exp smoothing of max_i f_i.
  for (double tau = 1.0; tau >= 1e-7; tau *= 0.1) {
    double step = 1.0;
    for (int it = 0; it < 5000; ++it) {
      const Vector F = problem.values(x);
      w = soft_weights(F, tau);
      const Vector g = problem.jacobian(x).transpose() * w;
      if (g.norm() <= 1e-10) break;
      const double value = smooth_max(F, tau);
      step = std::min(1.0, step * 2.0);
      bool moved = false;
      for (int ls = 0; ls < 60; ++ls) {
        const Vector trial = x - step * g;
        if (smooth_max(problem.values(trial), tau) <= value - 1e-4 * step * g.squaredNorm()) {
          x = trial;
          moved = true;
          break;
        }
        step *= 0.5;
      }
      if (!moved) break;
    }
  }

  if (!problem.quadratics()) {
    if (kkt_residual(problem, x, w).approximate_kkt(kkt_tol))
      return ReferenceSolution{x, w, problem.psi(x)};
    return std::nullopt;
  }
  const auto& quads = *problem.quadratics();

  // Newton on the KKT system restricted to an active set, with simple
  // add/drop corrections.
  std::vector<Index> active;
  for (Index i = 0; i < m; ++i)
    if (w(i) > 1e-6) active.push_back(i);
  if (active.empty()) return std::nullopt;

  for (int round = 0; round < 20; ++round) {
    const Index k = static_cast<Index>(active.size());
    Vector ya(k);
    for (Index a = 0; a < k; ++a) ya(a) = std::max(w(active[a]), 1e-3);
    ya /= ya.sum();
    double mu = problem.values(x).maxCoeff();
    bool converged = false;
    for (int it = 0; it < 100; ++it) {
      const Vector F = problem.values(x);
      const Matrix J = problem.jacobian(x);
      Vector res(n + k + 1);
      Matrix H = Matrix::Zero(n, n);
      Vector g = Vector::Zero(n);
      for (Index a = 0; a < k; ++a) {
        H += ya(a) * quads[active[a]].A;
        g += ya(a) * J.row(active[a]).transpose();
        res(n + a) = F(active[a]) - mu;
      }
      res.head(n) = g;
      res(n + k) = ya.sum() - 1.0;
      if (res.norm() <= 1e-14 * std::max(1.0, std::abs(mu))) {
        converged = true;
        break;
      }
      Matrix Jac = Matrix::Zero(n + k + 1, n + k + 1);
      Jac.topLeftCorner(n, n) = H;
      for (Index a = 0; a < k; ++a) {
        Jac.block(0, n + a, n, 1) = J.row(active[a]).transpose();
        Jac.block(n + a, 0, 1, n) = J.row(active[a]);
        Jac(n + a, n + k) = -1.0;
        Jac(n + k, n + a) = 1.0;
      }
      const Vector delta = Jac.colPivHouseholderQr().solve(-res);
      if (!delta.allFinite()) break;
      x += delta.head(n);
      ya += delta.segment(n, k);
      mu += delta(n + k);
      if (delta.norm() <= 1e-15 * std::max(1.0, x.norm())) {
        converged = true;
        break;
      }
    }
    if (!converged) return std::nullopt;

    // Drop negative weights, add violated components.
    Index worst_neg = -1;
    for (Index a = 0; a < k; ++a)
      if (ya(a) < 0 && (worst_neg < 0 || ya(a) < ya(worst_neg))) worst_neg = a;
    const Vector F = problem.values(x);
    Index violator = -1;
    for (Index i = 0; i < m; ++i) {
      if (std::find(active.begin(), active.end(), i) != active.end()) continue;
      if (F(i) > mu + 1e-12 * std::max(1.0, std::abs(mu)) && (violator < 0 || F(i) > F(violator)))
        violator = i;
    }
    if (worst_neg >= 0 && k > 1) {
      active.erase(active.begin() + worst_neg);
      continue;
    }
    if (violator >= 0) {
      active.push_back(violator);
      std::sort(active.begin(), active.end());
      w = Vector::Zero(m);
      for (Index i : active) w(i) = 1.0 / static_cast<double>(active.size());
      continue;
    }
    Vector y = Vector::Zero(m);
    for (Index a = 0; a < k; ++a) y(active[a]) = ya(a);
    if (!kkt_residual(problem, x, y).approximate_kkt(kkt_tol)) return std::nullopt;
    return ReferenceSolution{x, y, problem.psi(x)};
  }
  return std::nullopt;
}

}  // namespace sgda
