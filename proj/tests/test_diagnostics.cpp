#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "oracles.hpp"
#include "sgda/diagnostics.hpp"
#include "sgda/problems.hpp"
#include "sgda/solvers.hpp"

using namespace sgda;
using doctest::Approx;

namespace {

Vector scalar(double v) { return Vector::Constant(1, v); }

// f = xy with Y = [-1, 1]; L = 1.
MinMaxProblem bilinear() {
  return make_bilinear(Matrix::Ones(1, 1), Vector::Zero(1), Vector::Zero(1),
                       FeasibleSet::whole_space(1), FeasibleSet::box(1, -1, 1));
}

// Closed forms for the bilinear: x(y, z) = z - y/p, d(y, z) = zy - y^2/(2p),
// and P(z) = max_{|y| <= 1} d(y, z) attained at y = clip(pz).
double closed_d(double y, double z, double p) { return z * y - y * y / (2 * p); }
double closed_P(double z, double p) {
  const double y = std::clamp(p * z, -1.0, 1.0);
  return closed_d(y, z, p);
}

constexpr double kTol = 1e-10;

}  // namespace

TEST_CASE("inner argmin") {
  const MinMaxProblem p = bilinear();
  CHECK(solve_x_of_yz(p, scalar(0.5), scalar(0), 2.0, kTol)(0) == Approx(-0.25).epsilon(1e-9));
  CHECK(solve_x_of_yz(p, scalar(0), scalar(0.7), 2.0, kTol)(0) == Approx(0.7).epsilon(1e-9));
  CHECK(std::abs(solve_x_of_yz(p, scalar(1), scalar(1), 1.0, kTol)(0)) < 1e-9);
  CHECK_THROWS_AS(solve_x_of_yz(p, scalar(1), scalar(1), 0.5, kTol), ParameterError);
}

TEST_CASE("dual step target") {
  const MinMaxProblem p = bilinear();
  CHECK(y_plus(p, scalar(0.5), scalar(0), 2.0, 0.1, kTol)(0) == Approx(0.475).epsilon(1e-9));
  CHECK(std::abs(y_plus(p, scalar(0), scalar(0), 2.0, 0.1, kTol)(0)) < 1e-12);
  CHECK(y_plus(p, scalar(1), scalar(1), 1.0, 0.5, kTol)(0) == Approx(1.0));
}

TEST_CASE("dual value") {
  const MinMaxProblem p = bilinear();
  CHECK(dual_value(p, scalar(0.5), scalar(0), 2.0, kTol).value == Approx(-0.0625).epsilon(1e-9));
  CHECK(std::abs(dual_value(p, scalar(0), scalar(3), 2.0, kTol).value) < 1e-12);
  CHECK(dual_value(p, scalar(1), scalar(2), 2.0, kTol).value == Approx(1.75).epsilon(1e-9));
  for (double y : {-0.9, -0.2, 0.4}) {
    for (double z : {-1.0, 0.1, 0.6}) {
      CHECK(dual_value(p, scalar(y), scalar(z), 3.0, kTol).value ==
            Approx(closed_d(y, z, 3.0)).epsilon(1e-9));
    }
  }
}

TEST_CASE("proximal value") {
  const MinMaxProblem p = bilinear();
  const ProxValue at0 = prox_value(p, scalar(0), 2.0, kTol);
  CHECK(std::abs(at0.P) < 1e-9);
  CHECK(std::abs(at0.x_star(0)) < 1e-9);
  CHECK(std::abs(at0.y_star(0)) < 1e-9);

  const ProxValue q = prox_value(p, scalar(0.25), 2.0, kTol);
  CHECK(q.P == Approx(0.0625).epsilon(1e-8));
  CHECK(q.y_star(0) == Approx(0.5).epsilon(1e-8));
  CHECK(std::abs(q.x_star(0)) < 1e-8);

  for (double z : {-2.0, -0.3, 0.45, 1.5}) CHECK(prox_value(p, scalar(z), 2.0, kTol).P == Approx(closed_P(z, 2.0)).epsilon(1e-8));

  // A fixed point of z -> x*(z) is primal-stationary for P.
  const ProxValue fixed = prox_value(p, scalar(0), 2.0, kTol);
  CHECK(std::abs(fixed.x_star(0) - 0.0) < 1e-9);

  const MinMaxProblem open = make_bilinear(Matrix::Ones(1, 1), Vector::Zero(1), Vector::Zero(1),
                                           FeasibleSet::whole_space(1), FeasibleSet::whole_space(1));
  CHECK_THROWS_AS(prox_value(open, scalar(0), 2.0, kTol), ConfigError);
}

TEST_CASE("potential") {
  const MinMaxProblem p = bilinear();
  const PotentialRecord r = potential(p, {scalar(1), scalar(0.5), scalar(0), 0}, 2.0, kTol);
  CHECK(r.K_value == Approx(1.5));
  CHECK(r.d_value == Approx(-0.0625).epsilon(1e-9));
  CHECK(std::abs(r.P_value) < 1e-9);
  CHECK(r.phi == Approx(1.625).epsilon(1e-9));

  const PotentialRecord o = potential(p, {scalar(0), scalar(0), scalar(0), 0}, 2.0, kTol);
  CHECK(std::abs(o.phi) < 1e-12);
}

TEST_CASE("weak duality chain on a finite-max instance") {
  const FiniteMaxProblem fm = make_hand_two_component();
  const MinMaxProblem& p = fm;
  const SolverParams params = derive_params(p.lipschitz_L);
  std::mt19937_64 rng(2);
  for (int k = 0; k < 10; ++k) {
    const Vector x = sample_region(p, rng), z = sample_region(p, rng), y = sample_dual(p, rng);
    const PotentialRecord r = potential(p, {x, y, z, 0}, params.p, kTol);
    CHECK(r.K_value >= r.d_value - 2 * kTol);
    CHECK(r.P_value >= r.d_value - 2 * kTol);
    CHECK(r.phi >= *p.lower_bound - 4 * kTol);
  }
}

TEST_CASE("exact residuals") {
  const MinMaxProblem p = bilinear();
  const SolverParams params{1.0, 0.1, 0.1, 0.5, 1};
  const SolverState s0{scalar(1), scalar(1), scalar(1), 0};
  const SolverState s1 = smoothed_gda_step(p, s0, params);
  const Residuals r = residual_exact(p, s0, s1, params.p, params.alpha, kTol);
  CHECK(r.rx == Approx(0.1));
  CHECK(r.rz == Approx(0.1));
  CHECK(r.ry < 1e-9);
  CHECK_THROWS_AS(residual_exact(p, s0, s0, 1.0, 0.1, kTol), UsageError);

  const SolverState f0{scalar(0), scalar(0), scalar(0), 3};
  const Residuals z = residual_exact(p, f0, smoothed_gda_step(p, f0, params), 2.0, 0.1, kTol);
  CHECK(z.max() == 0.0);
}

TEST_CASE("sufficient decrease margins") {
  IterateTrace constant;
  for (long t = 0; t < 5; ++t) {
    TraceRecord r;
    r.t = t;
    r.ry_kind = ResidualKind::exact;
    r.rz = 0.0;
    r.phi = 1.0;
    constant.records.push_back(r);
  }
  const DecreaseReport rep = check_sufficient_decrease(constant, derive_params(1.0));
  CHECK(rep.margins.size() == 4);
  CHECK(rep.min_margin == 0.0);

  for (auto& r : constant.records) r.phi.reset();
  CHECK_THROWS_AS(check_sufficient_decrease(constant, derive_params(1.0)), UsageError);
}

TEST_CASE("potential decreases along a theory-parameter run") {
  const FiniteMaxProblem fm = make_hand_three_component();
  const MinMaxProblem& p = fm;
  const SolverParams params = derive_params(p.lipschitz_L);
  const SolverState s0 = initial_state(p, *fm.default_x0, Vector::Constant(3, 1.0 / 3));
  RecordOptions rec;
  rec.exact_every = rec.potential_every = 1;
  rec.timing = false;
  const RunResult r = run(p, Algorithm::smoothed_gda, params, s0, {200, 0.0}, rec);
  const DecreaseReport rep = check_sufficient_decrease(r.trace, params);
  CHECK(rep.margins.size() == 199);
  CHECK(rep.min_margin >= -1e-6);
}

TEST_CASE("error-bound probe on the bilinear") {
  const MinMaxProblem p = bilinear();
  const ErrorBoundProbe e = error_bound_ratio(p, scalar(0.5), scalar(0), 2.0, 0.1, kTol);
  CHECK(e.lhs == Approx(0.2375).epsilon(1e-7));
  CHECK(e.rhs == Approx(0.025).epsilon(1e-7));
  CHECK(e.ratio == Approx(9.5).epsilon(1e-6));
  CHECK(e.weak_lhs == Approx(0.1 * 0.2375 * 0.2375).epsilon(1e-6));
  CHECK(e.weak_rhs == Approx(0.085).epsilon(1e-9));
  CHECK(e.weak_holds);

  const ErrorBoundProbe f = error_bound_ratio(p, scalar(0), scalar(0), 2.0, 0.1, kTol);
  CHECK(f.ratio == 0.0);
}

TEST_CASE("rate fit on power laws") {
  for (double e : {-0.5, -0.25, -1.0}) {
    std::vector<std::pair<double, double>> pts;
    for (int t = 1; t <= 100000; t *= 2) pts.emplace_back(t, 3.0 * std::pow(t, e));
    CHECK(fit_rate(pts, 1, 1e6) == Approx(e).epsilon(1e-9));
  }
  std::vector<std::pair<double, double>> few{{1, 1}, {2, 0.5}, {3, 0.0}};
  CHECK_THROWS_AS(fit_rate(few, 1, 10), InsufficientDataError);
}

TEST_CASE("rate fit agrees with an independent regression") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.5, 2.0);
  std::vector<std::pair<double, double>> pts;
  std::vector<double> ts, rs;
  for (int t = 10; t <= 1000; t += 7) {
    const double r = u(rng) / t;
    pts.emplace_back(t, r);
    ts.push_back(t);
    rs.push_back(r);
  }
  CHECK(fit_rate(pts, 1, 1e4) == Approx(oracle::loglog_slope(ts, rs)).epsilon(1e-10));
}

TEST_CASE("best so far is monotone") {
  IterateTrace tr;
  for (long t = 0; t < 6; ++t) {
    TraceRecord r;
    r.t = t;
    r.residual = (t % 2 == 0) ? 1.0 / (t + 1) : 5.0;
    tr.records.push_back(r);
  }
  const auto b = best_so_far(tr);
  CHECK(b.front().first == 1.0);
  for (std::size_t i = 1; i < b.size(); ++i) CHECK(b[i].second <= b[i - 1].second);
}

TEST_CASE("sampled sigma bounds on a generated instance") {
  const FiniteMaxProblem fm = make_finite_max_quadratic(4, 3, 7);
  const MinMaxProblem& p = fm;
  const double L = p.lipschitz_L;
  const double pp = 4 * L;
  const Constants k = constants(L, pp, 1 / (2 * (pp + L)), 1e-3);
  const double slack = 4 * kTol / (pp - L);
  std::mt19937_64 rng(8);
  for (int i = 0; i < 30; ++i) {
    const Vector y = sample_dual(p, rng), y2 = sample_dual(p, rng);
    const Vector z = sample_region(p, rng), z2 = sample_region(p, rng);
    const Vector a = solve_x_of_yz(p, y, z, pp, kTol);
    CHECK((a - solve_x_of_yz(p, y, z2, pp, kTol)).norm() <= k.sigma1 * (z - z2).norm() + slack);
    const Vector b = solve_x_of_yz(p, y2, z, pp, kTol);
    CHECK((a - b).norm() <= k.sigma2 * (y - y2).norm() + slack);
    CHECK((p.grad_y(a, y) - p.grad_y(b, y2)).norm() <= k.L_d * (y - y2).norm() + L * slack);
  }
}
