#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "sgda/problems.hpp"
#include "sgda/solvers.hpp"

using namespace sgda;
using doctest::Approx;

namespace {

Vector scalar(double v) { return Vector::Constant(1, v); }

MinMaxProblem bilinear(bool box_y) {
  return make_bilinear(Matrix::Ones(1, 1), Vector::Zero(1), Vector::Zero(1),
                       FeasibleSet::whole_space(1),
                       box_y ? FeasibleSet::box(1, -1, 1) : FeasibleSet::whole_space(1));
}

SolverState state(Vector x, Vector y, Vector z, long t = 0) {
  return {std::move(x), std::move(y), std::move(z), t};
}

// f(x, y) = sum_i x_i^2 * y with scalar y.
MinMaxProblem separable_squares(Index n) {
  MinMaxProblem p;
  p.id = "squares";
  p.n = n;
  p.m = 1;
  p.eval_f = [](const Vector& x, const Vector& y) { return x.squaredNorm() * y(0); };
  p.grad_x = [](const Vector& x, const Vector& y) { return Vector(2.0 * y(0) * x); };
  p.grad_y = [](const Vector& x, const Vector&) { return scalar(x.squaredNorm()); };
  p.X = FeasibleSet::whole_space(n);
  p.Y = FeasibleSet::box(1, 0, 1);
  p.lipschitz_L = 10;
  p.operating_region = Region::cube(n, 2.0);
  return p;
}

}  // namespace

TEST_CASE("gda step by hand") {
  const MinMaxProblem p = bilinear(false);
  const SolverState s = gda_step(p, state(scalar(1), scalar(1), scalar(1)), 0.1, 0.1);
  CHECK(s.x(0) == Approx(0.9));
  CHECK(s.y(0) == Approx(1.09));
  CHECK(s.t == 1);

  const SolverState o = gda_step(p, state(scalar(0), scalar(0), scalar(0)), 0.1, 0.1);
  CHECK(o.x(0) == 0.0);
  CHECK(o.y(0) == 0.0);

  const SolverState same = gda_step(p, state(scalar(0.3), scalar(-0.2), scalar(0.3), 4), 0.0, 0.0);
  CHECK(same.x(0) == 0.3);
  CHECK(same.y(0) == -0.2);
  CHECK(same.t == 5);
}

TEST_CASE("smoothed step by hand") {
  const MinMaxProblem p = bilinear(false);
  const SolverParams params{1.0, 0.1, 0.1, 0.5, 1};
  const SolverState s = smoothed_gda_step(p, state(scalar(1), scalar(1), scalar(1)), params);
  CHECK(s.x(0) == Approx(0.9));
  CHECK(s.y(0) == Approx(1.09));
  CHECK(s.z(0) == Approx(0.95));

  const SolverState o = smoothed_gda_step(p, state(scalar(0), scalar(0), scalar(0)), params);
  CHECK(o.x(0) == 0.0);
  CHECK(o.y(0) == 0.0);
  CHECK(o.z(0) == 0.0);

  const SolverState full = smoothed_gda_step(p, state(scalar(0.4), scalar(0.7), scalar(-1)),
                                             {1.0, 0.1, 0.1, 1.0, 1});
  CHECK(full.z(0) == full.x(0));
}

TEST_CASE("block sweep sees updated earlier blocks") {
  MinMaxProblem p = make_bilinear(Matrix::Ones(2, 1), Vector::Zero(2), Vector::Zero(1),
                                  FeasibleSet::whole_space(2), FeasibleSet::whole_space(1));
  p.blocks = std::vector<BlockRange>{{0, 1}, {1, 1}};
  const SolverParams params{1.0, 0.1, 0.1, 0.5, 2};
  const SolverState s =
      smoothed_bgda_step(p, state(Vector::Ones(2), scalar(1), Vector::Ones(2)), params);
  CHECK(s.x(0) == Approx(0.9));
  CHECK(s.x(1) == Approx(0.9));
  CHECK(s.y(0) == Approx(1.18));
  CHECK(s.z(0) == Approx(0.95));
  CHECK(s.z(1) == Approx(0.95));
}

TEST_CASE("block sweep is symmetric on a separable objective") {
  MinMaxProblem p = separable_squares(2);
  p.blocks = std::vector<BlockRange>{{0, 1}, {1, 1}};
  SolverState s = state(Vector::Constant(2, 0.5), scalar(0.5), Vector::Constant(2, 0.4));
  for (int k = 0; k < 20; ++k) {
    s = smoothed_bgda_step(p, s, {20.0, 0.01, 0.01, 0.3, 2});
    CHECK(s.x(0) == s.x(1));
  }
}

TEST_CASE("single block reproduces the plain scheme exactly") {
  const FiniteMaxProblem fm = make_finite_max_quadratic(5, 3, 4);
  MinMaxProblem p = fm.problem();
  p.blocks = std::vector<BlockRange>{{0, 5}};
  const SolverParams params = derive_params(p.lipschitz_L);
  SolverState a = initial_state(p, *fm.default_x0, Vector::Constant(3, 1.0 / 3));
  SolverState b = a;
  for (int k = 0; k < 200; ++k) {
    a = smoothed_gda_step(p, a, params);
    b = smoothed_bgda_step(p, b, params);
    CHECK((a.x - b.x).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.y - b.y).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("block scheme configuration errors") {
  const MinMaxProblem p = bilinear(true);
  const SolverState s = state(scalar(1), scalar(1), scalar(1));
  CHECK_THROWS_AS(smoothed_bgda_step(p, s, {4, 0.1, 0.01, 0.001, 1}), ConfigError);

  MinMaxProblem ball = make_bilinear(Matrix::Ones(2, 1), Vector::Zero(2), Vector::Zero(1),
                                     FeasibleSet::ball(Vector::Zero(2), 1.0),
                                     FeasibleSet::box(1, -1, 1));
  ball.blocks = std::vector<BlockRange>{{0, 1}, {1, 1}};
  CHECK_THROWS_AS(smoothed_bgda_step(ball, state(Vector::Zero(2), scalar(0), Vector::Zero(2)),
                                     {4, 0.1, 0.01, 0.001, 2}),
                  ConfigError);
}

TEST_CASE("zero objective stops at once") {
  const MinMaxProblem p = make_zero_problem(2, 3);
  const SolverState s0 = initial_state(p, Vector::Constant(2, 0.5), Vector::Zero(3));
  const RunResult r = run(p, Algorithm::smoothed_gda, derive_params(1.0), s0, {100, 0.0});
  REQUIRE(r.trace.records.size() == 1);
  CHECK(r.trace.records[0].residual == 0.0);
  CHECK(r.trace.stop == StopReason::tol_reached);
}

TEST_CASE("bilinear oscillation") {
  const MinMaxProblem p = bilinear(true);
  const SolverState s0 = initial_state(p, scalar(1), scalar(1), scalar(1));

  const RunResult smooth = run(p, Algorithm::smoothed_gda, derive_params(1.0), s0, {1000000, 1e-6},
                               {.stride = 1000, .timing = false});
  CHECK(smooth.trace.stop == StopReason::tol_reached);
  CHECK(smooth.trace.records.back().residual <= 1e-6);
  CHECK(std::abs(smooth.state.x(0)) < 1e-4);

  const RunResult gda = run(p, Algorithm::gda, {0, 0.1, 0.1, 1, 1}, s0, {10000, 0.5},
                            {.timing = false});
  CHECK(gda.trace.stop == StopReason::max_iter);
  double lowest = 1e300;
  for (const auto& r : gda.trace.records) lowest = std::min(lowest, r.residual);
  CHECK(lowest > 0.5);
  CHECK_FALSE(gda.trace.records.back().rz.has_value());
}

TEST_CASE("iterates stay feasible") {
  const FiniteMaxProblem fm = make_finite_max_quadratic(6, 4, 1);
  const MinMaxProblem& p = fm;
  SolverState s = initial_state(p, *fm.default_x0, Vector::Constant(4, 0.25));
  const SolverParams params = derive_params(p.lipschitz_L);
  for (int k = 0; k < 2000; ++k) {
    s = smoothed_gda_step(p, s, params);
    CHECK(p.Y.contains(s.y, 1e-12));
  }
}

TEST_CASE("numerical failures end the run with a reason") {
  MinMaxProblem p = make_bilinear(Matrix::Ones(1, 1), Vector::Zero(1), Vector::Zero(1),
                                  FeasibleSet::whole_space(1), FeasibleSet::whole_space(1),
                                  Region::cube(1, 5.0));
  const SolverState s0 = initial_state(p, scalar(1), scalar(1));
  const RunResult out = run(p, Algorithm::gda, {0, 3.0, 3.0, 1, 1}, s0, {1000, 0.0});
  CHECK(out.trace.stop == StopReason::region_violation);
  CHECK(std::abs(out.state.x(0)) <= 5.0);

  p.operating_region = Region::unbounded(1);
  const RunResult blow = run(p, Algorithm::gda, {0, 1e150, 1e150, 1, 1}, s0, {1000, 0.0});
  CHECK(blow.trace.stop == StopReason::diverged);
  CHECK(blow.state.x.allFinite());
}

TEST_CASE("stride keeps the last record") {
  const MinMaxProblem p = bilinear(true);
  const SolverState s0 = initial_state(p, scalar(1), scalar(1), scalar(1));
  const RunResult r = run(p, Algorithm::smoothed_gda, derive_params(1.0), s0, {95, 0.0}, {.stride = 10});
  REQUIRE(r.trace.records.size() == 11);
  CHECK(r.trace.records.back().t == 94);
  CHECK(r.state.t == 95);
}

TEST_CASE("certificate") {
  const MinMaxProblem p = bilinear(true);
  const SolverParams params = derive_params(1.0);
  const SolverState fixed = state(scalar(0), scalar(0), scalar(0));
  const SolverState next = smoothed_gda_step(p, fixed, params);
  const Certificate c = certificate(p, fixed, next, params);
  CHECK(c.u_norm == 0.0);
  CHECK(c.v_norm == 0.0);
  CHECK(c.lambda_bar == Approx(constants(1.0, params).lambda_bar));
  CHECK_THROWS_AS(certificate(p, fixed, fixed, params), UsageError);

  // Membership: x' minimizes <u - grad_x f(x', y'), .> over X = R, so for the
  // unconstrained primal u equals grad_x f(x', y') up to the normal cone {0}.
  const SolverState s0 = state(scalar(1), scalar(1), scalar(1));
  const SolverState s1 = smoothed_gda_step(p, s0, params);
  const Certificate d = certificate(p, s0, s1, params);
  CHECK(d.u_norm <= d.lambda_bar * d.epsilon);
  CHECK(d.v_norm <= d.lambda_bar * d.epsilon);
}
