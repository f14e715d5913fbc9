#include "sgda/solvers.hpp"

#include <chrono>
#include <cmath>
#include <string>

namespace sgda {

std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::gda: return "gda";
    case Algorithm::smoothed_gda: return "smoothed-gda";
    case Algorithm::smoothed_bgda: return "smoothed-bgda";
  }
  return "unknown";
}

Algorithm parse_algorithm(const std::string& name) {
  if (name == "gda") return Algorithm::gda;
  if (name == "smoothed-gda") return Algorithm::smoothed_gda;
  if (name == "smoothed-bgda") return Algorithm::smoothed_bgda;
  throw ConfigError("algorithm: unknown name '" + name + "'");
}

std::string to_string(ResidualKind k) {
  switch (k) {
    case ResidualKind::exact: return "exact";
    case ResidualKind::surrogate: return "surrogate";
    case ResidualKind::step: return "step";
  }
  return "unknown";
}

std::string to_string(StopReason r) {
  switch (r) {
    case StopReason::tol_reached: return "tol-reached";
    case StopReason::max_iter: return "max-iter";
    case StopReason::diverged: return "diverged";
    case StopReason::region_violation: return "region-violation";
  }
  return "unknown";
}

namespace {

Vector checked(Vector v, const char* which) {
  for (Index i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v(i)))
      throw OracleError(std::string(which) + " returned non-finite value at coordinate " +
                            std::to_string(i),
                        i);
  }
  return v;
}

void check_iterate(const MinMaxProblem& problem, const SolverState& s) {
  if (!s.x.allFinite() || !s.y.allFinite() || !s.z.allFinite())
    throw DivergenceError("non-finite iterate at t=" + std::to_string(s.t));
  if (!problem.operating_region.contains(s.x, 1e-12))
    throw RegionViolation("primal iterate left the operating region at t=" + std::to_string(s.t));
}

}  // namespace

SolverState gda_step(const MinMaxProblem& problem, const SolverState& state, double c,
                     double alpha) {
  SolverState next;
  next.x = problem.proj_X(state.x - c * checked(problem.grad_x(state.x, state.y), "grad_x"));
  next.y = problem.proj_Y(state.y + alpha * checked(problem.grad_y(next.x, state.y), "grad_y"));
  next.z = state.z;
  next.t = state.t + 1;
  check_iterate(problem, next);
  return next;
}

SolverState smoothed_gda_step(const MinMaxProblem& problem, const SolverState& state,
                              const SolverParams& params) {
  SolverState next;
  const Vector gx =
      checked(problem.grad_x(state.x, state.y), "grad_x") + params.p * (state.x - state.z);
  next.x = problem.proj_X(state.x - params.c * gx);
  // K's proximal term does not depend on y, so grad_y K = grad_y f.
  next.y = problem.proj_Y(state.y +
                          params.alpha * checked(problem.grad_y(next.x, state.y), "grad_y"));
  next.z = (1.0 - params.beta) * state.z + params.beta * next.x;
  next.t = state.t + 1;
  check_iterate(problem, next);
  return next;
}

SolverState smoothed_bgda_step(const MinMaxProblem& problem, const SolverState& state,
                               const SolverParams& params) {
  if (!problem.blocks) throw ConfigError("smoothed_bgda_step: problem has no block structure");
  if (problem.blocks->size() > 1 && !problem.X.is_coordinate_product())
    throw ConfigError("smoothed_bgda_step: X is not a product over blocks");

  SolverState next;
  next.x = state.x;
  for (const BlockRange& block : *problem.blocks) {
    const Vector gx =
        checked(problem.grad_x(next.x, state.y), "grad_x") + params.p * (next.x - state.z);
    Vector candidate = next.x;
    candidate.segment(block.start, block.size) =
        next.x.segment(block.start, block.size) - params.c * gx.segment(block.start, block.size);
    // Clamping a product set leaves the feasible coordinates of other blocks intact.
    next.x = problem.proj_X(candidate);
  }
  next.y = problem.proj_Y(state.y +
                          params.alpha * checked(problem.grad_y(next.x, state.y), "grad_y"));
  next.z = (1.0 - params.beta) * state.z + params.beta * next.x;
  next.t = state.t + 1;
  check_iterate(problem, next);
  return next;
}

SolverState initial_state(const MinMaxProblem& problem, const Vector& x0, const Vector& y0,
                          const std::optional<Vector>& z0) {
  if (x0.size() != problem.n || y0.size() != problem.m)
    throw ConfigError("initial state: dimension mismatch");
  SolverState s;
  s.x = problem.proj_X(x0);
  s.y = problem.proj_Y(y0);
  s.z = z0 ? *z0 : s.x;
  if (s.z.size() != problem.n) throw ConfigError("initial state: z dimension mismatch");
  s.t = 0;
  return s;
}

Certificate gda_certificate(const MinMaxProblem& problem, const SolverState& prev,
                            const SolverState& next, double c, double alpha) {
  if (next.t != prev.t + 1) throw UsageError("certificate: states are not adjacent");
  Certificate cert{};
  cert.u = problem.grad_x(next.x, next.y) - problem.grad_x(prev.x, prev.y) -
           (next.x - prev.x) / c;
  cert.v = problem.grad_y(next.x, prev.y) - problem.grad_y(next.x, next.y) -
           (next.y - prev.y) / alpha;
  cert.u_norm = cert.u.norm();
  cert.v_norm = cert.v.norm();
  cert.epsilon = std::max(cert.u_norm, cert.v_norm);
  cert.kappa = 0.0;
  cert.lambda_bar = 1.0;
  return cert;
}

Certificate certificate(const MinMaxProblem& problem, const SolverState& prev,
                        const SolverState& next, const SolverParams& params) {
  if (next.t != prev.t + 1) throw UsageError("certificate: states are not adjacent");
  const Constants k = constants(problem.lipschitz_L, params);
  Certificate cert{};
  cert.kappa = k.kappa;
  cert.lambda_bar = k.lambda_bar;

  // Projection optimality of the primal step:
  //   -grad_x f(x_b, y) - p (x - z) - (x' - x)/c  in  N_X(x'),
  // where x_b is the point at which the block's gradient was evaluated.
  Vector g_old(problem.n);
  if (params.N > 1 && problem.blocks && problem.blocks->size() > 1) {
    Vector mixed = prev.x;
    for (const BlockRange& block : *problem.blocks) {
      g_old.segment(block.start, block.size) =
          problem.grad_x(mixed, prev.y).segment(block.start, block.size);
      mixed.segment(block.start, block.size) = next.x.segment(block.start, block.size);
    }
  } else {
    g_old = problem.grad_x(prev.x, prev.y);
  }
  cert.u = problem.grad_x(next.x, next.y) - g_old - params.p * (prev.x - prev.z) -
           (next.x - prev.x) / params.c;
  cert.v = problem.grad_y(next.x, prev.y) - problem.grad_y(next.x, next.y) -
           (next.y - prev.y) / params.alpha;
  cert.u_norm = cert.u.norm();
  cert.v_norm = cert.v.norm();

  const double rx = (prev.x - next.x).norm();
  const double ry = (prev.y - next.y).norm() + k.kappa * rx;
  const double rz = (next.x - prev.z).norm();
  cert.epsilon = std::max({rx, ry, rz});
  return cert;
}

RunResult run(const MinMaxProblem& problem, Algorithm algorithm, const SolverParams& params,
              const SolverState& initial, const StopCriteria& stop, const RecordOptions& record) {
  problem.validate();
  if (stop.max_iter < 0 || !(stop.tol >= 0)) throw UsageError("run: invalid stopping criteria");
  if (record.stride < 1) throw UsageError("run: record stride must be at least 1");
  if (!params.positive()) throw ParameterError("run: parameters must be positive with beta in (0, 1]");
  if (!problem.X.contains(initial.x, 1e-12) || !problem.Y.contains(initial.y, 1e-12))
    throw UsageError("run: initial state is infeasible");
  if (!problem.operating_region.contains(initial.x, 1e-12))
    throw RegionViolation("run: initial primal point outside the operating region");
  if (algorithm == Algorithm::smoothed_bgda && !problem.blocks)
    throw ConfigError("run: smoothed-bgda requires block structure");

  const double L = problem.lipschitz_L;
  const bool smoothed = algorithm != Algorithm::gda;
  // The surrogate's kappa term is only defined in the strongly convex regime p > L.
  const double kappa = smoothed && params.p > L && params.c > 0 && params.alpha > 0
                           ? constants(L, params).kappa
                           : 0.0;

  RunResult result;
  result.trace.meta.algorithm = to_string(algorithm);
  result.trace.meta.params = params;
  result.trace.meta.problem_id = problem.id;
  result.state = initial;
  result.prev_state = initial;
  if (smoothed && !(params.p > L))
    result.trace.message = "kappa undefined for p <= L; surrogate omits the kappa term";

  SolverState& state = result.state;
  long recorded = 0;
  for (long k = 0; k < stop.max_iter; ++k) {
    const auto started = std::chrono::steady_clock::now();
    SolverState next;
    try {
      switch (algorithm) {
        case Algorithm::gda: next = gda_step(problem, state, params.c, params.alpha); break;
        case Algorithm::smoothed_gda: next = smoothed_gda_step(problem, state, params); break;
        case Algorithm::smoothed_bgda: next = smoothed_bgda_step(problem, state, params); break;
      }
    } catch (const RegionViolation& e) {
      result.trace.stop = StopReason::region_violation;
      result.trace.message = e.what();
      return result;
    } catch (const DivergenceError& e) {
      result.trace.stop = StopReason::diverged;
      result.trace.message = e.what();
      return result;
    } catch (const OracleError& e) {
      result.trace.stop = StopReason::diverged;
      result.trace.message = e.what();
      return result;
    }
    const auto elapsed = std::chrono::steady_clock::now() - started;

    TraceRecord rec;
    rec.t = state.t;
    rec.rx = (state.x - next.x).norm();
    const double dy = (state.y - next.y).norm();
    if (smoothed) {
      rec.ry = dy + kappa * rec.rx;
      rec.ry_kind = ResidualKind::surrogate;
      rec.rz = (next.x - state.z).norm();
      rec.residual = std::max({rec.rx, rec.ry, *rec.rz});
    } else {
      rec.ry = dy;
      rec.ry_kind = ResidualKind::step;
      const Certificate cert = gda_certificate(problem, state, next, params.c, params.alpha);
      rec.residual = cert.epsilon;
    }
    if (!std::isfinite(rec.residual)) {
      result.trace.stop = StopReason::diverged;
      result.trace.message = "non-finite residual at t=" + std::to_string(state.t);
      return result;
    }

    const bool reached = rec.residual <= stop.tol;
    const bool last = reached || k + 1 == stop.max_iter;
    if (k % record.stride == 0 || last) {
      rec.f = problem.eval_f(state.x, state.y);
      if (record.psi && problem.psi) rec.psi = problem.psi(state.x);
      if (record.timing)
        rec.wall_ns = std::chrono::duration_cast<std::chrono::nanoseconds>(elapsed).count();
      if (smoothed && record.exact_every > 0 && recorded % record.exact_every == 0) {
        const Residuals exact =
            residual_exact(problem, state, next, params.p, params.alpha, record.inner_tol);
        rec.ry = exact.ry;
        rec.ry_kind = ResidualKind::exact;
      }
      if (smoothed && record.potential_every > 0 && recorded % record.potential_every == 0)
        rec.phi = potential(problem, state, params.p, record.inner_tol).phi;
      result.trace.records.push_back(std::move(rec));
      ++recorded;
    }

    result.prev_state = state;
    state = std::move(next);
    if (reached) {
      result.trace.stop = StopReason::tol_reached;
      return result;
    }
  }
  result.trace.stop = StopReason::max_iter;
  return result;
}

}  // namespace sgda
