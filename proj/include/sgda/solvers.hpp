#pragma once

#include <optional>

#include "sgda/diagnostics.hpp"
#include "sgda/params.hpp"
#include "sgda/problem.hpp"
#include "sgda/trace.hpp"

namespace sgda {

/// Plain gradient descent-ascent. The dual step uses the fresh primal iterate.
SolverState gda_step(const MinMaxProblem& problem, const SolverState& state, double c,
                     double alpha);

/// One step of gradient descent-ascent on K(x, z; y) = f(x, y) + p/2 ||x - z||^2
/// followed by the averaging z <- z + beta (x' - z).
SolverState smoothed_gda_step(const MinMaxProblem& problem, const SolverState& state,
                              const SolverParams& params);

/// Block variant: primal blocks are updated in declared order, each seeing the
/// already-updated earlier blocks. Dual and anchor updates match
/// smoothed_gda_step.
SolverState smoothed_bgda_step(const MinMaxProblem& problem, const SolverState& state,
                               const SolverParams& params);

/// Projects x0, y0 onto X, Y; z0 defaults to the projected x0.
SolverState initial_state(const MinMaxProblem& problem, const Vector& x0, const Vector& y0,
                          const std::optional<Vector>& z0 = std::nullopt);

struct StopCriteria {
  long max_iter = 1000;
  double tol = 0.0;
};

struct RecordOptions {
  long stride = 1;               ///< record every k-th transition (the last one always)
  long exact_every = 0;          ///< exact ry every k recorded transitions; 0 disables
  long potential_every = 0;      ///< phi every k recorded transitions; 0 disables
  double inner_tol = kInnerTol;  ///< tolerance for exact ry and phi
  bool psi = true;               ///< record psi when the problem provides it
  bool timing = true;            ///< record wall_ns
};

struct RunResult {
  IterateTrace trace;
  SolverState state;       ///< last valid state
  SolverState prev_state;  ///< state one step before `state` (equal to it when no step ran)
};

/// Iterates until the stopping residual is <= tol or max_iter steps ran.
/// Region violations and non-finite iterates end the run with the matching
/// stop reason and the last valid state; they are not rethrown.
RunResult run(const MinMaxProblem& problem, Algorithm algorithm, const SolverParams& params,
              const SolverState& initial, const StopCriteria& stop,
              const RecordOptions& record = {});

/// Explicit witnesses that (next.x, next.y) is an approximate stationary pair.
struct Certificate {
  double epsilon;     ///< surrogate residual of the transition
  double lambda_bar;
  double u_norm;
  double v_norm;
  double kappa;
  Vector u;  ///< in grad_x f(x', y') + N_X(x')
  Vector v;  ///< in -grad_y f(x', y') + N_Y(y')
};

/// Throws UsageError unless next.t == prev.t + 1.
Certificate certificate(const MinMaxProblem& problem, const SolverState& prev,
                        const SolverState& next, const SolverParams& params);

/// Stationarity witnesses for a plain GDA transition (no smoothing term).
Certificate gda_certificate(const MinMaxProblem& problem, const SolverState& prev,
                            const SolverState& next, double c, double alpha);

}  // namespace sgda
