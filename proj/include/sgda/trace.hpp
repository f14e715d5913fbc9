#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sgda/params.hpp"
#include "sgda/types.hpp"

namespace sgda {

enum class Algorithm { gda, smoothed_gda, smoothed_bgda };

std::string to_string(Algorithm a);
/// Throws ConfigError on unknown names.
Algorithm parse_algorithm(const std::string& name);

/// Iterates (x, y, z) after t steps.
struct SolverState {
  Vector x;
  Vector y;
  Vector z;
  long t = 0;
};

enum class ResidualKind {
  exact,      ///< ry = ||y^t - y_+^t(z^t)|| via inner solve
  surrogate,  ///< ry = ||y^t - y^{t+1}|| + kappa * rx
  step,       ///< ry = ||y^t - y^{t+1}|| (plain GDA, no smoothing)
};

std::string to_string(ResidualKind k);

/// Displacements of one transition t -> t+1.
struct Residuals {
  double rx = 0.0;
  double ry = 0.0;
  double rz = 0.0;
  ResidualKind kind = ResidualKind::surrogate;

  double max() const { return std::max({rx, ry, rz}); }
};

enum class StopReason { tol_reached, max_iter, diverged, region_violation };

std::string to_string(StopReason r);

/// One recorded transition t -> t+1. Values that describe a state (f, psi,
/// phi) are taken at the pre-step state t.
struct TraceRecord {
  long t = 0;
  double rx = 0.0;
  double ry = 0.0;
  ResidualKind ry_kind = ResidualKind::surrogate;
  /// Absent for plain GDA, which carries no anchor sequence.
  std::optional<double> rz;
  double f = 0.0;
  std::optional<double> psi;
  std::optional<double> phi;
  std::int64_t wall_ns = 0;
  /// Stopping measure: the surrogate max{rx, ||dy|| + kappa rx, rz} for the
  /// smoothed schemes, the stationarity level max{||u||, ||v||} for GDA.
  double residual = 0.0;
};

struct TraceMetadata {
  std::string problem_id;
  std::string algorithm;
  SolverParams params;
  std::uint64_t seed = 0;
};

struct IterateTrace {
  TraceMetadata meta;
  std::vector<TraceRecord> records;
  StopReason stop = StopReason::max_iter;
  std::string message;

  bool empty() const { return records.empty(); }
};

}  // namespace sgda
