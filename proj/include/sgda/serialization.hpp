#pragma once

#include <memory>
#include <optional>
#include <ostream>
#include <string>

#include "json.hpp"
#include "sgda/problems.hpp"
#include "sgda/solvers.hpp"

namespace sgda {

using json = nlohmann::json;

/// A problem built from a JSON description plus its default start point.
struct Instance {
  MinMaxProblem problem;
  /// Set for finite-max instances (generated, hand-solved, regression, explicit).
  std::shared_ptr<const FiniteMaxProblem> finite_max;
  Vector x0;
  Vector y0;
  std::optional<Vector> z0;
  /// Canonical description; equal descriptions denote the same instance.
  json description;
};

/// Builds an instance from an inline description. `{"path": ...}` loads a
/// serialized instance file. Errors are ConfigError naming the offending field.
Instance instance_from_json(const json& spec);

/// Self-contained description of a quadratic finite-max, bilinear, hand-solved
/// or zero instance: matrices are row-major {"rows", "cols", "data"} objects.
json instance_to_json(const Instance& instance);
json finite_max_to_json(const FiniteMaxProblem& problem);

json vector_to_json(const Vector& v);
Vector vector_from_json(const json& j, const std::string& field);
json matrix_to_json(const Matrix& A);
Matrix matrix_from_json(const json& j, const std::string& field);
json feasible_set_to_json(const FeasibleSet& set);
FeasibleSet feasible_set_from_json(const json& j, Index dim, const std::string& field);
json params_to_json(const SolverParams& params);
json constants_to_json(const Constants& k);

/// Fixed 17-significant-digit decimal; round-trips binary doubles.
std::string format_double(double v);

/// CSV with columns t, rx, ry, ry_kind, rz, f, psi, phi, wall_ns, residual.
/// Unrecorded values are empty cells.
void write_trace_csv(std::ostream& out, const IterateTrace& trace);
IterateTrace read_trace_csv(std::istream& in);

}  // namespace sgda
