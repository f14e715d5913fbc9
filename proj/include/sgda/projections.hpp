#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "sgda/types.hpp"

namespace sgda {

namespace detail {

template <typename Derived>
void require_finite(const Eigen::MatrixBase<Derived>& v, const char* who) {
  if (!v.allFinite()) throw DomainError(std::string(who) + ": non-finite input");
}

}  // namespace detail

/// Euclidean projection onto the probability simplex
/// {w : w >= 0, sum(w) = 1} by sort-and-threshold.
///
/// Coordinates are ordered by a stable descending sort; the threshold tau is
/// the unique value with sum(max(v_i - tau, 0)) = 1. Above 10^4 coordinates
/// the running sum is compensated (Kahan) to bound drift.
template <typename Derived>
VectorX<typename Derived::Scalar> project_simplex(const Eigen::MatrixBase<Derived>& v) {
  using Scalar = typename Derived::Scalar;
  const Index d = v.size();
  if (d < 1) throw DomainError("project_simplex: empty input");
  detail::require_finite(v, "project_simplex");

  std::vector<Index> order(static_cast<std::size_t>(d));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return v(a) > v(b); });

  const bool compensated = d > 10000;
  Scalar sum = 0;
  Scalar carry = 0;
  Scalar tau = v(order[0]) - Scalar(1);
  for (Index k = 0; k < d; ++k) {
    const Scalar u = v(order[static_cast<std::size_t>(k)]);
    if (compensated) {
      const Scalar yk = u - carry;
      const Scalar tk = sum + yk;
      carry = (tk - sum) - yk;
      sum = tk;
    } else {
      sum += u;
    }
    const Scalar candidate = (sum - Scalar(1)) / Scalar(k + 1);
    if (u - candidate > Scalar(0)) {
      tau = candidate;
    } else {
      break;
    }
  }
  return (v.array() - tau).max(Scalar(0)).matrix();
}

/// Coordinatewise clamp to [lo, hi].
template <typename D1, typename D2, typename D3>
VectorX<typename D1::Scalar> project_box(const Eigen::MatrixBase<D1>& v,
                                         const Eigen::MatrixBase<D2>& lo,
                                         const Eigen::MatrixBase<D3>& hi) {
  if (lo.size() != v.size() || hi.size() != v.size())
    throw DomainError("project_box: dimension mismatch");
  if ((lo.array() > hi.array()).any()) throw DomainError("project_box: lo > hi");
  detail::require_finite(v, "project_box");
  return v.cwiseMax(lo).cwiseMin(hi);
}

template <typename D1, typename D2>
VectorX<typename D1::Scalar> project_l2_ball(const Eigen::MatrixBase<D1>& v,
                                             const Eigen::MatrixBase<D2>& center,
                                             typename D1::Scalar radius) {
  if (!(radius > 0)) throw DomainError("project_l2_ball: radius must be positive");
  if (center.size() != v.size()) throw DomainError("project_l2_ball: dimension mismatch");
  detail::require_finite(v, "project_l2_ball");
  const VectorX<typename D1::Scalar> offset = v - center;
  const auto dist = offset.norm();
  if (dist <= radius) return v;
  return center + (radius / dist) * offset;
}

/// Closed convex feasible set with an exact Euclidean projection.
class FeasibleSet {
 public:
  struct WholeSpace {
    Index dim;
  };
  struct Box {
    Vector lo, hi;
  };
  struct Ball {
    Vector center;
    double radius;
  };
  struct Simplex {
    Index dim;
  };
  using Variant = std::variant<WholeSpace, Box, Ball, Simplex>;

  FeasibleSet() : set_(WholeSpace{0}) {}

  static FeasibleSet whole_space(Index dim);
  static FeasibleSet box(Vector lo, Vector hi);
  static FeasibleSet box(Index dim, double lo, double hi);
  static FeasibleSet ball(Vector center, double radius);
  static FeasibleSet simplex(Index dim);

  Index dimension() const;
  Vector project(const Vector& v) const;
  /// Membership predicate with absolute slack.
  bool contains(const Vector& v, double slack = 1e-12) const;
  /// Diameter, +inf when unbounded.
  double diameter() const;
  bool bounded() const { return std::isfinite(diameter()); }
  /// True when the set is a Cartesian product over coordinates (whole space or box).
  bool is_coordinate_product() const;
  /// Restriction to coordinates [start, start+size); only for product sets.
  FeasibleSet restrict(Index start, Index size) const;

  const Variant& variant() const { return set_; }
  std::string kind() const;

 private:
  explicit FeasibleSet(Variant v) : set_(std::move(v)) {}
  Variant set_;
};

}  // namespace sgda
