#include "sgda/projections.hpp"

#include <string>

namespace sgda {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

FeasibleSet FeasibleSet::whole_space(Index dim) {
  if (dim < 1) throw DomainError("whole_space: dimension must be positive");
  return FeasibleSet(WholeSpace{dim});
}

FeasibleSet FeasibleSet::box(Vector lo, Vector hi) {
  if (lo.size() != hi.size() || lo.size() < 1) throw DomainError("box: dimension mismatch");
  if ((lo.array() > hi.array()).any()) throw DomainError("box: lo > hi");
  return FeasibleSet(Box{std::move(lo), std::move(hi)});
}

FeasibleSet FeasibleSet::box(Index dim, double lo, double hi) {
  return box(Vector::Constant(dim, lo), Vector::Constant(dim, hi));
}

FeasibleSet FeasibleSet::ball(Vector center, double radius) {
  if (!(radius > 0)) throw DomainError("ball: radius must be positive");
  if (center.size() < 1) throw DomainError("ball: empty center");
  return FeasibleSet(Ball{std::move(center), radius});
}

FeasibleSet FeasibleSet::simplex(Index dim) {
  if (dim < 1) throw DomainError("simplex: dimension must be at least 1");
  return FeasibleSet(Simplex{dim});
}

Index FeasibleSet::dimension() const {
  return std::visit(overloaded{[](const WholeSpace& s) { return s.dim; },
                               [](const Box& s) { return s.lo.size(); },
                               [](const Ball& s) { return s.center.size(); },
                               [](const Simplex& s) { return s.dim; }},
                    set_);
}

Vector FeasibleSet::project(const Vector& v) const {
  if (v.size() != dimension()) throw DomainError("project: dimension mismatch");
  return std::visit(
      overloaded{[&](const WholeSpace&) -> Vector {
                   detail::require_finite(v, "project");
                   return v;
                 },
                 [&](const Box& s) -> Vector { return project_box(v, s.lo, s.hi); },
                 [&](const Ball& s) -> Vector { return project_l2_ball(v, s.center, s.radius); },
                 [&](const Simplex&) -> Vector { return project_simplex(v); }},
      set_);
}

bool FeasibleSet::contains(const Vector& v, double slack) const {
  if (v.size() != dimension() || !v.allFinite()) return false;
  return std::visit(
      overloaded{[](const WholeSpace&) { return true; },
                 [&](const Box& s) {
                   return (v.array() >= s.lo.array() - slack).all() &&
                          (v.array() <= s.hi.array() + slack).all();
                 },
                 [&](const Ball& s) { return (v - s.center).norm() <= s.radius + slack; },
                 [&](const Simplex&) {
                   return (v.array() >= -slack).all() && std::abs(v.sum() - 1.0) <= slack;
                 }},
      set_);
}

double FeasibleSet::diameter() const {
  return std::visit(
      overloaded{[](const WholeSpace&) { return std::numeric_limits<double>::infinity(); },
                 [](const Box& s) { return (s.hi - s.lo).norm(); },
                 [](const Ball& s) { return 2.0 * s.radius; },
                 [](const Simplex& s) { return s.dim > 1 ? std::sqrt(2.0) : 0.0; }},
      set_);
}

bool FeasibleSet::is_coordinate_product() const {
  return std::holds_alternative<WholeSpace>(set_) || std::holds_alternative<Box>(set_);
}

FeasibleSet FeasibleSet::restrict(Index start, Index size) const {
  if (start < 0 || size < 1 || start + size > dimension())
    throw DomainError("restrict: block out of range");
  if (const auto* b = std::get_if<Box>(&set_)) return box(b->lo.segment(start, size), b->hi.segment(start, size));
  if (std::holds_alternative<WholeSpace>(set_)) return whole_space(size);
  throw ConfigError("restrict: feasible set '" + kind() + "' is not a product over coordinates");
}

std::string FeasibleSet::kind() const {
  return std::visit(overloaded{[](const WholeSpace&) { return std::string("whole-space"); },
                               [](const Box&) { return std::string("box"); },
                               [](const Ball&) { return std::string("l2-ball"); },
                               [](const Simplex&) { return std::string("simplex"); }},
                    set_);
}

}  // namespace sgda
