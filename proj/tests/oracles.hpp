#pragma once

// Independent reference computations used by the tests. None of these call
// into the code under test beyond plain Eigen.

#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Core>

namespace oracle {

/// Simplex projection by enumerating every support pattern: on support S the
/// equality-constrained QP gives w_S = v_S - (sum v_S - 1)/|S|; the feasible
/// candidate closest to v is the projection.
inline Eigen::VectorXd simplex_projection(const Eigen::VectorXd& v) {
  const int d = static_cast<int>(v.size());
  Eigen::VectorXd best;
  double best_dist = std::numeric_limits<double>::infinity();
  for (unsigned mask = 1; mask < (1u << d); ++mask) {
    double sum = 0;
    int count = 0;
    for (int i = 0; i < d; ++i)
      if (mask & (1u << i)) sum += v(i), ++count;
    const double shift = (sum - 1.0) / count;
    Eigen::VectorXd w = Eigen::VectorXd::Zero(d);
    bool feasible = true;
    for (int i = 0; i < d; ++i) {
      if (!(mask & (1u << i))) continue;
      w(i) = v(i) - shift;
      if (w(i) < 0) feasible = false;
    }
    if (!feasible) continue;
    const double dist = (w - v).squaredNorm();
    if (dist < best_dist) best_dist = dist, best = w;
  }
  return best;
}

/// Central-difference gradient of a scalar function.
template <typename F>
Eigen::VectorXd numeric_gradient(F&& f, const Eigen::VectorXd& x, double h = 1e-6) {
  Eigen::VectorXd g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Eigen::VectorXd a = x, b = x;
    a(i) += h;
    b(i) -= h;
    g(i) = (f(a) - f(b)) / (2 * h);
  }
  return g;
}

/// Least-squares slope of log r against log t.
inline double loglog_slope(const std::vector<double>& t, const std::vector<double>& r) {
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < t.size(); ++i) mx += std::log(t[i]), my += std::log(r[i]);
  mx /= t.size(), my /= t.size();
  double num = 0, den = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    num += (std::log(t[i]) - mx) * (std::log(r[i]) - my);
    den += (std::log(t[i]) - mx) * (std::log(t[i]) - mx);
  }
  return num / den;
}

}  // namespace oracle
