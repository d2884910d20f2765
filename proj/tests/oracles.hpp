// Test-only oracles, independent of the library's computation paths.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <vector>

#include "ctmp/types.hpp"

namespace oracle {

// Direct moment computation for a planar atomic measure.
inline double moment2d(const std::vector<std::array<double, 2>>& atoms,
                       const std::vector<double>& dens, int i, int j) {
  double s = 0.0;
  for (std::size_t p = 0; p < atoms.size(); ++p)
    s += dens[p] * std::pow(atoms[p][0], i) * std::pow(atoms[p][1], j);
  return s;
}

// Direct moment computation on the line, t possibly negative.
inline double moment1d(const std::vector<double>& atoms,
                       const std::vector<double>& dens, long t) {
  double s = 0.0;
  for (std::size_t p = 0; p < atoms.size(); ++p)
    s += dens[p] * std::pow(atoms[p], static_cast<double>(t));
  return s;
}

// q(x + c) by explicit binomial expansion.
inline std::vector<double> shift_poly(const std::vector<double>& q, double c) {
  std::vector<double> out(q.size(), 0.0);
  for (std::size_t n = 0; n < q.size(); ++n) {
    double binom = 1.0;
    for (std::size_t m = 0; m <= n; ++m) {
      out[m] += q[n] * binom * std::pow(c, static_cast<double>(n - m));
      binom = binom * (static_cast<double>(n) - static_cast<double>(m)) /
              (static_cast<double>(m) + 1.0);
    }
  }
  return out;
}

inline double eval_poly(const std::vector<double>& q, double x) {
  double v = 0.0;
  for (std::size_t i = q.size(); i-- > 0;) v = v * x + q[i];
  return v;
}

// Pushforward of atoms under phi(x,y) = (a+bx+cy, d+ex+fy).
inline std::vector<std::array<double, 2>> push_atoms(
    const std::vector<std::array<double, 2>>& atoms, double a, double b,
    double c, double d, double e, double f) {
  std::vector<std::array<double, 2>> out;
  for (const auto& p : atoms)
    out.push_back({a + b * p[0] + c * p[1], d + e * p[0] + f * p[1]});
  return out;
}

// Distinct points with a minimum separation.
inline std::vector<double> random_points(std::mt19937& gen, int n, double lo,
                                         double hi, double min_sep) {
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<double> xs;
  int guard = 0;
  while (static_cast<int>(xs.size()) < n && guard++ < 100000) {
    const double x = dist(gen);
    bool ok = true;
    for (double y : xs)
      if (std::abs(x - y) < min_sep) ok = false;
    if (ok) xs.push_back(x);
  }
  std::sort(xs.begin(), xs.end());
  return xs;
}

inline std::vector<double> random_densities(std::mt19937& gen, int n,
                                            double lo = 0.2, double hi = 3.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<double> ds(n);
  for (double& d : ds) d = dist(gen);
  return ds;
}

inline ctmp::AtomicMeasure2D on_graph(const std::vector<double>& q,
                                      const std::vector<double>& xs,
                                      const std::vector<double>& dens) {
  ctmp::AtomicMeasure2D mu;
  mu.densities = dens;
  for (double x : xs) mu.atoms.push_back({x, eval_poly(q, x)});
  return mu;
}

inline ctmp::AtomicMeasure2D on_hyperbolic(int ell,
                                           const std::vector<double>& xs,
                                           const std::vector<double>& dens) {
  ctmp::AtomicMeasure2D mu;
  mu.densities = dens;
  for (double x : xs) mu.atoms.push_back({x, std::pow(x, -ell)});
  return mu;
}

// x-coordinates bounded away from zero, for hyperbolic supports.
inline std::vector<double> random_points_no_zero(std::mt19937& gen, int n,
                                                 double inner, double outer,
                                                 double min_sep) {
  std::vector<double> xs;
  std::uniform_real_distribution<double> mag(inner, outer);
  std::bernoulli_distribution sign(0.5);
  int guard = 0;
  while (static_cast<int>(xs.size()) < n && guard++ < 100000) {
    const double x = (sign(gen) ? 1.0 : -1.0) * mag(gen);
    bool ok = true;
    for (double y : xs)
      if (std::abs(x - y) < min_sep) ok = false;
    if (ok) xs.push_back(x);
  }
  std::sort(xs.begin(), xs.end());
  return xs;
}

}  // namespace oracle
