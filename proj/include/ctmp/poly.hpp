#pragma once

#include <cmath>
#include <cstddef>
#include <map>
#include <utility>
#include <vector>

namespace ctmp {

// Dense univariate polynomial, coefficient of x^i at position i.
using Poly1 = std::vector<double>;

// Sparse bivariate polynomial, (i,j) -> coefficient of x^i y^j.
using Poly2 = std::map<std::pair<int, int>, double>;

inline Poly1 poly_trim(Poly1 p) {
  while (p.size() > 1 && p.back() == 0.0) p.pop_back();
  return p;
}

inline int poly_deg(const Poly1& p) {
  for (std::size_t i = p.size(); i-- > 0;)
    if (p[i] != 0.0) return static_cast<int>(i);
  return 0;
}

inline Poly1 poly_mul(const Poly1& p, const Poly1& q) {
  if (p.empty() || q.empty()) return {0.0};
  Poly1 r(p.size() + q.size() - 1, 0.0);
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0) continue;
    for (std::size_t j = 0; j < q.size(); ++j) r[i + j] += p[i] * q[j];
  }
  return r;
}

inline Poly1 poly_pow(const Poly1& p, int n) {
  Poly1 r{1.0};
  for (int i = 0; i < n; ++i) r = poly_mul(r, p);
  return r;
}

inline double poly_eval(const Poly1& p, double x) {
  double v = 0.0;
  for (std::size_t i = p.size(); i-- > 0;) v = v * x + p[i];
  return v;
}

// q(x + c), expanded by Horner over the shifted variable.
inline Poly1 poly_compose_shift(const Poly1& q, double c) {
  Poly1 r{0.0};
  const Poly1 lin{c, 1.0};
  for (std::size_t i = q.size(); i-- > 0;) {
    r = poly_mul(r, lin);
    if (r.empty()) r = {0.0};
    r[0] += q[i];
  }
  r.resize(q.size());
  return r;
}

inline int poly2_deg(const Poly2& p) {
  int d = 0;
  for (const auto& [ij, c] : p)
    if (c != 0.0 && ij.first + ij.second > d) d = ij.first + ij.second;
  return d;
}

inline Poly2& poly2_add_term(Poly2& p, int i, int j, double c) {
  if (c == 0.0) return p;
  auto [it, fresh] = p.emplace(std::make_pair(i, j), c);
  if (!fresh) {
    it->second += c;
    if (it->second == 0.0) p.erase(it);
  }
  return p;
}

inline Poly2 poly2_mul(const Poly2& p, const Poly2& q) {
  Poly2 r;
  for (const auto& [ij, a] : p)
    for (const auto& [kl, b] : q)
      poly2_add_term(r, ij.first + kl.first, ij.second + kl.second, a * b);
  return r;
}

inline Poly2 poly2_pow(const Poly2& p, int n) {
  Poly2 r{{{0, 0}, 1.0}};
  for (int i = 0; i < n; ++i) r = poly2_mul(r, p);
  return r;
}

}  // namespace ctmp
