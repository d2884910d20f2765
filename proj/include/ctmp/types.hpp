#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace ctmp {

// Thresholds used by all rank / psd / residual decisions. Rank and psd
// tests are relative to the largest magnitude present in the matrix at
// hand; residuals are relative to max(1, |data|_inf).
struct ToleranceConfig {
  double rank_tol = 1e-9;
  double psd_tol = 1e-9;
  double residual_tol = 1e-7;
  double atom_merge_tol = 1e-7;
  int max_iter = 5000;
};

struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

struct DegreeTooHigh : Error {
  using Error::Error;
};
struct DegreeTooLow : Error {
  using Error::Error;
};
struct SingularTransform : Error {
  using Error::Error;
};
struct UndefinedEntries : Error {
  using Error::Error;
};
struct EvenLength : Error {
  using Error::Error;
};
struct IllConditioned : Error {
  using Error::Error;
};
struct CornerNotPD : Error {
  using Error::Error;
};
struct NonrealRoots : Error {
  using Error::Error;
};
struct AtomAtPole : Error {
  using Error::Error;
};
struct UnsupportedCurve : Error {
  using Error::Error;
};
struct InternalInvariantBroken : Error {
  using Error::Error;
};

struct RelationsViolated : Error {
  explicit RelationsViolated(std::vector<std::pair<int, int>> offending)
      : Error("curve relations violated at " + std::to_string(offending.size()) +
              " index pair(s)"),
        pairs(std::move(offending)) {}
  std::vector<std::pair<int, int>> pairs;
};

// One-dimensional atomic measure; atoms strictly increasing, densities > 0.
struct AtomicMeasure1D {
  std::vector<double> atoms;
  std::vector<double> densities;

  std::size_t size() const { return atoms.size(); }

  // Raw power moment sum rho_p * x_p^t (t may be negative).
  double moment(long t) const {
    double s = 0.0;
    for (std::size_t p = 0; p < atoms.size(); ++p)
      s += densities[p] * std::pow(atoms[p], static_cast<double>(t));
    return s;
  }
};

// Planar atomic measure. When tied to a curve every atom satisfies the
// curve equation up to the residual tolerance.
struct AtomicMeasure2D {
  std::vector<std::array<double, 2>> atoms;
  std::vector<double> densities;

  std::size_t size() const { return atoms.size(); }

  double moment(int i, int j) const {
    double s = 0.0;
    for (std::size_t p = 0; p < atoms.size(); ++p)
      s += densities[p] * std::pow(atoms[p][0], i) * std::pow(atoms[p][1], j);
    return s;
  }
};

// Curve family: the graph y = q(x) with deg q >= 2, or y*x^ell = 1 with
// ell >= 2.
class CurveSpec {
 public:
  enum class Kind { Graph, Hyperbolic };

  static CurveSpec graph(std::vector<double> coeffs) {
    if (coeffs.size() < 3)
      throw UnsupportedCurve("graph curve needs deg q >= 2");
    if (coeffs.back() == 0.0)
      throw UnsupportedCurve("graph curve leading coefficient must be nonzero");
    CurveSpec c;
    c.kind_ = Kind::Graph;
    c.coeffs_ = std::move(coeffs);
    return c;
  }

  static CurveSpec hyperbolic(int ell) {
    if (ell < 2) throw UnsupportedCurve("hyperbolic curve needs ell >= 2");
    CurveSpec c;
    c.kind_ = Kind::Hyperbolic;
    c.ell_ = ell;
    return c;
  }

  Kind kind() const { return kind_; }
  bool is_graph() const { return kind_ == Kind::Graph; }

  // deg q for graphs, ell for hyperbolic curves.
  int ell() const {
    return is_graph() ? static_cast<int>(coeffs_.size()) - 1 : ell_;
  }

  const std::vector<double>& coeffs() const { return coeffs_; }

  // Signed residual of the curve equation at a point.
  double equation_residual(double x, double y) const {
    if (is_graph()) {
      double q = 0.0;
      for (std::size_t i = coeffs_.size(); i-- > 0;) q = q * x + coeffs_[i];
      return y - q;
    }
    return y * std::pow(x, ell_) - 1.0;
  }

 private:
  CurveSpec() = default;
  Kind kind_ = Kind::Graph;
  std::vector<double> coeffs_;  // q_0 .. q_ell, graph case only
  int ell_ = 0;                 // hyperbolic case only
};

// Invertible affine map phi(x,y) = (a + b x + c y, d + e x + f y).
struct AffineTransform {
  double a = 0, b = 1, c = 0;
  double d = 0, e = 0, f = 1;

  static AffineTransform identity() { return {}; }

  double det() const { return b * f - c * e; }

  std::array<double, 2> operator()(double x, double y) const {
    return {a + b * x + c * y, d + e * x + f * y};
  }

  AffineTransform inverse() const {
    const double dt = det();
    if (dt == 0.0) throw SingularTransform("affine transform is singular");
    AffineTransform inv;
    inv.b = f / dt;
    inv.c = -c / dt;
    inv.e = -e / dt;
    inv.f = b / dt;
    inv.a = -(inv.b * a + inv.c * d);
    inv.d = -(inv.e * a + inv.f * d);
    return inv;
  }

  // Composition: apply *this first, then g.
  AffineTransform then(const AffineTransform& g) const {
    AffineTransform h;
    h.a = g.a + g.b * a + g.c * d;
    h.b = g.b * b + g.c * e;
    h.c = g.b * c + g.c * f;
    h.d = g.d + g.e * a + g.f * d;
    h.e = g.e * b + g.f * e;
    h.f = g.e * c + g.f * f;
    return h;
  }
};

}  // namespace ctmp
