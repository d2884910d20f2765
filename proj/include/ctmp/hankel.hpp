#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "ctmp/types.hpp"

namespace ctmp {

// Real sequence gamma_{k1..k2} on a contiguous index range; k1 may be
// negative (strong problems).
class UnivariateMomentSequence {
 public:
  UnivariateMomentSequence(long k1, std::vector<double> values)
      : k1_(k1), values_(std::move(values)) {
    if (values_.empty()) throw Error("empty univariate sequence");
  }

  static UnivariateMomentSequence zero_based(std::vector<double> values) {
    return {0, std::move(values)};
  }

  long k1() const { return k1_; }
  long k2() const { return k1_ + static_cast<long>(values_.size()) - 1; }
  long length() const { return static_cast<long>(values_.size()); }

  double at(long t) const {
    if (t < k1() || t > k2()) throw Error("sequence index out of range");
    return values_[static_cast<std::size_t>(t - k1_)];
  }

  const std::vector<double>& values() const { return values_; }

  UnivariateMomentSequence sub(long lo, long hi) const {
    if (lo < k1() || hi > k2() || lo > hi)
      throw Error("subsequence range out of bounds");
    return {lo, std::vector<double>(values_.begin() + (lo - k1_),
                                    values_.begin() + (hi - k1_ + 1))};
  }

  UnivariateMomentSequence reversed() const {
    std::vector<double> rev(values_.rbegin(), values_.rend());
    return {k1_, std::move(rev)};
  }

  double max_abs() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
  }

 private:
  long k1_;
  std::vector<double> values_;
};

// Index range with known values on N1 and unknowns (holes) on N2;
// N1 and N2 partition [k1..k2].
class PartialUnivariateSequence {
 public:
  PartialUnivariateSequence(long k1, long k2)
      : k1_(k1),
        values_(static_cast<std::size_t>(k2 - k1 + 1), 0.0),
        known_(static_cast<std::size_t>(k2 - k1 + 1), false) {
    if (k2 < k1) throw Error("empty index range");
  }

  explicit PartialUnivariateSequence(const UnivariateMomentSequence& full)
      : k1_(full.k1()),
        values_(full.values()),
        known_(full.values().size(), true) {}

  long k1() const { return k1_; }
  long k2() const { return k1_ + static_cast<long>(values_.size()) - 1; }
  long length() const { return static_cast<long>(values_.size()); }

  bool is_known(long t) const { return known_[pos(t)]; }

  double at(long t) const {
    if (!known_[pos(t)])
      throw Error("index " + std::to_string(t) + " is unknown");
    return values_[pos(t)];
  }

  void set_known(long t, double v) {
    values_[pos(t)] = v;
    known_[pos(t)] = true;
  }

  std::vector<long> unknown_indices() const {
    std::vector<long> u;
    for (long t = k1(); t <= k2(); ++t)
      if (!is_known(t)) u.push_back(t);
    return u;
  }

  std::vector<long> known_indices() const {
    std::vector<long> v;
    for (long t = k1(); t <= k2(); ++t)
      if (is_known(t)) v.push_back(t);
    return v;
  }

  // Fully known ranges convert to a plain sequence.
  UnivariateMomentSequence full() const {
    if (!unknown_indices().empty())
      throw Error("sequence still has unknown entries");
    return {k1_, values_};
  }

  // Copy with the holes filled from the given values (by index).
  UnivariateMomentSequence completed_with(
      const std::vector<std::pair<long, double>>& fills) const {
    PartialUnivariateSequence p(*this);
    for (const auto& [t, v] : fills) p.set_known(t, v);
    return p.full();
  }

  double max_abs_known() const {
    double m = 0.0;
    for (long t = k1(); t <= k2(); ++t)
      if (is_known(t)) m = std::max(m, std::abs(values_[pos(t)]));
    return m;
  }

 private:
  std::size_t pos(long t) const {
    if (t < k1() || t > k2()) throw Error("sequence index out of range");
    return static_cast<std::size_t>(t - k1_);
  }

  long k1_;
  std::vector<double> values_;
  std::vector<bool> known_;
};

// Square Hankel matrix of an odd-length sequence, with the corner and
// reversal accessors. Entry (i,j) holds the value at index k1 + i + j.
struct HankelView {
  long k1 = 0;
  int m = 0;  // matrix size is (m+1) x (m+1)
  Eigen::MatrixXd matrix;
  UnivariateMomentSequence source;

  // Upper left-hand corner of size mp+1.
  Eigen::MatrixXd upper_left(int mp) const {
    return matrix.topLeftCorner(mp + 1, mp + 1);
  }

  // Lower right-hand corner of size mp+1.
  Eigen::MatrixXd lower_right(int mp) const {
    return matrix.bottomRightCorner(mp + 1, mp + 1);
  }

  UnivariateMomentSequence reversed_sequence() const {
    return source.reversed();
  }
};

// EvenLength if the sequence has even length.
HankelView hankel_from(const UnivariateMomentSequence& v);

// Rank of a sequence: m+1 when A_v is nonsingular, otherwise the least i
// whose column lies in the span of its predecessors. The all-zero
// sequence has rank 0.
int sequence_rank(const UnivariateMomentSequence& v, double tol);

struct PrgResult {
  bool is_prg = false;
  int rank = 0;
  std::optional<std::vector<double>> phi;  // set when the flat recursion ran
};

struct NrgResult {
  bool is_nrg = false;
  int rank_rev = 0;
  std::optional<std::vector<double>> psi;
};

// Positively recursively generated test: A_v(r-1) > 0 and, when r < m+1,
// v_j = sum_i phi_i v_{j-r+i} for all j up to the top index.
PrgResult check_prg(const UnivariateMomentSequence& v, double tol);

// Mirror of check_prg toward lower indices, on the reversed sequence.
NrgResult check_nrg(const UnivariateMomentSequence& v, double tol);

// Shared helpers for rank/pd decisions on symmetric matrices.
double symmetric_scale(const Eigen::MatrixXd& A);
bool is_psd(const Eigen::MatrixXd& A, double psd_tol);
bool is_pd(const Eigen::MatrixXd& A, double tol);
int numeric_rank(const Eigen::MatrixXd& A, double rank_tol);

}  // namespace ctmp
