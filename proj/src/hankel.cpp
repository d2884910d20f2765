#include "ctmp/hankel.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <cmath>

namespace ctmp {

double symmetric_scale(const Eigen::MatrixXd& A) {
  return std::max(A.cwiseAbs().maxCoeff(), 1e-300);
}

bool is_psd(const Eigen::MatrixXd& A, double psd_tol) {
  if (A.rows() == 0) return true;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff() >=
         -psd_tol * std::max(1.0, symmetric_scale(A));
}

bool is_pd(const Eigen::MatrixXd& A, double tol) {
  if (A.rows() == 0) return true;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff() > tol * symmetric_scale(A);
}

int numeric_rank(const Eigen::MatrixXd& A, double rank_tol) {
  if (A.rows() == 0 || A.cols() == 0) return 0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A, Eigen::EigenvaluesOnly);
  const double scale = es.eigenvalues().cwiseAbs().maxCoeff();
  if (scale <= 0.0) return 0;
  int r = 0;
  for (int i = 0; i < es.eigenvalues().size(); ++i)
    if (std::abs(es.eigenvalues()(i)) > rank_tol * scale) ++r;
  return r;
}

HankelView hankel_from(const UnivariateMomentSequence& v) {
  if (v.length() % 2 == 0)
    throw EvenLength("Hankel matrix needs an odd-length sequence");
  const int m = static_cast<int>((v.length() - 1) / 2);
  Eigen::MatrixXd A(m + 1, m + 1);
  for (int i = 0; i <= m; ++i)
    for (int j = 0; j <= m; ++j) A(i, j) = v.at(v.k1() + i + j);
  return HankelView{v.k1(), m, std::move(A), v};
}

int sequence_rank(const UnivariateMomentSequence& v, double tol) {
  const HankelView H = hankel_from(v);
  const int n = H.m + 1;
  const double scale = symmetric_scale(H.matrix);

  // Incremental column-span test with least-squares residuals relative
  // to the column norms.
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd col = H.matrix.col(i);
    double resid;
    if (i == 0) {
      resid = col.norm();
    } else {
      const Eigen::MatrixXd prev = H.matrix.leftCols(i);
      const Eigen::VectorXd coeffs = prev.colPivHouseholderQr().solve(col);
      resid = (prev * coeffs - col).norm();
    }
    if (resid <= tol * std::max(col.norm(), scale)) return i;
  }
  return n;
}

namespace {

// phi = A_v(r-1)^{-1} (v_r ... v_{2r-1})^T for a zero-based view of v.
std::vector<double> recursion_coeffs(const HankelView& H, int r) {
  Eigen::MatrixXd corner = H.upper_left(r - 1);
  Eigen::VectorXd rhs(r);
  for (int i = 0; i < r; ++i) rhs(i) = H.source.at(H.k1 + r + i);
  Eigen::VectorXd phi = corner.ldlt().solve(rhs);
  return {phi.data(), phi.data() + r};
}

bool recursion_holds(const UnivariateMomentSequence& v,
                     const std::vector<double>& phi, double tol) {
  const int r = static_cast<int>(phi.size());
  const double scale = std::max(1.0, v.max_abs());
  for (long j = v.k1() + r; j <= v.k2(); ++j) {
    double pred = 0.0;
    for (int i = 0; i < r; ++i) pred += phi[i] * v.at(j - r + i);
    if (std::abs(v.at(j) - pred) > tol * scale) return false;
  }
  return true;
}

}  // namespace

PrgResult check_prg(const UnivariateMomentSequence& v, double tol) {
  PrgResult res;
  res.rank = sequence_rank(v, tol);
  const HankelView H = hankel_from(v);
  const int n = H.m + 1;

  if (res.rank == 0) {
    // All-zero sequence: the zero measure, prg with empty recursion.
    res.is_prg = true;
    res.phi = std::vector<double>{};
    return res;
  }
  if (res.rank == n) {
    res.is_prg = is_pd(H.matrix, tol);
    return res;
  }
  if (!is_pd(H.upper_left(res.rank - 1), tol)) return res;
  res.phi = recursion_coeffs(H, res.rank);
  res.is_prg = recursion_holds(v, *res.phi, tol);
  return res;
}

NrgResult check_nrg(const UnivariateMomentSequence& v, double tol) {
  // nrg(v) is prg of the reversed sequence; psi is the reversed phi.
  const PrgResult rev = check_prg(v.reversed(), tol);
  NrgResult res;
  res.is_nrg = rev.is_prg;
  res.rank_rev = rev.rank;
  if (rev.phi) {
    std::vector<double> psi(rev.phi->rbegin(), rev.phi->rend());
    res.psi = std::move(psi);
  }
  return res;
}

}  // namespace ctmp
