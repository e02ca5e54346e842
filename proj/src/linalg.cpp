#include "adzeta/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/QR>
#include <Eigen/SVD>
#include <cmath>

namespace adzeta {

double unitary_defect(const Mat& M) {
  Mat d = M * M.adjoint() - Mat::Identity(M.rows(), M.rows());
  return d.norm();
}

bool is_unitary(const Mat& M, double tol) {
  return M.rows() == M.cols() && unitary_defect(M) <= tol * M.rows();
}

Mat random_unitary(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Mat Z(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) Z(i, j) = cplx(g(rng), g(rng));
  Eigen::HouseholderQR<Mat> qr(Z);
  Mat Q = qr.householderQ() * Mat::Identity(n, n);
  Mat R = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < n; ++j) {
    cplx r = R(j, j);
    cplx ph = (std::abs(r) > 0) ? r / std::abs(r) : cplx(1, 0);
    Q.col(j) *= ph;
  }
  return Q;
}

Mat random_hermitian(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Mat Z(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) Z(i, j) = cplx(g(rng), g(rng));
  return 0.5 * (Z + Z.adjoint());
}

cplx LogDet::unit() const { return std::exp(cplx(0.0, arg)); }

LogDet log_det(const Mat& M) {
  Eigen::PartialPivLU<Mat> lu(M);
  const Mat& LU = lu.matrixLU();
  double log_abs = 0.0, arg = 0.0;
  for (int i = 0; i < M.rows(); ++i) {
    cplx p = LU(i, i);
    log_abs += std::log(std::abs(p));
    arg += std::arg(p);
  }
  if (lu.permutationP().determinant() < 0) arg += kPi;
  return {log_abs, arg};
}

namespace {

// Ruiz-style row/column equilibration; keeps the null space intact.
Mat equilibrated(const Mat& M) {
  Mat A = M;
  const int n = A.rows(), m = A.cols();
  for (int pass = 0; pass < 3; ++pass) {
    for (int i = 0; i < n; ++i) {
      double r = A.row(i).norm();
      if (r > 0) A.row(i) /= std::sqrt(r);
    }
    for (int j = 0; j < m; ++j) {
      double c = A.col(j).norm();
      if (c > 0) A.col(j) /= std::sqrt(c);
    }
  }
  return A;
}

}  // namespace

int nullity(const Mat& M, double tol) {
  Mat A = equilibrated(M);
  Eigen::JacobiSVD<Mat> svd(A);
  const auto& s = svd.singularValues();
  if (s.size() == 0) return 0;
  double smax = s(0);
  if (smax == 0) return static_cast<int>(s.size());
  int k = 0;
  for (int i = 0; i < s.size(); ++i)
    if (s(i) <= tol * smax) ++k;
  return k;
}

Mat orthonormal_range(const Mat& A, double tol) {
  if (A.cols() == 0) return Mat(A.rows(), 0);
  Eigen::JacobiSVD<Mat> svd(A, Eigen::ComputeThinU);
  const auto& s = svd.singularValues();
  double smax = (s.size() > 0) ? s(0) : 0.0;
  int r = 0;
  for (int i = 0; i < s.size(); ++i)
    if (smax > 0 && s(i) > tol * smax) ++r;
  return svd.matrixU().leftCols(r);
}

Mat kernel_basis(const Mat& M, double tol) {
  Eigen::JacobiSVD<Mat> svd(M, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  double smax = (s.size() > 0) ? s(0) : 0.0;
  int rank = 0;
  for (int i = 0; i < s.size(); ++i)
    if (smax > 0 && s(i) > tol * smax) ++rank;
  return svd.matrixV().rightCols(M.cols() - rank);
}

int intersection_dim(const Mat& A, const Mat& B, double tol) {
  if (A.cols() == 0 || B.cols() == 0) return 0;
  Eigen::JacobiSVD<Mat> svd(Mat(A.adjoint() * B));
  const auto& s = svd.singularValues();
  int k = 0;
  for (int i = 0; i < s.size(); ++i)
    if (s(i) >= 1.0 - tol) ++k;
  return k;
}

Mat intersection_basis(const Mat& A, const Mat& B, double tol) {
  if (A.cols() == 0 || B.cols() == 0) return Mat(A.rows(), 0);
  Eigen::JacobiSVD<Mat> svd(Mat(A.adjoint() * B), Eigen::ComputeFullU);
  const auto& s = svd.singularValues();
  int k = 0;
  for (int i = 0; i < s.size(); ++i)
    if (s(i) >= 1.0 - tol) ++k;
  Mat basis = A * svd.matrixU().leftCols(k);
  for (int j = 0; j < k; ++j) basis.col(j).normalize();
  return basis;
}

int plus_one_multiplicity(const Mat& U, double tol) {
  Vec eigs;
  Mat vecs;
  unitary_eigensystem(U, eigs, vecs);
  int k = 0;
  for (int i = 0; i < eigs.size(); ++i)
    if (std::abs(eigs(i) - cplx(1, 0)) <= tol) ++k;
  return k;
}

void unitary_eigensystem(const Mat& C, Vec& eigs, Mat& vecs) {
  // Schur of a normal matrix: T is diagonal to rounding and the Schur
  // basis is an orthonormal eigenbasis.
  Eigen::ComplexSchur<Mat> schur(C, true);
  vecs = schur.matrixU();
  eigs = schur.matrixT().diagonal();
}

std::pair<double, double> linear_fit(const std::vector<double>& x,
                                     const std::vector<double>& y) {
  const size_t n = x.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  double denom = n * sxx - sx * sx;
  double b = (denom != 0) ? (n * sxy - sx * sy) / denom : 0.0;
  double a = (sy - b * sx) / n;
  return {a, b};
}

}  // namespace adzeta
