#ifndef ADZETA_LINALG_HPP
#define ADZETA_LINALG_HPP

#include <random>

#include "adzeta/types.hpp"

namespace adzeta {

// ||M M* - Id||  (spectral norm estimated by Frobenius)
double unitary_defect(const Mat& M);

bool is_unitary(const Mat& M, double tol = 1e-8);

// Haar-distributed unitary, deterministic for a given engine state.
Mat random_unitary(int n, std::mt19937_64& rng);

// Random Hermitian with unit-scale entries.
Mat random_hermitian(int n, std::mt19937_64& rng);

// log |det M| and arg det M via partial-pivot LU; safe for widely scaled
// matrices (never forms the raw product).
struct LogDet {
  double log_abs;
  double arg;  // in (-pi, pi] up to accumulated winding of pivot phases
  cplx unit() const;
};
LogDet log_det(const Mat& M);

// Nullity of M relative to its scale: singular values below tol * s_max
// after row/column equilibration.
int nullity(const Mat& M, double tol = kKernelTol);

// Orthonormal basis of the column span (rank decided at tol * s_max).
Mat orthonormal_range(const Mat& A, double tol = kKernelTol);

// Orthonormal basis of ker M.
Mat kernel_basis(const Mat& M, double tol = kKernelTol);

// dim(span A  ∩  span B) via principal angles; A, B orthonormal columns.
int intersection_dim(const Mat& A, const Mat& B, double tol = kKernelTol);

// Orthonormal basis of the intersection.
Mat intersection_basis(const Mat& A, const Mat& B, double tol = kKernelTol);

// Multiplicity of eigenvalue +1 of a unitary U (|e^{i a} - 1| <= tol).
int plus_one_multiplicity(const Mat& U, double tol = kKernelTol);

// Eigen-decomposition of a (near-)unitary matrix via complex Schur;
// returns unitary eigenbasis and unimodular eigenvalues.
void unitary_eigensystem(const Mat& C, Vec& eigs, Mat& vecs);

// Linear least squares fit y ~ a + b x; returns {a, b}.
std::pair<double, double> linear_fit(const std::vector<double>& x,
                                     const std::vector<double>& y);

}  // namespace adzeta

#endif
