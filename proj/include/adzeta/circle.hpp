#ifndef ADZETA_CIRCLE_HPP
#define ADZETA_CIRCLE_HPP

// Model operators D(C) = -(i/2) d/du on the unit circle with holonomy
// conj(C): exact spectra {pi k - alpha_j/2}, zeta-determinants by closed
// form and by Hurwitz regularization, and eta invariants.

#include "adzeta/types.hpp"

namespace adzeta {

struct CircleOperator {
  Mat C;              // unitary holonomy datum
  std::string label;  // "c12", "s_sigma1", "s_sigma2" or free-form

  explicit CircleOperator(Mat c, std::string lbl = "generic");
};

struct ModelEigenvalue {
  double value;
  int branch;  // phase index j
  int k;       // lattice index
};

struct ModelSpectrum {
  double window = 0.0;
  std::vector<ModelEigenvalue> eigenvalues;  // sorted ascending

  std::vector<double> values() const;
};

// Complete enumeration of {pi k - alpha_j/2 : |...| <= window}.
ModelSpectrum model_spectrum(const CircleOperator& op, double window);

struct CircleDet {
  double det = 1.0;    // zeta-determinant of D(C)^2 over the nonzero modes
  int kernel_dim = 0;  // multiplicity of phase 0 = dim ker D(C)
  double det_star = 1.0;  // det* ((2 - C - C^{-1})/4), kernel modes dropped
};

// Closed form: each nonzero phase contributes 4 sin^2(alpha/2); each
// kernel phase channel contributes 4 (the regularized product over
// the nonzero lattice {pi k, k != 0}).
CircleDet zeta_det_circle(const CircleOperator& op);

// Independent oracle: Hurwitz-zeta continuation of sum (lambda^2)^{-s}.
double zeta_det_circle_hurwitz(const CircleOperator& op);

// Right-hand side of the adiabatic decomposition formula:
// 2^{-zeta_{B^2}(0) - h_Y + 2 h_M} det*((2 - C12 - C12^{-1})/4)
//   prod_i det*((2 - S_i - S_i^{-1})/4)^{-1}.
double paper_rhs(const Mat& C12, const Mat& S1, const Mat& S2, int h_Y,
                 int h_M, int zeta_B2_0);

// eta(D(C)) mod 1 via -(1/2 pi i) Log det(-conj(C)), principal branch.
double eta_circle(const CircleOperator& op);

// Eta by spectral series: per-channel signed sums over |lambda| <= window
// completed exactly with Hurwitz zeta values at s = 0, plus kernel/2.
double eta_series(const CircleOperator& op, double window);

inline double mod1(double x) {
  double y = std::fmod(x, 1.0);
  return (y < 0) ? y + 1.0 : y;
}

// distance on R/Z
inline double mod1_dist(double a, double b) {
  double d = std::abs(mod1(a) - mod1(b));
  return std::min(d, 1.0 - d);
}

}  // namespace adzeta

#endif
