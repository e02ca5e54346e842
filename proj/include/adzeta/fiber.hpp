#ifndef ADZETA_FIBER_HPP
#define ADZETA_FIBER_HPP

// Finite-dimensional algebra of the cross-section data: the (G, B) pair
// over the two cut points, spectral projections, involutions on ker B,
// and the graded block decompositions used by the eta identities.
//
// Conventions (fixed throughout the project):
//  * per point the fiber is C^{2m} with G = diag(i I_m, -i I_m) and
//    B0 = [[0, W0^H], [W0, 0]];
//  * the cross-section fiber is F_p ⊕ F_q (p block first);
//  * ker B_Y carries the canonical ordered basis
//    [plus(p), plus(q), minus(p), minus(q)], so the G grading is
//    diag(i, -i) in block form and admissible involutions look like
//    [[0, V^H], [V, 0]].

#include "adzeta/types.hpp"

namespace adzeta {

struct FiberStructure {
  int m = 0;
  int n_points = 2;
  Mat W0;  // m x m
  Mat G;   // 2m x 2m, per point
  Mat B0;  // 2m x 2m, per point

  // derived data
  int rank_w = 0;        // rank of W0
  int ker_per_point = 0; // dim ker B0 = 2 (m - rank_w)
  int h_Y = 0;           // dim ker B over all points
  double mu1 = 0.0;      // smallest positive eigenvalue of B0 (inf if none)
  Mat U_svd, V_svd;      // W0 = U S V^H
  RVec svals;
  Mat ker_plus_pt;       // 2m x d, basis of (ker B0)_+ at one point
  Mat ker_minus_pt;      // 2m x d
  Mat kappa_p;           // trace gauge at the p end

  static FiberStructure standard(int m, const Mat& W0, int n_points = 2);

  int fiber_dim() const { return 2 * m; }
  int y_dim() const { return n_points * 2 * m; }
  int d_half() const { return h_Y / 2; }

  Mat GY() const;
  Mat BY() const;
  Mat ker_basis() const;        // y_dim x h_Y, canonical order
  Mat ker_plus_basis() const;   // y_dim x h_Y/2
  Mat ker_minus_basis() const;
  Mat pi_less() const;          // APS projection onto negative B_Y modes
  Mat pi_greater() const;
};

struct FiberReport {
  bool valid = true;
  std::vector<std::string> failures;
  double worst_defect = 0.0;
  int h_Y = 0;
  int ker_per_point = 0;
  double mu1 = 0.0;
};

// Asserts all structure invariants within tolerance 1e-12 (rank decisions
// at the shared kKernelTol).  Never throws; failures are reported.
FiberReport validate_fiber(const FiberStructure& F);

struct BoundaryInvolution {
  Mat sigma;  // h_Y x h_Y in the canonical ker basis; empty when h_Y = 0
};

// sigma = [[0, V^H], [V, 0]] with V unitary on the plus block.
BoundaryInvolution involution_from_block(const Mat& V);

// Checks sigma^2 = Id, sigma* = sigma and G sigma = -sigma G.
void check_involution(const Mat& sigma, double tol = 1e-8);

struct SpectralProjectionSpec {
  Mat P;         // y_dim x y_dim orthogonal projection
  int aps_rank = 0;
  int inv_rank = 0;
};

// P_1 = Pi_< + pi_1,  P_2 = Pi_> + pi_2.  sigma may be null when ker B = 0.
SpectralProjectionSpec aps_projection(const FiberStructure& F,
                                      const BoundaryInvolution* sigma,
                                      int side);

struct UnitaryEigenphases {
  std::vector<double> phases;  // ascending in [0, 2pi), 0 reserved for +1
  Mat vectors;                 // unitary eigenbasis, columns match phases
  int kernel_mult = 0;         // multiplicity of phase 0
  double recon_error = 0.0;
};

UnitaryEigenphases eigenphases(const Mat& C);

// Determinant of a normal matrix restricted to (ker)^perp; empty product
// is 1.  Threshold is relative to the spectral scale.
cplx reduced_det(const Mat& A, double tol = kKernelTol,
                 int* kernel_dim = nullptr);

struct GradedBlocks {
  Mat plus;   // (ker B)_+ -> (ker B)_-
  Mat minus;  // (ker B)_- -> (ker B)_+
  double diag_defect = 0.0;
};

// Off-diagonal blocks of a unitary on ker B anticommuting with G.
// Verifies the vanishing diagonal blocks and plus*minus = Id.
GradedBlocks graded_blocks(const Mat& C, double tol = 1e-8);

// U_+ = (sigma_1 sigma_2)|_{(ker B)_+}
Mat u_plus(const BoundaryInvolution& s1, const BoundaryInvolution& s2);

}  // namespace adzeta

#endif
