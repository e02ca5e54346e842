#ifndef ADZETA_ZETA_ETA_HPP
#define ADZETA_ZETA_ETA_HPP

// Regularized spectral invariants: the relative zeta function of the
// triple (D_R, (D_1,R)_{P_1}, (D_2,R)_{P_2}) and its derivative at 0,
// zeta_{B^2}(0), and the eta identities of the graded algebra.

#include <functional>

#include "adzeta/fiber.hpp"
#include "adzeta/ode.hpp"
#include "adzeta/scattering.hpp"

namespace adzeta {

// zeta_{B^2}(0) = number of nonzero eigenvalues of B over Y.
int zeta_b2_zero(const FiberStructure& F);

struct RelativeHeatTrace {
  std::vector<double> sq_closed, sq_side1, sq_side2;  // nonzero lambda^2
  double window = 0.0;
  double density_bound = 0.0;  // Weyl density bound for tail estimates
  int h = 0;                   // h_M - h1 - h2
  double f0 = 0.0;             // exact t->0 value of the relative trace
  double f0_extrapolated = 0.0;
  double f0_residual = 0.0;

  static RelativeHeatTrace from_lists(const EigenvalueList& closed,
                                      const EigenvalueList& side1,
                                      const EigenvalueList& side2,
                                      const CountData& counts,
                                      double evalue_threshold);

  double eval(double t) const;        // f~(t) from the truncated sums
  double tail_bound(double t) const;  // certified truncation bound
  double min_usable_t(double bound = 1e-9) const;
};

// spec surface: f~(t) with the certification requirement enforced
double relative_heat_trace(const RelativeHeatTrace& tr, double t);

struct ZetaResult {
  double zeta0 = 0.0;
  double zeta_prime0 = 0.0;
  double det = 1.0;
  std::string path;
};

// Exact continuation for spectral data: exponential-integral sums plus a
// sqrt(t)-model on [0, t_c].
ZetaResult relative_zeta_prime0(const RelativeHeatTrace& tr);

// Generic continuation for a trace function given as a callable
// (adaptive quadrature; exponential tail completion).
ZetaResult relative_zeta_quadrature(const std::function<double(double)>& f,
                                    double f0);

// Small-time diagnostic: int_0^{R^{2-eps}} t^{-1} (f~(t) - f0) dt, which
// approaches zeta_{B^2}(0) log 2 in the stretched limit.
double small_time_diagnostic(const RelativeHeatTrace& tr, double R,
                             double epsilon);

struct EtaResult {
  double value = 0.0;  // in [0, 1)
  std::string path;
};

// eta(D; sigma1, sigma2) of the cylinder operator, matrix path.
EtaResult eta_cylinder(const BoundaryInvolution& s1,
                       const BoundaryInvolution& s2);

// eta from an enumerated spectrum: mean of the signed counting function
// over the window [a, b] plus half the kernel dimension (exact for
// lattice spectra when b - a is a multiple of the common spacing).
double eta_from_spectrum(const EigenvalueList& spec, double a, double b,
                         double zero_tol = 1e-9);

struct EtaDecompReport {
  double triple = 0.0;       // eta(D(C12)) - eta(D(S1)) - eta(D(S2)) mod 1
  double rhs = 0.0;          // -(1/2 pi i) log det(-sigma(1)_- sigma(2)_+)
  double dev_mod1 = 0.0;
  cplx det_lhs, det_rhs;     // det C12 / (det S1 det S2) vs det(s1+ s2-)
  double det_identity_dev = 0.0;
};

// The graded eta identity: inputs are the lambda = 0 scattering
// involutions and the boundary involutions on ker B (canonical basis).
EtaDecompReport eta_decomposition_check(const Mat& C1, const Mat& C2,
                                        const Mat& sigma1, const Mat& sigma2);

}  // namespace adzeta

#endif
