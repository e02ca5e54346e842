#ifndef ADZETA_ODE_HPP
#define ADZETA_ODE_HPP

// Transfer-matrix spectral solver for the 1-D operators.  Everything
// runs through the first-order system psi' = -(B(u) + lambda G) psi:
// transfer matrices (exact exponentials on constant pieces, a 4th-order
// commutator-free integrator on profiled pieces, Chebyshev-cached in
// lambda), a channel-form secular determinant that stays bounded across
// stretched necks, and certified eigenvalue enumeration by contour
// winding counts.

#include <memory>
#include <mutex>

#include "adzeta/geometry.hpp"
#include "adzeta/linalg.hpp"
#include "adzeta/types.hpp"

namespace adzeta {

// ----------------------------------------------------------------- transfer

// Transfer matrix over [0, seg.length]: Psi(length) = T Psi(0), accurate
// to ~1e-10 relative.  Complex lambda is allowed (contour evaluation).
Mat transfer(const Segment& seg, cplx lambda, double tol = 1e-11);

// Transfer over a sub-interval [a, b] of the segment.
Mat transfer_interval(const Segment& seg, double a, double b, cplx lambda,
                      double tol = 1e-11);

// Chebyshev cache of an arc transfer over a symmetric lambda window;
// thread-safe, grows on demand.
class TransferCache {
 public:
  TransferCache(Segment arc, double lambda_max);
  Mat eval(cplx lambda) const;
  const Segment& segment() const { return arc_; }
  int degree() const;

 private:
  struct Data {
    double lmax;
    std::vector<Mat> coeff;  // Chebyshev coefficients
  };
  void ensure(double lmax) const;
  Segment arc_;
  mutable std::mutex mutex_;
  mutable std::shared_ptr<const Data> data_;
};

// ----------------------------------------------------------------- channels

// mu-pair invariant planes of B0 and the kernel bases; the building
// blocks of the constant-neck solution space.
struct ChannelData {
  int n = 0;                    // ODE dimension
  std::vector<double> mu;       // positive B eigenvalues, one per pair
  std::vector<Mat> pair_basis;  // n x 2 orthonormal columns (phi, G phi)
  Mat ker_plus, ker_minus;      // n x d
};

ChannelData point_channels(const FiberStructure& F);  // n = 2m
ChannelData y_channels(const FiberStructure& F);      // n = 2m * n_points

// Bounded solution basis on a constant neck [0, len]: columns at both
// ends.  Hyperbolic pairs switch from the entire 2x2 exponential to the
// split normalization only when the growth would exceed exp(kSplit);
// the choice is fixed per enumeration panel to keep the determinant
// analytic along contours.
struct NeckBasis {
  Mat phi0, phiL;  // n x n
};

inline constexpr double kSplitLog = 9.0;

NeckBasis neck_basis(const ChannelData& ch, cplx lambda, double len,
                     const std::vector<bool>& split_pair);

// Split decision for a real window [lo, hi] (with contour margin).
std::vector<bool> split_plan(const ChannelData& ch, double lo, double hi,
                             double len);

// ----------------------------------------------------------- secular forms

class SpectralProblem {
 public:
  enum class Kind { closed, half, cylinder };

  static SpectralProblem closed(const ClosedDescriptor& d);
  static SpectralProblem half(const HalfDescriptor& d);
  // D = G(d/du + B) on [-len/2, len/2] x Y with P2 at the left end and
  // P1 at the right end (the cylinder eta operator).
  static SpectralProblem cylinder(const FiberStructure& F, const Mat& P2,
                                  const Mat& P1, double length);

  Kind kind() const { return kind_; }
  int ode_dim() const { return channels_.n; }
  double total_length() const { return total_length_; }
  double neck_length() const { return neck_len_; }
  const ChannelData& channels() const { return channels_; }
  double weyl_expected(double window) const;
  const FiberStructure& fiber() const { return fiber_; }
  std::string id() const { return id_; }

  // secular matrix (bounded rows/columns) under a fixed split plan
  Mat secular_matrix(cplx lambda, const std::vector<bool>& split) const;
  LogDet secular(cplx lambda, const std::vector<bool>& split) const;
  std::vector<bool> plan(double lo, double hi) const;

  // convenience: plan chosen from the point alone
  LogDet secular_at(double lambda) const;
  Mat secular_matrix_at(double lambda) const;

 private:
  Kind kind_ = Kind::closed;
  FiberStructure fiber_;
  ChannelData channels_;
  double total_length_ = 0.0;
  double neck_len_ = 0.0;  // length of one neck piece
  std::string id_;
  // closed: arcs[0], arcs[1]; half: arcs[0]; cylinder: none
  std::vector<std::shared_ptr<TransferCache>> arcs_;
  Mat Qcond_;       // orthonormal basis of range(P) (half/cylinder)
  Mat Qcond_left_;  // cylinder: left condition basis
  Mat kappa_p_;     // trace gauge
  bool p_at_left_ = true;
};

// --------------------------------------------------------------- enumeration

struct EigenvalueEntry {
  double value = 0.0;
  int multiplicity = 1;
};

struct EigenvalueList {
  double window = 0.0;
  std::string operator_id;
  std::vector<EigenvalueEntry> entries;  // ascending
  // certification block
  int panels = 0;
  int contour_evals = 0;
  int density_rounds = 0;
  double weyl_expected = 0.0;
  double min_gap = 0.0;

  std::vector<double> all() const;
  int total_count() const;
  int count_zero(double tol) const;
};

struct EnumOptions {
  double density_factor = 2.0;   // panel density relative to Weyl spacing
  double refine_tol = 1e-11;
  int max_density_rounds = 3;
  double weyl_slack_extra = 4.0;
};

EigenvalueList enumerate_eigenvalues(const SpectralProblem& P, double window,
                                     const EnumOptions& opt = {});

// dim ker at lambda = 0 by SVD nullity of the (equilibrated) secular
// matrix; borderline singular values are reported through *flagged.
int kernel_dim(const SpectralProblem& P, bool* flagged = nullptr);

// dim ker_{L2} D_{i,infty}: decaying subspaces propagated across the arc.
int l2_kernel_dim_infinite(const ManifoldConfig& cfg, int side);

// spec-level secular values (monodromy / boundary determinant)
cplx secular_closed(const ManifoldConfig& cfg, double lambda);
cplx secular_boundary(const ManifoldConfig& cfg, int side, double lambda);

}  // namespace adzeta

#endif
