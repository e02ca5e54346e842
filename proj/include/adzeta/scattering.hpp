#ifndef ADZETA_SCATTERING_HPP
#define ADZETA_SCATTERING_HPP

// Scattering data of the infinite-neck halves: scattering matrices
// C_i(lambda) on ker B from the bounded-solution matching problem,
// limiting spaces L_i, the composites C12 and S_sigma, secular root
// sets Omega(R), s-value matching reports and the Maass-Selberg check.
//
// All ker B objects are expressed in the fiber's canonical kernel basis
// [plus(p), plus(q), minus(p), minus(q)].

#include <functional>

#include "adzeta/circle.hpp"
#include "adzeta/ode.hpp"

namespace adzeta {

// Bounded-solution matching solver for one side of the cut.
class SideSolver {
 public:
  SideSolver(const ManifoldConfig& cfg, int side);

  int side() const { return side_; }
  double mu1() const { return fiber_.mu1; }
  int d_half() const { return fiber_.h_Y / 2; }

  // primary scattering block at lambda (|lambda| < mu1):
  // side 1: (ker B)_+ -> (ker B)_-,  side 2: (ker B)_- -> (ker B)_+
  Mat block(double lambda) const;

  // full unitary C(lambda) on ker B (kernel-basis coordinates), assembled
  // from block(lambda) and block(-lambda)^{-1}
  Mat full(double lambda) const;

  // generalized eigensection attached to psi in ker B (coordinates in the
  // canonical kernel basis)
  struct Eigensection {
    double lambda = 0.0;
    Vec psi;                   // ker-basis coordinates
    Vec incoming_p, incoming_q;  // fiber vectors of the zero-mode input
    Vec value_at_arc_left;     // psi(0) on the arc
    Vec out_p, out_q;          // outgoing coefficients
    Vec dec_p, dec_q;          // decaying-channel coefficients
    // samples along the arc (x, value)
    std::vector<std::pair<double, Vec>> arc_samples;
    // neck value at distance v from the arc junction (standard frame)
    std::function<Vec(int /*point: 0=p,1=q*/, double /*v*/)> neck_value;
  };
  Eigensection eigensection(const Vec& psi_coords, double lambda,
                            int arc_samples = 400) const;

  const FiberStructure& fiber() const { return fiber_; }
  const ManifoldConfig& config() const { return cfg_; }

 private:
  ManifoldConfig cfg_;
  int side_;
  FiberStructure fiber_;
  ChannelData channels_;
  Segment arc_;
  std::shared_ptr<TransferCache> cache_;
  struct Solution;
  Solution solve(const Mat& in_coeff, double lambda) const;
};

struct ScatteringFamily {
  enum class Kind { side1, side2, c12, s_sigma1, s_sigma2, synthetic };
  Kind kind = Kind::synthetic;
  std::vector<double> grid;
  std::vector<Mat> C;       // samples on the family's own space
  std::vector<Mat> Cprime;  // derivative samples (central differences)
  // continuously tracked eigenphase branches: alpha[j][i] at grid[i]
  std::vector<std::vector<double>> alpha;
  std::vector<Mat> branch_vectors;  // per grid point, columns match branches
  std::function<Mat(double)> sampler;
  double fd_step = 1e-4;

  int dim() const { return C.empty() ? 0 : static_cast<int>(C[0].rows()); }
  Mat at(double lambda) const { return sampler(lambda); }
  // exact phase of branch j at lambda (eigen-decompose + match)
  double branch_phase(int j, double lambda) const;
  double branch_phase_derivative(int j, double lambda) const;
  Mat value_at_zero() const;
};

// Sample a family on a symmetric grid and track branches.
ScatteringFamily make_family(ScatteringFamily::Kind kind,
                             std::function<Mat(double)> sampler,
                             double delta, int points);

// side scattering family C_i(lambda) on ker B (full matrix).
ScatteringFamily scattering_family(const ManifoldConfig& cfg, int side,
                                   double delta, int points);

// One-shot operations (spec surface).
Mat scattering_matrix(const ManifoldConfig& cfg, int side, double lambda);

// Orthonormal basis of L = ker(C0 - 1); requires C0^2 = Id.
Mat limiting_space(const Mat& C0);

// C12(lambda) = C1(lambda) C2(lambda) restricted to (ker B)_-.
ScatteringFamily compose_c12(const ScatteringFamily& f1,
                             const ScatteringFamily& f2);

// S_sigma(lambda) = -P_sigma C_i(lambda) I_sigma on ker(sigma + 1).
// The returned family acts on the orthonormal basis (e_j, -V e_j)/sqrt2.
ScatteringFamily s_sigma(const ScatteringFamily& side_family,
                         const BoundaryInvolution& sigma);

struct SecularRoot {
  double rho = 0.0;
  int branch = 0;
  int k = 0;
};

struct SecularSet {
  double R = 0.0;
  double kappa = 0.75;
  std::string kind;  // "omega", "omega1", "omega2"
  std::vector<SecularRoot> roots;  // ascending
  std::vector<double> values() const;
};

// Roots of det(e^{i q rho R} C(rho) - Id) = 0 with 0 < |rho| <= R^-kappa;
// q = 4 for the closed composite, q = 2 for the sides.
SecularSet omega_set(const ScatteringFamily& fam, double R, double kappa,
                     int phase_factor);

struct MatchReport {
  bool counts_match = false;
  int n_spectrum = 0;
  int n_predicted = 0;
  double max_gap = 0.0;
  std::vector<double> gaps;
  std::string detail;
};

// Pairing of enumerated s-values with Omega roots (e-values removed by
// |lambda| <= evalue_threshold).
MatchReport match_svalues(const EigenvalueList& spec, const SecularSet& sec,
                          double evalue_threshold);

// Pairing of scaled s-values (factor 2R closed / R sides) with the model
// spectrum of D(C(0)); entries within edge_margin of the model window are
// trimmed on both sides before comparison.
MatchReport match_model(const EigenvalueList& spec, const ModelSpectrum& model,
                        double R, double kappa, double scale_factor,
                        double evalue_threshold, double edge_margin = 1.0);

struct MaassSelberg {
  double lhs = 0.0;
  double rhs = 0.0;
  double diff = 0.0;
};

// <E(phi), E(psi)>_{M_{i,R}} against 4R<phi,psi> - i<C(-l)C'(l)I phi, I psi>.
MaassSelberg maass_selberg_check(const ManifoldConfig& cfg, int side,
                                 const Vec& phi, const Vec& psi,
                                 double lambda, double R);

// Counts h_M, h_i, h from scattering data and L2 kernels.
CountData compute_counts(const ManifoldConfig& cfg);

struct EvalueReport {
  bool pass = false;
  int expected = 0;
  int found = 0;
  double threshold = 0.0;
  double smallest_above = 0.0;  // smallest |lambda| above the threshold
  std::string detail;
};

// Verifies the zero-e-value hypothesis on an enumerated window.
EvalueReport validate_evalue_assumption(const ManifoldConfig& cfg,
                                        const EigenvalueList& spec,
                                        const CountData& counts);

double evalue_threshold(const ManifoldConfig& cfg);

// orthonormal basis of ker(sigma + 1) used by the S_sigma family
Mat sigma_minus_basis(const BoundaryInvolution& sigma);

}  // namespace adzeta

#endif
