#include "adzeta/scattering.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <cmath>

#include "adzeta/linalg.hpp"

namespace adzeta {

namespace {

// decaying (toward +infinity) pair channel vector, analytic in lambda
Vec pair_decaying(const Mat& pair_basis, double mu, cplx lambda, cplx om) {
  return pair_basis.col(0) + (lambda / (mu + om)) * pair_basis.col(1);
}
// decaying toward -infinity
Vec pair_growing(const Mat& pair_basis, double mu, cplx lambda, cplx om) {
  return (lambda / (mu + om)) * pair_basis.col(0) + pair_basis.col(1);
}

}  // namespace

struct SideSolver::Solution {
  Mat out;           // (2 dpt) x ncols outgoing coefficients [p; q]
  Mat psi0;          // (2m) x ncols arc-left values
  Mat dec_p, dec_q;  // r x ncols evanescent coefficients
};

SideSolver::SideSolver(const ManifoldConfig& cfg, int side)
    : cfg_(cfg), side_(side), fiber_(cfg.fiber) {
  require_dim(side == 1 || side == 2, "side must be 1 or 2");
  require(fiber_.h_Y > 0, "scattering requires ker B != 0");
  channels_ = point_channels(fiber_);
  const ArcProfile& arc = (side == 1) ? cfg.arc1 : cfg.arc2;
  arc_ = arc_segment(fiber_, arc, side == 1 ? "arc1" : "arc2");
  cache_ = std::make_shared<TransferCache>(arc_, 1.0);
}

SideSolver::Solution SideSolver::solve(const Mat& in_coeff,
                                       double lambda) const {
  require(std::abs(lambda) < fiber_.mu1,
          "scattering_matrix: |lambda| must stay below mu1");
  const int m = fiber_.m;
  const int n = 2 * m;
  const int d = m - fiber_.rank_w;  // kernel channels per point
  const int r = fiber_.rank_w;
  const int ncols = static_cast<int>(in_coeff.cols());
  require(in_coeff.rows() == 2 * d, "in_coeff must have h_Y/2 rows");

  const Mat& Kp = fiber_.ker_plus_pt;
  const Mat& Km = fiber_.ker_minus_pt;
  Mat W(n, r);  // evanescent channel vectors at the junction
  for (int i = 0; i < r; ++i) {
    double mu = channels_.mu[i];
    cplx om = std::sqrt(cplx(mu * mu - lambda * lambda, 0));
    W.col(i) = (side_ == 1)
                   ? pair_decaying(channels_.pair_basis[i], mu, lambda, om)
                   : pair_growing(channels_.pair_basis[i], mu, lambda, om);
  }
  const Mat& In = (side_ == 1) ? Kp : Km;   // incoming zero-mode vectors
  const Mat& Out = (side_ == 1) ? Km : Kp;  // outgoing zero-mode vectors
  Mat T = cache_->eval(cplx(lambda, 0));

  // unknowns: [psi0 (n), o_p (d), dec_p (r), o_q (d), dec_q (r)]
  const int N = n + 2 * (d + r);
  Mat M = Mat::Zero(N, N);
  Mat rhs = Mat::Zero(N, ncols);
  // side 1:  kappa_p psi0   = In a_p + Out o_p + W dec_p   (p cut, v >= 0)
  //          T psi0         = In a_q + Out o_q + W dec_q   (q cut)
  // side 2:  kappa_p T psi0 = In a_p + Out o_p + W dec_p
  //          psi0           = In a_q + Out o_q + W dec_q
  Mat p_of_psi =
      (side_ == 1) ? Mat(fiber_.kappa_p) : Mat(fiber_.kappa_p * T);
  Mat q_of_psi = (side_ == 1) ? T : Mat::Identity(n, n);
  M.block(0, 0, n, n) = p_of_psi;
  if (d > 0) M.block(0, n, n, d) = -Out;
  if (r > 0) M.block(0, n + d, n, r) = -W;
  M.block(n, 0, n, n) = q_of_psi;
  if (d > 0) M.block(n, n + d + r, n, d) = -Out;
  if (r > 0) M.block(n, n + 2 * d + r, n, r) = -W;
  rhs.topRows(n) = In * in_coeff.topRows(d);
  rhs.bottomRows(n) = In * in_coeff.bottomRows(d);

  Eigen::PartialPivLU<Mat> lu(M);
  Mat x = lu.solve(rhs);
  double resid = (M * x - rhs).norm() / std::max(1.0, rhs.norm());
  require(resid <= 1e-8,
          "scattering matching system is singular (residual " +
              std::to_string(resid) + ")");
  Solution sol;
  sol.psi0 = x.topRows(n);
  sol.out = Mat(2 * d, ncols);
  sol.out.topRows(d) = x.middleRows(n, d);
  sol.out.bottomRows(d) = x.middleRows(n + d + r, d);
  sol.dec_p = x.middleRows(n + d, r);
  sol.dec_q = x.middleRows(n + 2 * d + r, r);
  return sol;
}

Mat SideSolver::block(double lambda) const {
  const int dtot = d_half();
  Solution sol = solve(Mat::Identity(dtot, dtot), lambda);
  return sol.out;
}

Mat SideSolver::full(double lambda) const {
  const int dtot = d_half();
  Mat Bp = block(lambda);
  Mat Bm = block(-lambda).inverse();
  Mat C = Mat::Zero(2 * dtot, 2 * dtot);
  if (side_ == 1) {
    C.bottomLeftCorner(dtot, dtot) = Bp;  // (ker)_+ -> (ker)_-
    C.topRightCorner(dtot, dtot) = Bm;    // functional-equation block
  } else {
    C.topRightCorner(dtot, dtot) = Bp;  // (ker)_- -> (ker)_+
    C.bottomLeftCorner(dtot, dtot) = Bm;
  }
  return C;
}

SideSolver::Eigensection SideSolver::eigensection(const Vec& psi_coords,
                                                  double lambda,
                                                  int arc_samples) const {
  const int dtot = d_half();
  const int d = dtot / 2;
  require_dim(psi_coords.size() == 2 * dtot, "psi must live on ker B");
  Eigensection E;
  E.lambda = lambda;
  E.psi = psi_coords;
  // incoming data: I_- psi = 2 Pi_+ psi (side 1), I_+ psi (side 2)
  Vec a = (side_ == 1) ? Vec(2.0 * psi_coords.head(dtot))
                       : Vec(2.0 * psi_coords.tail(dtot));
  Solution sol = solve(a, lambda);
  E.value_at_arc_left = sol.psi0.col(0);
  E.out_p = sol.out.col(0).head(d);
  E.out_q = sol.out.col(0).tail(d);
  E.dec_p = sol.dec_p.col(0);
  E.dec_q = sol.dec_q.col(0);
  Vec a_p = a.head(d), a_q = a.tail(d);
  const Mat& Kin = (side_ == 1) ? fiber_.ker_plus_pt : fiber_.ker_minus_pt;
  E.incoming_p = Kin * a_p;
  E.incoming_q = Kin * a_q;

  // arc samples by stepping the transfer
  E.arc_samples.reserve(arc_samples + 1);
  Vec v = sol.psi0.col(0);
  double h = arc_.length / arc_samples;
  E.arc_samples.push_back({0.0, v});
  for (int i = 1; i <= arc_samples; ++i) {
    Mat step = transfer_interval(arc_, (i - 1) * h, i * h, cplx(lambda, 0));
    v = step * v;
    E.arc_samples.push_back({i * h, v});
  }

  // neck values in the standard frame at distance v from the junction
  const int r = fiber_.rank_w;
  std::vector<Vec> wvec(r);
  std::vector<cplx> omg(r);
  for (int i = 0; i < r; ++i) {
    double mu = channels_.mu[i];
    omg[i] = std::sqrt(cplx(mu * mu - lambda * lambda, 0));
    wvec[i] = (side_ == 1)
                  ? pair_decaying(channels_.pair_basis[i], mu, lambda, omg[i])
                  : pair_growing(channels_.pair_basis[i], mu, lambda, omg[i]);
  }
  const int side = side_;
  const Mat KpC = fiber_.ker_plus_pt, KmC = fiber_.ker_minus_pt;
  const Vec out_p = E.out_p, out_q = E.out_q;
  const Vec dcp = E.dec_p, dcq = E.dec_q;
  E.neck_value = [=](int point, double vv) {
    const Vec& in = (point == 0) ? a_p : a_q;
    const Vec& out = (point == 0) ? out_p : out_q;
    const Vec& dec = (point == 0) ? dcp : dcq;
    cplx ein = (side == 1) ? std::exp(cplx(0, -lambda * vv))
                           : std::exp(cplx(0, lambda * vv));
    cplx eout = (side == 1) ? std::exp(cplx(0, lambda * vv))
                            : std::exp(cplx(0, -lambda * vv));
    Vec val = (side == 1) ? Vec(KpC * (ein * in) + KmC * (eout * out))
                          : Vec(KmC * (ein * in) + KpC * (eout * out));
    for (int i = 0; i < static_cast<int>(wvec.size()); ++i) {
      cplx ed =
          (side == 1) ? std::exp(-omg[i] * vv) : std::exp(omg[i] * vv);
      val += dec(i) * ed * wvec[i];
    }
    return val;
  };
  return E;
}

// ------------------------------------------------------------------ family

double ScatteringFamily::branch_phase(int j, double lambda) const {
  // nearest grid sample, then match by eigenvector overlap
  size_t i = 0;
  double best = 1e300;
  for (size_t k = 0; k < grid.size(); ++k) {
    double dist = std::abs(grid[k] - lambda);
    if (dist < best) best = dist, i = k;
  }
  Mat Cl = sampler(lambda);
  Vec eigs;
  Mat vecs;
  unitary_eigensystem(Cl, eigs, vecs);
  const Vec ref = branch_vectors[i].col(j);
  int pick = 0;
  double bestov = -1.0;
  for (int c = 0; c < vecs.cols(); ++c) {
    double ov = std::abs(cplx(ref.dot(vecs.col(c))));
    if (ov > bestov) bestov = ov, pick = c;
  }
  double ph = std::arg(eigs(pick));
  double near = alpha[j][i];
  return ph + 2 * kPi * std::round((near - ph) / (2 * kPi));
}

double ScatteringFamily::branch_phase_derivative(int j, double lambda) const {
  double h = fd_step;
  return (branch_phase(j, lambda + h) - branch_phase(j, lambda - h)) / (2 * h);
}

Mat ScatteringFamily::value_at_zero() const { return sampler(0.0); }

ScatteringFamily make_family(ScatteringFamily::Kind kind,
                             std::function<Mat(double)> sampler, double delta,
                             int points) {
  require(points >= 3, "family grid needs at least 3 points");
  if (points % 2 == 0) ++points;
  ScatteringFamily fam;
  fam.kind = kind;
  fam.sampler = std::move(sampler);
  for (int i = 0; i < points; ++i)
    fam.grid.push_back(-delta + 2.0 * delta * i / (points - 1));
  const double h = std::min(1e-4, 0.05 * (fam.grid[1] - fam.grid[0]));
  fam.fd_step = h;
  for (double l : fam.grid) {
    fam.C.push_back(fam.sampler(l));
    fam.Cprime.push_back((fam.sampler(l + h) - fam.sampler(l - h)) /
                         (2.0 * h));
  }
  // branch tracking by maximal eigenvector overlap
  const int dim = static_cast<int>(fam.C[0].rows());
  fam.alpha.assign(dim, std::vector<double>(points, 0.0));
  fam.branch_vectors.resize(points);
  Vec eigs;
  Mat vecs;
  unitary_eigensystem(fam.C[0], eigs, vecs);
  fam.branch_vectors[0] = vecs;
  for (int j = 0; j < dim; ++j) fam.alpha[j][0] = std::arg(eigs(j));
  for (int i = 1; i < points; ++i) {
    unitary_eigensystem(fam.C[i], eigs, vecs);
    const Mat& prev = fam.branch_vectors[i - 1];
    Mat overlap = prev.adjoint() * vecs;  // rows: branches, cols: new
    std::vector<int> assign(dim, -1);
    std::vector<bool> used(dim, false);
    for (int pass = 0; pass < dim; ++pass) {
      int bi = -1, bc = -1;
      double best = -1.0;
      for (int j = 0; j < dim; ++j) {
        if (assign[j] >= 0) continue;
        for (int c = 0; c < dim; ++c) {
          if (used[c]) continue;
          double ov = std::abs(overlap(j, c));
          if (ov > best) best = ov, bi = j, bc = c;
        }
      }
      assign[bi] = bc;
      used[bc] = true;
    }
    Mat ordered(dim, dim);
    for (int j = 0; j < dim; ++j) {
      ordered.col(j) = vecs.col(assign[j]);
      double ph = std::arg(eigs(assign[j]));
      double near = fam.alpha[j][i - 1];
      fam.alpha[j][i] = ph + 2 * kPi * std::round((near - ph) / (2 * kPi));
    }
    fam.branch_vectors[i] = ordered;
  }
  return fam;
}

ScatteringFamily scattering_family(const ManifoldConfig& cfg, int side,
                                   double delta, int points) {
  auto solver = std::make_shared<SideSolver>(cfg, side);
  auto sampler = [solver](double l) { return solver->full(l); };
  return make_family(side == 1 ? ScatteringFamily::Kind::side1
                               : ScatteringFamily::Kind::side2,
                     sampler, delta, points);
}

Mat scattering_matrix(const ManifoldConfig& cfg, int side, double lambda) {
  return SideSolver(cfg, side).full(lambda);
}

Mat limiting_space(const Mat& C0) {
  const int n = static_cast<int>(C0.rows());
  require((C0 * C0 - Mat::Identity(n, n)).norm() <= 1e-8 * n,
          "limiting_space: C(0) is not an involution");
  Vec eigs;
  Mat vecs;
  unitary_eigensystem(C0, eigs, vecs);
  std::vector<int> keep;
  for (int i = 0; i < n; ++i)
    if (std::abs(eigs(i) - cplx(1, 0)) <= 1e-6) keep.push_back(i);
  Mat L(n, static_cast<int>(keep.size()));
  for (size_t i = 0; i < keep.size(); ++i) L.col(i) = vecs.col(keep[i]);
  return L;
}

ScatteringFamily compose_c12(const ScatteringFamily& f1,
                             const ScatteringFamily& f2) {
  require(f1.grid.size() == f2.grid.size() &&
              std::abs(f1.grid.back() - f2.grid.back()) < 1e-12,
          "compose_c12: families need a common grid");
  const int dtot = f1.dim() / 2;
  auto s1 = f1.sampler, s2 = f2.sampler;
  auto sampler = [s1, s2, dtot](double l) {
    Mat C1 = s1(l), C2 = s2(l);
    // C12 = C1_+ C2_- on the (ker B)_- coordinates
    return Mat(C1.bottomLeftCorner(dtot, dtot) *
               C2.topRightCorner(dtot, dtot));
  };
  return make_family(ScatteringFamily::Kind::c12, sampler, f1.grid.back(),
                     static_cast<int>(f1.grid.size()));
}

Mat sigma_minus_basis(const BoundaryInvolution& sigma) {
  const int h = static_cast<int>(sigma.sigma.rows());
  const int dtot = h / 2;
  Mat V = sigma.sigma.bottomLeftCorner(dtot, dtot);
  Mat basis = Mat::Zero(h, dtot);
  for (int j = 0; j < dtot; ++j) {
    basis(j, j) = 1.0 / std::sqrt(2.0);
    basis.col(j).tail(dtot) = -V.col(j) / std::sqrt(2.0);
  }
  return basis;
}

ScatteringFamily s_sigma(const ScatteringFamily& side_family,
                         const BoundaryInvolution& sigma) {
  check_involution(sigma.sigma);
  const int h = static_cast<int>(sigma.sigma.rows());
  const int dtot = h / 2;
  bool side1 = side_family.kind == ScatteringFamily::Kind::side1;
  require(side1 || side_family.kind == ScatteringFamily::Kind::side2,
          "s_sigma needs a side family");
  Mat bs = sigma_minus_basis(sigma);
  Mat proj = 0.5 * (Mat::Identity(h, h) - sigma.sigma);
  Mat inj = Mat::Zero(h, h);  // I_- = 2 Pi_+ (side 1), I_+ = 2 Pi_- (side 2)
  if (side1)
    inj.topLeftCorner(dtot, dtot) = 2.0 * Mat::Identity(dtot, dtot);
  else
    inj.bottomRightCorner(dtot, dtot) = 2.0 * Mat::Identity(dtot, dtot);
  auto cs = side_family.sampler;
  auto sampler = [cs, bs, proj, inj](double l) {
    return Mat(bs.adjoint() * (-proj * cs(l) * inj) * bs);
  };
  return make_family(side1 ? ScatteringFamily::Kind::s_sigma1
                           : ScatteringFamily::Kind::s_sigma2,
                     sampler, side_family.grid.back(),
                     static_cast<int>(side_family.grid.size()));
}

// --------------------------------------------------------------- omega sets

std::vector<double> SecularSet::values() const {
  std::vector<double> v;
  v.reserve(roots.size());
  for (const auto& r : roots) v.push_back(r.rho);
  return v;
}

SecularSet omega_set(const ScatteringFamily& fam, double R, double kappa,
                     int phase_factor) {
  SecularSet out;
  out.R = R;
  out.kappa = kappa;
  out.kind = (phase_factor == 4) ? "omega" : "omega_i";
  const double window = std::pow(R, -kappa);
  const double q = phase_factor * R;
  const int dim = fam.dim();
  size_t i0 = 0;
  for (size_t i = 0; i < fam.grid.size(); ++i)
    if (std::abs(fam.grid[i]) < std::abs(fam.grid[i0])) i0 = i;
  double amax = 0.0;
  for (int j = 0; j < dim; ++j)
    for (double a : fam.alpha[j]) amax = std::max(amax, std::abs(a));
  int kmax = static_cast<int>((q * window + amax) / (2 * kPi)) + 2;
  for (int j = 0; j < dim; ++j) {
    double a0 = fam.alpha[j][i0];
    for (int k = -kmax; k <= kmax; ++k) {
      double seed = (2 * kPi * k - a0) / q;
      if (std::abs(seed) > window + 4.0 * kPi / q) continue;
      double lam = seed;
      bool converged = false;
      for (int it = 0; it < 20; ++it) {
        double f = q * lam + fam.branch_phase(j, lam) - 2 * kPi * k;
        double fp = q + fam.branch_phase_derivative(j, lam);
        double step = -f / fp;
        lam += step;
        if (std::abs(f) < 1e-10 * std::max(1.0, q) ||
            std::abs(step) < 1e-15) {
          converged = true;
          break;
        }
      }
      if (!converged) {
        // f is strictly increasing for R above the phase slope: bisect
        double lo = seed - 1.2 * kPi / q, hi = seed + 1.2 * kPi / q;
        auto f = [&](double l) {
          return q * l + fam.branch_phase(j, l) - 2 * kPi * k;
        };
        double flo = f(lo), fhi = f(hi);
        if (flo > 0 || fhi < 0) continue;
        for (int it = 0; it < 80; ++it) {
          double mid = 0.5 * (lo + hi);
          (f(mid) <= 0 ? lo : hi) = mid;
        }
        lam = 0.5 * (lo + hi);
      }
      if (std::abs(lam) <= window && std::abs(lam) > 1e-11)
        out.roots.push_back({lam, j, k});
    }
  }
  std::sort(out.roots.begin(), out.roots.end(),
            [](const SecularRoot& a, const SecularRoot& b) {
              return a.rho < b.rho;
            });
  return out;
}

// ---------------------------------------------------------------- matching

MatchReport match_svalues(const EigenvalueList& spec, const SecularSet& sec,
                          double evalue_threshold) {
  MatchReport rep;
  std::vector<double> svals;
  for (double v : spec.all())
    if (std::abs(v) > evalue_threshold) svals.push_back(v);
  std::vector<double> pred = sec.values();
  rep.n_spectrum = static_cast<int>(svals.size());
  rep.n_predicted = static_cast<int>(pred.size());
  rep.counts_match = rep.n_spectrum == rep.n_predicted;
  if (!rep.counts_match) {
    rep.detail = "count mismatch";
    return rep;
  }
  for (size_t i = 0; i < svals.size(); ++i) {
    double g = std::abs(svals[i] - pred[i]);
    rep.gaps.push_back(g);
    rep.max_gap = std::max(rep.max_gap, g);
  }
  return rep;
}

MatchReport match_model(const EigenvalueList& spec, const ModelSpectrum& model,
                        double R, double kappa, double scale_factor,
                        double evalue_threshold, double edge_margin) {
  MatchReport rep;
  const double W = scale_factor * std::pow(R, 1.0 - kappa) - edge_margin;
  std::vector<double> scaled;
  for (double v : spec.all()) {
    if (std::abs(v) <= evalue_threshold) continue;
    double s = scale_factor * R * v;
    if (std::abs(s) <= W) scaled.push_back(s);
  }
  std::vector<double> mod;
  for (double v : model.values())
    if (std::abs(v) <= W && std::abs(v) > 1e-11) mod.push_back(v);
  rep.n_spectrum = static_cast<int>(scaled.size());
  rep.n_predicted = static_cast<int>(mod.size());
  rep.counts_match = rep.n_spectrum == rep.n_predicted;
  if (!rep.counts_match) {
    rep.detail = "count mismatch in window " + std::to_string(W);
    return rep;
  }
  for (size_t i = 0; i < scaled.size(); ++i) {
    double g = std::abs(scaled[i] - mod[i]);
    rep.gaps.push_back(g);
    rep.max_gap = std::max(rep.max_gap, g);
  }
  return rep;
}

// ------------------------------------------------------------ Maass-Selberg

MaassSelberg maass_selberg_check(const ManifoldConfig& cfg, int side,
                                 const Vec& phi, const Vec& psi, double lambda,
                                 double R) {
  ManifoldConfig c = cfg.with_R(R);
  SideSolver solver(c, side);
  auto Ephi = solver.eigensection(phi, lambda);
  auto Epsi = solver.eigensection(psi, lambda);

  // arc contribution by composite Simpson on the stored samples
  cplx arc = 0;
  const auto& A = Ephi.arc_samples;
  const auto& Bs = Epsi.arc_samples;
  const size_t ns = A.size();
  for (size_t i = 0; i + 2 < ns; i += 2) {
    double h = A[i + 1].first - A[i].first;
    cplx f0 = A[i].second.dot(Bs[i].second);
    cplx f1 = A[i + 1].second.dot(Bs[i + 1].second);
    cplx f2 = A[i + 2].second.dot(Bs[i + 2].second);
    arc += h / 3.0 * (f0 + 4.0 * f1 + f2);
  }

  // neck contributions in closed form
  const FiberStructure& F = c.fiber;
  ChannelData ch = point_channels(F);
  const int d = F.m - F.rank_w;
  const int r = F.rank_w;
  cplx necks = 0;
  const int dtot = F.h_Y / 2;
  Vec ain = (side == 1) ? Vec(2.0 * phi.head(dtot)) : Vec(2.0 * phi.tail(dtot));
  Vec bin = (side == 1) ? Vec(2.0 * psi.head(dtot)) : Vec(2.0 * psi.tail(dtot));
  for (int pt = 0; pt < 2; ++pt) {
    std::vector<cplx> nus;
    std::vector<Vec> vecs;
    std::vector<cplx> ca, cb;
    auto add = [&](cplx nu, const Vec& w, cplx coeff_a, cplx coeff_b) {
      nus.push_back(nu);
      vecs.push_back(w);
      ca.push_back(coeff_a);
      cb.push_back(coeff_b);
    };
    const Vec& oa = (pt == 0) ? Ephi.out_p : Ephi.out_q;
    const Vec& ob = (pt == 0) ? Epsi.out_p : Epsi.out_q;
    const Vec& da = (pt == 0) ? Ephi.dec_p : Ephi.dec_q;
    const Vec& db = (pt == 0) ? Epsi.dec_p : Epsi.dec_q;
    Vec ain_pt = (pt == 0) ? ain.head(d) : ain.tail(d);
    Vec bin_pt = (pt == 0) ? bin.head(d) : bin.tail(d);
    const Mat& Kin = (side == 1) ? F.ker_plus_pt : F.ker_minus_pt;
    const Mat& Kout = (side == 1) ? F.ker_minus_pt : F.ker_plus_pt;
    cplx nu_in = (side == 1) ? cplx(0, -lambda) : cplx(0, lambda);
    for (int j = 0; j < d; ++j) {
      add(nu_in, Kin.col(j), ain_pt(j), bin_pt(j));
      add(-nu_in, Kout.col(j), oa(j), ob(j));
    }
    for (int i = 0; i < r; ++i) {
      double mu = ch.mu[i];
      cplx om = std::sqrt(cplx(mu * mu - lambda * lambda, 0));
      Vec w = (side == 1) ? pair_decaying(ch.pair_basis[i], mu, lambda, om)
                          : pair_growing(ch.pair_basis[i], mu, lambda, om);
      cplx nu = (side == 1) ? -om : om;
      add(nu, w, da(i), db(i));
    }
    for (size_t a = 0; a < nus.size(); ++a) {
      for (size_t b = 0; b < nus.size(); ++b) {
        cplx s = std::conj(nus[a]) + nus[b];
        cplx I;
        if (std::abs(s) * R < 1e-12) {
          I = R;
        } else if (side == 1) {
          I = (std::exp(s * R) - 1.0) / s;  // int_0^R
        } else {
          I = (1.0 - std::exp(-s * R)) / s;  // int_{-R}^0
        }
        necks += std::conj(ca[a]) * cb[b] * cplx(vecs[a].dot(vecs[b])) * I;
      }
    }
  }

  MaassSelberg ms;
  ms.lhs = (arc + necks).real();

  // rhs = 4R <phi, psi> - i <C(-l) C'(l) I phi, I psi>
  Mat Cm = solver.full(-lambda);
  double h = 1e-5;
  Mat Cp = (solver.full(lambda + h) - solver.full(lambda - h)) / (2 * h);
  Vec Iphi = Vec::Zero(2 * dtot), Ipsi = Vec::Zero(2 * dtot);
  if (side == 1) {
    Iphi.head(dtot) = 2.0 * phi.head(dtot);
    Ipsi.head(dtot) = 2.0 * psi.head(dtot);
  } else {
    Iphi.tail(dtot) = 2.0 * phi.tail(dtot);
    Ipsi.tail(dtot) = 2.0 * psi.tail(dtot);
  }
  // Eigen's dot conjugates its first argument: <x, y> = x.dot(y)
  Vec XIphi = Cm * (Cp * Iphi);
  cplx corr = cplx(0, -1) * cplx(XIphi.dot(Ipsi));
  cplx inner = cplx(phi.dot(psi));
  ms.rhs = (4.0 * R * inner + corr).real();
  ms.diff = std::abs(ms.lhs - ms.rhs);
  return ms;
}

// ------------------------------------------------------------------ counts

CountData compute_counts(const ManifoldConfig& cfg) {
  CountData cd;
  cd.h_Y = cfg.fiber.h_Y;
  cd.l2_ker_1 = l2_kernel_dim_infinite(cfg, 1);
  cd.l2_ker_2 = l2_kernel_dim_infinite(cfg, 2);
  if (cd.h_Y == 0) {
    cd.h_M = cd.l2_ker_1 + cd.l2_ker_2;
    cd.h1 = cd.l2_ker_1;
    cd.h2 = cd.l2_ker_2;
    cd.h = cd.h_M - cd.h1 - cd.h2;
    return cd;
  }
  SideSolver s1(cfg, 1), s2(cfg, 2);
  Mat C1 = s1.full(0.0), C2 = s2.full(0.0);
  Mat L1 = limiting_space(C1), L2 = limiting_space(C2);
  cd.dim_L1_cap_L2 = intersection_dim(L1, L2);
  cd.h_M = cd.l2_ker_1 + cd.l2_ker_2 + cd.dim_L1_cap_L2;
  const int dtot = cd.h_Y / 2;
  auto sigma_plus_basis = [&](const Mat& sigma) {
    Mat V = sigma.bottomLeftCorner(dtot, dtot);
    Mat basis = Mat::Zero(cd.h_Y, dtot);
    for (int j = 0; j < dtot; ++j) {
      basis(j, j) = 1.0 / std::sqrt(2.0);
      basis.col(j).tail(dtot) = V.col(j) / std::sqrt(2.0);
    }
    return basis;
  };
  cd.h1 =
      cd.l2_ker_1 + intersection_dim(L1, sigma_plus_basis(cfg.sigma1.sigma));
  cd.h2 =
      cd.l2_ker_2 + intersection_dim(L2, sigma_plus_basis(cfg.sigma2.sigma));
  cd.h = cd.h_M - cd.h1 - cd.h2;
  return cd;
}

double evalue_threshold(const ManifoldConfig& cfg) {
  if (std::isinf(cfg.fiber.mu1)) return 1e-9;
  double t = std::min(std::exp(-cfg.fiber.mu1 * cfg.R / 2.0),
                      1.0 / (cfg.R * cfg.R));
  return std::max(t, 1e-12);
}

EvalueReport validate_evalue_assumption(const ManifoldConfig& cfg,
                                        const EigenvalueList& spec,
                                        const CountData& counts) {
  EvalueReport rep;
  rep.threshold = evalue_threshold(cfg);
  rep.expected = counts.h_M;
  rep.found = spec.count_zero(rep.threshold);
  rep.smallest_above = 1e300;
  for (double v : spec.all())
    if (std::abs(v) > rep.threshold)
      rep.smallest_above = std::min(rep.smallest_above, std::abs(v));
  rep.pass = rep.found == rep.expected;
  if (!rep.pass)
    rep.detail = "e-value count " + std::to_string(rep.found) +
                 " != h_M = " + std::to_string(rep.expected);
  return rep;
}

}  // namespace adzeta
