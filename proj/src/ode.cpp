#include "adzeta/ode.hpp"

#include <unsupported/Eigen/MatrixFunctions>
#include <algorithm>
#include <cmath>

#include "adzeta/linalg.hpp"

namespace adzeta {

namespace {

Mat rhs_matrix(const Segment& seg, double u, cplx lambda) {
  return -(seg.eval(u) + lambda * seg.G);
}

// one CF4 step (two-exponential commutator-free Magnus)
Mat cf4_step(const Segment& seg, double x, double h, cplx lambda) {
  static const double c1 = 0.5 - std::sqrt(3.0) / 6.0;
  static const double c2 = 0.5 + std::sqrt(3.0) / 6.0;
  static const double a1 = 0.25 + std::sqrt(3.0) / 6.0;
  static const double a2 = 0.25 - std::sqrt(3.0) / 6.0;
  Mat A1 = rhs_matrix(seg, x + c1 * h, lambda);
  Mat A2 = rhs_matrix(seg, x + c2 * h, lambda);
  Mat B1 = h * (a1 * A1 + a2 * A2);
  Mat B2 = h * (a2 * A1 + a1 * A2);
  return B2.exp() * B1.exp();
}

Mat integrate_fixed(const Segment& seg, double a, double b, int steps,
                    cplx lambda) {
  const double h = (b - a) / steps;
  Mat T = Mat::Identity(seg.G.rows(), seg.G.cols());
  for (int k = 0; k < steps; ++k) T = cf4_step(seg, a + k * h, h, lambda) * T;
  return T;
}

}  // namespace

Mat transfer_interval(const Segment& seg, double a, double b, cplx lambda,
                      double tol) {
  require(a >= -1e-12 && b <= seg.length + 1e-12 && a <= b,
          "transfer_interval: bad subinterval");
  if (a == b) return Mat::Identity(seg.G.rows(), seg.G.cols());
  if (seg.constant) {
    Mat A = (b - a) * (-(seg.B_const + lambda * seg.G));
    return A.exp();
  }
  double scale = 0.0;
  for (double f : {0.0, 0.25, 0.5, 0.75, 1.0})
    scale = std::max(scale, rhs_matrix(seg, a + f * (b - a), lambda).norm());
  int steps = std::max(8, static_cast<int>(std::ceil(
                              4.0 * (b - a) * std::max(1.0, scale))));
  Mat T = integrate_fixed(seg, a, b, steps, lambda);
  for (int round = 0; round < 20; ++round) {
    Mat T2 = integrate_fixed(seg, a, b, 2 * steps, lambda);
    double err = (T2 - T).norm() / std::max(1.0, T2.norm());
    T = std::move(T2);
    steps *= 2;
    if (err <= tol) break;
    if (round == 19) throw invariant_error("transfer: step underflow");
  }
  return T;
}

Mat transfer(const Segment& seg, cplx lambda, double tol) {
  return transfer_interval(seg, 0.0, seg.length, lambda, tol);
}

// ------------------------------------------------------------ TransferCache

TransferCache::TransferCache(Segment arc, double lambda_max)
    : arc_(std::move(arc)) {
  ensure(lambda_max);
}

int TransferCache::degree() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return data_ ? static_cast<int>(data_->coeff.size()) - 1 : 0;
}

void TransferCache::ensure(double lmax) const {
  {
    std::lock_guard<std::mutex> lock(mutex_);
    if (data_ && data_->lmax >= lmax) return;
  }
  double target = lmax;
  {
    std::lock_guard<std::mutex> lock(mutex_);
    if (data_) target = std::max(target, 1.25 * data_->lmax);
  }
  // Chebyshev-Lobatto sampling, degree doubled until the coefficient
  // tail drops below 1e-12 of the largest coefficient.
  const int n = arc_.G.rows();
  int N = 64;
  std::vector<Mat> coeff;
  while (true) {
    std::vector<Mat> vals(N + 1);
    for (int k = 0; k <= N; ++k) {
      double x = std::cos(kPi * k / N);
      vals[k] = transfer(arc_, cplx(target * x, 0.0));
    }
    coeff.assign(N + 1, Mat::Zero(n, n));
    for (int j = 0; j <= N; ++j) {
      Mat c = Mat::Zero(n, n);
      for (int k = 0; k <= N; ++k) {
        double w = (k == 0 || k == N) ? 0.5 : 1.0;
        c += w * std::cos(kPi * j * k / N) * vals[k];
      }
      c *= 2.0 / N;
      if (j == 0 || j == N) c *= 0.5;
      coeff[j] = c;
    }
    double cmax = 0.0, tail = 0.0;
    for (const auto& c : coeff) cmax = std::max(cmax, c.norm());
    for (int j = std::max(0, N - 4); j <= N; ++j)
      tail = std::max(tail, coeff[j].norm());
    if (tail <= 1e-12 * std::max(cmax, 1.0) || N >= 8192) {
      require(N < 8192, "TransferCache: Chebyshev degree cap exceeded");
      break;
    }
    N *= 2;
  }
  auto data = std::make_shared<Data>();
  data->lmax = target;
  data->coeff = std::move(coeff);
  std::lock_guard<std::mutex> lock(mutex_);
  if (!data_ || data_->lmax < data->lmax) data_ = std::move(data);
}

Mat TransferCache::eval(cplx lambda) const {
  std::shared_ptr<const Data> d;
  {
    std::lock_guard<std::mutex> lock(mutex_);
    d = data_;
  }
  if (!d || std::abs(lambda.real()) > d->lmax) {
    ensure(std::abs(lambda.real()) * 1.1 + 1.0);
    std::lock_guard<std::mutex> lock(mutex_);
    d = data_;
  }
  const int n = arc_.G.rows();
  const cplx x = lambda / d->lmax;
  // Clenshaw with matrix coefficients
  Mat b1 = Mat::Zero(n, n), b2 = Mat::Zero(n, n);
  for (int j = static_cast<int>(d->coeff.size()) - 1; j >= 1; --j) {
    Mat bj = 2.0 * x * b1 - b2 + d->coeff[j];
    b2 = std::move(b1);
    b1 = std::move(bj);
  }
  return x * b1 - b2 + d->coeff[0];
}

// --------------------------------------------------------------- channels

ChannelData point_channels(const FiberStructure& F) {
  ChannelData ch;
  ch.n = F.fiber_dim();
  const int m = F.m;
  for (int i = 0; i < F.rank_w; ++i) {
    Mat pb = Mat::Zero(ch.n, 2);
    // phi = (v_i, u_i)/sqrt2 has B0 phi = s_i phi;  second column G phi
    pb.col(0).head(m) = F.V_svd.col(i) / std::sqrt(2.0);
    pb.col(0).tail(m) = F.U_svd.col(i) / std::sqrt(2.0);
    pb.col(1).head(m) = cplx(0, 1) * F.V_svd.col(i) / std::sqrt(2.0);
    pb.col(1).tail(m) = cplx(0, -1) * F.U_svd.col(i) / std::sqrt(2.0);
    ch.mu.push_back(F.svals(i));
    ch.pair_basis.push_back(pb);
  }
  ch.ker_plus = F.ker_plus_pt;
  ch.ker_minus = F.ker_minus_pt;
  return ch;
}

ChannelData y_channels(const FiberStructure& F) {
  ChannelData pt = point_channels(F);
  ChannelData ch;
  ch.n = F.y_dim();
  const int n1 = F.fiber_dim();
  for (int p = 0; p < F.n_points; ++p) {
    for (size_t i = 0; i < pt.mu.size(); ++i) {
      Mat pb = Mat::Zero(ch.n, 2);
      pb.block(p * n1, 0, n1, 2) = pt.pair_basis[i];
      ch.mu.push_back(pt.mu[i]);
      ch.pair_basis.push_back(pb);
    }
  }
  ch.ker_plus = F.ker_plus_basis();
  ch.ker_minus = F.ker_minus_basis();
  return ch;
}

NeckBasis neck_basis(const ChannelData& ch, cplx lambda, double len,
                     const std::vector<bool>& split_pair) {
  const int n = ch.n;
  const int d = ch.ker_plus.cols();
  NeckBasis nb;
  nb.phi0 = Mat::Zero(n, n);
  nb.phiL = Mat::Zero(n, n);
  int col = 0;
  // kernel channels: e^{-i lambda s} on (ker)_+, e^{+i lambda s} on (ker)_-
  for (int j = 0; j < d; ++j, ++col) {
    nb.phi0.col(col) = ch.ker_plus.col(j);
    nb.phiL.col(col) = std::exp(cplx(0, -1) * lambda * len) * ch.ker_plus.col(j);
  }
  for (int j = 0; j < d; ++j, ++col) {
    nb.phi0.col(col) = ch.ker_minus.col(j);
    nb.phiL.col(col) = std::exp(cplx(0, 1) * lambda * len) * ch.ker_minus.col(j);
  }
  for (size_t i = 0; i < ch.mu.size(); ++i) {
    const double mu = ch.mu[i];
    const Mat& P = ch.pair_basis[i];
    const cplx om = std::sqrt(cplx(mu * mu, 0) - lambda * lambda);
    if (split_pair[i]) {
      // decaying: coords (1, lambda/(mu+om)); growing: (lambda/(mu+om), 1)
      cplx q = lambda / (mu + om);
      Vec wd = P.col(0) + q * P.col(1);
      Vec wg = q * P.col(0) + P.col(1);
      cplx e = std::exp(-om * len);
      nb.phi0.col(col) = wd;
      nb.phiL.col(col) = e * wd;
      ++col;
      nb.phi0.col(col) = e * wg;
      nb.phiL.col(col) = wg;
      ++col;
    } else {
      // entire 2x2 exponential: T = cosh(om len) I + sinhc(om len) A
      cplx z2 = om * om * len * len;
      cplx ch_, shc;
      if (std::abs(z2) < 1e-8) {
        ch_ = 1.0 + z2 / 2.0 + z2 * z2 / 24.0;
        shc = len * (1.0 + z2 / 6.0 + z2 * z2 / 120.0);
      } else {
        cplx z = om * len;
        ch_ = std::cosh(z);
        shc = std::sinh(z) / om;
      }
      // A on pair coords: columns (-mu, -lambda), (lambda, mu)
      Eigen::Matrix2cd A;
      A << -mu, lambda, -lambda, mu;
      Eigen::Matrix2cd T = ch_ * Eigen::Matrix2cd::Identity() + shc * A;
      nb.phi0.col(col) = P.col(0);
      nb.phi0.col(col + 1) = P.col(1);
      nb.phiL.col(col) = P * T.col(0);
      nb.phiL.col(col + 1) = P * T.col(1);
      col += 2;
    }
  }
  return nb;
}

std::vector<bool> split_plan(const ChannelData& ch, double lo, double hi,
                             double len) {
  std::vector<bool> split(ch.mu.size(), false);
  // smallest |lambda| on the circle with diameter [lo, hi]
  double c = 0.5 * (lo + hi), r = 0.5 * (hi - lo);
  double lmin = std::abs(std::abs(c) - r);
  double lmax = std::max(std::abs(lo), std::abs(hi)) + r;
  for (size_t i = 0; i < ch.mu.size(); ++i) {
    double mu = ch.mu[i];
    double growth = std::sqrt(std::max(0.0, mu * mu - lmin * lmin)) * len;
    split[i] = growth > 2.0 * kSplitLog && lmax < mu;
  }
  return split;
}

// ---------------------------------------------------------- SpectralProblem

SpectralProblem SpectralProblem::closed(const ClosedDescriptor& d) {
  SpectralProblem P;
  P.kind_ = Kind::closed;
  P.fiber_ = d.fiber;
  P.channels_ = point_channels(d.fiber);
  P.total_length_ = d.total_length();
  P.neck_len_ = 2.0 * d.R;
  P.id_ = "closed";
  require(d.segments.size() == 4, "closed descriptor must have 4 segments");
  P.arcs_.push_back(std::make_shared<TransferCache>(d.segments[0], 1.0));
  P.arcs_.push_back(std::make_shared<TransferCache>(d.segments[2], 1.0));
  P.kappa_p_ = d.fiber.kappa_p;
  return P;
}

SpectralProblem SpectralProblem::half(const HalfDescriptor& d) {
  SpectralProblem P;
  P.kind_ = Kind::half;
  P.fiber_ = d.fiber;
  P.channels_ = point_channels(d.fiber);
  P.total_length_ = d.total_length();
  P.neck_len_ = d.R;
  P.id_ = (d.side == 1) ? "side1" : "side2";
  P.arcs_.push_back(std::make_shared<TransferCache>(d.arc, 1.0));
  P.Qcond_ = orthonormal_range(d.P, 1e-6);
  require(P.Qcond_.cols() == d.fiber.fiber_dim(),
          "boundary projection must have rank 2m");
  P.kappa_p_ = d.fiber.kappa_p;
  P.p_at_left_ = d.p_at_left;
  return P;
}

SpectralProblem SpectralProblem::cylinder(const FiberStructure& F,
                                          const Mat& P2, const Mat& P1,
                                          double length) {
  SpectralProblem P;
  P.kind_ = Kind::cylinder;
  P.fiber_ = F;
  P.channels_ = y_channels(F);
  P.total_length_ = length;
  P.neck_len_ = length;
  P.id_ = "cylinder";
  P.Qcond_left_ = orthonormal_range(P2, 1e-6);
  P.Qcond_ = orthonormal_range(P1, 1e-6);
  require(P.Qcond_.cols() * 2 == P.channels_.n &&
              P.Qcond_left_.cols() * 2 == P.channels_.n,
          "cylinder conditions must each have half rank");
  return P;
}

double SpectralProblem::weyl_expected(double window) const {
  return ode_dim() * total_length_ * window / kPi;
}

std::vector<bool> SpectralProblem::plan(double lo, double hi) const {
  return split_plan(channels_, lo, hi, neck_len_);
}

Mat SpectralProblem::secular_matrix(cplx lambda,
                                    const std::vector<bool>& split) const {
  const int n = channels_.n;
  switch (kind_) {
    case Kind::closed: {
      NeckBasis nq = neck_basis(channels_, lambda, neck_len_, split);
      // both necks share the constant profile
      Mat T1 = arcs_[0]->eval(lambda);
      Mat T2 = arcs_[1]->eval(lambda);
      Mat M = Mat::Zero(4 * n, 4 * n);
      auto blk = [&](int r, int c) { return std::make_pair(r * n, c * n); };
      // unknowns: [u1, u3, cq, cp]
      // psi(J2) = T1 u1 = Phi0 cq ; u3 = PhiL cq
      // psi(J4) = T2 u3 = Phi0 cp ; u1 = PhiL cp
      auto set = [&](int r, int c, const Mat& A) {
        auto [i, j] = blk(r, c);
        M.block(i, j, n, n) = A;
      };
      set(0, 0, -T1);
      set(0, 2, nq.phi0);
      set(1, 1, Mat::Identity(n, n));
      set(1, 2, -nq.phiL);
      set(2, 1, -T2);
      set(2, 3, nq.phi0);
      set(3, 0, Mat::Identity(n, n));
      set(3, 3, -nq.phiL);
      return M;
    }
    case Kind::half: {
      NeckBasis nb = neck_basis(channels_, lambda, neck_len_, split);
      Mat T = arcs_[0]->eval(lambda);
      Mat M = Mat::Zero(3 * n, 3 * n);
      // unknowns: [u, c_left, c_right]; u = value at the arc's left end
      // left neck spans s in [0, R]: s=R is the arc junction
      M.block(0, 0, n, n) = -Mat::Identity(n, n);
      M.block(0, n, n, n) = nb.phiL;  // Phi(R) c_left = u
      M.block(n, 0, n, n) = -T;       // Phi(0) c_right = T u
      M.block(n, 2 * n, n, n) = nb.phi0;
      // boundary condition on tau = (p trace, q trace)
      Mat tau_rows = Mat::Zero(2 * n, 3 * n);
      if (p_at_left_) {
        tau_rows.block(0, n, n, n) = kappa_p_ * nb.phi0;        // p cut: s=0 left
        tau_rows.block(n, 2 * n, n, n) = nb.phiL;               // q cut: s=R right
      } else {
        tau_rows.block(0, 2 * n, n, n) = kappa_p_ * nb.phiL;    // p cut right
        tau_rows.block(n, n, n, n) = nb.phi0;                   // q cut left
      }
      M.block(2 * n, 0, n, 3 * n) = Qcond_.adjoint() * tau_rows;
      return M;
    }
    case Kind::cylinder: {
      NeckBasis nb = neck_basis(channels_, lambda, neck_len_, split);
      const int half = n / 2;
      Mat M = Mat::Zero(n, n);
      M.topRows(half) = Qcond_left_.adjoint() * nb.phi0;
      M.bottomRows(half) = Qcond_.adjoint() * nb.phiL;
      return M;
    }
  }
  throw invariant_error("unreachable");
}

LogDet SpectralProblem::secular(cplx lambda,
                                const std::vector<bool>& split) const {
  return log_det(secular_matrix(lambda, split));
}

LogDet SpectralProblem::secular_at(double lambda) const {
  return secular(cplx(lambda, 0), plan(lambda, lambda));
}

Mat SpectralProblem::secular_matrix_at(double lambda) const {
  return secular_matrix(cplx(lambda, 0), plan(lambda, lambda));
}

// -------------------------------------------------------------- enumeration

std::vector<double> EigenvalueList::all() const {
  std::vector<double> v;
  for (const auto& e : entries)
    for (int i = 0; i < e.multiplicity; ++i) v.push_back(e.value);
  return v;
}

int EigenvalueList::total_count() const {
  int c = 0;
  for (const auto& e : entries) c += e.multiplicity;
  return c;
}

int EigenvalueList::count_zero(double tol) const {
  int c = 0;
  for (const auto& e : entries)
    if (std::abs(e.value) <= tol) c += e.multiplicity;
  return c;
}

namespace {

struct ContourResult {
  int winding = 0;
  bool on_contour_zero = false;
  bool unstable = false;
  int evals = 0;
};

// winding number of the secular determinant around the circle with
// center c and radius r, by adaptive phase tracking
ContourResult contour_count(const SpectralProblem& P, double c, double r,
                            const std::vector<bool>& split) {
  ContourResult out;
  const int K0 = 24;
  struct Node {
    double theta;
    double log_abs;
    double arg;
  };
  std::vector<Node> nodes;
  auto eval = [&](double th) {
    cplx lam = cplx(c + r * std::cos(th), r * std::sin(th));
    LogDet ld = P.secular(lam, split);
    ++out.evals;
    return Node{th, ld.log_abs, ld.arg};
  };
  nodes.reserve(256);
  for (int k = 0; k <= K0; ++k) nodes.push_back(eval(2 * kPi * k / K0));
  // refine until adjacent phase steps are below pi/2
  for (int pass = 0; pass < 26; ++pass) {
    bool ok = true;
    std::vector<Node> refined;
    refined.reserve(nodes.size() * 2);
    for (size_t i = 0; i + 1 < nodes.size(); ++i) {
      refined.push_back(nodes[i]);
      double d = std::remainder(nodes[i + 1].arg - nodes[i].arg, 2 * kPi);
      if (std::abs(d) > kPi / 2 &&
          nodes[i + 1].theta - nodes[i].theta > 2e-9) {
        refined.push_back(eval(0.5 * (nodes[i].theta + nodes[i + 1].theta)));
        ok = false;
      }
    }
    refined.push_back(nodes.back());
    nodes = std::move(refined);
    if (ok) break;
    if (pass == 25) out.unstable = true;
  }
  double max_log = -1e300, min_log = 1e300, total = 0.0;
  for (size_t i = 0; i + 1 < nodes.size(); ++i) {
    total += std::remainder(nodes[i + 1].arg - nodes[i].arg, 2 * kPi);
    max_log = std::max(max_log, nodes[i].log_abs);
    min_log = std::min(min_log, nodes[i].log_abs);
  }
  if (min_log < max_log - 30.0) out.on_contour_zero = true;
  double w = total / (2 * kPi);
  out.winding = static_cast<int>(std::lround(w));
  if (std::abs(w - out.winding) > 0.15) out.unstable = true;
  return out;
}

struct RootAccum {
  std::vector<EigenvalueEntry> roots;
  int evals = 0;
  int panels = 0;
};

// Refinement by contour first moments: (1/(2 pi i m)) \oint z dlogF
// equals the root (cluster centroid).  Trapezoid on the circle is
// spectrally accurate once the root sits near the center, so a few
// shrinking passes reach ~1e-12.
double refine_root(const SpectralProblem& P, double center, double radius,
                   const std::vector<bool>& split, int multiplicity,
                   int* evals) {
  const double scale = std::max(1.0, std::abs(center));
  double c = center, r = radius;
  const int K = 32;
  bool converged = false;
  for (int pass = 0; pass < 8; ++pass) {
    std::vector<LogDet> ld(K);
    std::vector<cplx> z(K);
    for (int k = 0; k < K; ++k) {
      double th = 2 * kPi * k / K;
      z[k] = cplx(c + r * std::cos(th), r * std::sin(th));
      ld[k] = log_det(P.secular_matrix(z[k], split));
    }
    *evals += K;
    double wind = 0.0;
    cplx I1 = 0.0;
    for (int k = 0; k < K; ++k) {
      int k2 = (k + 1) % K;
      double darg = std::remainder(ld[k2].arg - ld[k].arg, 2 * kPi);
      cplx dlog(ld[k2].log_abs - ld[k].log_abs, darg);
      wind += darg;
      I1 += 0.5 * (z[k] + z[k2]) * dlog;
    }
    int w = static_cast<int>(std::lround(wind / (2 * kPi)));
    if (w != multiplicity || std::abs(wind / (2 * kPi) - w) > 0.2) {
      // lost the root (or phase tracking too coarse): widen once, else stop
      if (pass == 0) {
        r *= 1.6;
        continue;
      }
      break;
    }
    cplx root = I1 / (2 * kPi * cplx(0, 1)) / static_cast<double>(w);
    double move = std::abs(root - cplx(c, 0));
    c = root.real();
    converged = move < 1e-13 * scale || r < 1e-12 * scale;
    if (converged) break;
    r = std::max({4.0 * move, 0.02 * r, 1e-12 * scale});
  }
  require(converged, "enumerate: root refinement failed to converge");
  return c;
}

// minimum of log|F| on the real interval [a, b] by golden-section
double log_abs_min_arg(const SpectralProblem& P, double a, double b,
                       const std::vector<bool>& split, int* evals) {
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
  auto f = [&](double x) {
    ++*evals;
    return P.secular(cplx(x, 0), split).log_abs;
  };
  double f1 = f(x1), f2 = f(x2);
  for (int it = 0; it < 60 && (b - a) > 1e-13 * std::max(1.0, std::abs(b));
       ++it) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - gr * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + gr * (b - a);
      f2 = f(x2);
    }
  }
  return 0.5 * (a + b);
}

// A counting edge must stay away from roots; |F| dips flag proximity.
bool edge_clean(const SpectralProblem& P, double x, double step,
                int* evals) {
  double delta = step / 29.0;
  auto lg = [&](double t) {
    ++*evals;
    auto split = P.plan(t - delta, t + delta);
    return P.secular(cplx(t, 0), split).log_abs;
  };
  double c = lg(x);
  return c > std::min(lg(x - delta), lg(x + delta)) - 4.0;
}

double clean_edge(const SpectralProblem& P, double x, double step,
                  double lo, double hi, int* evals) {
  if (edge_clean(P, x, step, evals)) return x;
  for (int k = 1; k <= 9; ++k) {
    for (double sgn : {1.0, -1.0}) {
      double cand = x + sgn * 0.171 * k * step;
      if (cand <= lo || cand >= hi) continue;
      if (edge_clean(P, cand, step, evals)) return cand;
    }
  }
  throw invariant_error("enumerate: could not find a clean panel edge");
}

void resolve_panel(const SpectralProblem& P, double a, double b, int depth,
                   RootAccum& acc, double mu_guard) {
  require(depth < 64, "enumerate: panel recursion too deep");
  ++acc.panels;
  const double scale = std::max(1.0, std::max(std::abs(a), std::abs(b)));
  auto split = P.plan(a, b);
  bool any_split = false;
  for (bool s : split) any_split = s ? true : any_split;
  double c = 0.5 * (a + b), r = 0.5 * (b - a);
  auto subdivide = [&]() {
    double m = clean_edge(P, c, 0.2 * (b - a), a + 0.05 * (b - a),
                          b - 0.05 * (b - a), &acc.evals);
    resolve_panel(P, a, m, depth + 1, acc, mu_guard);
    resolve_panel(P, m, b, depth + 1, acc, mu_guard);
  };
  if (any_split && mu_guard > 0 &&
      std::max(std::abs(a), std::abs(b)) + r > 0.98 * mu_guard) {
    subdivide();
    return;
  }
  ContourResult cr = contour_count(P, c, r, split);
  acc.evals += cr.evals;
  require(!cr.unstable,
          "enumerate: winding did not stabilize on a clean panel");
  if (cr.winding == 0) return;
  if (cr.winding == 1 || b - a < 1e-10 * scale) {
    double root = refine_root(P, c, r, split, cr.winding, &acc.evals);
    acc.roots.push_back({root, cr.winding});
    return;
  }
  // multiple winding: try a single root of higher multiplicity at the
  // |F| minimum (coincident branch ladders are the common case)
  {
    double lstar = log_abs_min_arg(P, a, b, split, &acc.evals);
    double rr = std::max(1e-9 * scale, 1e-6 * (b - a));
    if (lstar - rr > a && lstar + rr < b) {
      ContourResult tight = contour_count(P, lstar, rr, split);
      acc.evals += tight.evals;
      if (!tight.unstable && tight.winding == cr.winding) {
        double root =
            refine_root(P, lstar, rr, split, cr.winding, &acc.evals);
        acc.roots.push_back({root, cr.winding});
        return;
      }
    }
  }
  subdivide();
}

}  // namespace

EigenvalueList enumerate_eigenvalues(const SpectralProblem& P, double window,
                                     const EnumOptions& opt) {
  require(window > 0, "enumerate: window must be positive");
  EigenvalueList out;
  out.window = window;
  out.operator_id = P.id();
  const double L = P.total_length();

  // deepest split-regime threshold guard (contours must stay inside the
  // spectral gap when the split normalization is active)
  double mu_guard = 0.0;
  for (double mu : P.channels().mu)
    if (mu * P.neck_length() > 2.0 * kSplitLog)
      mu_guard = (mu_guard == 0.0) ? mu : std::min(mu_guard, mu);

  double width0 = kPi / (opt.density_factor * std::max(L, 1.0));
  for (int round = 0;; ++round) {
    out.density_rounds = round + 1;
    int npanels = std::max(2, static_cast<int>(std::ceil(2 * window / width0)));
    if (npanels % 2 == 0) ++npanels;  // keep 0 at a panel midpoint
    std::vector<double> cuts;
    cuts.reserve(npanels + 1);
    for (int i = 0; i <= npanels; ++i)
      cuts.push_back(-window + 2 * window * i / npanels);
    // cut panels at the stiffness radii so each panel lives in one
    // normalization regime (the pair exponential is entire, so panels may
    // straddle the branch points +-mu freely)
    for (double mu : P.channels().mu) {
      double g = mu * P.neck_length();
      if (g <= 2.0 * kSplitLog) continue;
      double rs = std::sqrt(std::max(
          0.0, mu * mu - std::pow(2.0 * kSplitLog / P.neck_length(), 2)));
      for (double s : {rs, -rs})
        if (std::abs(s) < window) cuts.push_back(s);
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end(),
                           [](double x, double y) {
                             return std::abs(x - y) < 1e-13;
                           }),
               cuts.end());

    RootAccum acc;
    bool failed = false;
    try {
      // precondition every edge away from roots (outer edges may move
      // outward; interior edges stay between their neighbors)
      for (size_t i = 0; i < cuts.size(); ++i) {
        double lo = (i == 0) ? cuts[0] - width0 : cuts[i - 1];
        double hi = (i + 1 == cuts.size()) ? cuts.back() + width0
                                           : cuts[i + 1];
        cuts[i] = clean_edge(P, cuts[i], 0.45 * width0, lo, hi, &acc.evals);
      }
      for (size_t i = 0; i + 1 < cuts.size(); ++i)
        resolve_panel(P, cuts[i], cuts[i + 1], 0, acc, mu_guard);
    } catch (const invariant_error&) {
      failed = true;
    }

    if (!failed) {
      std::sort(acc.roots.begin(), acc.roots.end(),
                [](const EigenvalueEntry& x, const EigenvalueEntry& y) {
                  return x.value < y.value;
                });
      // merge duplicates created by contour expansion at panel edges;
      // max-multiplicity because both neighbors saw the same root
      std::vector<EigenvalueEntry> merged;
      for (const auto& e : acc.roots) {
        if (!merged.empty() &&
            std::abs(e.value - merged.back().value) <
                5e-10 * std::max(1.0, std::abs(e.value))) {
          merged.back().multiplicity =
              std::max(merged.back().multiplicity, e.multiplicity);
          merged.back().value = 0.5 * (merged.back().value + e.value);
        } else {
          merged.push_back(e);
        }
      }
      merged.erase(std::remove_if(merged.begin(), merged.end(),
                                  [&](const EigenvalueEntry& e) {
                                    return std::abs(e.value) >
                                           window + 1e-9;
                                  }),
                   merged.end());
      out.entries = std::move(merged);
      out.panels = acc.panels;
      out.contour_evals = acc.evals;
      out.weyl_expected = P.weyl_expected(window);
      double slack =
          2.0 * P.ode_dim() + 4.0 + opt.weyl_slack_extra;
      if (std::abs(out.total_count() - out.weyl_expected) <= slack) {
        out.min_gap = 1e300;
        for (size_t i = 0; i + 1 < out.entries.size(); ++i)
          out.min_gap = std::min(
              out.min_gap, out.entries[i + 1].value - out.entries[i].value);
        return out;
      }
    }
    if (round + 1 >= opt.max_density_rounds)
      throw invariant_error(
          "enumerate: Weyl count violation persists after density escalation "
          "(operator " + P.id() + ")");
    width0 *= 0.5;
  }
}

int kernel_dim(const SpectralProblem& P, bool* flagged) {
  Mat M = P.secular_matrix_at(0.0);
  int k = nullity(M);
  if (flagged) {
    // borderline singular values within a factor 10 of the threshold
    Mat A = M;
    for (int pass = 0; pass < 3; ++pass) {
      for (int i = 0; i < A.rows(); ++i) {
        double r = A.row(i).norm();
        if (r > 0) A.row(i) /= std::sqrt(r);
      }
      for (int j = 0; j < A.cols(); ++j) {
        double cn = A.col(j).norm();
        if (cn > 0) A.col(j) /= std::sqrt(cn);
      }
    }
    Eigen::JacobiSVD<Mat> svd(A);
    const auto& s = svd.singularValues();
    *flagged = false;
    for (int i = 0; i < s.size(); ++i) {
      double rel = s(i) / std::max(s(0), 1e-300);
      if (rel > kKernelTol / 10 && rel < kKernelTol * 10) *flagged = true;
    }
  }
  return k;
}

int l2_kernel_dim_infinite(const ManifoldConfig& cfg, int side) {
  require_dim(side == 1 || side == 2, "side must be 1 or 2");
  const FiberStructure& F = cfg.fiber;
  ChannelData ch = point_channels(F);
  const int r = static_cast<int>(ch.mu.size());
  if (r == 0) return 0;
  const int n = F.fiber_dim();
  Mat decay_plus(n, r);   // B eigenvalue +mu: decays toward +infinity
  Mat decay_minus(n, r);  // B eigenvalue -mu: decays toward -infinity
  for (int i = 0; i < r; ++i) {
    decay_plus.col(i) = ch.pair_basis[i].col(0);
    decay_minus.col(i) = ch.pair_basis[i].col(1);
  }
  const ArcProfile& arc = (side == 1) ? cfg.arc1 : cfg.arc2;
  Segment seg = arc_segment(F, arc, "arc");
  Mat T = transfer(seg, cplx(0, 0));
  if (side == 1) {
    // psi(0) in kappa_p^* span(decay_plus); at the q end decay_plus again
    Mat V0 = F.kappa_p.adjoint() * decay_plus;
    Mat Vl = orthonormal_range(T * V0);
    return intersection_dim(Vl, orthonormal_range(decay_plus));
  }
  // side 2: psi(0) in span(decay_minus) at q; p end needs kappa_p^* decay_minus
  Mat Vl = orthonormal_range(T * decay_minus);
  return intersection_dim(Vl, orthonormal_range(Mat(F.kappa_p.adjoint() * decay_minus)));
}

cplx secular_closed(const ManifoldConfig& cfg, double lambda) {
  SpectralProblem P = SpectralProblem::closed(build_closed_operator(cfg));
  LogDet ld = P.secular_at(lambda);
  return std::exp(std::min(ld.log_abs, 700.0)) * ld.unit();
}

cplx secular_boundary(const ManifoldConfig& cfg, int side, double lambda) {
  auto halves = build_half_operators(cfg);
  SpectralProblem P =
      SpectralProblem::half(side == 1 ? halves.first : halves.second);
  LogDet ld = P.secular_at(lambda);
  return std::exp(std::min(ld.log_abs, 700.0)) * ld.unit();
}

}  // namespace adzeta
