#include "adzeta/zeta_eta.hpp"

#include <algorithm>
#include <cmath>

#include "adzeta/circle.hpp"
#include "adzeta/linalg.hpp"
#include "adzeta/special.hpp"

namespace adzeta {

int zeta_b2_zero(const FiberStructure& F) {
  return F.n_points * 2 * F.rank_w;
}

RelativeHeatTrace RelativeHeatTrace::from_lists(const EigenvalueList& closed,
                                                const EigenvalueList& side1,
                                                const EigenvalueList& side2,
                                                const CountData& counts,
                                                double evalue_threshold) {
  RelativeHeatTrace tr;
  tr.window = std::min({closed.window, side1.window, side2.window});
  tr.h = counts.h;
  auto keep = [&](const EigenvalueList& list, std::vector<double>& out,
                  int expected_kernel) {
    int zeros = 0;
    for (double v : list.all()) {
      if (std::abs(v) <= evalue_threshold) {
        ++zeros;
      } else if (std::abs(v) <= tr.window) {
        out.push_back(v * v);
      }
    }
    return zeros == expected_kernel;
  };
  bool ok = true;
  ok &= keep(closed, tr.sq_closed, counts.h_M);
  ok &= keep(side1, tr.sq_side1, counts.h1);
  ok &= keep(side2, tr.sq_side2, counts.h2);
  require(ok, "relative trace: kernel counts disagree with the count data");
  // the kernel contributions cancel exactly against h, so f0 = -h
  tr.f0 = -static_cast<double>(tr.h);
  double L = 0.0;  // density bound shared by the three operators
  tr.density_bound = 3.0 * (closed.weyl_expected / (2.0 * closed.window)) + 8.0;
  (void)L;
  return tr;
}

double RelativeHeatTrace::eval(double t) const {
  double s = 0.0;
  for (double q : sq_closed) s += std::exp(-t * q);
  for (double q : sq_side1) s -= std::exp(-t * q);
  for (double q : sq_side2) s -= std::exp(-t * q);
  return s;
}

double RelativeHeatTrace::tail_bound(double t) const {
  double W = window;
  return density_bound * std::exp(-t * W * W) / std::max(t * W, 1e-3);
}

double RelativeHeatTrace::min_usable_t(double bound) const {
  double lo = 1e-8, hi = 10.0;
  for (int it = 0; it < 200; ++it) {
    double mid = std::sqrt(lo * hi);
    (tail_bound(mid) > bound ? lo : hi) = mid;
  }
  return hi;
}

double relative_heat_trace(const RelativeHeatTrace& tr, double t) {
  double bound = tr.tail_bound(t);
  if (bound > 1e-9)
    throw invariant_error(
        "relative_heat_trace: window insufficient at t = " + std::to_string(t) +
        "; minimal usable t = " + std::to_string(tr.min_usable_t()));
  return tr.eval(t);
}

namespace {

// exp-integral sums  sum_cl E1(q a) - sum_1 - sum_2
double e1_sum(const RelativeHeatTrace& tr, double a) {
  double s = 0.0;
  for (double q : tr.sq_closed) s += expint_e1(q * a);
  for (double q : tr.sq_side1) s -= expint_e1(q * a);
  for (double q : tr.sq_side2) s -= expint_e1(q * a);
  return s;
}

// fit f~(t) - f0 ~ a sqrt(t) + b t + c t^{3/2} + d t^2 at nodes
// t_c {1, 2, 4, 8} and integrate t^{-1} (.) over [0, t_c]
double small_t_model_integral(const RelativeHeatTrace& tr, double tc,
                              double* coeff_a = nullptr) {
  Eigen::Matrix4d Vm;
  Eigen::Vector4d y;
  for (int i = 0; i < 4; ++i) {
    double t = tc * std::pow(2.0, i);
    double x = std::sqrt(t);
    Vm(i, 0) = x;
    Vm(i, 1) = x * x;
    Vm(i, 2) = x * x * x;
    Vm(i, 3) = x * x * x * x;
    y(i) = tr.eval(t) - tr.f0;
  }
  Eigen::Vector4d co = Vm.fullPivLu().solve(y);
  if (coeff_a) *coeff_a = co(0);
  double x = std::sqrt(tc);
  return 2.0 * co(0) * x + co(1) * x * x + (2.0 / 3.0) * co(2) * x * x * x +
         0.5 * co(3) * x * x * x * x;
}

}  // namespace

ZetaResult relative_zeta_prime0(const RelativeHeatTrace& tr) {
  // choose t_c with a certified tail at the smallest fitted node
  double tc = tr.min_usable_t(1e-9);
  require(tc <= 0.3, "relative zeta: window too small (usable t = " +
                         std::to_string(tc) + ")");
  ZetaResult out;
  out.path = "relative-mellin";
  out.zeta0 = tr.f0;
  double model = small_t_model_integral(tr, tc);
  out.zeta_prime0 =
      kEulerGamma * tr.f0 + model + e1_sum(tr, tc) + tr.f0 * std::log(tc);
  out.det = std::exp(-out.zeta_prime0);
  return out;
}

namespace {

double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double fa, double fm, double fb, double tol,
                        int depth) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = f(lm), frm = f(rm);
  double whole = (b - a) / 6.0 * (fa + 4 * fm + fb);
  double left = (m - a) / 6.0 * (fa + 4 * flm + fm);
  double right = (b - m) / 6.0 * (fm + 4 * frm + fb);
  double err = left + right - whole;
  if (depth <= 0 || std::abs(err) < 15.0 * tol)
    return left + right + err / 15.0;
  return adaptive_simpson(f, a, m, fa, flm, fm, tol / 2, depth - 1) +
         adaptive_simpson(f, m, b, fm, frm, fb, tol / 2, depth - 1);
}

double integrate(const std::function<double(double)>& f, double a, double b,
                 double tol) {
  double m = 0.5 * (a + b);
  return adaptive_simpson(f, a, b, f(a), f(m), f(b), tol, 40);
}

}  // namespace

ZetaResult relative_zeta_quadrature(const std::function<double(double)>& f,
                                    double f0) {
  ZetaResult out;
  out.path = "quadrature";
  out.zeta0 = f0;
  // int_0^1 (f - f0)/t dt with t = s^2
  auto g = [&](double s) {
    if (s <= 1e-12) return 0.0;
    return 2.0 * (f(s * s) - f0) / s;
  };
  double small = integrate(g, 0.0, 1.0, 1e-11);
  // int_1^T f/t dt on a log grid, then an exponential completion
  double T = 1.0;
  double large = 0.0;
  while (T < 4096.0 && std::abs(f(T)) > 1e-15) {
    double T2 = 2.0 * T;
    auto h = [&](double u) { return f(std::exp(u)); };
    large += integrate(h, std::log(T), std::log(T2), 1e-12);
    T = T2;
  }
  double fT = f(T);
  if (std::abs(fT) > 1e-300) {
    double f9 = f(0.95 * T);
    if (std::abs(f9) > std::abs(fT)) {
      double rate = std::log(std::abs(f9 / fT)) / (0.05 * T);
      if (rate > 0) {
        double C = fT * std::exp(rate * T);
        large += C * expint_e1(rate * T);
      }
    }
  }
  out.zeta_prime0 = kEulerGamma * f0 + small + large;
  out.det = std::exp(-out.zeta_prime0);
  return out;
}

double small_time_diagnostic(const RelativeHeatTrace& tr, double R,
                             double epsilon) {
  double T = std::pow(R, 2.0 - epsilon);
  double tc = tr.min_usable_t(1e-9);
  double model = small_t_model_integral(tr, tc);
  // int_{t_c}^{T} t^{-1} (f~ - f0) dt via exponential integrals
  double mid = e1_sum(tr, tc) - e1_sum(tr, T) - tr.f0 * std::log(T / tc);
  return model + mid;
}

EtaResult eta_cylinder(const BoundaryInvolution& s1,
                       const BoundaryInvolution& s2) {
  Mat up = u_plus(s1, s2);
  cplx det = up.rows() > 0 ? cplx((-up).determinant()) : cplx(1, 0);
  EtaResult out;
  // branch fixed by the interval spectrum: the ladders 4 lambda = 2 pi k
  // - beta_j give eta = sum (beta_j / 2 pi + 1/2) mod 1
  out.value = mod1(std::arg(det) / (2.0 * kPi));
  out.path = "matrix-formula";
  return out;
}

double eta_from_spectrum(const EigenvalueList& spec, double a, double b,
                         double zero_tol) {
  require(b > a && a >= 0, "eta_from_spectrum: bad window");
  int kernel = spec.count_zero(zero_tol);
  // mean over [a, b] of N_signed(L) = sum_{|lambda_k| <= L} sign(lambda_k)
  double acc = 0.0;
  for (const auto& e : spec.entries) {
    double v = std::abs(e.value);
    if (v <= zero_tol || v > b) continue;
    double from = std::max(a, v);
    acc += (e.value > 0 ? 1.0 : -1.0) * e.multiplicity * (b - from);
  }
  double eta0 = acc / (b - a);
  return mod1(0.5 * (eta0 + kernel));
}

EtaDecompReport eta_decomposition_check(const Mat& C1, const Mat& C2,
                                        const Mat& sigma1, const Mat& sigma2) {
  const int n = static_cast<int>(C1.rows());
  require(is_unitary(C1) && is_unitary(C2), "C_i must be unitary");
  require((C1 * C1 - Mat::Identity(n, n)).norm() <= 1e-8 * n &&
              (C2 * C2 - Mat::Identity(n, n)).norm() <= 1e-8 * n,
          "C_i(0) must be involutions");
  check_involution(sigma1);
  check_involution(sigma2);
  auto b1 = graded_blocks(C1);
  auto b2 = graded_blocks(C2);
  auto s1 = graded_blocks(sigma1);
  auto s2 = graded_blocks(sigma2);
  Mat C12 = b1.plus * b2.minus;          // (ker B)_- -> (ker B)_-
  Mat S1 = s1.minus * b1.plus;           // (ker B)_+ -> (ker B)_+
  Mat S2 = s2.plus * b2.minus;           // (ker B)_- -> (ker B)_-
  EtaDecompReport rep;
  double e12 = eta_circle(CircleOperator(C12, "c12"));
  double e1 = eta_circle(CircleOperator(S1, "s_sigma1"));
  double e2 = eta_circle(CircleOperator(S2, "s_sigma2"));
  rep.triple = mod1(e12 - e1 - e2);
  Mat U_plus_blocks = s1.minus * s2.plus;  // sigma(1)_- sigma(2)_+
  cplx det_mU = cplx((-U_plus_blocks).determinant());
  rep.rhs = mod1(-std::arg(det_mU) / (2.0 * kPi));
  rep.dev_mod1 = mod1_dist(rep.triple, rep.rhs);
  rep.det_lhs = cplx(C12.determinant()) /
                (cplx(S1.determinant()) * cplx(S2.determinant()));
  rep.det_rhs = cplx(Mat(s1.plus * s2.minus).determinant());
  rep.det_identity_dev = std::abs(rep.det_lhs - rep.det_rhs);
  return rep;
}

}  // namespace adzeta
