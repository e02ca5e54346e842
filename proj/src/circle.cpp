#include "adzeta/circle.hpp"

#include <algorithm>
#include <cmath>

#include "adzeta/fiber.hpp"
#include "adzeta/linalg.hpp"
#include "adzeta/special.hpp"

namespace adzeta {

CircleOperator::CircleOperator(Mat c, std::string lbl)
    : C(std::move(c)), label(std::move(lbl)) {
  require(is_unitary(C, 1e-8), "CircleOperator: holonomy not unitary");
}

std::vector<double> ModelSpectrum::values() const {
  std::vector<double> v;
  v.reserve(eigenvalues.size());
  for (const auto& e : eigenvalues) v.push_back(e.value);
  return v;
}

ModelSpectrum model_spectrum(const CircleOperator& op, double window) {
  require(window > 0, "model_spectrum: window must be positive");
  UnitaryEigenphases ph = eigenphases(op.C);
  ModelSpectrum spec;
  spec.window = window;
  for (size_t j = 0; j < ph.phases.size(); ++j) {
    double half = 0.5 * ph.phases[j];
    int klo = static_cast<int>(std::floor((-window + half) / kPi)) - 1;
    int khi = static_cast<int>(std::ceil((window + half) / kPi)) + 1;
    for (int k = klo; k <= khi; ++k) {
      double lam = kPi * k - half;
      if (std::abs(lam) <= window)
        spec.eigenvalues.push_back({lam, static_cast<int>(j), k});
    }
  }
  std::sort(spec.eigenvalues.begin(), spec.eigenvalues.end(),
            [](const ModelEigenvalue& a, const ModelEigenvalue& b) {
              return a.value < b.value;
            });
  return spec;
}

CircleDet zeta_det_circle(const CircleOperator& op) {
  UnitaryEigenphases ph = eigenphases(op.C);
  CircleDet out;
  for (double a : ph.phases) {
    if (a == 0.0) {
      // kernel channel: regularized product over {pi k, k != 0}
      out.det *= 4.0;
      ++out.kernel_dim;
    } else {
      double s = 2.0 * std::sin(0.5 * a);
      out.det *= s * s;
      out.det_star *= 0.25 * s * s;
    }
  }
  return out;
}

double zeta_det_circle_hurwitz(const CircleOperator& op) {
  UnitaryEigenphases ph = eigenphases(op.C);
  // zeta(s) = pi^{-2s} sum_{alpha != 0} [zh(2s,a) + zh(2s,1-a)]
  //           + kernel * 2 pi^{-2s} zeta_R(2s)
  double zeta0 = 0.0, gprime0 = 0.0;
  for (double alpha : ph.phases) {
    if (alpha == 0.0) {
      zeta0 += 2.0 * riemann_zeta0();
      gprime0 += 2.0 * riemann_zeta0_prime();
    } else {
      double a = alpha / (2.0 * kPi);
      zeta0 += hurwitz_zeta0(a) + hurwitz_zeta0(1.0 - a);
      gprime0 += hurwitz_zeta0_prime(a) + hurwitz_zeta0_prime(1.0 - a);
    }
  }
  double zeta_prime0 = -2.0 * std::log(kPi) * zeta0 + 2.0 * gprime0;
  return std::exp(-zeta_prime0);
}

double paper_rhs(const Mat& C12, const Mat& S1, const Mat& S2, int h_Y,
                 int h_M, int zeta_B2_0) {
  require(is_unitary(C12, 1e-8) && is_unitary(S1, 1e-8) &&
              is_unitary(S2, 1e-8),
          "paper_rhs: inputs must be unitary");
  auto det_star_quarter = [](const Mat& C) {
    if (C.rows() == 0) return 1.0;
    Mat A = (2.0 * Mat::Identity(C.rows(), C.rows()) - C -
             C.adjoint()) / 4.0;
    cplx d = reduced_det(A);
    require(std::abs(d.imag()) <= 1e-9 * std::max(1.0, std::abs(d)),
            "paper_rhs: det* not real");
    return d.real();
  };
  double pre = std::pow(2.0, static_cast<double>(-zeta_B2_0 - h_Y + 2 * h_M));
  return pre * det_star_quarter(C12) / det_star_quarter(S1) /
         det_star_quarter(S2);
}

double eta_circle(const CircleOperator& op) {
  const int d = op.C.rows();
  Mat M = -op.C.conjugate();
  cplx det = d > 0 ? cplx(M.determinant()) : cplx(1, 0);
  return mod1(-std::arg(det) / (2.0 * kPi));
}

double eta_series(const CircleOperator& op, double window) {
  require(window >= 10 * kPi, "eta_series: window too small");
  UnitaryEigenphases ph = eigenphases(op.C);
  double eta0 = 0.0;
  int kernel = 0;
  for (double alpha : ph.phases) {
    if (alpha == 0.0) {
      ++kernel;  // channel {pi k}: symmetric, no eta(0) contribution
      continue;
    }
    double a = alpha / (2.0 * kPi);
    // positive modes pi(k - a), k >= 1; negative |lambda| = pi(k + a), k >= 0
    int kplus = static_cast<int>(std::floor(window / kPi + a));
    int kminus = static_cast<int>(std::floor(window / kPi - a));
    double partial = static_cast<double>(kplus) - (kminus + 1);
    double tail = hurwitz_zeta0(kplus + 1 - a) - hurwitz_zeta0(kminus + 1 + a);
    eta0 += partial + tail;
  }
  return mod1(0.5 * (eta0 + kernel));
}

}  // namespace adzeta
