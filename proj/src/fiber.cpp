#include "adzeta/fiber.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>
#include <limits>

#include "adzeta/linalg.hpp"

namespace adzeta {

FiberStructure FiberStructure::standard(int m, const Mat& W0, int n_points) {
  require_dim(W0.rows() == m && W0.cols() == m, "W0 must be m x m");
  require_dim(n_points == 1 || n_points == 2, "n_points must be 1 or 2");
  FiberStructure F;
  F.m = m;
  F.n_points = n_points;
  F.W0 = W0;
  F.G = Mat::Zero(2 * m, 2 * m);
  F.G.topLeftCorner(m, m) = cplx(0, 1) * Mat::Identity(m, m);
  F.G.bottomRightCorner(m, m) = cplx(0, -1) * Mat::Identity(m, m);
  F.B0 = Mat::Zero(2 * m, 2 * m);
  F.B0.topRightCorner(m, m) = W0.adjoint();
  F.B0.bottomLeftCorner(m, m) = W0;

  if (W0.norm() < 1e-300) {
    F.U_svd = Mat::Identity(m, m);
    F.V_svd = Mat::Identity(m, m);
    F.svals = RVec::Zero(m);
  } else {
    Eigen::JacobiSVD<Mat> svd(W0, Eigen::ComputeFullU | Eigen::ComputeFullV);
    F.U_svd = svd.matrixU();
    F.V_svd = svd.matrixV();
    F.svals = svd.singularValues();
  }
  double smax = (m > 0) ? F.svals.maxCoeff() : 0.0;
  F.rank_w = 0;
  for (int i = 0; i < F.svals.size(); ++i)
    if (F.svals(i) > kKernelTol * std::max(smax, 1e-30)) ++F.rank_w;
  const int r = F.rank_w, d = m - r;
  F.ker_per_point = 2 * d;
  F.h_Y = n_points * F.ker_per_point;
  F.mu1 = (r > 0) ? F.svals(r - 1) : std::numeric_limits<double>::infinity();

  F.ker_plus_pt = Mat::Zero(2 * m, d);
  F.ker_minus_pt = Mat::Zero(2 * m, d);
  for (int j = 0; j < d; ++j) {
    F.ker_plus_pt.col(j).head(m) = F.V_svd.col(r + j);
    F.ker_minus_pt.col(j).tail(m) = F.U_svd.col(r + j);
  }

  // trace gauge at p: kappa = [[0, L], [K, 0]] with K = U V^H and
  // L = V diag(-I_r, I_d) U^H; satisfies kappa G kappa* = -G and
  // kappa B0 kappa* = -B0, and acts as the plain kernel pairing.
  Mat D = Mat::Identity(m, m);
  for (int i = 0; i < r; ++i) D(i, i) = -1.0;
  Mat K = F.U_svd * F.V_svd.adjoint();
  Mat L = F.V_svd * D * F.U_svd.adjoint();
  F.kappa_p = Mat::Zero(2 * m, 2 * m);
  F.kappa_p.topRightCorner(m, m) = L;
  F.kappa_p.bottomLeftCorner(m, m) = K;
  return F;
}

Mat FiberStructure::GY() const {
  Mat g = Mat::Zero(y_dim(), y_dim());
  for (int p = 0; p < n_points; ++p)
    g.block(p * fiber_dim(), p * fiber_dim(), fiber_dim(), fiber_dim()) = G;
  return g;
}

Mat FiberStructure::BY() const {
  Mat b = Mat::Zero(y_dim(), y_dim());
  for (int p = 0; p < n_points; ++p)
    b.block(p * fiber_dim(), p * fiber_dim(), fiber_dim(), fiber_dim()) = B0;
  return b;
}

Mat FiberStructure::ker_plus_basis() const {
  const int d = m - rank_w;
  Mat out = Mat::Zero(y_dim(), n_points * d);
  for (int p = 0; p < n_points; ++p)
    out.block(p * fiber_dim(), p * d, fiber_dim(), d) = ker_plus_pt;
  return out;
}

Mat FiberStructure::ker_minus_basis() const {
  const int d = m - rank_w;
  Mat out = Mat::Zero(y_dim(), n_points * d);
  for (int p = 0; p < n_points; ++p)
    out.block(p * fiber_dim(), p * d, fiber_dim(), d) = ker_minus_pt;
  return out;
}

Mat FiberStructure::ker_basis() const {
  Mat out(y_dim(), h_Y);
  out.leftCols(h_Y / 2) = ker_plus_basis();
  out.rightCols(h_Y / 2) = ker_minus_basis();
  return out;
}

namespace {

// spectral projector of B0 per point onto sign * positive modes
Mat aps_point_projector(const FiberStructure& F, int sign) {
  const int m = F.m;
  Mat P = Mat::Zero(2 * m, 2 * m);
  for (int i = 0; i < F.rank_w; ++i) {
    Vec w = Vec::Zero(2 * m);
    w.head(m) = F.V_svd.col(i);
    w.tail(m) = static_cast<double>(sign) * F.U_svd.col(i);
    w /= std::sqrt(2.0);
    P += w * w.adjoint();
  }
  return P;
}

}  // namespace

Mat FiberStructure::pi_less() const {
  Mat P = Mat::Zero(y_dim(), y_dim());
  Mat pt = aps_point_projector(*this, -1);
  for (int p = 0; p < n_points; ++p)
    P.block(p * fiber_dim(), p * fiber_dim(), fiber_dim(), fiber_dim()) = pt;
  return P;
}

Mat FiberStructure::pi_greater() const {
  Mat P = Mat::Zero(y_dim(), y_dim());
  Mat pt = aps_point_projector(*this, +1);
  for (int p = 0; p < n_points; ++p)
    P.block(p * fiber_dim(), p * fiber_dim(), fiber_dim(), fiber_dim()) = pt;
  return P;
}

FiberReport validate_fiber(const FiberStructure& F) {
  FiberReport rep;
  rep.h_Y = F.h_Y;
  rep.ker_per_point = F.ker_per_point;
  rep.mu1 = F.mu1;
  const double tol = 1e-12;
  auto check = [&](double defect, const std::string& what) {
    rep.worst_defect = std::max(rep.worst_defect, defect);
    if (defect > tol) {
      rep.valid = false;
      rep.failures.push_back(what + " defect " + std::to_string(defect));
    }
  };
  const int n = F.fiber_dim();
  if (F.G.rows() != n || F.B0.rows() != n) {
    rep.valid = false;
    rep.failures.push_back("dimension mismatch");
    return rep;
  }
  check((F.G + F.G.adjoint()).norm(), "G* = -G");
  check((F.G * F.G + Mat::Identity(n, n)).norm(), "G^2 = -Id");
  check((F.B0 - F.B0.adjoint()).norm(), "B0 = B0*");
  check((F.G * F.B0 + F.B0 * F.G).norm(), "G B0 = -B0 G");

  // kernel of B0 splits evenly between the +i and -i eigenspaces of G
  Mat kerB = kernel_basis(F.B0);
  if (kerB.cols() > 0) {
    Mat Gk = kerB.adjoint() * (F.G * kerB);
    Eigen::SelfAdjointEigenSolver<Mat> es(Mat(-cplx(0, 1) * Gk));
    int plus = 0;
    for (int i = 0; i < es.eigenvalues().size(); ++i)
      if (es.eigenvalues()(i) > 0) ++plus;
    int minus = static_cast<int>(es.eigenvalues().size()) - plus;
    if (plus != minus) {
      rep.valid = false;
      rep.failures.push_back("(ker B)_+ and (ker B)_- dimensions differ");
    }
  }

  // spectrum of B0 symmetric about 0, with G exchanging the sides
  Eigen::SelfAdjointEigenSolver<Mat> eb(F.B0);
  for (int i = 0; i < n; ++i) {
    double mu = eb.eigenvalues()(i);
    if (mu <= kKernelTol) continue;
    Vec phi = eb.eigenvectors().col(i);
    check((F.B0 * (F.G * phi) + mu * (F.G * phi)).norm(),
          "G maps the +mu eigenspace to -mu");
  }
  return rep;
}

BoundaryInvolution involution_from_block(const Mat& V) {
  const int d = V.rows();
  Mat s = Mat::Zero(2 * d, 2 * d);
  s.topRightCorner(d, d) = V.adjoint();
  s.bottomLeftCorner(d, d) = V;
  return {s};
}

void check_involution(const Mat& sigma, double tol) {
  const int n = sigma.rows();
  require(sigma.cols() == n, "involution must be square");
  require((sigma * sigma - Mat::Identity(n, n)).norm() <= tol * n,
          "sigma^2 != Id");
  require((sigma - sigma.adjoint()).norm() <= tol * n, "sigma not Hermitian");
  Mat g = Mat::Zero(n, n);
  g.topLeftCorner(n / 2, n / 2) = cplx(0, 1) * Mat::Identity(n / 2, n / 2);
  g.bottomRightCorner(n / 2, n / 2) =
      cplx(0, -1) * Mat::Identity(n / 2, n / 2);
  require((g * sigma + sigma * g).norm() <= tol * n,
          "sigma does not anticommute with G on ker B");
}

SpectralProjectionSpec aps_projection(const FiberStructure& F,
                                      const BoundaryInvolution* sigma,
                                      int side) {
  require_dim(side == 1 || side == 2, "side must be 1 or 2");
  SpectralProjectionSpec out;
  Mat P = (side == 1) ? F.pi_less() : F.pi_greater();
  out.aps_rank = F.n_points * F.rank_w;
  out.inv_rank = 0;
  if (F.h_Y > 0) {
    require(sigma != nullptr && sigma->sigma.rows() == F.h_Y,
            "involution required on ker B");
    check_involution(sigma->sigma);
    Mat kb = F.ker_basis();
    Mat pi = 0.5 * (Mat::Identity(F.h_Y, F.h_Y) - sigma->sigma);
    P += kb * pi * kb.adjoint();
    out.inv_rank = F.h_Y / 2;
  }
  double proj_defect = (P * P - P).norm() + (P - P.adjoint()).norm();
  require(proj_defect <= 1e-10 * F.y_dim(), "P is not an orthogonal projection");
  out.P = P;
  return out;
}

UnitaryEigenphases eigenphases(const Mat& C) {
  require(is_unitary(C), "eigenphases: input is not unitary");
  Vec eigs;
  Mat vecs;
  unitary_eigensystem(C, eigs, vecs);
  const int n = C.rows();
  std::vector<int> order(n);
  std::vector<double> ph(n);
  for (int i = 0; i < n; ++i) {
    order[i] = i;
    if (std::abs(eigs(i) - cplx(1, 0)) <= kKernelTol) {
      ph[i] = 0.0;
    } else {
      double a = std::arg(eigs(i));
      ph[i] = (a < 0) ? a + 2 * kPi : a;
    }
  }
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return ph[a] < ph[b]; });
  UnitaryEigenphases out;
  out.vectors = Mat(n, n);
  for (int i = 0; i < n; ++i) {
    out.phases.push_back(ph[order[i]]);
    out.vectors.col(i) = vecs.col(order[i]);
    if (ph[order[i]] == 0.0) ++out.kernel_mult;
  }
  Mat D = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i) D(i, i) = std::exp(cplx(0, out.phases[i]));
  out.recon_error = (C - out.vectors * D * out.vectors.adjoint()).norm();
  require(out.recon_error <= 1e-10 * std::max(1, n),
          "eigenphase reconstruction failed");
  return out;
}

cplx reduced_det(const Mat& A, double tol, int* kernel_dim) {
  Eigen::ComplexEigenSolver<Mat> es(A, false);
  const Vec& eigs = es.eigenvalues();
  double scale = 0.0;
  for (int i = 0; i < eigs.size(); ++i)
    scale = std::max(scale, std::abs(eigs(i)));
  cplx det(1.0, 0.0);
  int kdim = 0;
  for (int i = 0; i < eigs.size(); ++i) {
    if (std::abs(eigs(i)) > tol * std::max(scale, 1e-30))
      det *= eigs(i);
    else
      ++kdim;
  }
  if (kernel_dim) *kernel_dim = kdim;
  return det;
}

GradedBlocks graded_blocks(const Mat& C, double tol) {
  const int n = C.rows();
  require_dim(n % 2 == 0, "graded_blocks: odd dimension");
  const int d = n / 2;
  GradedBlocks out;
  out.diag_defect = C.topLeftCorner(d, d).norm() +
                    C.bottomRightCorner(d, d).norm();
  require(out.diag_defect <= tol * n,
          "graded_blocks: diagonal blocks nonzero (GC != -CG)");
  out.plus = C.bottomLeftCorner(d, d);
  out.minus = C.topRightCorner(d, d);
  require((out.plus * out.minus - Mat::Identity(d, d)).norm() <= tol * n,
          "graded_blocks: C_+ C_- != Id");
  return out;
}

Mat u_plus(const BoundaryInvolution& s1, const BoundaryInvolution& s2) {
  check_involution(s1.sigma);
  check_involution(s2.sigma);
  Mat U = s1.sigma * s2.sigma;
  const int d = U.rows() / 2;
  Mat up = U.topLeftCorner(d, d);
  require(U.topRightCorner(d, d).norm() + U.bottomLeftCorner(d, d).norm() <=
              1e-10 * U.rows(),
          "u_plus: sigma_1 sigma_2 not graded");
  require(is_unitary(up), "u_plus: block not unitary");
  return up;
}

}  // namespace adzeta
