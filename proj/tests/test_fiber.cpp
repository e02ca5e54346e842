#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <random>

#include "adzeta/fiber.hpp"
#include "adzeta/linalg.hpp"

using namespace adzeta;

namespace {
Mat scalar(double x) {
  Mat m(1, 1);
  m(0, 0) = x;
  return m;
}
}  // namespace

TEST_CASE("validate_fiber on the basic examples") {
  SECTION("m=1, W0=1: invertible, mu1 = 1") {
    auto F = FiberStructure::standard(1, scalar(1.0));
    auto rep = validate_fiber(F);
    REQUIRE(rep.valid);
    REQUIRE(rep.h_Y == 0);
    REQUIRE(rep.ker_per_point == 0);
    REQUIRE(rep.mu1 == Catch::Approx(1.0));
  }
  SECTION("m=1, W0=0: kernel 2 per point") {
    auto F = FiberStructure::standard(1, scalar(0.0));
    auto rep = validate_fiber(F);
    REQUIRE(rep.valid);
    REQUIRE(rep.ker_per_point == 2);
    REQUIRE(rep.h_Y == 4);
    REQUIRE(std::isinf(rep.mu1));
  }
  SECTION("corrupted G = diag(i, i) flags the anticommutation") {
    auto F = FiberStructure::standard(1, scalar(1.0));
    F.G = cplx(0, 1) * Mat::Identity(2, 2);
    auto rep = validate_fiber(F);
    REQUIRE_FALSE(rep.valid);
    bool found = false;
    for (const auto& s : rep.failures)
      if (s.find("G B0") != std::string::npos) found = true;
    REQUIRE(found);
  }
}

TEST_CASE("aps_projection examples") {
  SECTION("one-point fiber, W0=1, side 1: the negative-mode projector") {
    auto F = FiberStructure::standard(1, scalar(1.0), 1);
    auto P = aps_projection(F, nullptr, 1);
    Mat expect(2, 2);
    expect << 0.5, -0.5, -0.5, 0.5;
    REQUIRE((P.P - expect).norm() <= 1e-12);
    REQUIRE(P.aps_rank == 1);
    REQUIRE(P.inv_rank == 0);
  }
  SECTION("one-point fiber, W0=0, sigma = swap: P1 = (1 - sigma)/2") {
    auto F = FiberStructure::standard(1, scalar(0.0), 1);
    auto sig = involution_from_block(Mat::Identity(1, 1));
    auto P = aps_projection(F, &sig, 1);
    Mat expect(2, 2);
    expect << 0.5, -0.5, -0.5, 0.5;
    REQUIRE((P.P - expect).norm() <= 1e-12);
  }
  SECTION("m=2, W0=diag(1,0), sigma swap on 2-dim kernel: rank 2") {
    Mat W = Mat::Zero(2, 2);
    W(0, 0) = 1.0;
    auto F = FiberStructure::standard(2, W, 1);
    REQUIRE(F.ker_per_point == 2);
    auto sig = involution_from_block(Mat::Identity(1, 1));
    auto P = aps_projection(F, &sig, 1);
    Eigen::SelfAdjointEigenSolver<Mat> es(P.P);
    int rank = 0;
    for (int i = 0; i < es.eigenvalues().size(); ++i)
      if (es.eigenvalues()(i) > 0.5) ++rank;
    REQUIRE(rank == 2);
  }
  SECTION("rank(P1) + rank(P2) = fiber dim when sigma1 = sigma2") {
    std::mt19937_64 rng(11);
    auto F = FiberStructure::standard(2, random_unitary(2, rng) * 0.0, 2);
    auto sig = involution_from_block(random_unitary(F.h_Y / 2, rng));
    auto P1 = aps_projection(F, &sig, 1);
    auto P2 = aps_projection(F, &sig, 2);
    auto rank = [](const Mat& P) {
      Eigen::SelfAdjointEigenSolver<Mat> es(P);
      int r = 0;
      for (int i = 0; i < es.eigenvalues().size(); ++i)
        if (es.eigenvalues()(i) > 0.5) ++r;
      return r;
    };
    REQUIRE(rank(P1.P) + rank(P2.P) == F.y_dim());
    REQUIRE(rank(P1.P) == P1.aps_rank + P1.inv_rank);
  }
}

TEST_CASE("eigenphases") {
  SECTION("diag(i, -i)") {
    Mat C = Mat::Zero(2, 2);
    C(0, 0) = cplx(0, 1);
    C(1, 1) = cplx(0, -1);
    auto ph = eigenphases(C);
    REQUIRE(ph.phases[0] == Catch::Approx(kPi / 2));
    REQUIRE(ph.phases[1] == Catch::Approx(3 * kPi / 2));
    REQUIRE(ph.kernel_mult == 0);
  }
  SECTION("identity d=3") {
    auto ph = eigenphases(Mat::Identity(3, 3));
    REQUIRE(ph.kernel_mult == 3);
    for (double a : ph.phases) REQUIRE(a == 0.0);
  }
  SECTION("random Haar d=5 reconstructs") {
    std::mt19937_64 rng(5);
    auto ph = eigenphases(random_unitary(5, rng));
    REQUIRE(ph.recon_error <= 1e-10);
    REQUIRE(std::is_sorted(ph.phases.begin(), ph.phases.end()));
  }
}

TEST_CASE("reduced_det") {
  SECTION("diag(0, 3)") {
    Mat A = Mat::Zero(2, 2);
    A(1, 1) = 3.0;
    int k = 0;
    REQUIRE(std::abs(reduced_det(A, kKernelTol, &k) - cplx(3, 0)) <= 1e-12);
    REQUIRE(k == 1);
  }
  SECTION("(2 - C - C^{-1})/4 with scalar C = -1") {
    Mat A = scalar((2.0 + 1.0 + 1.0) / 4.0);
    REQUIRE(std::abs(reduced_det(A) - cplx(1, 0)) <= 1e-12);
  }
  SECTION("zero matrix: empty product") {
    Mat A = Mat::Zero(3, 3);
    int k = 0;
    REQUIRE(std::abs(reduced_det(A, kKernelTol, &k) - cplx(1, 0)) <= 1e-12);
    REQUIRE(k == 3);
  }
  SECTION("invariant under unitary conjugation") {
    std::mt19937_64 rng(17);
    Mat A = random_hermitian(4, rng);
    Mat U = random_unitary(4, rng);
    cplx d1 = reduced_det(A);
    cplx d2 = reduced_det(Mat(U * A * U.adjoint()));
    REQUIRE(std::abs(d1 - d2) <= 1e-9 * std::abs(d1));
  }
}

TEST_CASE("graded blocks") {
  SECTION("plain swap") {
    Mat C(2, 2);
    C << 0, 1, 1, 0;
    auto gb = graded_blocks(C);
    REQUIRE(std::abs(gb.plus(0, 0) - cplx(1, 0)) <= 1e-14);
    REQUIRE(std::abs(gb.minus(0, 0) - cplx(1, 0)) <= 1e-14);
  }
  SECTION("phase swap") {
    double th = 0.7;
    Mat C = Mat::Zero(2, 2);
    C(0, 1) = std::exp(cplx(0, -th));
    C(1, 0) = std::exp(cplx(0, th));
    auto gb = graded_blocks(C);
    REQUIRE(std::abs(gb.plus(0, 0) - std::exp(cplx(0, th))) <= 1e-14);
    REQUIRE(std::abs(gb.minus(0, 0) - std::exp(cplx(0, -th))) <= 1e-14);
  }
  SECTION("random sigma-type involution") {
    std::mt19937_64 rng(23);
    auto sig = involution_from_block(random_unitary(3, rng));
    auto gb = graded_blocks(sig.sigma);
    REQUIRE((gb.plus * gb.minus - Mat::Identity(3, 3)).norm() <= 1e-12);
  }
}

TEST_CASE("u_plus") {
  std::mt19937_64 rng(31);
  SECTION("sigma1 = sigma2 gives the identity") {
    auto s = involution_from_block(random_unitary(2, rng));
    REQUIRE((u_plus(s, s) - Mat::Identity(2, 2)).norm() <= 1e-12);
  }
  SECTION("order-4 pair on a 2-dim kernel") {
    auto s1 = involution_from_block(Mat::Identity(1, 1));
    auto s2 = involution_from_block(scalar(0) + cplx(0, 1) * Mat::Identity(1, 1));
    Mat up = u_plus(s1, s2);
    double phase = std::arg(up(0, 0));
    if (phase < 0) phase += 2 * kPi;
    bool quarter = std::abs(phase - kPi / 2) < 1e-12 ||
                   std::abs(phase - 3 * kPi / 2) < 1e-12;
    REQUIRE(quarter);
  }
  SECTION("det U = 1 for random pairs") {
    for (int trial = 0; trial < 20; ++trial) {
      auto s1 = involution_from_block(random_unitary(3, rng));
      auto s2 = involution_from_block(random_unitary(3, rng));
      Mat U = s1.sigma * s2.sigma;
      REQUIRE(std::abs(U.determinant() - cplx(1, 0)) <= 1e-10);
    }
  }
}

TEST_CASE("inversion lemma: psi = (1+sigma)phi/2 recovers phi") {
  std::mt19937_64 rng(41);
  auto F = FiberStructure::standard(2, Mat::Zero(2, 2), 2);
  Mat kb = F.ker_basis();
  Mat GY = F.GY();
  const int h = F.h_Y, d = h / 2;
  for (int trial = 0; trial < 10; ++trial) {
    auto sig = involution_from_block(random_unitary(d, rng));
    Mat sigma_full = kb * sig.sigma * kb.adjoint();
    // phi in (ker B)_+ :
    Vec coeff = Vec::Random(d);
    Vec phi = F.ker_plus_basis() * coeff;
    Vec psi = 0.5 * (phi + sigma_full * phi);
    Vec back = psi - cplx(0, 1) * (GY * psi);
    REQUIRE((back - phi).norm() <= 1e-12 * std::max(1.0, phi.norm()));
    // and the (ker B)_- counterpart with the opposite sign
    Vec phim = F.ker_minus_basis() * coeff;
    Vec psim = 0.5 * (phim + sigma_full * phim);
    Vec backm = psim + cplx(0, 1) * (GY * psim);
    REQUIRE((backm - phim).norm() <= 1e-12 * std::max(1.0, phim.norm()));
  }
}
