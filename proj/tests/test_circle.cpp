#include <catch2/catch_amalgamated.hpp>
#include <chrono>
#include <cmath>
#include <random>

#include "adzeta/circle.hpp"
#include "adzeta/fiber.hpp"
#include "adzeta/linalg.hpp"

using namespace adzeta;

namespace {
Mat phase_matrix(std::initializer_list<double> phases) {
  Mat C = Mat::Zero(phases.size(), phases.size());
  int i = 0;
  for (double a : phases) C(i, i) = std::exp(cplx(0, a)), ++i;
  return C;
}
}  // namespace

TEST_CASE("model spectrum enumeration") {
  SECTION("C = -1, window 2") {
    auto s = model_spectrum(CircleOperator(phase_matrix({kPi})), 2.0);
    REQUIRE(s.values() == std::vector<double>{-kPi / 2, kPi / 2});
  }
  SECTION("C = Id, window 4") {
    auto s = model_spectrum(CircleOperator(Mat::Identity(1, 1)), 4.0);
    auto v = s.values();
    REQUIRE(v.size() == 3);
    REQUIRE(v[0] == Catch::Approx(-kPi));
    REQUIRE(v[1] == Catch::Approx(0.0).margin(1e-14));
    REQUIRE(v[2] == Catch::Approx(kPi));
  }
  SECTION("C = e^{i pi/2}, window 4") {
    auto s = model_spectrum(CircleOperator(phase_matrix({kPi / 2})), 4.0);
    auto v = s.values();
    REQUIRE(v.size() == 3);
    REQUIRE(v[0] == Catch::Approx(-kPi - kPi / 4));
    REQUIRE(v[1] == Catch::Approx(-kPi / 4));
    REQUIRE(v[2] == Catch::Approx(kPi - kPi / 4));
  }
  SECTION("negation: spectrum of D(C*) is the negated spectrum of D(C)") {
    std::mt19937_64 rng(3);
    Mat C = random_unitary(3, rng);
    auto s = model_spectrum(CircleOperator(C), 9.0);
    auto sneg = model_spectrum(CircleOperator(Mat(C.adjoint())), 9.0);
    auto v = s.values();
    auto w = sneg.values();
    REQUIRE(v.size() == w.size());
    for (size_t i = 0; i < v.size(); ++i)
      REQUIRE(v[i] == Catch::Approx(-w[w.size() - 1 - i]).margin(1e-12));
  }
}

TEST_CASE("circle zeta determinants, closed form") {
  SECTION("C = -1: det 4, no kernel") {
    auto d = zeta_det_circle(CircleOperator(phase_matrix({kPi})));
    REQUIRE(d.det == Catch::Approx(4.0));
    REQUIRE(d.kernel_dim == 0);
  }
  SECTION("C = e^{2 pi i/3}: det 3") {
    auto d = zeta_det_circle(CircleOperator(phase_matrix({2 * kPi / 3})));
    REQUIRE(d.det == Catch::Approx(3.0));
  }
  SECTION("C = Id: kernel channel contributes 4 (Hurwitz-checked)") {
    CircleOperator op(Mat::Identity(1, 1));
    auto d = zeta_det_circle(op);
    REQUIRE(d.kernel_dim == 1);
    REQUIRE(d.det == Catch::Approx(4.0));
    REQUIRE(zeta_det_circle_hurwitz(op) == Catch::Approx(4.0).epsilon(1e-12));
  }
}

TEST_CASE("Hurwitz oracle agrees with the closed form") {
  SECTION("C = -1") {
    REQUIRE(zeta_det_circle_hurwitz(CircleOperator(phase_matrix({kPi}))) ==
            Catch::Approx(4.0).epsilon(1e-12));
  }
  SECTION("C = Id (d=2): two kernel channels") {
    CircleOperator op(Mat::Identity(2, 2));
    REQUIRE(zeta_det_circle_hurwitz(op) ==
            Catch::Approx(16.0).epsilon(1e-12));
    REQUIRE(zeta_det_circle(op).det == Catch::Approx(16.0));
  }
  SECTION("100 seeded random unitaries, d <= 6, within 1e-10 relative") {
    std::mt19937_64 rng(2024);
    auto t0 = std::chrono::steady_clock::now();
    for (int trial = 0; trial < 100; ++trial) {
      int d = 1 + static_cast<int>(rng() % 6);
      CircleOperator op(random_unitary(d, rng));
      auto closed = zeta_det_circle(op);
      double hz = zeta_det_circle_hurwitz(op);
      REQUIRE(std::abs(hz - closed.det) <= 1e-10 * closed.det);
    }
    auto ms = std::chrono::duration<double, std::milli>(
                  std::chrono::steady_clock::now() - t0)
                  .count();
    REQUIRE(ms < 1000.0);
  }
}

TEST_CASE("det and eta are multiplicative over direct sums") {
  std::mt19937_64 rng(7);
  Mat A = random_unitary(2, rng), B = random_unitary(3, rng);
  Mat AB = Mat::Zero(5, 5);
  AB.topLeftCorner(2, 2) = A;
  AB.bottomRightCorner(3, 3) = B;
  auto da = zeta_det_circle(CircleOperator(A));
  auto db = zeta_det_circle(CircleOperator(B));
  auto dab = zeta_det_circle(CircleOperator(AB));
  REQUIRE(dab.det == Catch::Approx(da.det * db.det).epsilon(1e-11));
  double ea = eta_circle(CircleOperator(A));
  double eb = eta_circle(CircleOperator(B));
  double eab = eta_circle(CircleOperator(AB));
  REQUIRE(mod1_dist(eab, ea + eb) <= 1e-11);
}

TEST_CASE("paper_rhs") {
  SECTION("invertible-B case: empty matrices, 2^{-zeta_B2(0)}") {
    Mat empty(0, 0);
    REQUIRE(paper_rhs(empty, empty, empty, 0, 0, 4) ==
            Catch::Approx(1.0 / 16.0));
  }
  SECTION("identical factors cancel") {
    std::mt19937_64 rng(9);
    Mat C = random_unitary(3, rng);
    int hM = plus_one_multiplicity(C);
    double got = paper_rhs(C, C, C, 6, hM, 0);
    Mat A = (2.0 * Mat::Identity(3, 3) - C - C.adjoint()) / 4.0;
    cplx ds = reduced_det(A);
    double expect = std::pow(2.0, -6.0 + 2 * hM) / ds.real();
    REQUIRE(got == Catch::Approx(expect).epsilon(1e-11));
  }
  SECTION("scalar substitution") {
    Mat C = phase_matrix({kPi});
    double got = paper_rhs(C, C, C, 2, 0, 4);
    REQUIRE(got == Catch::Approx(std::pow(2.0, -6.0) / 1.0).epsilon(1e-12));
  }
}

TEST_CASE("eta of the model operator") {
  SECTION("C = Id: 1/2") {
    REQUIRE(eta_circle(CircleOperator(Mat::Identity(1, 1))) ==
            Catch::Approx(0.5));
  }
  SECTION("C = -1: 0") {
    REQUIRE(mod1_dist(eta_circle(CircleOperator(phase_matrix({kPi}))), 0.0) <=
            1e-13);
  }
  SECTION("C = i: 3/4") {
    REQUIRE(eta_circle(CircleOperator(phase_matrix({kPi / 2}))) ==
            Catch::Approx(0.75));
  }
}

TEST_CASE("eta series path") {
  SECTION("C = -1: exact cancellation") {
    REQUIRE(mod1_dist(eta_series(CircleOperator(phase_matrix({kPi})), 40.0),
                      0.0) <= 1e-13);
  }
  SECTION("C = i: 3/4") {
    REQUIRE(eta_series(CircleOperator(phase_matrix({kPi / 2})), 40.0) ==
            Catch::Approx(0.75));
  }
  SECTION("random U(3): series equals the matrix formula") {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 10; ++trial) {
      CircleOperator op(random_unitary(3, rng));
      REQUIRE(mod1_dist(eta_series(op, 40.0), eta_circle(op)) <= 1e-10);
    }
  }
  SECTION("window independence") {
    std::mt19937_64 rng(15);
    CircleOperator op(random_unitary(2, rng));
    REQUIRE(mod1_dist(eta_series(op, 10 * kPi), eta_series(op, 77.0)) <=
            1e-12);
  }
}
