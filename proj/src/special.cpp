#include "adzeta/special.hpp"

#include <cmath>
#include <stdexcept>

#include "adzeta/types.hpp"

namespace adzeta {

namespace {

// Lanczos g = 7, 9 coefficients.
constexpr double kLanczosG = 7.0;
constexpr double kLanczos[9] = {
    0.99999999999980993,     676.5203681218851,     -1259.1392167224028,
    771.32342877765313,      -176.61502916214059,   12.507343278686905,
    -0.13857109526572012,    9.9843695780195716e-6, 1.5056327351493116e-7};

}  // namespace

double log_gamma(double x) {
  if (!(x > 0.0)) throw std::domain_error("log_gamma: x must be positive");
  if (x < 0.5) {
    // reflection keeps the Lanczos argument away from 0
    return std::log(kPi / std::sin(kPi * x)) - log_gamma(1.0 - x);
  }
  x -= 1.0;
  double a = kLanczos[0];
  double t = x + kLanczosG + 0.5;
  for (int i = 1; i < 9; ++i) a += kLanczos[i] / (x + i);
  return 0.5 * std::log(2.0 * kPi) + (x + 0.5) * std::log(t) - t + std::log(a);
}

double hurwitz_zeta0(double a) { return 0.5 - a; }

double hurwitz_zeta0_prime(double a) {
  return log_gamma(a) - 0.5 * std::log(2.0 * kPi);
}

double riemann_zeta0() { return -0.5; }

double riemann_zeta0_prime() { return -0.5 * std::log(2.0 * kPi); }

double expint_e1(double x) {
  if (!(x > 0.0)) throw std::domain_error("expint_e1: x must be positive");
  if (x <= 1.0) {
    // series: E1(x) = -gamma - log x + sum (-1)^{k+1} x^k / (k k!)
    double sum = 0.0, term = 1.0;
    for (int k = 1; k <= 40; ++k) {
      term *= -x / k;
      double add = -term / k;
      sum += add;
      if (std::abs(add) < 1e-18 * (std::abs(sum) + 1.0)) break;
    }
    return -kEulerGamma - std::log(x) + sum;
  }
  // continued fraction, modified Lentz
  const double tiny = 1e-300;
  double b = x + 1.0;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int k = 1; k <= 300; ++k) {
    double a = -static_cast<double>(k) * k;
    b += 2.0;
    d = a * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + a / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return h * std::exp(-x);
}

}  // namespace adzeta
