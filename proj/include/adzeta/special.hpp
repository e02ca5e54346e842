#ifndef ADZETA_SPECIAL_HPP
#define ADZETA_SPECIAL_HPP

// Closed-form special values used by the spectral engines:
// log Gamma (Lanczos), the Hurwitz zeta data at s = 0, and the
// exponential integral E1.

namespace adzeta {

// log Gamma(x) for x > 0.  Lanczos g=7, n=9; relative error below 1e-13
// on (0, 1], which is the range the zeta formulas need.
double log_gamma(double x);

// zeta_H(0, a) = 1/2 - a
double hurwitz_zeta0(double a);

// zeta_H'(0, a) = log Gamma(a) - (1/2) log(2 pi),  a > 0
double hurwitz_zeta0_prime(double a);

// zeta_R(0) = -1/2,  zeta_R'(0) = -(1/2) log(2 pi)
double riemann_zeta0();
double riemann_zeta0_prime();

// Exponential integral E1(x) = \int_x^inf e^{-t}/t dt,  x > 0.
double expint_e1(double x);

}  // namespace adzeta

#endif
