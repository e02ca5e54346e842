#ifndef ADZETA_TYPES_HPP
#define ADZETA_TYPES_HPP

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace adzeta {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;

// Shared rank-decision threshold, relative to the matrix scale.
inline constexpr double kKernelTol = 1e-8;

inline constexpr double kPi = 3.141592653589793238462643383279503;
inline constexpr double kEulerGamma = 0.57721566490153286060651209008240243;

struct invariant_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct dimension_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw invariant_error(msg);
}

inline void require_dim(bool cond, const std::string& msg) {
  if (!cond) throw dimension_error(msg);
}

}  // namespace adzeta

#endif
