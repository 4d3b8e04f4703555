// Small dense matrix types.  System sizes are bounded (m <= 8, 2n <= 8), so
// everything lives on the stack.

#pragma once

#include <Eigen/Dense>
#include <complex>

namespace weyl {

using cd = std::complex<double>;

inline constexpr int kMaxSystem = 8;

using CMat = Eigen::Matrix<cd, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, kMaxSystem,
                           kMaxSystem>;
using CVec = Eigen::Matrix<cd, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxSystem, 1>;
using RVec = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxSystem, 1>;
using RMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, kMaxSystem,
                           kMaxSystem>;

inline double max_abs(const CMat& a) { return a.size() ? a.cwiseAbs().maxCoeff() : 0.0; }

/// Largest entry of A - A^*.
inline double hermitian_defect(const CMat& a) { return max_abs(a - a.adjoint()); }

}  // namespace weyl
