#pragma once

#include <Eigen/Dense>
#include <string>

namespace csmac {

// Orthonormal sparsifying basis. Columns of `matrix` are the basis vectors,
// so coefficients = matrix.transpose() * signal.
struct WaveletBasis {
  int dimension = 0;
  std::string kind;  // "haar" or "db4"
  Eigen::MatrixXd matrix;
};

// Multi-level orthonormal wavelet basis for a power-of-two dimension.
// kind "haar" works for any power of two >= 1, "db4" (periodized) needs
// dimension >= 4. Throws std::invalid_argument otherwise.
WaveletBasis make_wavelet_basis(int dimension, const std::string& kind = "haar");

// max |Psi^T Psi - I|, used by the orthonormality checks.
double orthonormality_defect(const WaveletBasis& basis);

}  // namespace csmac
