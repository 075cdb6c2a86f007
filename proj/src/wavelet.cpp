#include "csmac/wavelet.hpp"

#include <cmath>
#include <stdexcept>

namespace csmac {

namespace {

bool is_pow2(int n) { return n >= 1 && (n & (n - 1)) == 0; }

// One analysis level on the leading `m` coordinates: m/2 scaling rows then
// m/2 detail rows, circularly shifted filter taps.
Eigen::MatrixXd level_matrix(int n, int m, const std::vector<double>& lo,
                             const std::vector<double>& hi) {
  Eigen::MatrixXd T = Eigen::MatrixXd::Identity(n, n);
  T.topLeftCorner(m, m).setZero();
  const int taps = static_cast<int>(lo.size());
  for (int r = 0; r < m / 2; ++r)
    for (int k = 0; k < taps; ++k) {
      int col = (2 * r + k) % m;
      T(r, col) += lo[k];
      T(m / 2 + r, col) += hi[k];
    }
  return T;
}

Eigen::MatrixXd analysis_matrix(int n, const std::vector<double>& lo,
                                const std::vector<double>& hi, int min_size) {
  Eigen::MatrixXd W = Eigen::MatrixXd::Identity(n, n);
  for (int m = n; m >= min_size && m % 2 == 0; m /= 2) W = level_matrix(n, m, lo, hi) * W;
  return W;
}

}  // namespace

WaveletBasis make_wavelet_basis(int dimension, const std::string& kind) {
  if (!is_pow2(dimension))
    throw std::invalid_argument("make_wavelet_basis: dimension must be a power of two");
  WaveletBasis b;
  b.dimension = dimension;
  b.kind = kind;
  const double s2 = std::sqrt(2.0);
  if (kind == "haar") {
    std::vector<double> lo = {1.0 / s2, 1.0 / s2};
    std::vector<double> hi = {1.0 / s2, -1.0 / s2};
    b.matrix = analysis_matrix(dimension, lo, hi, 2).transpose();
  } else if (kind == "db4") {
    if (dimension < 4) throw std::invalid_argument("make_wavelet_basis: db4 needs dimension >= 4");
    const double s3 = std::sqrt(3.0);
    std::vector<double> lo = {(1 + s3) / (4 * s2), (3 + s3) / (4 * s2), (3 - s3) / (4 * s2),
                              (1 - s3) / (4 * s2)};
    std::vector<double> hi = {lo[3], -lo[2], lo[1], -lo[0]};
    b.matrix = analysis_matrix(dimension, lo, hi, 4).transpose();
  } else {
    throw std::invalid_argument("make_wavelet_basis: unknown kind '" + kind + "'");
  }
  return b;
}

double orthonormality_defect(const WaveletBasis& basis) {
  Eigen::MatrixXd g = basis.matrix.transpose() * basis.matrix;
  g.diagonal().array() -= 1.0;
  return g.cwiseAbs().maxCoeff();
}

}  // namespace csmac
