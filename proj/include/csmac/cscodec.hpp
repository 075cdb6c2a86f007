#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "csmac/wavelet.hpp"

namespace csmac {

enum class SamplingMode { SubsetSelection, DenseRandom };

// Space/time observation operators. Subset-selection keeps explicit sorted
// index lists (every selection row is a distinct canonical unit row); the
// dense mode carries i.i.d. uniform matrices.
struct SamplingPlan {
  SamplingMode mode = SamplingMode::SubsetSelection;
  int n_s = 0, n_t = 0, m_s = 0, m_t = 0;
  std::uint64_t seed = 0;
  std::vector<int> rows, cols;      // subset mode
  Eigen::MatrixXd phi_s, phi_t;     // dense mode

  Eigen::MatrixXd phi_space() const;   // m_s x n_s
  Eigen::MatrixXd phi_time() const;    // m_t x n_t

  std::string to_text() const;
  static SamplingPlan from_text(const std::string& text);
};

SamplingPlan make_subset_plan(int n_s, int n_t, int m_s, int m_t, std::uint64_t seed);
// entries i.i.d. uniform on [lo, hi); the conventional choice is [0,1)
SamplingPlan make_dense_plan(int n_s, int n_t, int m_s, int m_t, std::uint64_t seed,
                             double lo = 0.0, double hi = 1.0);

// Wavelet-domain coefficients of a field and back. synthesize(analyze(Z)) == Z
// up to roundoff for orthonormal bases.
Eigen::MatrixXd analyze(const Eigen::MatrixXd& z, const WaveletBasis& basis_s,
                        const WaveletBasis& basis_t);
Eigen::MatrixXd synthesize(const Eigen::MatrixXd& coeffs, const WaveletBasis& basis_s,
                           const WaveletBasis& basis_t);

// Y = Phi_S * Z * Phi_T^T; in subset mode this is the sampled submatrix.
Eigen::MatrixXd observe(const Eigen::MatrixXd& z, const SamplingPlan& plan);

struct ReconstructionConfig {
  enum class Solver { GreedyPursuit, BasisPursuitDenoise };
  Solver solver = Solver::BasisPursuitDenoise;
  double epsilon = 1e-9;    // residual tolerance, Frobenius norm of Y - P(A)
  int max_iterations = 400;
  int atoms_per_iteration = 4;  // greedy batch size
};

struct ReconstructionResult {
  Eigen::MatrixXd coeffs;   // recovered coefficient matrix A*
  Eigen::MatrixXd z_hat;    // synthesized field
  double residual_norm = 0;
  int sparsity = 0;         // coefficients above the significance threshold
  int iterations = 0;
  bool converged = false;
};

// Sparse recovery of the coefficient matrix from Y and a plan; all operator
// applications stay in factored form (two small products), the Kronecker
// product is never materialized.
ReconstructionResult reconstruct(const Eigen::MatrixXd& y, const SamplingPlan& plan,
                                 const WaveletBasis& basis_s, const WaveletBasis& basis_t,
                                 const ReconstructionConfig& cfg);

// Recovery from an arbitrary set of observed entries (mask true = observed).
// Used by the campaign pipeline where each reporting interval delivers its
// own node subset.
ReconstructionResult reconstruct_scattered(const Eigen::MatrixXd& observed_values,
                                           const Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>& mask,
                                           const WaveletBasis& basis_s, const WaveletBasis& basis_t,
                                           const ReconstructionConfig& cfg);

// Relative squared error |Z - Z*|_F^2 / |Z|_F^2. Throws on a zero reference.
double mse(const Eigen::MatrixXd& z, const Eigen::MatrixXd& z_hat);

}  // namespace csmac
