#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "csmac/cscodec.hpp"

namespace csmac {

// Produces one field realization per trial seed.
using FieldSource = std::function<Eigen::MatrixXd(std::uint64_t)>;

struct CalibrationSpec {
  int n_s = 128;
  int n_t = 128;
  double target_mse = 0.05;
  double target_success = 0.95;
  int trials = 200;
  std::vector<long long> grid;  // total sample counts M; empty = automatic
  std::uint64_t seed = 0;
  int jobs = 1;
  std::string basis = "haar";
  ReconstructionConfig recon{ReconstructionConfig::Solver::GreedyPursuit, 0.0, 200, 4};
  double epsilon_scale = 0.9;  // solver residual target as a fraction of
                               // sqrt(target_mse) * |Y|

  void validate() const {
    if (n_s < 1 || n_t < 1 || target_mse <= 0 || target_success <= 0 || target_success >= 1 ||
        trials < 1)
      throw std::invalid_argument("CalibrationSpec: out-of-range parameter");
  }
};

enum class CurveMode { Space1D, Time1D, Joint2D };

struct SuccessCurve {
  CurveMode mode = CurveMode::Joint2D;
  std::vector<std::pair<long long, double>> points;  // (M, success rate), M increasing
};

class CalibrationError : public std::runtime_error {
 public:
  CalibrationError(const std::string& what, double max_rate)
      : std::runtime_error(what), max_rate(max_rate) {}
  double max_rate;
};

// Empirical success probability (reconstruction MSE <= target) per grid
// point; each trial draws a fresh field and a fresh random subset. For the
// one-dimensional modes M counts m_s*n_t (resp. n_s*m_t) samples; the joint
// mode walks the m_s/m_t = ratio line. With no explicit grid the scan stops
// once the target success rate holds on two consecutive points.
SuccessCurve success_curve(const CalibrationSpec& spec, CurveMode mode, const FieldSource& source,
                           double ratio = 1.0);

// Smallest grid M whose success rate reaches the target; throws
// CalibrationError carrying the best rate when the curve never gets there.
long long threshold(const SuccessCurve& curve, double target_success);

// Integer (m_s, m_t) with product >= m_thresh, bounded by (n_s, n_t), chosen
// with minimal product and, among those, the ratio closest to
// (n_s/n_t)*(m_s_thresh/m_t_thresh).
std::pair<int, int> split(int n_s, int n_t, long long m_s_thresh, long long m_t_thresh,
                          long long m_thresh);

struct CalibrationResult {
  long long m_s_thresh = 0;  // spatial-only sample threshold
  long long m_t_thresh = 0;  // temporal-only sample threshold
  long long m_thresh = 0;    // joint threshold
  double ratio = 1.0;        // prescribed m_s/m_t
  int m_s = 0, m_t = 0;
  SuccessCurve space_curve, time_curve, joint_curve;
};

CalibrationResult calibrate_full(const CalibrationSpec& spec, const FieldSource& source);

}  // namespace csmac
