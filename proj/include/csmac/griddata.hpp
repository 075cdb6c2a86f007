#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace csmac {

// Daily-trend model: chi0 plus m_h sinusoids at integer cycles-per-day.
struct Harmonic {
  int k = 1;       // cycles per day, 1..period/2
  double re = 0;   // sine coefficient
  double im = 0;   // cosine coefficient
};

struct HarmonicModel {
  double chi0 = 0;
  std::vector<Harmonic> harmonics;
  int period = 288;  // samples per day

  void validate() const;
  double eval(long long t) const;
};

// First-order autoregression with interval-of-day coefficients; the
// innovation variance follows the (1 - phi_t) rule on the normalized scale,
// stretched by noise_scale.
struct Ar1Model {
  std::vector<double> phi;  // one entry, or one per interval of day
  double noise_scale = 1.0;
  bool clipped = false;      // set by fitting when estimates left (-1, 1)
  bool degenerate = false;   // set by fitting on constant input

  void validate() const;
  double phi_at(long long t, int period) const;
};

struct WindTurbineCurve {
  double v_ci = 3.0, v_r = 12.0, v_co = 25.0;  // m/s
  double p_r = 1.0;                            // kW
  double a = 0, b = 0, c = 0;                  // quadratic ramp coefficients

  void validate() const;
};

// The unique quadratic through (v_ci, 0), (v_r, p_r) and the quarter-power
// midpoint anchor; continuous at both region boundaries.
WindTurbineCurve make_wind_curve(double v_ci, double v_r, double v_co, double p_r);

double wind_power(double v, const WindTurbineCurve& curve);

struct SpatialCorrelation {
  double d_scale = 20.0;        // km
  Eigen::MatrixXd distances;    // symmetric, zero diagonal, km

  Eigen::MatrixXd correlation() const;  // exp(-d_ij / d_scale)
};

// Pairwise distances of points placed uniformly in a disc of 1 km diameter,
// so the exponential-kernel correlation is positive definite by construction.
Eigen::MatrixXd make_random_distances(int n, std::uint64_t seed);

// X_t = trend + AR(1) component, reproducible for a fixed seed.
std::vector<double> gen_series(const HarmonicModel& h, const Ar1Model& a, long long length,
                               std::uint64_t seed);

// Mixes independent per-node innovation rows into rows with the target
// pairwise correlation via the Cholesky factor. Throws (naming the offending
// eigenvalue) when the correlation matrix is not positive semidefinite.
Eigen::MatrixXd correlate_nodes(const Eigen::MatrixXd& innovations,
                                const SpatialCorrelation& corr);

struct DataField {
  Eigen::MatrixXd values;   // n_s x n_t injected power, kW
  double ri_minutes = 5.0;
};

struct GridScenario {
  int n_s = 64;
  int n_t = 256;
  double ri_minutes = 5.0;
  double wind_fraction = 0.5;
  HarmonicModel load_trend;
  Ar1Model load_ar;
  HarmonicModel wind_trend;   // wind-speed daily trend, m/s
  Ar1Model wind_ar;
  WindTurbineCurve curve;
  double d_scale = 20.0;
};

// Injected powers S = S_g - S_l: loads at every node, wind generation at a
// wind_fraction share of nodes with spatially correlated speed innovations.
DataField gen_field(const GridScenario& sc, std::uint64_t seed);

// OLS harmonic fit with the harmonic count chosen by Bayesian information
// criterion minimization over the top-energy candidates.
HarmonicModel fit_harmonics(const std::vector<double>& series, int max_harmonics,
                            int period = 288);

// Per-interval-of-day AR(1) slope estimates on a residual series. Estimates
// outside (-1, 1) are clipped (flagged); a constant series yields phi = 0
// with the degenerate flag set.
Ar1Model fit_ar1(const std::vector<double>& residual, int period = 288, bool normalize = true);

}  // namespace csmac
