#include "csmac/calibrate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "csmac/parallel.hpp"
#include "csmac/rng.hpp"

namespace csmac {

namespace {

std::vector<int> draw_subset(int n, int m, std::mt19937_64& rng) {
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  for (int i = 0; i < m; ++i) {
    std::uniform_int_distribution<int> d(i, n - 1);
    std::swap(idx[i], idx[d(rng)]);
  }
  idx.resize(m);
  std::sort(idx.begin(), idx.end());
  return idx;
}

// Batched orthogonal matching pursuit for the one-dimensional modes: one
// sampled operator, many right-hand sides sharing its Gram.
struct Omp1d {
  Eigen::MatrixXd u;     // m x n sampled synthesis operator
  Eigen::MatrixXd gram;  // n x n

  Eigen::VectorXd solve(const Eigen::VectorXd& y, double eps, int max_atoms) const {
    const int n = static_cast<int>(u.cols());
    Eigen::VectorXd residual = y;
    std::vector<int> support;
    Eigen::MatrixXd chol;  // growing lower-triangular factor
    Eigen::VectorXd rhs;
    Eigen::VectorXd w;
    double rnorm = residual.norm();
    while (rnorm > eps && static_cast<int>(support.size()) < max_atoms) {
      Eigen::VectorXd corr = u.transpose() * residual;
      for (int s : support) corr(s) = 0;
      int best;
      corr.cwiseAbs().maxCoeff(&best);
      if (std::abs(corr(best)) < 1e-300) break;

      const int k = static_cast<int>(support.size());
      Eigen::VectorXd cross(k);
      for (int i = 0; i < k; ++i) cross(i) = gram(support[i], best);
      double diag = gram(best, best) + 1e-12;
      chol.conservativeResizeLike(Eigen::MatrixXd::Zero(k + 1, k + 1));
      if (k > 0) {
        Eigen::VectorXd x = chol.topLeftCorner(k, k).triangularView<Eigen::Lower>().solve(cross);
        chol.block(k, 0, 1, k) = x.transpose();
        diag -= x.squaredNorm();
      }
      if (diag <= 0) break;
      chol(k, k) = std::sqrt(diag);
      support.push_back(best);
      rhs.conservativeResize(k + 1);
      rhs(k) = u.col(best).dot(y);

      Eigen::VectorXd tmp =
          chol.topLeftCorner(k + 1, k + 1).triangularView<Eigen::Lower>().solve(rhs);
      w = chol.topLeftCorner(k + 1, k + 1)
              .transpose()
              .triangularView<Eigen::Upper>()
              .solve(tmp);
      residual = y;
      for (int i = 0; i <= k; ++i) residual -= w(i) * u.col(support[i]);
      rnorm = residual.norm();
    }
    Eigen::VectorXd coeffs = Eigen::VectorXd::Zero(n);
    for (std::size_t i = 0; i < support.size(); ++i) coeffs(support[i]) = w(i);
    return coeffs;
  }
};

// One calibration trial at a given sample allocation; returns the field MSE.
double trial_mse(const CalibrationSpec& spec, CurveMode mode, const FieldSource& source,
                 const WaveletBasis& bs, const WaveletBasis& bt, int m_s, int m_t,
                 std::uint64_t trial_seed) {
  Eigen::MatrixXd z = source(mix_seed(trial_seed, 1));
  auto rng = make_rng(mix_seed(trial_seed, 2));
  const double znorm = z.norm();
  if (znorm <= 0) return 0.0;

  if (mode == CurveMode::Joint2D) {
    auto plan = make_subset_plan(spec.n_s, spec.n_t, m_s, m_t, mix_seed(trial_seed, 3));
    Eigen::MatrixXd y = observe(z, plan);
    ReconstructionConfig cfg = spec.recon;
    cfg.epsilon = spec.epsilon_scale * std::sqrt(spec.target_mse) * y.norm();
    auto res = reconstruct(y, plan, bs, bt, cfg);
    return mse(z, res.z_hat);
  }

  // 1D modes: one sampled axis, independent problems along the other
  const bool spatial = mode == CurveMode::Space1D;
  const int n = spatial ? spec.n_s : spec.n_t;
  const int m = spatial ? m_s : m_t;
  auto subset = draw_subset(n, m, rng);
  const WaveletBasis& basis = spatial ? bs : bt;
  Omp1d solver;
  solver.u.resize(m, n);
  for (int i = 0; i < m; ++i) solver.u.row(i) = basis.matrix.row(subset[i]);
  solver.gram = solver.u.transpose() * solver.u;

  const int problems = spatial ? spec.n_t : spec.n_s;
  const int max_atoms = std::min(m, spec.recon.max_iterations * std::max(1, spec.recon.atoms_per_iteration));
  Eigen::MatrixXd z_hat(spec.n_s, spec.n_t);
  for (int p = 0; p < problems; ++p) {
    Eigen::VectorXd sig = spatial ? Eigen::VectorXd(z.col(p)) : Eigen::VectorXd(z.row(p));
    Eigen::VectorXd y(m);
    for (int i = 0; i < m; ++i) y(i) = sig(subset[i]);
    double eps = spec.epsilon_scale * std::sqrt(spec.target_mse) * y.norm();
    Eigen::VectorXd coeffs = solver.solve(y, eps, max_atoms);
    Eigen::VectorXd rec = basis.matrix * coeffs;
    if (spatial)
      z_hat.col(p) = rec;
    else
      z_hat.row(p) = rec.transpose();
  }
  return mse(z, z_hat);
}

struct GridPoint {
  long long m_total;
  int m_s, m_t;
};

std::vector<GridPoint> grid_for(const CalibrationSpec& spec, CurveMode mode, double ratio,
                                bool explicit_grid) {
  std::vector<GridPoint> pts;
  const long long n_sigma = static_cast<long long>(spec.n_s) * spec.n_t;
  auto push_joint = [&](long long m_target) {
    double ms = std::sqrt(static_cast<double>(m_target) * ratio);
    int m_s = std::clamp(static_cast<int>(std::llround(ms)), 1, spec.n_s);
    int m_t = std::clamp(static_cast<int>(std::llround(ms / ratio)), 1, spec.n_t);
    long long m = static_cast<long long>(m_s) * m_t;
    if (pts.empty() || m > pts.back().m_total) pts.push_back({m, m_s, m_t});
  };
  auto push_1d = [&](long long m_target) {
    if (mode == CurveMode::Space1D) {
      int m_s = std::clamp(static_cast<int>(std::llround(static_cast<double>(m_target) / spec.n_t)),
                           1, spec.n_s);
      long long m = static_cast<long long>(m_s) * spec.n_t;
      if (pts.empty() || m > pts.back().m_total) pts.push_back({m, m_s, spec.n_t});
    } else {
      int m_t = std::clamp(static_cast<int>(std::llround(static_cast<double>(m_target) / spec.n_s)),
                           1, spec.n_t);
      long long m = static_cast<long long>(n_sigma / spec.n_t) * m_t;
      if (pts.empty() || m > pts.back().m_total) pts.push_back({m, spec.n_s, m_t});
    }
  };

  if (explicit_grid) {
    for (long long m : spec.grid)
      mode == CurveMode::Joint2D ? push_joint(m) : push_1d(m);
  } else {
    const long long step = std::max<long long>(1, n_sigma / 64);
    for (long long m = step; m <= n_sigma; m += step)
      mode == CurveMode::Joint2D ? push_joint(m) : push_1d(m);
  }
  return pts;
}

}  // namespace

SuccessCurve success_curve(const CalibrationSpec& spec, CurveMode mode, const FieldSource& source,
                           double ratio) {
  spec.validate();
  if (ratio <= 0) throw std::invalid_argument("success_curve: ratio must be positive");
  const bool explicit_grid = !spec.grid.empty();
  auto pts = grid_for(spec, mode, ratio, explicit_grid);
  if (pts.empty()) throw std::invalid_argument("success_curve: empty sample grid");

  WaveletBasis bs = make_wavelet_basis(spec.n_s, spec.basis);
  WaveletBasis bt = make_wavelet_basis(spec.n_t, spec.basis);

  SuccessCurve curve;
  curve.mode = mode;
  int consecutive_hits = 0;
  for (std::size_t gi = 0; gi < pts.size(); ++gi) {
    const auto& gp = pts[gi];
    std::vector<int> success(spec.trials, 0);
    parallel_for(spec.trials, spec.jobs, [&](std::size_t t) {
      std::uint64_t trial_seed = mix_seed(spec.seed, static_cast<std::uint64_t>(mode) * 1000 + gi, t);
      double err = trial_mse(spec, mode, source, bs, bt, gp.m_s, gp.m_t, trial_seed);
      success[t] = err <= spec.target_mse ? 1 : 0;
    });
    double rate =
        std::accumulate(success.begin(), success.end(), 0) / static_cast<double>(spec.trials);
    curve.points.emplace_back(gp.m_total, rate);
    if (!explicit_grid) {
      consecutive_hits = rate >= spec.target_success ? consecutive_hits + 1 : 0;
      if (consecutive_hits >= 2) break;  // the threshold is already bracketed
    }
  }
  return curve;
}

long long threshold(const SuccessCurve& curve, double target_success) {
  double best = 0;
  for (const auto& [m, rate] : curve.points) {
    if (rate >= target_success) return m;
    best = std::max(best, rate);
  }
  std::ostringstream msg;
  msg << "threshold: target success " << target_success << " never attained (best " << best << ")";
  throw CalibrationError(msg.str(), best);
}

std::pair<int, int> split(int n_s, int n_t, long long m_s_thresh, long long m_t_thresh,
                          long long m_thresh) {
  if (n_s < 1 || n_t < 1 || m_s_thresh < 1 || m_t_thresh < 1 || m_thresh < 1)
    throw std::invalid_argument("split: all inputs must be positive");
  if (m_thresh > static_cast<long long>(n_s) * n_t)
    throw std::invalid_argument("split: joint threshold exceeds the field size");

  const double ratio = (static_cast<double>(n_s) / n_t) *
                       (static_cast<double>(m_s_thresh) / m_t_thresh);
  const double ms_star = std::sqrt(m_thresh * ratio);
  const double mt_star = std::sqrt(m_thresh / ratio);

  int best_ms = -1, best_mt = -1;
  long long best_prod = 0;
  double best_ratio_err = 0;
  for (int ms = std::max(1, static_cast<int>(std::ceil(ms_star)) - 3);
       ms <= std::min(n_s, static_cast<int>(std::ceil(ms_star)) + 3); ++ms) {
    for (int mt = std::max(1, static_cast<int>(std::ceil(mt_star)) - 3);
         mt <= std::min(n_t, static_cast<int>(std::ceil(mt_star)) + 3); ++mt) {
      long long prod = static_cast<long long>(ms) * mt;
      if (prod < m_thresh) continue;
      double ratio_err = std::abs(static_cast<double>(ms) / mt - ratio);
      bool better = best_ms < 0 || prod < best_prod ||
                    (prod == best_prod && ratio_err < best_ratio_err - 1e-15) ||
                    (prod == best_prod && std::abs(ratio_err - best_ratio_err) <= 1e-15 &&
                     ms < best_ms);
      if (better) {
        best_ms = ms;
        best_mt = mt;
        best_prod = prod;
        best_ratio_err = ratio_err;
      }
    }
  }
  if (best_ms < 0) {
    // fall back to feasible corners when the +-3 window misses (tiny fields)
    for (int ms = 1; ms <= n_s; ++ms) {
      int mt = static_cast<int>(std::min<long long>(
          n_t, (m_thresh + ms - 1) / ms));
      if (static_cast<long long>(ms) * mt < m_thresh) continue;
      long long prod = static_cast<long long>(ms) * mt;
      double ratio_err = std::abs(static_cast<double>(ms) / mt - ratio);
      bool better = best_ms < 0 || prod < best_prod ||
                    (prod == best_prod && ratio_err < best_ratio_err);
      if (better) {
        best_ms = ms;
        best_mt = mt;
        best_prod = prod;
        best_ratio_err = ratio_err;
      }
    }
  }
  if (best_ms < 0) throw std::invalid_argument("split: no feasible integer allocation");
  return {best_ms, best_mt};
}

CalibrationResult calibrate_full(const CalibrationSpec& spec, const FieldSource& source) {
  CalibrationResult r;
  r.space_curve = success_curve(spec, CurveMode::Space1D, source);
  r.time_curve = success_curve(spec, CurveMode::Time1D, source);
  r.m_s_thresh = threshold(r.space_curve, spec.target_success);
  r.m_t_thresh = threshold(r.time_curve, spec.target_success);
  r.ratio = (static_cast<double>(spec.n_s) / spec.n_t) *
            (static_cast<double>(r.m_s_thresh) / r.m_t_thresh);
  r.joint_curve = success_curve(spec, CurveMode::Joint2D, source, r.ratio);
  r.m_thresh = threshold(r.joint_curve, spec.target_success);
  auto [ms, mt] = split(spec.n_s, spec.n_t, r.m_s_thresh, r.m_t_thresh, r.m_thresh);
  r.m_s = ms;
  r.m_t = mt;
  return r;
}

}  // namespace csmac
