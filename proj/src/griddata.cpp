#include "csmac/griddata.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include "csmac/rng.hpp"

namespace csmac {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

void HarmonicModel::validate() const {
  if (period <= 0) throw std::invalid_argument("HarmonicModel: period must be positive");
  for (const auto& h : harmonics)
    if (h.k < 1 || h.k > period / 2)
      throw std::invalid_argument("HarmonicModel: harmonic order outside [1, period/2]");
}

double HarmonicModel::eval(long long t) const {
  double x = chi0;
  for (const auto& h : harmonics) {
    double w = kTwoPi * h.k * static_cast<double>(t % period) / period;
    x += h.re * std::sin(w) + h.im * std::cos(w);
  }
  return x;
}

void Ar1Model::validate() const {
  if (phi.empty()) throw std::invalid_argument("Ar1Model: no coefficients");
  for (double p : phi)
    if (!(std::abs(p) < 1.0)) throw std::invalid_argument("Ar1Model: |phi| >= 1 is not stationary");
  if (noise_scale < 0) throw std::invalid_argument("Ar1Model: negative noise scale");
}

double Ar1Model::phi_at(long long t, int period) const {
  if (phi.size() == 1) return phi[0];
  return phi[static_cast<std::size_t>(t % period) % phi.size()];
}

void WindTurbineCurve::validate() const {
  if (!(0 < v_ci && v_ci < v_r && v_r < v_co))
    throw std::invalid_argument("WindTurbineCurve: need 0 < v_ci < v_r < v_co");
  if (p_r <= 0) throw std::invalid_argument("WindTurbineCurve: rated power must be positive");
  auto ramp = [this](double v) { return a + b * v + c * v * v; };
  if (std::abs(ramp(v_ci)) > 1e-9 || std::abs(ramp(v_r) - p_r) > 1e-9)
    throw std::invalid_argument("WindTurbineCurve: ramp does not meet the region boundaries");
}

WindTurbineCurve make_wind_curve(double v_ci, double v_r, double v_co, double p_r) {
  WindTurbineCurve w;
  w.v_ci = v_ci;
  w.v_r = v_r;
  w.v_co = v_co;
  w.p_r = p_r;
  const double span = v_r - v_ci;
  w.c = p_r / (span * span);
  w.b = -2.0 * p_r * v_ci / (span * span);
  w.a = p_r * v_ci * v_ci / (span * span);
  w.validate();
  return w;
}

double wind_power(double v, const WindTurbineCurve& w) {
  if (v <= w.v_ci || v > w.v_co) return 0.0;
  if (v <= w.v_r) return w.a + w.b * v + w.c * v * v;
  return w.p_r;
}

Eigen::MatrixXd SpatialCorrelation::correlation() const {
  return (-distances.array() / d_scale).exp();
}

Eigen::MatrixXd make_random_distances(int n, std::uint64_t seed) {
  auto rng = make_rng(seed);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  std::vector<double> px(n), py(n);
  for (int i = 0; i < n; ++i) {
    double x, y;
    do {
      x = u(rng);
      y = u(rng);
    } while (x * x + y * y > 0.25);
    px[i] = x;
    py[i] = y;
  }
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      double dist = std::hypot(px[i] - px[j], py[i] - py[j]);
      d(i, j) = d(j, i) = dist;
    }
  return d;
}

std::vector<double> gen_series(const HarmonicModel& h, const Ar1Model& a, long long length,
                               std::uint64_t seed) {
  h.validate();
  a.validate();
  if (length < 1) throw std::invalid_argument("gen_series: length must be >= 1");
  auto rng = make_rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> x(length);
  double phi0 = a.phi_at(0, h.period);
  double s = a.noise_scale > 0 ? gauss(rng) * a.noise_scale / std::sqrt(1.0 + phi0) : 0.0;
  for (long long t = 0; t < length; ++t) {
    x[t] = h.eval(t) + s;
    double phi = a.phi_at(t, h.period);
    s = phi * s + gauss(rng) * a.noise_scale * std::sqrt(std::max(0.0, 1.0 - phi));
  }
  return x;
}

Eigen::MatrixXd correlate_nodes(const Eigen::MatrixXd& innovations,
                                const SpatialCorrelation& corr) {
  const int n = static_cast<int>(innovations.rows());
  if (corr.distances.rows() != n || corr.distances.cols() != n)
    throw std::invalid_argument("correlate_nodes: distance matrix does not match node count");
  if (!corr.distances.isApprox(corr.distances.transpose(), 1e-12))
    throw std::invalid_argument("correlate_nodes: distance matrix is not symmetric");
  Eigen::MatrixXd rho = corr.correlation();
  Eigen::LLT<Eigen::MatrixXd> llt(rho);
  if (llt.info() != Eigen::Success) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(rho, Eigen::EigenvaluesOnly);
    std::ostringstream msg;
    msg << "correlate_nodes: correlation matrix is not positive semidefinite"
        << " (smallest eigenvalue " << es.eigenvalues().minCoeff() << ")";
    throw std::invalid_argument(msg.str());
  }
  return llt.matrixL() * innovations;
}

DataField gen_field(const GridScenario& sc, std::uint64_t seed) {
  sc.load_trend.validate();
  sc.load_ar.validate();
  sc.wind_trend.validate();
  sc.wind_ar.validate();
  sc.curve.validate();
  if (sc.wind_fraction < 0.0 || sc.wind_fraction > 1.0)
    throw std::invalid_argument("gen_field: wind_fraction outside [0,1]");

  const int n_gen = static_cast<int>(std::llround(sc.wind_fraction * sc.n_s));
  auto rng = make_rng(mix_seed(seed, 0xF1E1DULL));

  // which nodes host generation
  std::vector<int> ids(sc.n_s);
  std::iota(ids.begin(), ids.end(), 0);
  for (int i = 0; i < sc.n_s; ++i) {
    std::uniform_int_distribution<int> d(i, sc.n_s - 1);
    std::swap(ids[i], ids[d(rng)]);
  }
  std::vector<int> gen_nodes(ids.begin(), ids.begin() + n_gen);
  std::sort(gen_nodes.begin(), gen_nodes.end());

  DataField f;
  f.ri_minutes = sc.ri_minutes;
  f.values.resize(sc.n_s, sc.n_t);

  // independent load at every node
  for (int i = 0; i < sc.n_s; ++i) {
    auto load = gen_series(sc.load_trend, sc.load_ar, sc.n_t, mix_seed(seed, 1, i));
    for (int t = 0; t < sc.n_t; ++t) f.values(i, t) = -load[t];
  }

  if (n_gen > 0) {
    // spatially correlated wind-speed innovations, then the AR recursion
    SpatialCorrelation corr;
    corr.d_scale = sc.d_scale;
    corr.distances = make_random_distances(n_gen, mix_seed(seed, 2));
    auto wrng = make_rng(mix_seed(seed, 3));
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::MatrixXd innov(n_gen, sc.n_t + 1);
    for (int i = 0; i < n_gen; ++i)
      for (int t = 0; t <= sc.n_t; ++t) innov(i, t) = gauss(wrng);
    innov = correlate_nodes(innov, corr);

    const double scale = sc.wind_ar.noise_scale;
    for (int g = 0; g < n_gen; ++g) {
      double phi0 = sc.wind_ar.phi_at(0, sc.wind_trend.period);
      double s = scale > 0 ? innov(g, 0) * scale / std::sqrt(1.0 + phi0) : 0.0;
      for (int t = 0; t < sc.n_t; ++t) {
        double v = std::max(0.0, sc.wind_trend.eval(t) + s);
        f.values(gen_nodes[g], t) += wind_power(v, sc.curve);
        double phi = sc.wind_ar.phi_at(t, sc.wind_trend.period);
        s = phi * s + innov(g, t + 1) * scale * std::sqrt(std::max(0.0, 1.0 - phi));
      }
    }
  }
  return f;
}

HarmonicModel fit_harmonics(const std::vector<double>& series, int max_harmonics, int period) {
  const long long n = static_cast<long long>(series.size());
  if (n < 2LL * period)
    throw std::invalid_argument("fit_harmonics: need at least two full periods of data");
  if (max_harmonics < 0) throw std::invalid_argument("fit_harmonics: negative harmonic budget");

  const double mean = std::accumulate(series.begin(), series.end(), 0.0) / n;

  // rank candidate orders by projection energy, then pick the count by BIC
  struct Cand {
    int k;
    double energy;
  };
  std::vector<Cand> cands;
  for (int k = 1; k <= period / 2; ++k) {
    double cs = 0, cc = 0;
    for (long long t = 0; t < n; ++t) {
      double w = kTwoPi * k * static_cast<double>(t % period) / period;
      cs += (series[t] - mean) * std::sin(w);
      cc += (series[t] - mean) * std::cos(w);
    }
    cands.push_back({k, cs * cs + cc * cc});
  }
  std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
    return a.energy > b.energy;
  });
  const int m_max = std::min<int>(max_harmonics, static_cast<int>(cands.size()));

  auto ols = [&](int m, Eigen::VectorXd& coef) {
    Eigen::MatrixXd X(n, 1 + 2 * m);
    for (long long t = 0; t < n; ++t) {
      X(t, 0) = 1.0;
      for (int j = 0; j < m; ++j) {
        double w = kTwoPi * cands[j].k * static_cast<double>(t % period) / period;
        X(t, 1 + 2 * j) = std::sin(w);
        X(t, 2 + 2 * j) = std::cos(w);
      }
    }
    Eigen::Map<const Eigen::VectorXd> y(series.data(), n);
    coef = X.colPivHouseholderQr().solve(y);
    return (y - X * coef).squaredNorm();
  };

  double best_bic = 0;
  int best_m = -1;
  Eigen::VectorXd best_coef;
  for (int m = 0; m <= m_max; ++m) {
    Eigen::VectorXd coef;
    double rss = ols(m, coef);
    double bic = n * std::log(std::max(rss / n, 1e-300)) + (1 + 2 * m) * std::log(double(n));
    if (best_m < 0 || bic < best_bic - 1e-9) {
      best_bic = bic;
      best_m = m;
      best_coef = coef;
    }
  }

  HarmonicModel h;
  h.period = period;
  h.chi0 = best_coef(0);
  for (int j = 0; j < best_m; ++j)
    h.harmonics.push_back({cands[j].k, best_coef(1 + 2 * j), best_coef(2 + 2 * j)});
  std::sort(h.harmonics.begin(), h.harmonics.end(),
            [](const Harmonic& a, const Harmonic& b) { return a.k < b.k; });
  return h;
}

Ar1Model fit_ar1(const std::vector<double>& residual, int period, bool normalize) {
  const long long n = static_cast<long long>(residual.size());
  if (n < period + 1)
    throw std::invalid_argument("fit_ar1: series too short for one coefficient per interval");

  std::vector<double> x(residual);
  if (normalize) {
    double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
    double var = 0;
    for (double v : x) var += (v - mean) * (v - mean);
    var /= n;
    double sd = std::sqrt(var);
    if (sd > 0)
      for (double& v : x) v = (v - mean) / sd;
    else
      for (double& v : x) v = 0.0;
  }

  Ar1Model model;
  model.phi.assign(period, 0.0);
  bool any_data = false;
  for (int tau = 0; tau < period; ++tau) {
    double num = 0, den = 0;
    long long count = 0;
    for (long long t = tau; t + 1 < n; t += period) {
      num += x[t] * x[t + 1];
      den += x[t] * x[t];
      ++count;
    }
    if (count == 0) {
      std::ostringstream msg;
      msg << "fit_ar1: no observations for interval-of-day " << tau;
      throw std::invalid_argument(msg.str());
    }
    if (den <= 0) {
      model.degenerate = true;
      model.phi[tau] = 0.0;
      continue;
    }
    any_data = true;
    double est = num / den;
    if (est >= 1.0 || est <= -1.0) {
      model.clipped = true;
      est = std::clamp(est, -0.999999, 0.999999);
    }
    model.phi[tau] = est;
  }
  if (!any_data) model.degenerate = true;
  return model;
}

}  // namespace csmac
