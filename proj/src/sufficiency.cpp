#include "csmac/sufficiency.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace csmac {

MacAnalyzer::MacAnalyzer(const MacTiming& timing, const EnergyParams& energy,
                         const AnalysisOptions& opts)
    : timing_(timing), energy_(energy), opts_(opts) {
  timing_.validate();
}

const MacAnalyzer::SfKernel& MacAnalyzer::kernel(int h, int sf_len) const {
  std::lock_guard<std::mutex> lock(mutex_);
  auto key = std::make_pair(h, sf_len);
  auto it = cache_.find(key);
  if (it != cache_.end()) return *it->second;

  auto k = std::make_unique<SfKernel>();
  k->chain = solve_chain(h, sf_len, timing_);
  k->stats = frame_stats(k->chain, timing_);
  k->energy = energy_per_node_sf(k->chain, timing_, energy_);

  const int k_cap = opts_.cap_frames_by_contenders ? std::min(h, k->stats.k_s_max)
                                                   : k->stats.k_s_max;
  const int s_cap = std::min(h, k_cap);

  // frame-count weights and their suffix sums (the per-s normalizers)
  std::vector<double> weight(k_cap + 2, 0.0);
  for (int kk = 1; kk <= k_cap; ++kk) {
    double fit = frame_count_fit_prob(kk, sf_len, k->stats);
    switch (opts_.weighting) {
      case FrameWeighting::kOverflow: weight[kk] = 1.0 - fit; break;
      case FrameWeighting::kFit: weight[kk] = fit; break;
      case FrameWeighting::kPoint:
        weight[kk] = std::max(0.0, fit - frame_count_fit_prob(kk + 1, sf_len, k->stats));
        break;
    }
  }
  std::vector<double> suffix(k_cap + 2, 0.0);
  for (int kk = k_cap; kk >= 1; --kk) suffix[kk] = suffix[kk + 1] + weight[kk];

  // success-count mixture; the collision/CCA-failure split of the multinomial
  // collapses through the binomial theorem, leaving the <=1 deference terms
  const double p_succ = k->stats.p_succ;
  const double p_fail = k->stats.p_coll + k->stats.p_ccas;
  const double p_d = k->stats.p_d;
  k->weights.assign(s_cap + 1, 0.0);
  for (int s = 0; s <= s_cap; ++s) {
    const double z = suffix[std::max(s, 1)];
    if (z <= 0.0) continue;
    const double lg_s = std::lgamma(s + 1.0);
    double acc = 0.0, prev = -1.0;
    for (int kk = std::max(s, 1); kk <= k_cap; ++kk) {
      if (weight[kk] <= 0.0) continue;
      double term = 0.0;
      for (int d = 0; d <= 1 && d <= kk - s; ++d) {
        const int rest = kk - s - d;
        if ((s > 0 && p_succ <= 0.0) || (rest > 0 && p_fail <= 0.0) || (d > 0 && p_d <= 0.0))
          continue;
        double logc = std::lgamma(kk + 1.0) - lg_s - std::lgamma(rest + 1.0);
        double logp = (s > 0 ? s * std::log(p_succ) : 0.0) +
                      (rest > 0 ? rest * std::log(p_fail) : 0.0) +
                      (d > 0 ? std::log(p_d) : 0.0);
        term += std::exp(logc + logp);
      }
      double summand = weight[kk] * term;
      acc += summand;
      // stop once the summand is past its peak and negligible
      if (prev >= 0 && summand < prev && summand < 1e-14 * acc) break;
      prev = summand;
    }
    k->weights[s] = acc / z;
  }

  auto [pos, inserted] = cache_.emplace(key, std::move(k));
  (void)inserted;
  return *pos->second;
}

const ChainSolution& MacAnalyzer::chain(int h, int sf_len) const { return kernel(h, sf_len).chain; }
const FrameStats& MacAnalyzer::stats(int h, int sf_len) const { return kernel(h, sf_len).stats; }
const EnergyBreakdown& MacAnalyzer::node_energy(int h, int sf_len) const {
  return kernel(h, sf_len).energy;
}
const std::vector<double>& MacAnalyzer::success_weights(int h, int sf_len) const {
  return kernel(h, sf_len).weights;
}

std::vector<double> MacAnalyzer::remaining_dist(const std::vector<int>& bo, int h) const {
  std::vector<double> dist(h + 1, 0.0);
  dist[h] = 1.0;
  std::vector<double> next(h + 1);
  for (int b : bo) {
    const int sf = timing_.sf_len(b);
    std::fill(next.begin(), next.end(), 0.0);
    next[0] = dist[0];  // nobody left to contend
    for (int r = 1; r <= h; ++r) {
      if (dist[r] == 0.0) continue;
      const auto& w = success_weights(r, sf);
      for (int s = 0; s < static_cast<int>(w.size()); ++s)
        next[r - s] += dist[r] * w[s];
    }
    dist.swap(next);
  }
  return dist;
}

std::vector<double> MacAnalyzer::tail_prob_by_joiners(const std::vector<int>& bo, int n_s,
                                                      int m_s) const {
  std::vector<double> tail(n_s + 1, 0.0);
  for (int h = 0; h <= n_s; ++h) {
    if (m_s <= 0) {
      tail[h] = 1.0;
      continue;
    }
    if (h < m_s) continue;
    auto dist = remaining_dist(bo, h);
    double p = 0.0;
    for (int r = 0; r <= h - m_s; ++r) p += dist[r];
    tail[h] = p;
  }
  return tail;
}

double MacAnalyzer::prob_sufficient(const MacConfig& cfg, int n_s, int m_s) const {
  cfg.validate(timing_);
  if (m_s > n_s) throw std::invalid_argument("prob_sufficient: m_s exceeds n_s");
  if (m_s <= 0) return 1.0;
  if (cfg.p_s <= 0.0) return 0.0;
  auto tail = tail_prob_by_joiners(cfg.bo, n_s, m_s);
  auto pmf = binomial_pmf(n_s, cfg.p_s);
  double p = 0.0;
  for (int h = m_s; h <= n_s; ++h) p += pmf[h] * tail[h];
  return std::clamp(p, 0.0, 1.0);
}

std::vector<double> MacAnalyzer::energy_by_joiners(const std::vector<int>& bo, int n_s,
                                                   int m_s) const {
  std::vector<double> out(n_s + 1, 0.0);
  for (int h = std::max(1, m_s); h <= n_s; ++h) {
    std::vector<double> p(h + 1, 0.0), e(h + 1, 0.0);
    std::vector<double> pn(h + 1), en(h + 1);
    p[h] = 1.0;
    for (int b : bo) {
      const int sf = timing_.sf_len(b);
      std::fill(pn.begin(), pn.end(), 0.0);
      std::fill(en.begin(), en.end(), 0.0);
      pn[0] = p[0];
      en[0] = e[0];
      for (int r = 1; r <= h; ++r) {
        if (p[r] == 0.0 && e[r] == 0.0) continue;
        const double e_sf = r * node_energy(r, sf).total();
        const auto& w = success_weights(r, sf);
        for (int s = 0; s < static_cast<int>(w.size()); ++s) {
          pn[r - s] += p[r] * w[s];
          en[r - s] += (e[r] + p[r] * e_sf) * w[s];
        }
      }
      p.swap(pn);
      e.swap(en);
    }
    double acc = 0.0;
    for (int r = 0; r <= h - std::max(m_s, 0); ++r) acc += e[r];
    out[h] = acc;
  }
  return out;
}

double MacAnalyzer::expected_energy_ri(const MacConfig& cfg, int n_s, int m_s) const {
  cfg.validate(timing_);
  if (cfg.p_s <= 0.0) return 0.0;
  auto by_h = energy_by_joiners(cfg.bo, n_s, m_s);
  auto pmf = binomial_pmf(n_s, cfg.p_s);
  double e = 0.0;
  for (int h = 0; h <= n_s; ++h) e += pmf[h] * by_h[h];
  return e;
}

std::vector<double> binomial_pmf(int n, double p) {
  std::vector<double> pmf(n + 1, 0.0);
  if (p <= 0.0) {
    pmf[0] = 1.0;
    return pmf;
  }
  if (p >= 1.0) {
    pmf[n] = 1.0;
    return pmf;
  }
  const double lp = std::log(p), lq = std::log1p(-p);
  const double lg = std::lgamma(n + 1.0);
  for (int k = 0; k <= n; ++k) {
    double logv = lg - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) + k * lp + (n - k) * lq;
    pmf[k] = std::exp(logv);
  }
  return pmf;
}

}  // namespace csmac
