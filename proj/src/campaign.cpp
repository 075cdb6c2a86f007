#include "csmac/campaign.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <stdexcept>

#include "csmac/rng.hpp"

namespace csmac {

CampaignResult run_campaign(const DataField& field, const CampaignConfig& cfg,
                            const MacTiming& timing, const EnergyParams& energy,
                            std::uint64_t seed) {
  const int n_s = static_cast<int>(field.values.rows());
  const int total_ris = static_cast<int>(field.values.cols());
  const int window = cfg.window > 0 ? cfg.window : total_ris;
  if (cfg.m_s < 1 || cfg.m_s > n_s || cfg.m_t < 1 || cfg.m_t > window || window > total_ris)
    throw std::invalid_argument("run_campaign: sample plan does not fit the field");

  CampaignResult res;
  auto rng = make_rng(mix_seed(seed, 0xCA3Full));

  // initial window: m_t broadcast requests at random intervals
  std::vector<int> first(window);
  std::iota(first.begin(), first.end(), 0);
  for (int i = 0; i < cfg.m_t; ++i) {
    std::uniform_int_distribution<int> d(i, window - 1);
    std::swap(first[i], first[d(rng)]);
  }
  std::vector<char> requested(total_ris, 0);
  for (int i = 0; i < cfg.m_t; ++i) requested[first[i]] = 1;

  // rolling continuation: keep every sliding window at >= m_t blocks
  int in_window = cfg.m_t;
  for (int t = window; t < total_ris; ++t) {
    if (requested[t - window]) --in_window;
    if (in_window < cfg.m_t) {
      requested[t] = 1;
      ++in_window;
    }
  }

  // run one MAC reporting interval per requested block
  Eigen::MatrixXd values = Eigen::MatrixXd::Zero(n_s, total_ris);
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> mask(n_s, total_ris);
  mask.setConstant(false);
  for (int t = 0; t < total_ris; ++t) {
    if (!requested[t]) continue;
    res.requested_ris.push_back(t);
    auto ri = run_ri(n_s, cfg.mac, timing, energy, mix_seed(seed, 1, t), cfg.sim);
    res.total_delay_slots += ri.delay_slots;
    res.total_energy += std::accumulate(ri.node_energy.begin(), ri.node_energy.end(), 0.0);
    res.delivered_nodes.push_back(ri.delivered_nodes);
    if (ri.successes < cfg.m_s) ++res.deficient_ris;
    for (int id : ri.delivered_nodes) {
      values(id, t) = field.values(id, t);
      mask(id, t) = true;
    }
  }
  res.observed_sufficiency =
      res.requested_ris.empty()
          ? 0.0
          : 1.0 - static_cast<double>(res.deficient_ris) / res.requested_ris.size();

  // reconstruct back-to-back windows plus a trailing window flush with the
  // last interval when the field length is not a multiple of the window
  std::vector<int> starts;
  for (int s = 0; s + window <= total_ris; s += window) starts.push_back(s);
  if (starts.empty() || starts.back() + window < total_ris) starts.push_back(total_ris - window);

  WaveletBasis bs = make_wavelet_basis(n_s, cfg.basis);
  WaveletBasis bt = make_wavelet_basis(window, cfg.basis);
  for (int start : starts) {
    Eigen::MatrixXd v = values.middleCols(start, window);
    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> m = mask.middleCols(start, window);
    auto rec = reconstruct_scattered(v, m, bs, bt, cfg.recon);
    res.window_mse.push_back(mse(field.values.middleCols(start, window), rec.z_hat));
    res.z_hat = rec.z_hat;
  }
  return res;
}

}  // namespace csmac
