#include "csmac/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace csmac {

namespace {

struct Candidate {
  long long delay;
  int k_tau;
  std::vector<int> bo;
};

// All nondecreasing {BO_i} sequences within bounds. Nondecreasing order is a
// canonical representative: the delay objective is permutation-invariant and
// contenders only thin out over the superframes.
void enumerate_bo(int k_tau, const SearchSpec& spec, std::vector<int>& prefix,
                  std::vector<Candidate>& out, const MacTiming& timing) {
  if (static_cast<int>(prefix.size()) == k_tau) {
    Candidate c;
    c.k_tau = k_tau;
    c.bo = prefix;
    c.delay = 0;
    for (int b : prefix) c.delay += timing.sf_len(b);
    out.push_back(std::move(c));
    return;
  }
  int lo = prefix.empty() ? spec.bo_min : prefix.back();
  for (int b = lo; b <= spec.bo_max; ++b) {
    if (spec.bo_uniform && !prefix.empty() && b != prefix.front()) continue;
    prefix.push_back(b);
    enumerate_bo(k_tau, spec, prefix, out, timing);
    prefix.pop_back();
  }
}

// Feasibility of one (k_tau, {BO_i}) candidate: the join probability
// maximizing P{K_succ >= m_s}, from a fixed grid with an optional
// golden-section refinement.
std::pair<double, double> best_join_prob(const MacAnalyzer& an, const std::vector<int>& bo,
                                         int n_s, int m_s, const SearchSpec& spec) {
  auto tail = an.tail_prob_by_joiners(bo, n_s, m_s);
  auto prob_at = [&](double ps) {
    auto pmf = binomial_pmf(n_s, ps);
    double p = 0.0;
    for (int h = 0; h <= n_s; ++h) p += pmf[h] * tail[h];
    return p;
  };

  if (spec.fixed_ps) return {*spec.fixed_ps, prob_at(*spec.fixed_ps)};

  double best_ps = 0.0, best_p = -1.0;
  const int steps = static_cast<int>(std::llround(1.0 / spec.ps_step));
  for (int i = 0; i <= steps; ++i) {
    double ps = std::min(1.0, i * spec.ps_step);
    double p = prob_at(ps);
    if (p > best_p + 1e-15) {
      best_p = p;
      best_ps = ps;
    }
  }
  if (spec.ps_refine) {
    double lo = std::max(0.0, best_ps - spec.ps_step);
    double hi = std::min(1.0, best_ps + spec.ps_step);
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = hi - gr * (hi - lo), b = lo + gr * (hi - lo);
    double fa = prob_at(a), fb = prob_at(b);
    for (int it = 0; it < 40; ++it) {
      if (fa < fb) {
        lo = a;
        a = b;
        fa = fb;
        b = lo + gr * (hi - lo);
        fb = prob_at(b);
      } else {
        hi = b;
        b = a;
        fb = fa;
        a = hi - gr * (hi - lo);
        fa = prob_at(a);
      }
    }
    double mid = 0.5 * (lo + hi);
    double fm = prob_at(mid);
    if (fm > best_p) {
      best_p = fm;
      best_ps = mid;
    }
  }
  return {best_ps, best_p};
}

}  // namespace

OptimizeResult optimize_mac(const MacAnalyzer& an, int n_s, int m_s, double p_suff,
                            const SearchSpec& spec) {
  if (m_s < 0 || m_s > n_s) throw std::invalid_argument("optimize_mac: m_s out of range");
  if (p_suff <= 0.0 || p_suff >= 1.0)
    throw std::invalid_argument("optimize_mac: p_suff must lie in (0,1)");

  std::vector<Candidate> candidates;
  if (spec.fixed_bo) {
    Candidate c;
    c.bo = *spec.fixed_bo;
    c.k_tau = static_cast<int>(c.bo.size());
    c.delay = 0;
    for (int b : c.bo) c.delay += an.timing().sf_len(b);
    candidates.push_back(std::move(c));
  } else {
    std::vector<int> prefix;
    for (int k = 1; k <= spec.k_tau_max; ++k) enumerate_bo(k, spec, prefix, candidates, an.timing());
  }
  std::stable_sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    if (a.delay != b.delay) return a.delay < b.delay;
    if (a.k_tau != b.k_tau) return a.k_tau < b.k_tau;
    return a.bo < b.bo;
  });

  double best_prob_seen = 0.0;
  long long evaluated = 0;
  for (const auto& c : candidates) {
    ++evaluated;
    auto [ps, p] = best_join_prob(an, c.bo, n_s, m_s, spec);
    best_prob_seen = std::max(best_prob_seen, p);
    if (p >= p_suff - 1e-12) {
      OptimizeResult r;
      r.config.k_tau = c.k_tau;
      r.config.bo = c.bo;
      r.config.p_s = ps;
      r.delay_slots = c.delay;
      r.achieved_prob = p;
      r.evaluated = evaluated;
      return r;
    }
  }
  std::ostringstream msg;
  msg << "optimize_mac: no feasible configuration for n_s=" << n_s << " m_s=" << m_s
      << " p_suff=" << p_suff << "; best achieved " << best_prob_seen;
  throw InfeasibleError(msg.str(), best_prob_seen);
}

long long tdma_delay(int n_nodes, const MacTiming& timing) {
  if (n_nodes < 0) throw std::invalid_argument("tdma_delay: negative node count");
  return static_cast<long long>(n_nodes) * timing.success_slots();
}

ChannelCount channels_required(const BandwidthScenario& s) {
  if (s.group_tdma < 1 || s.group_csma_cs < 1)
    throw std::invalid_argument("channels_required: group sizes must be >= 1");
  ChannelCount c;
  c.tdma = static_cast<long long>(
      std::ceil(static_cast<double>(s.n_total) / s.group_tdma - 1e-12));
  // a CSMA-CS group occupies its channel for m_t of every n_t intervals, so
  // fractional channel shares pool across groups; provision to the nearest
  // whole channel
  double share = static_cast<double>(s.n_total) / s.group_csma_cs *
                 (static_cast<double>(s.m_t) / s.n_t);
  c.csma_cs = std::llround(share);
  return c;
}

int max_group_size(const std::function<long long(int)>& delay_of, long long target_delay,
                   int n_s_limit) {
  if (target_delay <= 0) throw std::invalid_argument("max_group_size: target must be positive");
  int best = 0;
  for (int n = 1; n <= n_s_limit; ++n) {
    long long d;
    try {
      d = delay_of(n);
    } catch (const InfeasibleError&) {
      break;
    }
    if (d <= target_delay)
      best = n;
    else
      break;
  }
  if (best == 0) throw std::runtime_error("max_group_size: no group size meets the target delay");
  return best;
}

}  // namespace csmac
