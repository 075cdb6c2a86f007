#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "csmac/mac_params.hpp"
#include "csmac/sufficiency.hpp"

namespace csmac {

// Search-space description for the MAC parameter optimization.
struct SearchSpec {
  int k_tau_max = 10;
  int bo_min = 0;
  int bo_max = 8;
  bool bo_uniform = false;   // restrict to BO_i = BO for all superframes
  double ps_step = 0.01;     // join-probability grid resolution
  bool ps_refine = true;     // one golden-section pass around the grid optimum
  std::optional<std::vector<int>> fixed_bo;  // pin {BO_i} (partial optimization)
  std::optional<double> fixed_ps;            // pin p_s (partial optimization)
};

struct OptimizeResult {
  MacConfig config;
  long long delay_slots = 0;
  double achieved_prob = 0;
  long long evaluated = 0;  // candidate (k_tau, {BO_i}) points examined
};

class InfeasibleError : public std::runtime_error {
 public:
  InfeasibleError(const std::string& what, double best_prob)
      : std::runtime_error(what), best_prob(best_prob) {}
  double best_prob;
};

// Minimum-delay MAC configuration subject to P{K_succ >= m_s} >= p_suff.
// Candidates are scanned in increasing delay; ties broken by smaller k_tau,
// then lexicographically smaller {BO_i}, then smaller p_s. Throws
// InfeasibleError (carrying the best achieved probability) when nothing in
// the search space meets the constraint.
OptimizeResult optimize_mac(const MacAnalyzer& analyzer, int n_s, int m_s, double p_suff,
                            const SearchSpec& spec);

// Dedicated-slot baseline: every reporting node gets one acknowledged
// transmission worth of slots. The compressed variant schedules only the m_s
// sampled nodes.
long long tdma_delay(int n_nodes, const MacTiming& timing);

struct BandwidthScenario {
  long long n_total = 0;  // nodes in the neighbourhood
  int group_tdma = 1;     // max group size meeting the delay target, TDMA
  int group_csma_cs = 1;  // max group size meeting the delay target, CSMA-CS
  int m_t = 1;
  int n_t = 1;
};

struct ChannelCount {
  long long tdma = 0;
  long long csma_cs = 0;
};

// Orthogonal channels needed for n_total nodes. TDMA groups each occupy a
// full channel (round up); CSMA-CS groups use an m_t/n_t duty share of one,
// provisioned to the nearest whole channel.
ChannelCount channels_required(const BandwidthScenario& s);

// Largest group size whose optimized delay stays within target_delay slots.
// delay_of(n_s) must be nondecreasing; returns 0-argument error when even a
// single node misses the target.
int max_group_size(const std::function<long long(int)>& delay_of, long long target_delay,
                   int n_s_limit);

}  // namespace csmac
