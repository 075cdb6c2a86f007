#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "csmac/contention_chain.hpp"
#include "csmac/energy.hpp"
#include "csmac/frame_stats.hpp"
#include "csmac/mac_params.hpp"

namespace csmac {

// How the per-superframe frame-count mixture weights the candidate counts k.
// The normal approximation of summed frame lengths is a shape, not a proper
// distribution, so the weighting orientation is a modeling choice validated
// against the simulator:
//   kOverflow  weight = P{k frames overrun the superframe}; mass rides near
//              the frame capacity (default; reproduces the published curves)
//   kFit       weight = P{k frames fit}; mass below sf_len / t_bar
//   kPoint     weight = P{exactly k frames complete}, the renewal-count form
enum class FrameWeighting { kOverflow, kFit, kPoint };

struct AnalysisOptions {
  FrameWeighting weighting = FrameWeighting::kOverflow;
  // Cap the number of generic frames by the contender count (at most one
  // episode per node per superframe). Off matches the printed frame-count
  // range [K_succ, K_S_max]; sensitivity knob.
  bool cap_frames_by_contenders = false;
};

// Closed-form reporting-interval analysis: distribution of the number of
// successfully delivered packets across the k_tau superframes of one
// reporting interval, and the matching expected energy. Chain solutions and
// per-superframe transition kernels are memoized per (contenders, sf_len).
class MacAnalyzer {
 public:
  explicit MacAnalyzer(const MacTiming& timing, const EnergyParams& energy = {},
                       const AnalysisOptions& opts = {});

  const MacTiming& timing() const { return timing_; }

  const ChainSolution& chain(int h, int sf_len) const;
  const FrameStats& stats(int h, int sf_len) const;
  const EnergyBreakdown& node_energy(int h, int sf_len) const;

  // P{s of h contenders succeed within one superframe of sf_len slots},
  // s = 0..min(h, frame cap). Not normalized: the tail truncation of the
  // frame-count approximation leaves a small mass deficit by construction.
  const std::vector<double>& success_weights(int h, int sf_len) const;

  // Distribution of remaining (not yet successful) contenders after the
  // superframe sequence bo, starting from h joiners.
  std::vector<double> remaining_dist(const std::vector<int>& bo, int h) const;

  // P{total successes >= m_s | h joiners} for h = 0..n_s.
  std::vector<double> tail_prob_by_joiners(const std::vector<int>& bo, int n_s, int m_s) const;

  // P{total successes >= m_s} under Bernoulli(p_s) participation of n_s nodes.
  double prob_sufficient(const MacConfig& cfg, int n_s, int m_s) const;

  // Expected energy (uJ) spent in one reporting interval, restricted to
  // outcomes delivering at least m_s packets, by joiner count and mixed over
  // the participation distribution.
  std::vector<double> energy_by_joiners(const std::vector<int>& bo, int n_s, int m_s) const;
  double expected_energy_ri(const MacConfig& cfg, int n_s, int m_s) const;

 private:
  struct SfKernel {
    ChainSolution chain;
    FrameStats stats;
    EnergyBreakdown energy;
    std::vector<double> weights;  // success-count kernel
  };

  const SfKernel& kernel(int h, int sf_len) const;

  MacTiming timing_;
  EnergyParams energy_;
  AnalysisOptions opts_;
  mutable std::mutex mutex_;
  mutable std::map<std::pair<int, int>, std::unique_ptr<SfKernel>> cache_;
};

// Binomial pmf values P{X = k}, k = 0..n, X ~ Binom(n, p).
std::vector<double> binomial_pmf(int n, double p);

}  // namespace csmac
