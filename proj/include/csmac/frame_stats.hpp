#pragma once

#include "csmac/contention_chain.hpp"
#include "csmac/mac_params.hpp"

namespace csmac {

// Outcome probabilities and length moments of one generic contention frame
// (success / collision / all-CCAs-failed / deference) for a solved chain.
struct FrameStats {
  double p_succ = 0, p_coll = 0, p_ccas = 0, p_d = 0;
  double t_bar = 0;    // mean frame length, slots
  double sigma2 = 0;   // frame length variance, slots^2
  int k_s_max = 0;     // floor(sf_len / min-frame-footprint)
};

FrameStats frame_stats(const ChainSolution& sol, const MacTiming& timing);

// Value of the frame-length PGF mixture at z; used by tests to check the
// closed-form moments against numeric differentiation.
double frame_pgf_value(const ChainSolution& sol, const MacTiming& timing, double z);

// Probability, under the normal approximation of summed frame lengths, that
// k generic frames complete within a superframe of sf_len slots. 1 for
// sf_len >> k*t_bar, 0.5 at sf_len == k*t_bar. Returns 0 outside
// k in [1, k_s_max].
double frame_count_fit_prob(int k, int sf_len, const FrameStats& stats);

// Probability that exactly n_succ of k_frames generic frames are successes,
// mixing collision / CCA-failure multiplicities freely and at most one
// deference frame (a deference can only occur at the superframe tail).
double success_count_prob(int n_succ, int k_frames, const FrameStats& stats);

}  // namespace csmac
