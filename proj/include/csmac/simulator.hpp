#pragma once

#include <cstdint>
#include <vector>

#include "csmac/mac_params.hpp"

namespace csmac {

// What a node does after a failed episode (collision or exhausted CCA
// attempts). Only an acknowledged packet ever removes a node from contention
// before the reporting interval ends.
enum class RetryPolicy {
  kNextSf,  // wait for the next superframe, fresh episode (default)
  kSameSf,  // start a fresh episode immediately within the superframe
  kExitRi,  // give up for the rest of the reporting interval
};

struct SimOptions {
  // A deferred node re-enters the next superframe at its retained backoff
  // stage; on = restart from stage 0 instead.
  bool defer_resets_stage = false;
  RetryPolicy retry = RetryPolicy::kNextSf;
  // Diagnostic mode holding the contender count fixed: acknowledged nodes
  // also start a fresh episode immediately. Used to measure stationary
  // per-episode frequencies against the chain model.
  bool saturated = false;
  bool record_events = false;
};

struct SfEvent {
  int slot;
  int node;
  char kind;  // 's' success, 'c' collision, 'f' CCA failure, 'd' deference
};

// Aggregate record of one simulated superframe. Outcome counts are per
// contention episode; one node contributes several episodes when it retries.
struct SfTrace {
  int sf_len = 0;
  int contenders = 0;  // nodes active at superframe start
  long long succ = 0, coll = 0, ccaf = 0, defer = 0;
  int nodes_delivered = 0;    // distinct nodes acknowledged this superframe
  int nodes_parked = 0;       // deferred at superframe end
  int nodes_backing_off = 0;  // mid-backoff at superframe end
  int nodes_retrying = 0;     // failed an episode, back in the next superframe
  int nodes_exited = 0;       // left for good (failed episodes, exit mode)
  long long cca1_attempts = 0, cca1_busy = 0;
  long long cca2_attempts = 0, cca2_busy = 0;
  long long episode_slots = 0;  // node-slots spent inside contention episodes
  double sum_episode_len = 0, sumsq_episode_len = 0;  // completed episodes
  double energy_total = 0;  // uJ, all nodes
  std::vector<SfEvent> events;

  long long completed() const { return succ + coll + ccaf + defer; }
};

struct RiResult {
  int joined = 0;
  int successes = 0;
  long long delay_slots = 0;
  std::vector<SfTrace> sf;
  std::vector<double> node_energy;     // uJ per node, full interval
  std::vector<int> delivered_nodes;    // ids of nodes whose packet got through
};

// One superframe with h fresh contenders (backoff stage 0).
SfTrace run_sf(int h, int sf_len, const MacTiming& timing, const EnergyParams& energy,
               std::uint64_t seed, const SimOptions& opts = {});

// A run of n_sf consecutive superframes with node state carried across the
// boundaries, aggregated into one trace after discarding warmup_sf
// superframes. With opts.saturated this measures the stationary per-episode
// frequencies the chain model predicts.
SfTrace run_sf_sequence(int h, int sf_len, int n_sf, int warmup_sf, const MacTiming& timing,
                        const EnergyParams& energy, std::uint64_t seed,
                        const SimOptions& opts = {});

// One reporting interval: Bernoulli(p_s) participation, cfg.k_tau superframes
// with carry-over of unresolved contenders between them.
RiResult run_ri(int n_s, const MacConfig& cfg, const MacTiming& timing,
                const EnergyParams& energy, std::uint64_t seed, const SimOptions& opts = {});

// Sum of per-node energies over a set of traces.
double measure_energy(const std::vector<SfTrace>& traces);

}  // namespace csmac
