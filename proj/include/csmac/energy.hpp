#pragma once

#include "csmac/contention_chain.hpp"
#include "csmac/mac_params.hpp"

namespace csmac {

// Stationary per-slot energy rates (uJ/slot) of one contending node, split by
// activity. Multiplied by the mean episode length this gives the per-episode
// energy; the simulator cross-checks the rate directly.
struct EnergyBreakdown {
  double backoff = 0;   // idle countdown slots
  double cca = 0;       // sensing slots
  double transmit = 0;  // data + ACK / timeout tail of a started transmission
  double defer = 0;     // parked at the superframe tail
  double total() const { return backoff + cca + transmit + defer; }
};

EnergyBreakdown energy_per_node_sf(const ChainSolution& sol, const MacTiming& timing,
                                   const EnergyParams& ep);

}  // namespace csmac
