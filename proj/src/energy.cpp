#include "csmac/energy.hpp"

#include <cmath>

namespace csmac {

EnergyBreakdown energy_per_node_sf(const ChainSolution& sol, const MacTiming& t,
                                   const EnergyParams& ep) {
  const int nb1 = t.nb + 1;
  EnergyBreakdown e;
  e.backoff = ep.e_idle / 2.0 *
              (t.window(0) * sol.b00 * geometric_sum(2.0 * sol.omega, nb1) + 3.0 * sol.phi);
  e.cca = ep.e_sens * (1.0 - sol.p_d) * (2.0 - sol.alpha) * sol.phi;
  e.transmit = (1.0 - sol.lambda) * (1.0 - sol.p_d) * sol.phi *
               (ep.e_tx * t.packet_slots() + ep.e_rx * t.l_ack * (1.0 - sol.p_c) +
                ep.e_idle * (t.t_ack * (1.0 - sol.p_c) + t.t_ack_ti * sol.p_c));
  e.defer = ep.e_idle * sol.p_d * t.success_slots();
  return e;
}

}  // namespace csmac
