#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace csmac {

// Slot-denominated protocol constants of the slotted CSMA/CA superframe MAC.
// All durations are in backoff slots.
struct MacTiming {
  int sf0 = 48;        // base superframe length; SF(bo) = sf0 * 2^bo
  int bo_max = 8;      // beacon-order upper bound
  int k_tau_max = 10;  // max number of superframes per reporting interval
  int priority = 2;    // number of consecutive clear-channel assessments
  int nb = 5;          // max backoff stage; nb+1 channel-access attempts
  int l_mac = 2;       // MAC header, part of the packet
  int l_ack = 2;       // ACK duration
  int t_ack = 1;       // idle turnaround before the ACK
  int t_ack_ti = 4;    // ACK timeout after a collided transmission

  int packet_slots() const { return 5 + l_mac; }                    // T_p
  int success_slots() const { return packet_slots() + t_ack + l_ack; }  // L_s
  int collision_slots() const { return packet_slots() + t_ack_ti; }     // L_c
  // smallest footprint of any contention episode: either all-CCA-failure
  // (nb+1 sensing slots) or two CCAs plus a full transmission
  int min_frame_slots() const {
    int a = nb + 1;
    int b = success_slots() + 2;
    return a < b ? a : b;
  }
  int window(int stage) const { return (1 << priority) << stage; }  // W_i
  int sf_len(int bo) const { return sf0 << bo; }

  void validate() const {
    if (sf0 <= 0 || bo_max < 0 || k_tau_max < 1 || priority < 1 || nb < 0 ||
        l_mac < 0 || l_ack <= 0 || t_ack < 0 || t_ack_ti < 0)
      throw std::invalid_argument("MacTiming: nonpositive protocol constant");
  }
};

// Radio energy rates, uJ per slot, by activity.
struct EnergyParams {
  double e_idle = 0.228;
  double e_tx = 10.022;
  double e_rx = 11.290;
  double e_sens = 11.290;
};

// One point of the MAC design space: number of superframes, their beacon
// orders, and the contention-join probability.
struct MacConfig {
  int k_tau = 1;
  std::vector<int> bo;  // length k_tau, each in [0, bo_max]
  double p_s = 1.0;

  long long delay_slots(const MacTiming& t) const {
    long long d = 0;
    for (int b : bo) d += t.sf_len(b);
    return d;
  }

  void validate(const MacTiming& t) const {
    if (k_tau < 1 || k_tau > t.k_tau_max) throw std::invalid_argument("MacConfig: k_tau out of range");
    if (static_cast<int>(bo.size()) != k_tau) throw std::invalid_argument("MacConfig: bo list length != k_tau");
    for (int b : bo)
      if (b < 0 || b > t.bo_max) throw std::invalid_argument("MacConfig: bo out of range");
    if (p_s < 0.0 || p_s > 1.0) throw std::invalid_argument("MacConfig: p_s out of [0,1]");
  }
};

}  // namespace csmac
