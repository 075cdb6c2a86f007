#pragma once

#include "csmac/mac_params.hpp"

namespace csmac {

// Steady-state solution of the per-node Markov chain of the slotted CSMA/CA
// contention process with a deference state, for h contenders inside one
// superframe of sf_len slots.
//
//   alpha     P{first CCA senses a busy channel}
//   beta      P{second CCA senses a busy channel | first idle}
//   phi       P{node is performing the first CCA in a random slot}
//   b00       stationary mass of backoff stage 0, counter 0
//   lambda    alpha + beta - alpha*beta   (a CCA round fails)
//   p_d       success_slots / sf_len      (deference at CCA entry)
//   omega     lambda * (1 - p_d)
//   p_c       1 - (1-phi)^(h-1)           (someone else transmits too)
//   p_ncol    collision probability among started transmissions
//   beta_ack  busy-second-CCA probability induced by ACK traffic
//   l_star    mean busy-channel footprint seen by a first CCA
struct ChainSolution {
  int h = 0;
  int sf_len = 0;
  double b00 = 0, alpha = 0, beta = 0, phi = 0;
  double lambda = 0, p_d = 0, omega = 0, p_c = 0;
  double p_ncol = 0, beta_ack = 0, l_star = 0;
  double residual[4] = {0, 0, 0, 0};  // normalization, phi, alpha, beta closures
  int iterations = 0;
  // alpha hit its physical ceiling (saturated channel); the alpha-closure
  // residual is then the clamp gap rather than a solver failure
  bool saturated = false;
};

// The system collapses to a scalar fixed point in phi: beta follows from phi
// directly, alpha from (beta, phi) in closed form, and the normalization
// returns a new phi. Solved by a sign-change scan plus bisection, so the
// result does not depend on an initial guess. Throws std::runtime_error when
// no root exists. h == 1 is the competitor-free case: alpha = beta = 0.
ChainSolution solve_chain(int h, int sf_len, const MacTiming& timing);

// sum_{i=0}^{n-1} x^i with the x -> 1 limit handled.
double geometric_sum(double x, int n);

}  // namespace csmac
