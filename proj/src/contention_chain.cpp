#include "csmac/contention_chain.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace csmac {

double geometric_sum(double x, int n) {
  if (std::abs(1.0 - x) < 1e-12) return static_cast<double>(n);
  return (1.0 - std::pow(x, n)) / (1.0 - x);
}

namespace {

struct State {
  double alpha, beta, phi;
  double lambda, omega, b00, phi_next;
  double p_c, p_ncol, beta_ack, l_star;
  bool saturated;
};

// Everything the chain determines once phi is fixed: the ACK-induced busy
// probability, the first-CCA busy probability (linear closure), the
// normalization constant and the phi the chain maps back to.
State eval_at_phi(double phi, int h, double p_d, const MacTiming& t) {
  State s{};
  s.phi = phi;
  const int nb1 = t.nb + 1;
  const int w0 = t.window(0);
  const int ls = t.success_slots();

  s.p_c = (h > 1) ? 1.0 - std::pow(1.0 - phi, h - 1) : 0.0;
  const double miss_all = std::pow(1.0 - phi, h);
  if (phi < 1e-14) {
    s.p_ncol = 0.0;
    s.beta_ack = 0.0;
  } else {
    s.p_ncol = 1.0 - h * phi * std::pow(1.0 - phi, h - 1) / (1.0 - miss_all);
    s.beta_ack = (2.0 - s.p_ncol) / (2.0 - s.p_ncol + 1.0 / (1.0 - miss_all));
  }
  s.l_star = t.packet_slots() + t.l_ack * (1.0 - s.p_ncol);

  s.beta = (h > 1) ? std::clamp(s.beta_ack, 0.0, 1.0) : 0.0;
  if (h > 1) {
    const double lp = s.l_star * s.p_c;
    double raw = lp * (1.0 - (1.0 - p_d) * s.beta) /
                 (1.0 + lp * (1.0 - p_d) * (1.0 - s.beta));
    s.saturated = raw > 1.0;
    s.alpha = std::min(raw, 1.0);
  } else {
    s.alpha = 0.0;
    s.saturated = false;
  }

  s.lambda = s.alpha + s.beta - s.alpha * s.beta;
  s.omega = s.lambda * (1.0 - p_d);
  const double norm = 0.5 * (w0 * geometric_sum(2.0 * s.omega, nb1) +
                             geometric_sum(s.omega, nb1) *
                                 (3.0 + 2.0 * (1.0 - p_d) *
                                            (1.0 + (1.0 - s.alpha) *
                                                       (1.0 + (1.0 - s.beta) * ls))));
  s.b00 = 1.0 / norm;
  s.phi_next = geometric_sum(s.omega, nb1) * s.b00;
  return s;
}

}  // namespace

ChainSolution solve_chain(int h, int sf_len, const MacTiming& timing) {
  timing.validate();
  if (h < 1) throw std::invalid_argument("solve_chain: h must be >= 1");
  if (sf_len <= timing.success_slots())
    throw std::invalid_argument("solve_chain: sf_len must exceed the success footprint");

  const double p_d = static_cast<double>(timing.success_slots()) / sf_len;
  auto gap = [&](double phi) { return eval_at_phi(phi, h, p_d, timing).phi_next - phi; };

  // phi_next is bounded by 1/2 * ... well below 1; scan for the first sign
  // change, then bisect
  const int scan = 512;
  double lo = 0.0, hi = -1.0;
  double g_lo = gap(0.0);  // positive: phi_next(0) = b00 * sum > 0
  int iterations = 0;
  for (int i = 1; i <= scan; ++i) {
    double x = static_cast<double>(i) / scan;
    double g = gap(x);
    ++iterations;
    if ((g_lo > 0) != (g > 0) || g == 0.0) {
      hi = x;
      break;
    }
    lo = x;
    g_lo = g;
  }
  if (hi < 0) {
    std::ostringstream msg;
    msg << "solve_chain: no fixed point in [0,1] for h=" << h << " sf_len=" << sf_len;
    throw std::runtime_error(msg.str());
  }
  for (int i = 0; i < 200 && hi - lo > 1e-15; ++i) {
    double mid = 0.5 * (lo + hi);
    double g = gap(mid);
    ++iterations;
    if ((g_lo > 0) == (g > 0))
      lo = mid, g_lo = g;
    else
      hi = mid;
  }
  const double phi = 0.5 * (lo + hi);
  State st = eval_at_phi(phi, h, p_d, timing);

  ChainSolution s;
  s.h = h;
  s.sf_len = sf_len;
  s.p_d = p_d;
  s.alpha = st.alpha;
  s.beta = st.beta;
  s.phi = phi;
  s.lambda = st.lambda;
  s.omega = st.omega;
  s.b00 = st.b00;
  s.p_c = st.p_c;
  s.p_ncol = st.p_ncol;
  s.beta_ack = st.beta_ack;
  s.l_star = st.l_star;
  s.iterations = iterations;
  s.saturated = st.saturated;

  s.residual[0] = 0.0;  // b00 is eliminated through the normalization
  s.residual[1] = st.phi_next - phi;
  s.residual[2] =
      (h > 1) ? s.alpha - st.l_star * (1.0 - st.omega) * st.p_c : 0.0;  // clamp gap when saturated
  s.residual[3] = (h > 1) ? s.beta - st.beta_ack : 0.0;

  if (std::abs(s.residual[1]) > 1e-8) {
    std::ostringstream msg;
    msg << "solve_chain: bisection left residual " << s.residual[1] << " for h=" << h
        << " sf_len=" << sf_len;
    throw std::runtime_error(msg.str());
  }
  return s;
}

}  // namespace csmac
