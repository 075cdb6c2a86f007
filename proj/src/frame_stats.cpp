#include "csmac/frame_stats.hpp"

#include <cmath>
#include <stdexcept>

namespace csmac {

namespace {

// Truncated Taylor jet (value, first and second derivative) for evaluating
// PGF moments at z = 1 exactly.
struct Jet {
  double v = 0, d1 = 0, d2 = 0;

  Jet operator+(const Jet& o) const { return {v + o.v, d1 + o.d1, d2 + o.d2}; }
  Jet operator*(const Jet& o) const {
    return {v * o.v, d1 * o.v + v * o.d1, d2 * o.v + 2.0 * d1 * o.d1 + v * o.d2};
  }
  Jet operator*(double c) const { return {v * c, d1 * c, d2 * c}; }
};

Jet jet_one() { return {1.0, 0.0, 0.0}; }

Jet jet_pow(const Jet& z, int n) {
  Jet acc = jet_one();
  Jet base = z;
  while (n > 0) {
    if (n & 1) acc = acc * base;
    base = base * base;
    n >>= 1;
  }
  return acc;
}

// Uniform backoff of stage i: (1/W) * sum_{k=0}^{W-1} z^k.
Jet backoff_pgf(const Jet& z, int w) {
  Jet sum = jet_one();
  Jet acc = jet_one();
  for (int k = 1; k < w; ++k) {
    acc = acc * z;
    sum = sum + acc;
  }
  return sum * (1.0 / w);
}

// Duration of one failed CCA round: one slot if the first CCA was busy,
// two if the second one was.
Jet cca_fail_pgf(const Jet& z, double alpha, double beta, double lambda) {
  Jet z2 = z * z;
  return (z * (alpha / lambda)) + (z2 * ((1.0 - alpha) * beta / lambda));
}

// Mixture PGF of the generic frame length at a jet point z.
Jet frame_pgf(const ChainSolution& sol, const MacTiming& t, const Jet& z) {
  const int nb1 = t.nb + 1;
  const double lambda = sol.lambda;
  const double p_d = sol.p_d;
  const double p_c = sol.p_c;
  const double p_ccas = (1.0 - p_d) * std::pow(lambda, nb1);
  const double p_coll = p_c * (1.0 - p_d) * (1.0 - std::pow(lambda, nb1));
  const double p_succ = 1.0 - p_coll - p_ccas - p_d;

  Jet tx_succ = jet_pow(z, 2 + t.success_slots());
  Jet tx_coll = jet_pow(z, 2 + t.collision_slots());

  // success / collision branches: i failed CCA rounds then a transmission
  Jet s_branch{0, 0, 0}, c_branch{0, 0, 0};
  Jet backoffs = jet_one();
  Jet cf = lambda > 0 ? cca_fail_pgf(z, sol.alpha, sol.beta, lambda) : jet_one();
  Jet cf_pow = jet_one();
  const double tail = 1.0 - std::pow(lambda, nb1);
  for (int i = 0; i < nb1; ++i) {
    backoffs = backoffs * backoff_pgf(z, t.window(i));
    if (i > 0) cf_pow = cf_pow * cf;
    double w = (tail > 1e-300) ? std::pow(lambda, i) * (1.0 - lambda) / tail
                               : (i == 0 ? 1.0 : 0.0);
    if (std::abs(1.0 - lambda) < 1e-12) w = 1.0 / nb1;
    Jet common = backoffs * cf_pow * w;
    s_branch = s_branch + common * tx_succ;
    c_branch = c_branch + common * tx_coll;
  }
  // all nb+1 CCA rounds failed
  Jet f_branch = backoffs * (cf_pow * cf);
  // deference: the episode parks for the tail of the superframe
  Jet d_branch = jet_pow(z, t.success_slots());

  return s_branch * p_succ + c_branch * p_coll + f_branch * p_ccas + d_branch * p_d;
}

}  // namespace

FrameStats frame_stats(const ChainSolution& sol, const MacTiming& timing) {
  FrameStats st;
  const int nb1 = timing.nb + 1;
  st.p_d = sol.p_d;
  st.p_ccas = (1.0 - sol.p_d) * std::pow(sol.lambda, nb1);
  st.p_coll = sol.p_c * (1.0 - sol.p_d) * (1.0 - std::pow(sol.lambda, nb1));
  st.p_succ = 1.0 - st.p_coll - st.p_ccas - st.p_d;
  st.k_s_max = sol.sf_len / timing.min_frame_slots();

  Jet z{1.0, 1.0, 0.0};
  Jet T = frame_pgf(sol, timing, z);
  st.t_bar = T.d1;
  st.sigma2 = T.d2 + T.d1 - T.d1 * T.d1;
  return st;
}

double frame_pgf_value(const ChainSolution& sol, const MacTiming& timing, double z) {
  Jet T = frame_pgf(sol, timing, Jet{z, 0.0, 0.0});
  return T.v;
}

double frame_count_fit_prob(int k, int sf_len, const FrameStats& stats) {
  if (k < 1 || k > stats.k_s_max) return 0.0;
  const double spread = std::sqrt(k * stats.sigma2);
  const double gap = sf_len - k * stats.t_bar;
  if (spread <= 0.0) return gap >= 0.0 ? 1.0 : 0.0;
  return 0.5 * std::erfc(-gap / (spread * std::sqrt(2.0)));
}

double success_count_prob(int n_succ, int k_frames, const FrameStats& stats) {
  if (n_succ < 0 || k_frames < 0 || n_succ > k_frames)
    throw std::invalid_argument("success_count_prob: negative or inconsistent counts");
  if (k_frames == 0) return 1.0;

  auto pow_count = [](double p, int n) {
    if (n == 0) return 1.0;
    return p > 0.0 ? std::pow(p, n) : 0.0;
  };

  double total = 0.0;
  const double lg_k = std::lgamma(k_frames + 1.0);
  for (int d = 0; d <= 1; ++d) {
    for (int j = 0; j + d + n_succ <= k_frames; ++j) {
      const int l = k_frames - n_succ - j - d;
      const double log_multinom = lg_k - std::lgamma(n_succ + 1.0) - std::lgamma(j + 1.0) -
                                  std::lgamma(d + 1.0) - std::lgamma(l + 1.0);
      const double probs = pow_count(stats.p_succ, n_succ) * pow_count(stats.p_coll, j) *
                           pow_count(stats.p_d, d) * pow_count(stats.p_ccas, l);
      if (probs > 0.0) total += std::exp(log_multinom) * probs;
    }
  }
  return total;
}

}  // namespace csmac
