#include "csmac/simulator.hpp"

#include <cassert>
#include <random>
#include <stdexcept>

#include "csmac/rng.hpp"

namespace csmac {

namespace {

enum class Phase {
  Out,        // not participating / delivered / gave up
  Backoff,
  Cca2,       // passed the first CCA this slot, second CCA next slot
  Transmit,
  AckGap,     // idle turnaround before the ACK
  AckRecv,
  AckTimeout, // collided transmission, waiting out the timeout
  Parked,     // deferred until superframe end
};

enum ChannelState : std::uint8_t { kIdle = 0, kData = 1, kAck = 2 };

struct NodeSim {
  Phase phase = Phase::Out;
  int stage = 0;
  int counter = 0;
  int wait = 0;        // remaining slots of the current timed phase
  bool collided = false;
  bool delivered = false;
  bool retry_pending = false;  // failed episode, waiting for the next superframe
  int episode_len = 0;
  double energy = 0;
};

struct SfContext {
  const MacTiming& t;
  const EnergyParams& ep;
  const SimOptions& opts;
  std::mt19937_64& rng;
};

int draw_counter(const MacTiming& t, int stage, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> d(0, t.window(stage) - 1);
  return d(rng);
}

void start_episode(NodeSim& n, const MacTiming& t, std::mt19937_64& rng, int stage = 0) {
  n.phase = Phase::Backoff;
  n.stage = stage;
  n.counter = draw_counter(t, stage, rng);
  n.wait = 0;
  n.collided = false;
  n.episode_len = 0;
}

// Seals one episode: tallies the outcome and either retires the node or lines
// it up for a fresh episode starting next slot.
void finish_episode(NodeSim& n, SfTrace& tr, char kind, int node_id, int slot,
                    const SfContext& ctx) {
  tr.sum_episode_len += n.episode_len;
  tr.sumsq_episode_len += static_cast<double>(n.episode_len) * n.episode_len;
  if (ctx.opts.record_events) tr.events.push_back({slot, node_id, kind});
  if (kind == 's') {
    ++tr.succ;
    n.delivered = true;
    ++tr.nodes_delivered;
    if (ctx.opts.saturated)
      start_episode(n, ctx.t, ctx.rng);
    else
      n.phase = Phase::Out;
    return;
  }
  ++(kind == 'c' ? tr.coll : tr.ccaf);
  switch (ctx.opts.saturated ? RetryPolicy::kSameSf : ctx.opts.retry) {
    case RetryPolicy::kSameSf:
      start_episode(n, ctx.t, ctx.rng);
      break;
    case RetryPolicy::kNextSf:
      n.phase = Phase::Out;
      n.retry_pending = true;
      break;
    case RetryPolicy::kExitRi:
      n.phase = Phase::Out;
      ++tr.nodes_exited;
      break;
  }
}

// CCA failure bookkeeping shared by both sensing slots.
void cca_failed(NodeSim& n, SfTrace& tr, const SfContext& ctx, int node_id, int slot) {
  if (n.stage == ctx.t.nb) {
    finish_episode(n, tr, 'f', node_id, slot, ctx);
    return;
  }
  ++n.stage;
  n.counter = draw_counter(ctx.t, n.stage, ctx.rng);
  n.phase = Phase::Backoff;
}

void simulate_superframe(std::vector<NodeSim>& nodes, int sf_len, SfTrace& tr, SfContext ctx) {
  const MacTiming& t = ctx.t;
  const EnergyParams& ep = ctx.ep;
  std::vector<std::uint8_t> channel(sf_len, kIdle);
  std::vector<int> starters;

  tr.sf_len = sf_len;
  double energy_at_entry = 0;
  for (const auto& n : nodes) {
    energy_at_entry += n.energy;
    if (n.phase == Phase::Backoff) ++tr.contenders;
  }

  for (int slot = 0; slot < sf_len; ++slot) {
    starters.clear();
    for (std::size_t id = 0; id < nodes.size(); ++id) {
      NodeSim& n = nodes[id];
      switch (n.phase) {
        case Phase::Out:
          break;
        case Phase::Parked:
          ++n.episode_len;
          ++tr.episode_slots;
          n.energy += ep.e_idle;
          break;
        case Phase::Backoff: {
          ++n.episode_len;
          ++tr.episode_slots;
          if (n.counter > 0) {
            --n.counter;
            n.energy += ep.e_idle;
            break;
          }
          // CCA entry: defer when the remaining slots cannot hold two CCAs
          // plus a full acknowledged transmission.
          if (sf_len - slot < t.success_slots() + 2) {
            ++tr.defer;
            if (ctx.opts.record_events) tr.events.push_back({slot, static_cast<int>(id), 'd'});
            n.phase = Phase::Parked;
            n.energy += ep.e_idle;
            break;
          }
          n.energy += ep.e_sens;
          ++tr.cca1_attempts;
          if (channel[slot] != kIdle) {
            ++tr.cca1_busy;
            cca_failed(n, tr, ctx, static_cast<int>(id), slot);
          } else {
            n.phase = Phase::Cca2;
          }
          break;
        }
        case Phase::Cca2: {
          ++n.episode_len;
          ++tr.episode_slots;
          n.energy += ep.e_sens;
          ++tr.cca2_attempts;
          if (channel[slot] != kIdle) {
            ++tr.cca2_busy;
            cca_failed(n, tr, ctx, static_cast<int>(id), slot);
          } else {
            starters.push_back(static_cast<int>(id));
          }
          break;
        }
        case Phase::Transmit: {
          ++n.episode_len;
          ++tr.episode_slots;
          n.energy += ep.e_tx;
          if (--n.wait == 0) {
            if (n.collided) {
              n.phase = Phase::AckTimeout;
              n.wait = t.t_ack_ti;
            } else {
              n.phase = Phase::AckGap;
              n.wait = t.t_ack;
            }
          }
          break;
        }
        case Phase::AckGap: {
          ++n.episode_len;
          ++tr.episode_slots;
          n.energy += ep.e_idle;
          if (--n.wait == 0) {
            n.phase = Phase::AckRecv;
            n.wait = t.l_ack;
          }
          break;
        }
        case Phase::AckRecv: {
          ++n.episode_len;
          ++tr.episode_slots;
          n.energy += ep.e_rx;
          if (--n.wait == 0) finish_episode(n, tr, 's', static_cast<int>(id), slot, ctx);
          break;
        }
        case Phase::AckTimeout: {
          ++n.episode_len;
          ++tr.episode_slots;
          n.energy += ep.e_idle;
          if (--n.wait == 0) finish_episode(n, tr, 'c', static_cast<int>(id), slot, ctx);
          break;
        }
      }
    }

    // Everyone whose second CCA was idle this slot starts transmitting in the
    // next slot; simultaneous starts are exactly the collisions.
    if (!starters.empty()) {
      const bool collided = starters.size() > 1;
      for (int id : starters) {
        nodes[id].phase = Phase::Transmit;
        nodes[id].wait = t.packet_slots();
        nodes[id].collided = collided;
      }
      for (int s = slot + 1; s <= slot + t.packet_slots() && s < sf_len; ++s) {
        assert(channel[s] == kIdle);
        channel[s] = kData;
      }
      if (!collided) {
        const int ack_start = slot + 1 + t.packet_slots() + t.t_ack;
        for (int s = ack_start; s < ack_start + t.l_ack && s < sf_len; ++s) {
          assert(channel[s] == kIdle);
          channel[s] = kAck;
        }
      }
    }
  }

  // Superframe boundary: clip pending ACK timeouts (the collision outcome is
  // already sealed) and classify the leftover nodes.
  for (std::size_t id = 0; id < nodes.size(); ++id) {
    NodeSim& n = nodes[id];
    if (n.phase == Phase::AckTimeout)
      finish_episode(n, tr, 'c', static_cast<int>(id), sf_len - 1, ctx);
    if (n.phase == Phase::Backoff)
      ++tr.nodes_backing_off;
    else if (n.phase == Phase::Parked) {
      ++tr.nodes_parked;
      tr.sum_episode_len += n.episode_len;
      tr.sumsq_episode_len += static_cast<double>(n.episode_len) * n.episode_len;
    } else if (n.retry_pending) {
      ++tr.nodes_retrying;
    }
    // a node can never straddle the boundary mid-CCA or mid-transmission
    assert(n.phase != Phase::Cca2 && n.phase != Phase::Transmit && n.phase != Phase::AckGap &&
           n.phase != Phase::AckRecv);
  }
  // every starting contender is delivered, parked, backing off, queued for a
  // retry, out for good, or (in saturated mode) cycling
  if (!ctx.opts.saturated)
    assert(tr.nodes_delivered + tr.nodes_parked + tr.nodes_backing_off + tr.nodes_retrying +
               tr.nodes_exited ==
           tr.contenders);
  double energy_at_exit = 0;
  for (const auto& n : nodes) energy_at_exit += n.energy;
  tr.energy_total = energy_at_exit - energy_at_entry;
}

void carry_over(std::vector<NodeSim>& nodes, const MacTiming& t, const SimOptions& opts,
                std::mt19937_64& rng) {
  for (auto& n : nodes) {
    if (n.retry_pending) {
      n.retry_pending = false;
      start_episode(n, t, rng);
      continue;
    }
    switch (n.phase) {
      case Phase::Parked:
        start_episode(n, t, rng, opts.defer_resets_stage ? 0 : n.stage);
        break;
      case Phase::Backoff:
        n.episode_len = 0;  // episode statistics stay per superframe
        break;
      default:
        break;
    }
  }
}

}  // namespace

SfTrace run_sf(int h, int sf_len, const MacTiming& timing, const EnergyParams& energy,
               std::uint64_t seed, const SimOptions& opts) {
  timing.validate();
  if (h < 0) throw std::invalid_argument("run_sf: h must be >= 0");
  auto rng = make_rng(seed);
  std::vector<NodeSim> nodes(h);
  for (auto& n : nodes) start_episode(n, timing, rng);
  SfTrace tr;
  SfContext ctx{timing, energy, opts, rng};
  simulate_superframe(nodes, sf_len, tr, ctx);
  return tr;
}

SfTrace run_sf_sequence(int h, int sf_len, int n_sf, int warmup_sf, const MacTiming& timing,
                        const EnergyParams& energy, std::uint64_t seed, const SimOptions& opts) {
  timing.validate();
  if (h < 0 || n_sf <= warmup_sf)
    throw std::invalid_argument("run_sf_sequence: need h >= 0 and n_sf > warmup_sf");
  auto rng = make_rng(seed);
  std::vector<NodeSim> nodes(h);
  for (auto& n : nodes) start_episode(n, timing, rng);
  SfTrace total;
  for (int i = 0; i < n_sf; ++i) {
    SfTrace tr;
    SfContext ctx{timing, energy, opts, rng};
    simulate_superframe(nodes, sf_len, tr, ctx);
    carry_over(nodes, timing, opts, rng);
    if (i < warmup_sf) continue;
    total.sf_len = tr.sf_len;
    total.contenders += tr.contenders;
    total.succ += tr.succ;
    total.coll += tr.coll;
    total.ccaf += tr.ccaf;
    total.defer += tr.defer;
    total.nodes_delivered += tr.nodes_delivered;
    total.nodes_parked += tr.nodes_parked;
    total.nodes_backing_off += tr.nodes_backing_off;
    total.nodes_exited += tr.nodes_exited;
    total.cca1_attempts += tr.cca1_attempts;
    total.cca1_busy += tr.cca1_busy;
    total.cca2_attempts += tr.cca2_attempts;
    total.cca2_busy += tr.cca2_busy;
    total.episode_slots += tr.episode_slots;
    total.sum_episode_len += tr.sum_episode_len;
    total.sumsq_episode_len += tr.sumsq_episode_len;
    total.energy_total += tr.energy_total;
  }
  return total;
}

RiResult run_ri(int n_s, const MacConfig& cfg, const MacTiming& timing,
                const EnergyParams& energy, std::uint64_t seed, const SimOptions& opts) {
  timing.validate();
  cfg.validate(timing);
  auto rng = make_rng(seed);
  std::vector<NodeSim> nodes(n_s);
  std::bernoulli_distribution join(cfg.p_s);
  RiResult res;
  for (auto& n : nodes) {
    if (join(rng)) {
      start_episode(n, timing, rng);
      ++res.joined;
    }
  }

  for (int i = 0; i < cfg.k_tau; ++i) {
    const int sf_len = timing.sf_len(cfg.bo[i]);
    res.delay_slots += sf_len;
    SfTrace tr;
    SfContext ctx{timing, energy, opts, rng};
    simulate_superframe(nodes, sf_len, tr, ctx);
    res.sf.push_back(std::move(tr));
    carry_over(nodes, timing, opts, rng);
  }

  res.node_energy.resize(n_s);
  for (int id = 0; id < n_s; ++id) {
    res.node_energy[id] = nodes[id].energy;
    if (nodes[id].delivered) {
      ++res.successes;
      res.delivered_nodes.push_back(id);
    }
  }
  return res;
}

double measure_energy(const std::vector<SfTrace>& traces) {
  double e = 0;
  for (const auto& t : traces) e += t.energy_total;
  return e;
}

}  // namespace csmac
