#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "csmac/cscodec.hpp"
#include "csmac/griddata.hpp"
#include "csmac/mac_params.hpp"
#include "csmac/simulator.hpp"

namespace csmac {

struct CampaignConfig {
  int m_s = 16;
  int m_t = 180;
  int window = 0;  // reconstruction window length n_t; 0 = whole field
  MacConfig mac;
  ReconstructionConfig recon;
  std::string basis = "haar";
  SimOptions sim;
};

struct CampaignResult {
  std::vector<int> requested_ris;                 // broadcast schedule
  std::vector<std::vector<int>> delivered_nodes;  // per requested RI
  int deficient_ris = 0;           // requested RIs that fell short of m_s
  double observed_sufficiency = 0; // fraction of requested RIs meeting m_s
  std::vector<double> window_mse;  // one entry per reconstructed window
  long long total_delay_slots = 0;
  double total_energy = 0;         // uJ across nodes and requested RIs
  Eigen::MatrixXd z_hat;           // reconstruction of the last window
};

// Distributed collection of one data field: the initial window asks for m_t
// randomly chosen reporting intervals, later intervals are requested whenever
// the sliding window would drop below m_t delivered blocks. Each request runs
// a full MAC reporting interval; delivered samples feed a scattered-mask
// reconstruction per window.
CampaignResult run_campaign(const DataField& field, const CampaignConfig& cfg,
                            const MacTiming& timing, const EnergyParams& energy,
                            std::uint64_t seed);

}  // namespace csmac
