#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "csmac/calibrate.hpp"
#include "csmac/griddata.hpp"
#include "csmac/mac_params.hpp"
#include "csmac/optimizer.hpp"
#include "csmac/simulator.hpp"

namespace csmac {

// One key-value document drives every tool subcommand. Sections mirror the
// library modules; unknown keys are rejected at parse time.
class ScenarioConfig {
 public:
  ScenarioConfig();  // all defaults

  static ScenarioConfig from_file(const std::string& path);
  static ScenarioConfig from_text(const std::string& text, const std::string& origin = "<text>");

  // "section.key=value"
  void apply_override(const std::string& assignment);

  // canonical serialization of every resolved key, and its 64-bit hash
  std::string resolved_text() const;
  std::uint64_t hash() const;

  int get_int(const std::string& key) const;
  double get_double(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  const std::string& get_string(const std::string& key) const;
  std::vector<double> get_list(const std::string& key) const;
  std::vector<int> get_int_list(const std::string& key) const;

  MacTiming mac_timing() const;
  EnergyParams energy_params() const;
  GridScenario grid_scenario() const;
  CalibrationSpec calibration_spec() const;
  SearchSpec search_spec() const;
  ReconstructionConfig recon_config() const;
  SimOptions sim_options() const;
  MacConfig sim_mac_config() const;

  // sampled-node / sampled-interval counts per group size, from the
  // optimize.*_table entries with linear interpolation between listed sizes
  int m_s_for(int n_s) const;
  int m_t_for(int n_s) const;

 private:
  void set(const std::string& key, const std::string& value, const std::string& where);
  std::map<std::string, std::string> values_;
};

}  // namespace csmac
