#include "csmac/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace csmac {

namespace {

struct KeyDef {
  const char* key;
  const char* def;
};

// every recognized key with its default; the resolved document is this table
// overlaid with file values and overrides
const KeyDef kKeys[] = {
    {"scenario.schema_version", "1"},

    {"field.n_s", "64"},
    {"field.n_t", "256"},
    {"field.ri_minutes", "5"},
    {"field.wind_fraction", "0.5"},
    {"field.seed", "1"},

    {"load.chi0", "5.0"},
    {"load.harmonics", "1:1.5:0.5;2:0.6:-0.4;3:0.25:0.1"},
    {"load.phi", "0.9"},
    {"load.noise_scale", "0.35"},
    {"load.period", "288"},

    {"wind.chi0", "8.0"},
    {"wind.harmonics", "1:1.5:0.6"},
    {"wind.phi", "0.95"},
    {"wind.noise_scale", "0.6"},
    {"wind.period", "288"},
    {"wind.v_ci", "3"},
    {"wind.v_r", "12"},
    {"wind.v_co", "25"},
    {"wind.p_r", "1"},
    {"wind.d_scale", "20"},

    {"cs.basis", "haar"},
    {"cs.solver", "greedy"},
    {"cs.max_iterations", "200"},
    {"cs.atoms_per_iteration", "4"},
    {"cs.epsilon", "1e-9"},
    {"cs.dense_low", "0"},
    {"cs.dense_high", "1"},

    {"calibrate.target_mse", "0.05"},
    {"calibrate.target_success", "0.95"},
    {"calibrate.trials", "200"},
    {"calibrate.grid", ""},
    {"calibrate.seed", "7"},
    {"calibrate.epsilon_scale", "0.9"},

    {"mac.sf0", "48"},
    {"mac.bo_max", "8"},
    {"mac.k_tau_max", "10"},
    {"mac.priority", "2"},
    {"mac.nb", "5"},
    {"mac.l_mac", "2"},
    {"mac.l_ack", "2"},
    {"mac.t_ack", "1"},
    {"mac.t_ack_ti", "4"},

    {"energy.e_idle", "0.228"},
    {"energy.e_tx", "10.022"},
    {"energy.e_rx", "11.29"},
    {"energy.e_sens", "11.29"},

    {"optimize.p_suff", "0.9"},
    {"optimize.ps_step", "0.01"},
    {"optimize.ps_refine", "1"},
    {"optimize.bo_uniform", "0"},
    {"optimize.m_s_table", "32:10;48:13;64:16;80:19;96:22;128:30"},
    {"optimize.m_t_table", "32:194;48:190;64:180;80:166;96:151;128:154"},
    {"optimize.n_s_sweep", "32,48,64,80,96"},
    {"optimize.n_totals", "2048,4096"},
    {"optimize.target_delays", "400,650,750"},
    {"optimize.partial_bo", "3"},
    {"optimize.partial_ps", "0.45"},

    {"analyze.ps_min", "0.05"},
    {"analyze.ps_max", "0.95"},
    {"analyze.ps_step", "0.05"},
    {"analyze.cap_frames_by_contenders", "1"},
    {"analyze.k_tau_sweep", "1,2,3,4,5,6,7,8"},

    {"simulate.k_tau", "3"},
    {"simulate.bo", "4"},
    {"simulate.p_s", "0.35"},
    {"simulate.m_s", "16"},
    {"simulate.ris", "10000"},
    {"simulate.seed", "3"},
    {"simulate.defer_resets_stage", "0"},
    {"simulate.retry", "next_sf"},
    {"simulate.m_t", "180"},
};

bool known_key(const std::string& key) {
  for (const auto& k : kKeys)
    if (key == k.key) return true;
  return false;
}

std::vector<std::string> split_on(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, sep))
    if (!tok.empty()) out.push_back(tok);
  return out;
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  auto e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

HarmonicModel parse_harmonic_model(const ScenarioConfig& cfg, const std::string& section) {
  HarmonicModel h;
  h.chi0 = cfg.get_double(section + ".chi0");
  h.period = cfg.get_int(section + ".period");
  for (const auto& part : split_on(cfg.get_string(section + ".harmonics"), ';')) {
    auto fields = split_on(part, ':');
    if (fields.size() != 3)
      throw std::invalid_argument(section + ".harmonics: expected k:re:im terms");
    h.harmonics.push_back({std::stoi(fields[0]), std::stod(fields[1]), std::stod(fields[2])});
  }
  h.validate();
  return h;
}

Ar1Model parse_ar_model(const ScenarioConfig& cfg, const std::string& section) {
  Ar1Model a;
  for (double v : cfg.get_list(section + ".phi")) a.phi.push_back(v);
  a.noise_scale = cfg.get_double(section + ".noise_scale");
  a.validate();
  return a;
}

}  // namespace

ScenarioConfig::ScenarioConfig() {
  for (const auto& k : kKeys) values_[k.key] = k.def;
}

ScenarioConfig ScenarioConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return from_text(ss.str(), path);
}

ScenarioConfig ScenarioConfig::from_text(const std::string& text, const std::string& origin) {
  ScenarioConfig cfg;
  std::istringstream is(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    std::string where = origin + ":" + std::to_string(lineno);
    std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[') {
      if (t.back() != ']') throw std::runtime_error(where + ": unterminated section header");
      section = trim(t.substr(1, t.size() - 2));
      continue;
    }
    auto eq = t.find('=');
    if (eq == std::string::npos) throw std::runtime_error(where + ": expected key = value");
    std::string key = trim(t.substr(0, eq));
    std::string value = trim(t.substr(eq + 1));
    if (!section.empty()) key = section + "." + key;
    cfg.set(key, value, where);
  }
  if (cfg.get_int("scenario.schema_version") != 1)
    throw std::runtime_error(origin + ": unsupported schema_version");
  return cfg;
}

void ScenarioConfig::apply_override(const std::string& assignment) {
  auto eq = assignment.find('=');
  if (eq == std::string::npos)
    throw std::runtime_error("override '" + assignment + "': expected section.key=value");
  set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)), "<override>");
}

void ScenarioConfig::set(const std::string& key, const std::string& value,
                         const std::string& where) {
  if (!known_key(key)) throw std::runtime_error(where + ": unknown key '" + key + "'");
  values_[key] = value;
}

std::string ScenarioConfig::resolved_text() const {
  std::ostringstream os;
  for (const auto& [k, v] : values_) os << k << " = " << v << "\n";
  return os.str();
}

std::uint64_t ScenarioConfig::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : resolved_text()) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

const std::string& ScenarioConfig::get_string(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw std::runtime_error("config: unknown key '" + key + "'");
  return it->second;
}

int ScenarioConfig::get_int(const std::string& key) const {
  try {
    return std::stoi(get_string(key));
  } catch (const std::exception&) {
    throw std::runtime_error("config: key '" + key + "' is not an integer");
  }
}

double ScenarioConfig::get_double(const std::string& key) const {
  try {
    return std::stod(get_string(key));
  } catch (const std::exception&) {
    throw std::runtime_error("config: key '" + key + "' is not a number");
  }
}

bool ScenarioConfig::get_bool(const std::string& key) const {
  const std::string& v = get_string(key);
  if (v == "1" || v == "true" || v == "on") return true;
  if (v == "0" || v == "false" || v == "off") return false;
  throw std::runtime_error("config: key '" + key + "' is not a boolean");
}

std::vector<double> ScenarioConfig::get_list(const std::string& key) const {
  std::vector<double> out;
  for (const auto& tok : split_on(get_string(key), ',')) {
    try {
      out.push_back(std::stod(tok));
    } catch (const std::exception&) {
      throw std::runtime_error("config: key '" + key + "' has a non-numeric entry");
    }
  }
  return out;
}

std::vector<int> ScenarioConfig::get_int_list(const std::string& key) const {
  std::vector<int> out;
  for (double v : get_list(key)) out.push_back(static_cast<int>(std::llround(v)));
  return out;
}

MacTiming ScenarioConfig::mac_timing() const {
  MacTiming t;
  t.sf0 = get_int("mac.sf0");
  t.bo_max = get_int("mac.bo_max");
  t.k_tau_max = get_int("mac.k_tau_max");
  t.priority = get_int("mac.priority");
  t.nb = get_int("mac.nb");
  t.l_mac = get_int("mac.l_mac");
  t.l_ack = get_int("mac.l_ack");
  t.t_ack = get_int("mac.t_ack");
  t.t_ack_ti = get_int("mac.t_ack_ti");
  t.validate();
  return t;
}

EnergyParams ScenarioConfig::energy_params() const {
  EnergyParams e;
  e.e_idle = get_double("energy.e_idle");
  e.e_tx = get_double("energy.e_tx");
  e.e_rx = get_double("energy.e_rx");
  e.e_sens = get_double("energy.e_sens");
  return e;
}

GridScenario ScenarioConfig::grid_scenario() const {
  GridScenario g;
  g.n_s = get_int("field.n_s");
  g.n_t = get_int("field.n_t");
  g.ri_minutes = get_double("field.ri_minutes");
  g.wind_fraction = get_double("field.wind_fraction");
  g.load_trend = parse_harmonic_model(*this, "load");
  g.load_ar = parse_ar_model(*this, "load");
  g.wind_trend = parse_harmonic_model(*this, "wind");
  g.wind_ar = parse_ar_model(*this, "wind");
  g.curve = make_wind_curve(get_double("wind.v_ci"), get_double("wind.v_r"),
                            get_double("wind.v_co"), get_double("wind.p_r"));
  g.d_scale = get_double("wind.d_scale");
  return g;
}

ReconstructionConfig ScenarioConfig::recon_config() const {
  ReconstructionConfig r;
  const std::string& solver = get_string("cs.solver");
  if (solver == "greedy")
    r.solver = ReconstructionConfig::Solver::GreedyPursuit;
  else if (solver == "bpdn")
    r.solver = ReconstructionConfig::Solver::BasisPursuitDenoise;
  else
    throw std::runtime_error("config: cs.solver must be 'greedy' or 'bpdn'");
  r.epsilon = get_double("cs.epsilon");
  r.max_iterations = get_int("cs.max_iterations");
  r.atoms_per_iteration = get_int("cs.atoms_per_iteration");
  return r;
}

CalibrationSpec ScenarioConfig::calibration_spec() const {
  CalibrationSpec c;
  c.n_s = get_int("field.n_s");
  c.n_t = get_int("field.n_t");
  c.target_mse = get_double("calibrate.target_mse");
  c.target_success = get_double("calibrate.target_success");
  c.trials = get_int("calibrate.trials");
  for (double v : get_list("calibrate.grid")) c.grid.push_back(static_cast<long long>(v));
  c.seed = static_cast<std::uint64_t>(get_int("calibrate.seed"));
  c.basis = get_string("cs.basis");
  c.recon = recon_config();
  c.epsilon_scale = get_double("calibrate.epsilon_scale");
  c.validate();
  return c;
}

SearchSpec ScenarioConfig::search_spec() const {
  SearchSpec s;
  s.k_tau_max = get_int("mac.k_tau_max");
  s.bo_min = 0;
  s.bo_max = get_int("mac.bo_max");
  s.bo_uniform = get_bool("optimize.bo_uniform");
  s.ps_step = get_double("optimize.ps_step");
  s.ps_refine = get_bool("optimize.ps_refine");
  return s;
}

SimOptions ScenarioConfig::sim_options() const {
  SimOptions o;
  o.defer_resets_stage = get_bool("simulate.defer_resets_stage");
  const std::string& retry = get_string("simulate.retry");
  if (retry == "next_sf")
    o.retry = RetryPolicy::kNextSf;
  else if (retry == "same_sf")
    o.retry = RetryPolicy::kSameSf;
  else if (retry == "exit_ri")
    o.retry = RetryPolicy::kExitRi;
  else
    throw std::runtime_error("config: simulate.retry must be next_sf, same_sf or exit_ri");
  return o;
}

MacConfig ScenarioConfig::sim_mac_config() const {
  MacConfig c;
  c.k_tau = get_int("simulate.k_tau");
  c.bo.assign(c.k_tau, get_int("simulate.bo"));
  c.p_s = get_double("simulate.p_s");
  return c;
}

namespace {
int interpolate_table(std::vector<std::pair<int, int>> table, int n_s, const char* key) {
  if (table.empty()) throw std::runtime_error(std::string("config: ") + key + " is empty");
  std::sort(table.begin(), table.end());
  if (n_s <= table.front().first) return table.front().second;
  if (n_s >= table.back().first) return table.back().second;
  for (std::size_t i = 1; i < table.size(); ++i) {
    if (n_s <= table[i].first) {
      const auto& [x0, y0] = table[i - 1];
      const auto& [x1, y1] = table[i];
      double y = y0 + (y1 - y0) * static_cast<double>(n_s - x0) / (x1 - x0);
      return std::max(1, static_cast<int>(std::llround(y)));
    }
  }
  return table.back().second;
}

std::vector<std::pair<int, int>> parse_pair_table(const std::string& text, const char* key) {
  std::vector<std::pair<int, int>> table;
  for (const auto& part : split_on(text, ';')) {
    auto kv = split_on(part, ':');
    if (kv.size() != 2)
      throw std::runtime_error(std::string("config: ") + key + " entries must be n_s:value");
    table.emplace_back(std::stoi(kv[0]), std::stoi(kv[1]));
  }
  return table;
}
}  // namespace

int ScenarioConfig::m_s_for(int n_s) const {
  return interpolate_table(parse_pair_table(get_string("optimize.m_s_table"), "optimize.m_s_table"),
                           n_s, "optimize.m_s_table");
}

int ScenarioConfig::m_t_for(int n_s) const {
  return interpolate_table(parse_pair_table(get_string("optimize.m_t_table"), "optimize.m_t_table"),
                           n_s, "optimize.m_t_table");
}

}  // namespace csmac
