#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "csmac/calibrate.hpp"
#include "csmac/campaign.hpp"
#include "csmac/csv.hpp"
#include "csmac/optimizer.hpp"
#include "csmac/parallel.hpp"
#include "csmac/rng.hpp"
#include "csmac/scenario.hpp"
#include "csmac/simulator.hpp"
#include "csmac/sufficiency.hpp"

namespace {

using namespace csmac;

constexpr int kExitValidation = 2;
constexpr int kExitRuntime = 3;
constexpr int kExitInfeasible = 4;

struct CommonArgs {
  std::string config_path;
  std::string out_dir = ".";
  long long seed = -1;  // -1 = keep config seeds
  int jobs = 1;
  std::vector<std::string> overrides;
};

ScenarioConfig load_config(const CommonArgs& args) {
  ScenarioConfig cfg =
      args.config_path.empty() ? ScenarioConfig() : ScenarioConfig::from_file(args.config_path);
  for (const auto& ov : args.overrides) cfg.apply_override(ov);
  if (args.seed >= 0) {
    cfg.apply_override("field.seed=" + std::to_string(args.seed));
    cfg.apply_override("calibrate.seed=" + std::to_string(args.seed));
    cfg.apply_override("simulate.seed=" + std::to_string(args.seed));
  }
  return cfg;
}

std::string out_path(const CommonArgs& args, const std::string& name) {
  std::filesystem::create_directories(args.out_dir);
  return (std::filesystem::path(args.out_dir) / name).string();
}

FieldSource field_source(const ScenarioConfig& cfg) {
  GridScenario sc = cfg.grid_scenario();
  return [sc](std::uint64_t seed) { return gen_field(sc, seed).values; };
}

int cmd_generate(const CommonArgs& args) {
  ScenarioConfig cfg = load_config(args);
  const std::uint64_t seed = static_cast<std::uint64_t>(cfg.get_int("field.seed"));
  DataField f = gen_field(cfg.grid_scenario(), seed);
  write_field_csv(out_path(args, "field.csv"), f, seed, cfg.hash());
  std::printf("generate: wrote %dx%d field to %s\n", static_cast<int>(f.values.rows()),
              static_cast<int>(f.values.cols()), out_path(args, "field.csv").c_str());
  return 0;
}

void write_curve(const CommonArgs& args, const ScenarioConfig& cfg, const std::string& name,
                 const SuccessCurve& curve) {
  CsvWriter w(out_path(args, name), cfg.hash());
  w.header({"m_samples", "success_rate"});
  for (const auto& [m, rate] : curve.points) w.row({static_cast<double>(m), rate});
}

int cmd_calibrate(const CommonArgs& args) {
  ScenarioConfig cfg = load_config(args);
  CalibrationSpec spec = cfg.calibration_spec();
  spec.jobs = args.jobs;
  if (spec.trials < 20)
    std::fprintf(stderr, "calibrate: warning: only %d trials, success rates carry wide error bars\n",
                 spec.trials);
  if (spec.grid.empty())
    std::fprintf(stderr, "calibrate: using automatic sample grid (step ~ n_s*n_t/64)\n");
  auto result = calibrate_full(spec, field_source(cfg));
  write_curve(args, cfg, "curve_space.csv", result.space_curve);
  write_curve(args, cfg, "curve_time.csv", result.time_curve);
  write_curve(args, cfg, "curve_joint.csv", result.joint_curve);

  CsvWriter sum(out_path(args, "calibration.txt"), cfg.hash());
  sum.comment("calibration summary; feed back via --config or --override");
  sum.raw_row("[simulate]");
  sum.raw_row("m_s = " + std::to_string(result.m_s));
  sum.raw_row("m_t = " + std::to_string(result.m_t));
  std::printf("calibrate: M_S,thresh=%lld M_T,thresh=%lld M_thresh=%lld -> (m_s, m_t)=(%d, %d)\n",
              result.m_s_thresh, result.m_t_thresh, result.m_thresh, result.m_s, result.m_t);
  return 0;
}

std::vector<double> ps_grid(const ScenarioConfig& cfg) {
  std::vector<double> ps;
  for (double v = cfg.get_double("analyze.ps_min"); v <= cfg.get_double("analyze.ps_max") + 1e-12;
       v += cfg.get_double("analyze.ps_step"))
    ps.push_back(v);
  return ps;
}

int cmd_analyze(const CommonArgs& args) {
  ScenarioConfig cfg = load_config(args);
  AnalysisOptions opts;
  opts.cap_frames_by_contenders = cfg.get_bool("analyze.cap_frames_by_contenders");
  MacAnalyzer an(cfg.mac_timing(), cfg.energy_params(), opts);
  const int n_s = cfg.get_int("field.n_s");
  const int m_s = cfg.get_int("simulate.m_s");
  MacConfig mac = cfg.sim_mac_config();

  {
    CsvWriter w(out_path(args, "pr_vs_ps.csv"), cfg.hash());
    w.comment("sufficiency probability vs join probability");
    w.header({"p_s", "pr_sufficient"});
    for (double ps : ps_grid(cfg)) {
      MacConfig c = mac;
      c.p_s = ps;
      w.row({ps, an.prob_sufficient(c, n_s, m_s)});
    }
  }
  {
    CsvWriter w(out_path(args, "pr_vs_k_tau.csv"), cfg.hash());
    w.comment("max-over-p_s sufficiency probability vs superframe count");
    w.header({"k_tau", "best_p_s", "pr_sufficient"});
    for (int k : cfg.get_int_list("analyze.k_tau_sweep")) {
      MacConfig c;
      c.k_tau = k;
      c.bo.assign(k, cfg.get_int("simulate.bo"));
      double best_ps = 0, best = -1;
      for (double ps : ps_grid(cfg)) {
        c.p_s = ps;
        double p = an.prob_sufficient(c, n_s, m_s);
        if (p > best) {
          best = p;
          best_ps = ps;
        }
      }
      w.row({static_cast<double>(k), best_ps, best});
    }
  }
  {
    CsvWriter w(out_path(args, "energy_vs_ps.csv"), cfg.hash());
    w.comment("expected reporting-interval energy vs join probability");
    w.header({"p_s", "energy_uj"});
    for (double ps : ps_grid(cfg)) {
      MacConfig c = mac;
      c.p_s = ps;
      w.row({ps, an.expected_energy_ri(c, n_s, m_s)});
    }
  }
  std::printf("analyze: wrote pr_vs_ps.csv, pr_vs_k_tau.csv, energy_vs_ps.csv\n");
  return 0;
}

int cmd_optimize(const CommonArgs& args) {
  ScenarioConfig cfg = load_config(args);
  AnalysisOptions opts;
  opts.cap_frames_by_contenders = cfg.get_bool("analyze.cap_frames_by_contenders");
  MacAnalyzer an(cfg.mac_timing(), cfg.energy_params(), opts);
  const MacTiming timing = cfg.mac_timing();
  SearchSpec spec = cfg.search_spec();
  const double p_suff = cfg.get_double("optimize.p_suff");
  const int n_t = cfg.get_int("field.n_t");

  auto optimize_at = [&](int n_s, int m_s, const SearchSpec& sp) {
    return optimize_mac(an, n_s, m_s, p_suff, sp);
  };

  {
    CsvWriter w(out_path(args, "delay_vs_ns.csv"), cfg.hash());
    w.comment("reporting delay per scheme; slots");
    w.header({"n_s", "m_s", "tdma", "tdma_cs", "csma", "csma_cs"});
    for (int n_s : cfg.get_int_list("optimize.n_s_sweep")) {
      int m_s = cfg.m_s_for(n_s);
      double csma = -1, csma_cs = -1;
      try {
        csma = static_cast<double>(optimize_at(n_s, n_s, spec).delay_slots);
      } catch (const InfeasibleError&) {
      }
      try {
        csma_cs = static_cast<double>(optimize_at(n_s, m_s, spec).delay_slots);
      } catch (const InfeasibleError&) {
      }
      w.row({static_cast<double>(n_s), static_cast<double>(m_s),
             static_cast<double>(tdma_delay(n_s, timing)),
             static_cast<double>(tdma_delay(m_s, timing)), csma, csma_cs});
    }
  }
  {
    CsvWriter w(out_path(args, "partial_vs_full.csv"), cfg.hash());
    w.comment("optimized delay: full search vs pinned BO vs pinned p_s");
    w.header({"n_s", "m_s", "full", "fixed_bo", "fixed_ps"});
    for (int n_s : cfg.get_int_list("optimize.n_s_sweep")) {
      int m_s = cfg.m_s_for(n_s);
      auto val = [&](const SearchSpec& sp) -> double {
        try {
          return static_cast<double>(optimize_at(n_s, m_s, sp).delay_slots);
        } catch (const InfeasibleError&) {
          return -1;
        }
      };
      SearchSpec fixed_bo = spec;
      fixed_bo.bo_min = fixed_bo.bo_max = cfg.get_int("optimize.partial_bo");
      SearchSpec fixed_ps = spec;
      fixed_ps.fixed_ps = cfg.get_double("optimize.partial_ps");
      w.row({static_cast<double>(n_s), static_cast<double>(m_s), val(spec), val(fixed_bo),
             val(fixed_ps)});
    }
  }
  {
    CsvWriter w(out_path(args, "delay_vs_perr.csv"), cfg.hash());
    w.comment("optimized delay vs tolerated insufficiency 1 - p_suff");
    w.header({"p_err", "csma_cs", "tdma", "tdma_cs"});
    const int n_s = cfg.get_int("field.n_s");
    const int m_s = cfg.m_s_for(n_s);
    for (double perr = 0.02; perr <= 0.30001; perr += 0.02) {
      double d = -1;
      try {
        d = static_cast<double>(
            optimize_mac(an, n_s, m_s, 1.0 - perr, spec).delay_slots);
      } catch (const InfeasibleError&) {
      }
      w.row({perr, d, static_cast<double>(tdma_delay(n_s, timing)),
             static_cast<double>(tdma_delay(m_s, timing))});
    }
  }
  {
    CsvWriter w(out_path(args, "energy_vs_ns.csv"), cfg.hash());
    w.comment("expected energy per reporting interval and per data field, uJ");
    w.header({"n_s", "m_s", "e_ri_csma_cs", "e_field_csma_cs"});
    for (int n_s : cfg.get_int_list("optimize.n_s_sweep")) {
      int m_s = cfg.m_s_for(n_s);
      double e_ri = -1;
      try {
        auto r = optimize_at(n_s, m_s, spec);
        e_ri = an.expected_energy_ri(r.config, n_s, m_s);
      } catch (const InfeasibleError&) {
      }
      w.row({static_cast<double>(n_s), static_cast<double>(m_s), e_ri,
             e_ri < 0 ? -1 : cfg.m_t_for(n_s) * e_ri});
    }
  }
  {
    CsvWriter w(out_path(args, "channels.csv"), cfg.hash());
    w.comment("orthogonal channels needed per scheme");
    w.header({"n_total", "target_delay", "group_tdma", "group_csma_cs", "ch_tdma", "ch_csma_cs"});
    for (int target : cfg.get_int_list("optimize.target_delays")) {
      int g_tdma = max_group_size([&](int n) { return tdma_delay(n, timing); }, target, 4096);
      int g_csma = max_group_size(
          [&](int n) {
            return optimize_at(n, cfg.m_s_for(n), spec).delay_slots;
          },
          target, 512);
      for (int n_total : cfg.get_int_list("optimize.n_totals")) {
        BandwidthScenario bs;
        bs.n_total = n_total;
        bs.group_tdma = g_tdma;
        bs.group_csma_cs = g_csma;
        bs.m_t = cfg.m_t_for(g_csma);
        bs.n_t = n_t;
        auto ch = channels_required(bs);
        w.row({static_cast<double>(n_total), static_cast<double>(target),
               static_cast<double>(g_tdma), static_cast<double>(g_csma),
               static_cast<double>(ch.tdma), static_cast<double>(ch.csma_cs)});
      }
    }
  }
  std::printf(
      "optimize: wrote delay_vs_ns.csv, partial_vs_full.csv, delay_vs_perr.csv, "
      "energy_vs_ns.csv, channels.csv\n");
  return 0;
}

int cmd_simulate(const CommonArgs& args) {
  ScenarioConfig cfg = load_config(args);
  const MacTiming timing = cfg.mac_timing();
  const EnergyParams energy = cfg.energy_params();
  const SimOptions sim = cfg.sim_options();
  const int n_s = cfg.get_int("field.n_s");
  const int m_s = cfg.get_int("simulate.m_s");
  const int ris = cfg.get_int("simulate.ris");
  const std::uint64_t seed = static_cast<std::uint64_t>(cfg.get_int("simulate.seed"));
  MacConfig mac = cfg.sim_mac_config();

  {
    CsvWriter w(out_path(args, "sim_pr_vs_ps.csv"), cfg.hash());
    w.comment("empirical sufficiency probability vs join probability");
    w.header({"p_s", "pr_sufficient", "ris"});
    for (double ps : ps_grid(cfg)) {
      MacConfig c = mac;
      c.p_s = ps;
      std::vector<int> hits(ris, 0);
      parallel_for(ris, args.jobs, [&](std::size_t r) {
        auto res = run_ri(n_s, c, timing, energy, mix_seed(seed, static_cast<std::uint64_t>(ps * 1e6), r), sim);
        hits[r] = res.successes >= m_s ? 1 : 0;
      });
      double pr = 0;
      for (int h : hits) pr += h;
      w.row({ps, pr / ris, static_cast<double>(ris)});
    }
  }
  {
    // slot-level event log of one reporting interval, for debugging
    SimOptions traced = sim;
    traced.record_events = true;
    auto ri = run_ri(n_s, mac, timing, energy, mix_seed(seed, 0xE0E0ULL), traced);
    CsvWriter w(out_path(args, "events.csv"), cfg.hash());
    w.header({"sf", "slot", "node", "event"});
    for (std::size_t i = 0; i < ri.sf.size(); ++i)
      for (const auto& ev : ri.sf[i].events)
        w.raw_row(std::to_string(i) + "," + std::to_string(ev.slot) + "," +
                  std::to_string(ev.node) + "," + std::string(1, ev.kind));
  }
  {
    // end-to-end campaign over one generated field
    DataField field = gen_field(cfg.grid_scenario(), static_cast<std::uint64_t>(cfg.get_int("field.seed")));
    CampaignConfig cc;
    cc.m_s = m_s;
    cc.m_t = cfg.get_int("simulate.m_t");
    cc.mac = mac;
    cc.recon = cfg.recon_config();
    cc.basis = cfg.get_string("cs.basis");
    cc.sim = sim;
    auto res = run_campaign(field, cc, timing, energy, mix_seed(seed, 0xCAFEULL));
    CsvWriter w(out_path(args, "campaign.csv"), cfg.hash());
    w.header({"requested_ris", "deficient_ris", "observed_sufficiency", "mse", "delay_slots",
              "energy_uj"});
    w.row({static_cast<double>(res.requested_ris.size()), static_cast<double>(res.deficient_ris),
           res.observed_sufficiency, res.window_mse.empty() ? -1 : res.window_mse.back(),
           static_cast<double>(res.total_delay_slots), res.total_energy});
  }
  std::printf("simulate: wrote sim_pr_vs_ps.csv, events.csv, campaign.csv\n");
  return 0;
}

int cmd_compare(const CommonArgs& args) {
  ScenarioConfig cfg = load_config(args);
  AnalysisOptions opts;
  opts.cap_frames_by_contenders = cfg.get_bool("analyze.cap_frames_by_contenders");
  MacAnalyzer an(cfg.mac_timing(), cfg.energy_params(), opts);
  const MacTiming timing = cfg.mac_timing();
  const EnergyParams energy = cfg.energy_params();
  const SimOptions sim = cfg.sim_options();
  const int n_s = cfg.get_int("field.n_s");
  const int m_s = cfg.get_int("simulate.m_s");
  const int ris = cfg.get_int("simulate.ris");
  const std::uint64_t seed = static_cast<std::uint64_t>(cfg.get_int("simulate.seed"));
  MacConfig mac = cfg.sim_mac_config();

  CsvWriter w(out_path(args, "compare_pr.csv"), cfg.hash());
  w.comment("analytical vs empirical sufficiency probability");
  w.header({"p_s", "analytic", "empirical", "abs_gap"});
  for (double ps : ps_grid(cfg)) {
    MacConfig c = mac;
    c.p_s = ps;
    double analytic = an.prob_sufficient(c, n_s, m_s);
    std::vector<int> hits(ris, 0);
    parallel_for(ris, args.jobs, [&](std::size_t r) {
      auto res = run_ri(n_s, c, timing, energy, mix_seed(seed, static_cast<std::uint64_t>(ps * 1e6), r), sim);
      hits[r] = res.successes >= m_s ? 1 : 0;
    });
    double pr = 0;
    for (int h : hits) pr += h;
    pr /= ris;
    w.row({ps, analytic, pr, std::abs(analytic - pr)});
  }
  std::printf("compare: wrote compare_pr.csv\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"compressed-sensing data collection over slotted CSMA/CA: scenario tools"};
  app.require_subcommand(1);
  app.fallthrough();

  CommonArgs args;
  app.add_option("--config", args.config_path, "scenario config document");
  app.add_option("--out", args.out_dir, "output directory");
  app.add_option("--seed", args.seed, "override every seed in the config");
  app.add_option("--jobs", args.jobs, "worker threads for trial/RI sweeps");
  app.add_option("--override", args.overrides, "section.key=value overrides")->take_all();

  auto* generate = app.add_subcommand("generate", "synthesize an injected-power field CSV");
  auto* calibrate = app.add_subcommand("calibrate", "success curves and sample thresholds");
  auto* analyze = app.add_subcommand("analyze", "closed-form MAC sweeps");
  auto* optimize = app.add_subcommand("optimize", "MAC parameter search and scheme comparisons");
  auto* simulate = app.add_subcommand("simulate", "slot-level simulation sweeps and a campaign");
  auto* compare = app.add_subcommand("compare", "analytics vs simulation gap tables");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) ? kExitValidation : 0;
  }

  try {
    if (generate->parsed()) return cmd_generate(args);
    if (calibrate->parsed()) return cmd_calibrate(args);
    if (analyze->parsed()) return cmd_analyze(args);
    if (optimize->parsed()) return cmd_optimize(args);
    if (simulate->parsed()) return cmd_simulate(args);
    if (compare->parsed()) return cmd_compare(args);
  } catch (const InfeasibleError& e) {
    std::fprintf(stderr, "infeasible: %s\n", e.what());
    return kExitInfeasible;
  } catch (const CalibrationError& e) {
    std::fprintf(stderr, "infeasible: %s\n", e.what());
    return kExitInfeasible;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "invalid input: %s\n", e.what());
    return kExitValidation;
  } catch (const std::runtime_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return e.what() && std::string(e.what()).find("config") != std::string::npos
               ? kExitValidation
               : kExitRuntime;
  }
  return kExitRuntime;
}
