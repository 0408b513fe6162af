// Command-line front end: closed-form analysis, simulation, load sweeps, the
// exact-chain oracle, and the saturated-cycle fluid picture, all emitting CSV.
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "vadelay/analytic.hpp"
#include "vadelay/config_io.hpp"
#include "vadelay/ctmc.hpp"
#include "vadelay/errors.hpp"
#include "vadelay/fluid.hpp"
#include "vadelay/model.hpp"
#include "vadelay/sim.hpp"
#include "vadelay/sweep.hpp"

namespace {

struct CommonArgs {
  std::string config;
  std::string out;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config,
                  "bundled preset name or path to a JSON intersection file")
      ->required();
  cmd->add_option("--out", args.out, "write CSV here instead of stdout");
}

void emit(const CommonArgs& args, const std::string& text) {
  if (args.out.empty()) {
    std::fputs(text.c_str(), stdout);
    return;
  }
  std::ofstream f(args.out);
  if (!f) throw vadelay::ValidationError("cannot open --out file " + args.out);
  f << text;
}

struct AnalyticArgs {
  std::string order = "auto";
  std::string ht_formula = "theorem3";
  std::string sigma2 = "lemma1";
  std::string g0 = "whitt";
  std::string mode = "stay-empty";
};

void add_analytic(CLI::App* cmd, AnalyticArgs& a) {
  cmd->add_option("--order", a.order, "interpolation order")
      ->check(CLI::IsMember({"auto", "1", "2"}));
  cmd->add_option("--ht-formula", a.ht_formula, "saturated-mean constant")
      ->check(CLI::IsMember({"theorem3", "corollary"}));
  cmd->add_option("--sigma2", a.sigma2, "variance normalization")
      ->check(CLI::IsMember({"lemma1", "corollary"}));
  cmd->add_option("--g0", a.g0, "interarrival zero-density factor")
      ->check(CLI::IsMember({"whitt", "exact"}));
  cmd->add_option("--mode", a.mode, "cleared-flow behaviour during green")
      ->check(CLI::IsMember({"stay-empty", "refill"}));
}

vadelay::AnalyticOptions to_options(const AnalyticArgs& a) {
  vadelay::AnalyticOptions opts;
  opts.ht_formula = a.ht_formula == "corollary"
                        ? vadelay::HtFormula::CorollaryAsPrinted
                        : vadelay::HtFormula::Theorem3;
  opts.sigma2 = a.sigma2 == "corollary" ? vadelay::Sigma2Form::Corollary
                                        : vadelay::Sigma2Form::Lemma1;
  opts.g0 = a.g0 == "exact" ? vadelay::ZeroDensityMode::Exact
                            : vadelay::ZeroDensityMode::Whitt;
  opts.stay_empty = a.mode != "refill";
  return opts;
}

int to_order(const std::string& s) {
  if (s == "1") return 1;
  if (s == "2") return 2;
  return 0;
}

std::string fmt_row(const char* fmt, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, fmt);
  std::vsnprintf(buf, sizeof(buf), fmt, ap);
  va_end(ap);
  return buf;
}

int run_analyze(const CommonArgs& common, const AnalyticArgs& anal,
                double l_rho) {
  using namespace vadelay;
  IntersectionSpec spec = normalize_loads(load_intersection(common.config));
  DerivedQuantities dq = derive_quantities(spec);
  AnalyticOptions opts = to_options(anal);
  double rho = l_rho / dq.L;
  std::string out =
      "flow_id,group,j,order,lt_mean,ht_scaled_mean,K0,K1,K2,approx_mean\n";
  for (int g = 0; g < spec.num_groups(); ++g) {
    for (int j = 0; j < static_cast<int>(spec.groups[g].flows.size()); ++j) {
      int order = to_order(anal.order);
      if (order == 0) order = select_order(dq, g, j);
      double lt = lt_mean_general(dq, rho, g, j, opts);
      double ht = std::nan("");
      double k0 = std::nan(""), k1 = std::nan(""), k2 = std::nan("");
      double approx = std::nan("");
      if (spec.num_groups() > 1) {
        ht = ht_scaled_mean(dq, g, j, opts);
        InterpolationConstants c = interpolation_constants(dq, g, j, order, opts);
        k0 = c.k0;
        k1 = c.k1;
        k2 = order == 2 ? c.k2 : std::nan("");
        approx = approx_mean_delay(dq, rho, g, j, order, opts);
      }
      out += fmt_row("%s,%d,%d,%d,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g\n",
                     spec.groups[g].flows[j].id.c_str(), g + 1, j + 1, order,
                     lt, ht, k0, k1, k2, approx);
    }
  }
  emit(common, out);
  return 0;
}

int run_simulate(const CommonArgs& common, const AnalyticArgs& anal,
                 double l_rho, vadelay::SimConfig cfg) {
  using namespace vadelay;
  IntersectionSpec spec = normalize_loads(load_intersection(common.config));
  DerivedQuantities dq = derive_quantities(spec);
  double rho = l_rho / dq.L;
  cfg.stay_empty = anal.mode != "refill";
  LoadedScenario sc = scale(dq, rho);
  SimResult res = simulate(sc, cfg);
  std::string out =
      "flow_id,group,j,L_rho,rho,mean_delay,ci_half_width,p_last_departure,"
      "samples\n";
  for (int g = 0; g < spec.num_groups(); ++g) {
    for (int j = 0; j < static_cast<int>(spec.groups[g].flows.size()); ++j) {
      const FlowStats& fs = res.flows[g][j];
      out += fmt_row("%s,%d,%d,%.10g,%.10g,%.10g,%.10g,%.10g,%lld\n",
                     spec.groups[g].flows[j].id.c_str(), g + 1, j + 1, l_rho,
                     rho, fs.mean_delay, fs.ci_half_width, fs.p_last_departure,
                     fs.samples);
    }
  }
  emit(common, out);
  return 0;
}

int run_sweep_cmd(const CommonArgs& common, const AnalyticArgs& anal,
                  const std::vector<double>& grid, vadelay::SimConfig cfg) {
  using namespace vadelay;
  IntersectionSpec spec = normalize_loads(load_intersection(common.config));
  SweepSpec sw;
  if (!grid.empty()) sw.grid = grid;
  sw.sim = cfg;
  sw.options = to_options(anal);
  sw.order = to_order(anal.order);
  QualityReport rep = run_sweep(spec, sw);
  emit(common, sweep_csv(rep));
  std::fprintf(stderr, "QM1 = %.4g%% (flow %s at L*rho = %g), QM2 = %.4g%%\n",
               rep.qm1, rep.qm1_flow.c_str(), rep.qm1_l_rho, rep.qm2);
  return 0;
}

int run_oracle(const CommonArgs& common, const AnalyticArgs& anal,
               double l_rho, vadelay::CtmcSpec cs) {
  using namespace vadelay;
  IntersectionSpec spec = normalize_loads(load_intersection(common.config));
  DerivedQuantities dq = derive_quantities(spec);
  double rho = l_rho / dq.L;
  cs.stay_empty = anal.mode != "refill";
  LoadedScenario sc = scale(dq, rho);
  CtmcResult res = ctmc_mean_delays(sc, cs);
  std::string out =
      "flow_id,group,j,L_rho,rho,cap,oracle_mean,admitted_share,states,"
      "residual\n";
  for (int g = 0; g < spec.num_groups(); ++g) {
    for (int j = 0; j < static_cast<int>(spec.groups[g].flows.size()); ++j) {
      out += fmt_row("%s,%d,%d,%.10g,%.10g,%d,%.10g,%.10g,%lld,%.3g\n",
                     spec.groups[g].flows[j].id.c_str(), g + 1, j + 1, l_rho,
                     rho, cs.cap, res.flows[g][j].mean_delay,
                     res.flows[g][j].admitted_share, res.base_states,
                     res.residual);
    }
  }
  emit(common, out);
  return 0;
}

int run_fluid(const CommonArgs& common, const std::string& flow_id,
              double cycle) {
  using namespace vadelay;
  IntersectionSpec spec = normalize_loads(load_intersection(common.config));
  DerivedQuantities dq = derive_quantities(spec);
  std::string out;
  if (!flow_id.empty()) {
    // one flow: its within-cycle workload trajectory
    out = "flow_id,time,workload\n";
    bool found = false;
    for (int g = 0; g < spec.num_groups() && !found; ++g) {
      for (int j = 0; j < static_cast<int>(spec.groups[g].flows.size()); ++j) {
        if (spec.groups[g].flows[j].id != flow_id) continue;
        FluidTrajectory tr = fluid_trajectory(dq, g, j, cycle);
        for (const auto& [t, w] : tr.points)
          out += fmt_row("%s,%.10g,%.10g\n", flow_id.c_str(), t, w);
        found = true;
        break;
      }
    }
    if (!found)
      throw ValidationError("no flow with id \"" + flow_id + "\"");
  } else {
    out =
        "flow_id,group,j,cycle,green_busy,green_idle,red,p_zero,"
        "mean_scaled_delay,start_workload\n";
    for (int g = 0; g < spec.num_groups(); ++g) {
      for (int j = 0; j < static_cast<int>(spec.groups[g].flows.size()); ++j) {
        CycleParts parts = cycle_parts(dq, g, j, cycle);
        FluidDelayLaw law = fluid_delay_law(dq, g, j, cycle);
        double start = fluid_workload_at(dq, g, j, cycle, 0.0);
        out += fmt_row("%s,%d,%d,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g\n",
                       spec.groups[g].flows[j].id.c_str(), g + 1, j + 1, cycle,
                       parts.green_busy, parts.green_idle, parts.red,
                       law.p_zero, law.mean(), start);
      }
    }
  }
  emit(common, out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Delay analysis for signalized intersections under exhaustive "
      "vehicle-actuated control"};
  app.require_subcommand(1);

  CommonArgs common;
  AnalyticArgs anal;
  double l_rho = 0.0;
  std::vector<double> grid;
  std::string flow_id;
  double cycle = 1.0;
  vadelay::SimConfig sim_cfg;
  vadelay::CtmcSpec ctmc_spec;

  CLI::App* analyze = app.add_subcommand(
      "analyze", "closed-form mean delays and their building blocks");
  add_common(analyze, common);
  add_analytic(analyze, anal);
  analyze->add_option("--load", l_rho, "saturation level L*rho")->required();

  CLI::App* simulate = app.add_subcommand(
      "simulate", "event-driven simulation of the intersection");
  add_common(simulate, common);
  simulate->add_option("--load", l_rho, "saturation level L*rho")->required();
  simulate->add_option("--cycles", sim_cfg.cycles, "measured cycles per replication");
  simulate->add_option("--reps", sim_cfg.replications, "independent replications");
  simulate->add_option("--seed", sim_cfg.root_seed, "root random seed");
  simulate->add_option("--threads", sim_cfg.threads, "worker threads over replications");
  simulate->add_option("--warmup", sim_cfg.warmup, "warm-up cycles (default cycles/10, at least 200)");
  simulate
      ->add_option("--mode", anal.mode, "cleared-flow behaviour during green")
      ->check(CLI::IsMember({"stay-empty", "refill"}));

  CLI::App* sweep = app.add_subcommand(
      "sweep", "simulation vs approximation over a grid of loads");
  add_common(sweep, common);
  add_analytic(sweep, anal);
  sweep->add_option("--grid", grid, "comma-separated L*rho values in (0,1)")
      ->delimiter(',');
  sweep->add_option("--cycles", sim_cfg.cycles, "measured cycles per replication");
  sweep->add_option("--reps", sim_cfg.replications, "independent replications");
  sweep->add_option("--seed", sim_cfg.root_seed, "root random seed");
  sweep->add_option("--threads", sim_cfg.threads, "worker threads over replications");
  sweep->add_option("--min-samples", sim_cfg.min_samples_per_flow,
                    "extend cheap points until every flow has this many samples");

  CLI::App* oracle = app.add_subcommand(
      "oracle", "exact mean delays from the truncated Markov chain");
  add_common(oracle, common);
  oracle->add_option("--load", l_rho, "saturation level L*rho")->required();
  oracle->add_option("--cap", ctmc_spec.cap, "per-flow queue truncation");
  oracle->add_option("--max-states", ctmc_spec.max_states,
                     "refuse chains larger than this");
  oracle
      ->add_option("--mode", anal.mode, "cleared-flow behaviour during green")
      ->check(CLI::IsMember({"stay-empty", "refill"}));

  CLI::App* fluid = app.add_subcommand(
      "fluid", "saturated-cycle fluid picture (parts, law, trajectory)");
  add_common(fluid, common);
  fluid->add_option("--flow", flow_id, "emit this flow's workload trajectory");
  fluid->add_option("--cycle-length", cycle, "cycle length in seconds")
      ->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 2;
  }

  try {
    if (app.got_subcommand(analyze)) return run_analyze(common, anal, l_rho);
    if (app.got_subcommand(simulate))
      return run_simulate(common, anal, l_rho, sim_cfg);
    if (app.got_subcommand(sweep))
      return run_sweep_cmd(common, anal, grid, sim_cfg);
    if (app.got_subcommand(oracle))
      return run_oracle(common, anal, l_rho, ctmc_spec);
    if (app.got_subcommand(fluid)) return run_fluid(common, flow_id, cycle);
  } catch (const vadelay::InstabilityError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const vadelay::ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
