#include "vadelay/sweep.hpp"

#include <cmath>
#include <cstdio>

#include "vadelay/errors.hpp"

namespace vadelay {

QualityReport run_sweep(const IntersectionSpec& spec, const SweepSpec& sw) {
  if (sw.grid.empty()) throw ValidationError("sweep grid is empty");
  for (double v : sw.grid)
    if (!(v > 0.0) || !(v < 1.0))
      throw ValidationError("sweep grid values must lie strictly in (0,1)");
  DerivedQuantities dq = derive_quantities(spec);

  QualityReport rep;
  for (double lr : sw.grid) {
    double rho = lr / dq.L;
    LoadedScenario sc = scale(dq, rho);
    SimConfig cfg = sw.sim;
    cfg.stay_empty = sw.options.stay_empty;
    SimResult sim = simulate(sc, cfg);
    for (int g = 0; g < spec.num_groups(); ++g) {
      for (int j = 0; j < static_cast<int>(spec.groups[g].flows.size()); ++j) {
        SweepRow row;
        row.flow_id = spec.groups[g].flows[j].id;
        row.group = g + 1;
        row.j = j + 1;
        row.l_rho = lr;
        row.rho = rho;
        row.sim_mean = sim.flows[g][j].mean_delay;
        row.sim_ci = sim.flows[g][j].ci_half_width;
        int order = sw.order != 0 ? sw.order : select_order(dq, g, j);
        row.order = order;
        row.approx_mean = approx_mean_delay(dq, rho, g, j, order, sw.options);
        row.rel_err_pct =
            std::fabs(row.approx_mean - row.sim_mean) / row.sim_mean * 100.0;
        row.noisy = row.sim_ci > 0.02 * row.sim_mean;
        rep.rows.push_back(std::move(row));
      }
    }
  }
  recompute_quality(rep, spec);
  return rep;
}

void recompute_quality(QualityReport& rep, const IntersectionSpec& spec) {
  rep.qm1 = 0.0;
  rep.qm1_flow.clear();
  rep.qm1_l_rho = 0.0;
  for (const SweepRow& r : rep.rows) {
    if (r.rel_err_pct > rep.qm1) {
      rep.qm1 = r.rel_err_pct;
      rep.qm1_flow = r.flow_id;
      rep.qm1_l_rho = r.l_rho;
    }
  }
  // per-flow mean error over the grid, then weighted by arrival-rate share
  double weight_total = 0.0;
  rep.qm2 = 0.0;
  for (int g = 0; g < spec.num_groups(); ++g) {
    for (int j = 0; j < static_cast<int>(spec.groups[g].flows.size()); ++j) {
      const std::string& id = spec.groups[g].flows[j].id;
      double sum = 0.0;
      int n = 0;
      for (const SweepRow& r : rep.rows) {
        if (r.flow_id == id) {
          sum += r.rel_err_pct;
          ++n;
        }
      }
      double lambda_hat = spec.groups[g].flows[j].lambda_hat;
      weight_total += lambda_hat;
      if (n > 0) rep.qm2 += lambda_hat * (sum / n);
    }
  }
  rep.qm2 /= weight_total;
}

std::string sweep_csv(const QualityReport& rep) {
  std::string out =
      "flow_id,group,j,L_rho,rho,sim_mean,sim_ci,approx_mean,order,"
      "rel_err_pct\n";
  char buf[256];
  for (const SweepRow& r : rep.rows) {
    std::snprintf(buf, sizeof(buf), "%s,%d,%d,%.10g,%.10g,%.10g,%.10g,%.10g,%d,%.10g\n",
                  r.flow_id.c_str(), r.group, r.j, r.l_rho, r.rho, r.sim_mean,
                  r.sim_ci, r.approx_mean, r.order, r.rel_err_pct);
    out += buf;
  }
  return out;
}

}  // namespace vadelay
