#pragma once

#include <string>
#include <vector>

#include "vadelay/analytic.hpp"
#include "vadelay/model.hpp"
#include "vadelay/sim.hpp"

namespace vadelay {

// A load sweep compares the closed-form mean delays against simulation over a
// grid of saturation levels (values of L*rho, all strictly inside (0,1)).
struct SweepSpec {
  std::vector<double> grid = {0.001, 0.1, 0.2, 0.3, 0.4, 0.5,
                              0.6,   0.7, 0.8, 0.9, 0.99};
  SimConfig sim;
  AnalyticOptions options;
  int order = 0;  // 0 = pick per flow, 1/2 = force
};

struct SweepRow {
  std::string flow_id;
  int group = 0, j = 0;  // 1-based position after within-group ordering
  double l_rho = 0.0, rho = 0.0;
  double sim_mean = 0.0, sim_ci = 0.0;
  double approx_mean = 0.0;
  int order = 0;
  double rel_err_pct = 0.0;  // |approx - sim| / sim * 100
  bool noisy = false;        // sim CI half-width exceeds 2% of the mean
};

struct QualityReport {
  std::vector<SweepRow> rows;  // grid-major, then flows in spec order
  double qm1 = 0.0;            // largest relative error ...
  std::string qm1_flow;        // ... its flow
  double qm1_l_rho = 0.0;      // ... and the load where it occurs
  double qm2 = 0.0;            // arrival-rate-weighted mean relative error
};

QualityReport run_sweep(const IntersectionSpec& spec, const SweepSpec& sw);

// The report's raw table as CSV with the fixed header
// flow_id,group,j,L_rho,rho,sim_mean,sim_ci,approx_mean,order,rel_err_pct
std::string sweep_csv(const QualityReport& report);

// Recompute (qm1, qm2) from the raw rows; used to keep the report honest.
void recompute_quality(QualityReport& report, const IntersectionSpec& spec);

}  // namespace vadelay
