#pragma once

#include <vector>

#include "vadelay/model.hpp"

namespace vadelay {

// Deterministic within-cycle picture at saturation: the cycle of length
// `cycle` splits, for a given flow, into the part of its green spent serving
// its queue, the remainder of the green (its queue is empty, the group's
// dominant flow still crossing), and the rest of the cycle (its red).
struct CycleParts {
  double green_busy = 0.0;
  double green_idle = 0.0;
  double red = 0.0;
  double cycle = 0.0;
};

CycleParts cycle_parts(const DerivedQuantities& dq, int g, int j, double cycle);

// Delay over one saturated cycle: zero for arrivals in the idle part of the
// green, uniform otherwise. Built from the two construction pieces (arrival
// during the busy green, arrival during the red), which reassemble into a
// single zero-atom + Uniform(0, red) law.
struct FluidDelayLaw {
  double p_zero = 0.0;
  double p_green = 0.0;  // weight of the within-green piece
  double p_red = 0.0;    // weight of the within-red piece
  double green_hi = 0.0;  // upper end of the within-green piece
  double red_hi = 0.0;    // red length = upper end of the within-red piece

  double mean() const { return (p_green + p_red) * red_hi / 2.0; }
  double cdf(double x) const;                 // assembled from the two pieces
  double cdf_single_uniform(double x) const;  // the collapsed form
};

FluidDelayLaw fluid_delay_law(const DerivedQuantities& dq, int g, int j,
                              double cycle);

// Piecewise-linear workload of one flow over its group-relative cycle
// (t = 0 at its green's start). Slope rho_hat_j/L - 1 while serving, 0 while
// empty in green, +rho_hat_j/L during red; closes exactly after one cycle.
struct FluidTrajectory {
  std::vector<std::pair<double, double>> points;  // (time, workload seconds)
};

FluidTrajectory fluid_trajectory(const DerivedQuantities& dq, int g, int j,
                                 double cycle);
double fluid_workload_at(const DerivedQuantities& dq, int g, int j,
                         double cycle, double t);
// Start of group g's green on the common cycle clock (group 0 starts at 0).
double group_green_offset(const DerivedQuantities& dq, int g, double cycle);

// Group clearing times when the system starts with the given per-flow fluid
// queue contents (vehicles) and groups are served exhaustively in order,
// switchovers ignored. Requires lambda < mu for every flow.
std::vector<double> drain_times(
    const LoadedScenario& sc, const std::vector<std::vector<double>>& initial);

// Net growth rate of the total dominant-flow workload: L*rho - 1. Negative
// means the fluid system drains (stable).
double fluid_drift(const LoadedScenario& sc);

}  // namespace vadelay
