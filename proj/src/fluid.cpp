#include "vadelay/fluid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "vadelay/errors.hpp"

namespace vadelay {

namespace {

void check_flow_index(const DerivedQuantities& dq, int g, int j) {
  if (g < 0 || g >= dq.spec.num_groups())
    throw ValidationError("group index out of range");
  if (j < 0 || j >= static_cast<int>(dq.spec.groups[g].flows.size()))
    throw ValidationError("flow index out of range");
}

double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }

}  // namespace

CycleParts cycle_parts(const DerivedQuantities& dq, int g, int j,
                       double cycle) {
  check_flow_index(dq, g, j);
  if (!(cycle > 0.0)) throw ValidationError("cycle length must be positive");
  double r1 = dq.dominant_share(g) / dq.L;
  double rj = dq.spec.flow(g, j).rho_hat / dq.L;
  CycleParts parts;
  parts.cycle = cycle;
  parts.red = (1.0 - r1) * cycle;
  parts.green_busy = rj * (1.0 - r1) / (1.0 - rj) * cycle;
  parts.green_idle = r1 * cycle - parts.green_busy;
  return parts;
}

double FluidDelayLaw::cdf(double x) const {
  if (x < 0.0) return 0.0;
  double green = green_hi > 0.0 ? clamp01(x / green_hi) : 1.0;
  double red = red_hi > green_hi
                   ? clamp01((x - green_hi) / (red_hi - green_hi))
                   : 1.0;
  return p_zero + p_green * green + p_red * red;
}

double FluidDelayLaw::cdf_single_uniform(double x) const {
  if (x < 0.0) return 0.0;
  double u = red_hi > 0.0 ? clamp01(x / red_hi) : 1.0;
  return p_zero + (p_green + p_red) * u;
}

FluidDelayLaw fluid_delay_law(const DerivedQuantities& dq, int g, int j,
                              double cycle) {
  CycleParts parts = cycle_parts(dq, g, j, cycle);
  double rj = dq.spec.flow(g, j).rho_hat / dq.L;
  FluidDelayLaw law;
  law.p_zero = parts.green_idle / cycle;
  law.p_green = parts.green_busy / cycle;
  law.p_red = parts.red / cycle;
  law.red_hi = parts.red;
  law.green_hi = rj * parts.red;
  return law;
}

FluidTrajectory fluid_trajectory(const DerivedQuantities& dq, int g, int j,
                                 double cycle) {
  CycleParts parts = cycle_parts(dq, g, j, cycle);
  double r1 = dq.dominant_share(g) / dq.L;
  double rj = dq.spec.flow(g, j).rho_hat / dq.L;
  double start = rj * (1.0 - r1) * cycle;  // workload built up over the red
  FluidTrajectory t;
  t.points = {{0.0, start},
              {parts.green_busy, 0.0},
              {parts.green_busy + parts.green_idle, 0.0},
              {cycle, start}};
  return t;
}

double fluid_workload_at(const DerivedQuantities& dq, int g, int j,
                         double cycle, double t) {
  FluidTrajectory traj = fluid_trajectory(dq, g, j, cycle);
  t = std::fmod(t, cycle);
  if (t < 0.0) t += cycle;
  const auto& pts = traj.points;
  for (size_t i = 1; i < pts.size(); ++i) {
    if (t <= pts[i].first) {
      double span = pts[i].first - pts[i - 1].first;
      if (span <= 0.0) return pts[i].second;
      double frac = (t - pts[i - 1].first) / span;
      return pts[i - 1].second +
             frac * (pts[i].second - pts[i - 1].second);
    }
  }
  return pts.back().second;
}

double group_green_offset(const DerivedQuantities& dq, int g, double cycle) {
  if (g < 0 || g >= dq.spec.num_groups())
    throw ValidationError("group index out of range");
  double off = 0.0;
  for (int h = 0; h < g; ++h) off += dq.dominant_share(h) / dq.L * cycle;
  return off;
}

std::vector<double> drain_times(
    const LoadedScenario& sc, const std::vector<std::vector<double>>& initial) {
  const auto& groups = sc.dq.spec.groups;
  if (initial.size() != groups.size())
    throw ValidationError("initial workload shape does not match the groups");
  std::vector<double> times;
  double t_prev = 0.0;
  for (size_t g = 0; g < groups.size(); ++g) {
    if (initial[g].size() != groups[g].flows.size())
      throw ValidationError("initial workload shape does not match group " +
                            std::to_string(g + 1));
    double longest = 0.0;
    for (size_t j = 0; j < groups[g].flows.size(); ++j) {
      double x = initial[g][j];
      if (!(x >= 0.0))
        throw ValidationError("initial queue contents must be >= 0");
      double lambda = sc.loads[g][j].lambda;
      double mu = 1.0 / groups[g].flows[j].service_mean;
      if (!(lambda < mu))
        throw ValidationError(
            "drain times need lambda < mu for every flow (flow '" +
            groups[g].flows[j].id + "' is overloaded)");
      longest = std::max(longest, (x + lambda * t_prev) / (mu - lambda));
    }
    t_prev += longest;
    times.push_back(t_prev);
  }
  return times;
}

double fluid_drift(const LoadedScenario& sc) {
  return sc.dq.L * sc.rho - 1.0;
}

}  // namespace vadelay
