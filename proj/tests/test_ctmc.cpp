#include <cmath>
#include <string>
#include <vector>

#include "doctest.h"
#include "vadelay/ctmc.hpp"
#include "vadelay/errors.hpp"
#include "vadelay/model.hpp"
#include "vadelay/sim.hpp"

using namespace vadelay;

namespace {

DerivedQuantities from_shares(const std::vector<std::vector<double>>& shares,
                              double saturation, double red_seconds,
                              double red_scv = 1.0) {
  RawIntersection raw;
  int n = 0;
  for (size_t g = 0; g < shares.size(); ++g) {
    RawGroup rg;
    for (double s : shares[g]) {
      RawFlow f;
      f.id = "f" + std::to_string(++n);
      f.relative_load = s;
      f.saturation_rate_per_hour = saturation;
      raw.flows.push_back(f);
      rg.flow_ids.push_back(f.id);
    }
    rg.all_red_seconds = red_seconds;
    rg.all_red_scv = red_scv;
    raw.groups.push_back(rg);
  }
  return derive_quantities(normalize_loads(raw));
}

// Two groups of two flows with shares 0.1/0.4 each, 6 s exponential all-red:
// a four-flow layout small enough for exact numbers at moderate caps.
DerivedQuantities four_flow() {
  return from_shares({{1, 4}, {1, 4}}, 1800.0, 6.0);
}

}  // namespace

TEST_SUITE("ctmc") {

TEST_CASE("three-state chain solved by hand") {
  // one flow, one group, exponential red of mean 5, queue cap 1. The chain is
  // (green,1) -mu-> (red,0) -lambda-> (red,1) -1/R-> (green,1), so the
  // stationary weights are (1/mu, 1/lambda, R)/norm and an admitted vehicle
  // (only in (red,0)) waits the full residual red plus its own crossing.
  RawIntersection raw;
  RawFlow f;
  f.id = "only";
  f.relative_load = 1.0;
  f.saturation_rate_per_hour = 1800.0;  // E[B] = 2 -> mu = 0.5
  raw.flows.push_back(f);
  raw.groups.push_back({{"only"}, 5.0, 1.0});
  DerivedQuantities dq = derive_quantities(normalize_loads(raw));
  LoadedScenario sc = scale(dq, 0.5);  // lambda = 0.25

  CtmcSpec spec;
  spec.cap = 1;
  CtmcResult r = ctmc_mean_delays(sc, spec);
  CHECK(r.base_states == 3);
  CHECK(r.residual < 1e-10);
  CHECK(r.flows[0][0].mean_delay == doctest::Approx(7.0).epsilon(1e-9));
  CHECK(r.flows[0][0].admitted_share ==
        doctest::Approx(4.0 / 11.0).epsilon(1e-9));
}

TEST_CASE("single queue without red time is M/M/1") {
  RawIntersection raw;
  RawFlow f;
  f.id = "only";
  f.relative_load = 1.0;
  f.saturation_rate_per_hour = 1800.0;
  raw.flows.push_back(f);
  raw.groups.push_back({{"only"}, 0.0, 0.0});
  DerivedQuantities dq = derive_quantities(normalize_loads(raw));
  LoadedScenario sc = scale(dq, 0.5);

  CtmcSpec spec;
  spec.cap = 50;  // truncation error ~ rho^50, invisible at 1e-6
  spec.stay_empty = false;
  CtmcResult r = ctmc_mean_delays(sc, spec);
  CHECK(r.base_states == 51);
  CHECK(r.flows[0][0].mean_delay == doctest::Approx(4.0).epsilon(1e-6));
  CHECK(r.flows[0][0].admitted_share == doctest::Approx(1.0).epsilon(1e-9));

  // stay-empty cannot work here: with no red, a cleared queue would never
  // get another green
  CtmcSpec bad = spec;
  bad.stay_empty = true;
  CHECK_THROWS_AS(ctmc_mean_delays(sc, bad), ValidationError);
}

TEST_CASE("truncation cap is tame at light load") {
  DerivedQuantities dq = four_flow();
  LoadedScenario sc = scale(dq, 0.15 / dq.L);
  CtmcSpec small, large;
  small.cap = 4;
  large.cap = 6;
  CtmcResult a = ctmc_mean_delays(sc, small);
  CtmcResult b = ctmc_mean_delays(sc, large);
  for (int g = 0; g < 2; ++g)
    for (int j = 0; j < 2; ++j) {
      double rel = std::fabs(a.flows[g][j].mean_delay -
                             b.flows[g][j].mean_delay) /
                   b.flows[g][j].mean_delay;
      CHECK(rel < 0.005);
      CHECK(b.flows[g][j].admitted_share > 0.999);
    }
  // mirror-image groups give mirror-image answers
  CHECK(b.flows[0][0].mean_delay ==
        doctest::Approx(b.flows[1][0].mean_delay).epsilon(1e-8));
  CHECK(b.flows[0][1].mean_delay ==
        doctest::Approx(b.flows[1][1].mean_delay).epsilon(1e-8));
}

TEST_CASE("oracle agrees with the simulator") {
  DerivedQuantities dq = four_flow();
  LoadedScenario sc = scale(dq, 0.2 / dq.L);
  CtmcSpec spec;
  spec.cap = 6;
  CtmcResult oracle = ctmc_mean_delays(sc, spec);

  SimConfig cfg;
  cfg.root_seed = 17;
  cfg.replications = 6;
  cfg.cycles = 8000;
  cfg.warmup = 300;
  SimResult sim = simulate(sc, cfg);
  for (int g = 0; g < 2; ++g)
    for (int j = 0; j < 2; ++j) {
      const FlowStats& fs = sim.flows[g][j];
      double tol = 3.0 * fs.ci_half_width + 0.01 * fs.mean_delay;
      CHECK_MESSAGE(
          std::fabs(oracle.flows[g][j].mean_delay - fs.mean_delay) <= tol,
          "flow (", g, ",", j, "): oracle ", oracle.flows[g][j].mean_delay,
          " vs sim ", fs.mean_delay, " +- ", fs.ci_half_width);
    }
}

TEST_CASE("refill queues up what stay-empty waves through") {
  DerivedQuantities dq = four_flow();
  LoadedScenario sc = scale(dq, 0.3 / dq.L);
  CtmcSpec stay, refill;
  stay.cap = 5;
  refill.cap = 5;
  refill.stay_empty = false;
  CtmcResult a = ctmc_mean_delays(sc, stay);
  CtmcResult b = ctmc_mean_delays(sc, refill);
  // the non-dominant flow re-forms a queue under refill; delays rise
  CHECK(b.flows[0][1].mean_delay > a.flows[0][1].mean_delay);
}

TEST_CASE("only all-exponential inputs are supported") {
  // deterministic all-red
  DerivedQuantities det_red = from_shares({{1, 2}, {3, 4}}, 1800.0, 6.0, 0.0);
  CHECK_THROWS_AS(ctmc_mean_delays(scale(det_red, 0.5), CtmcSpec{}),
                  UnsupportedDistributionError);
  // deterministic headways
  RawIntersection raw;
  int n = 0;
  for (int g = 0; g < 2; ++g) {
    RawGroup rg;
    for (int k = 0; k < 2; ++k) {
      RawFlow f;
      f.id = "f" + std::to_string(++n);
      f.relative_load = 1.0;
      f.saturation_rate_per_hour = 1800.0;
      f.headway_scv = 0.0;
      raw.flows.push_back(f);
      rg.flow_ids.push_back(f.id);
    }
    rg.all_red_seconds = 6.0;
    rg.all_red_scv = 1.0;
    raw.groups.push_back(rg);
  }
  DerivedQuantities det_hw = derive_quantities(normalize_loads(raw));
  CHECK_THROWS_AS(ctmc_mean_delays(scale(det_hw, 0.5), CtmcSpec{}),
                  UnsupportedDistributionError);
}

TEST_CASE("load and size guard rails") {
  DerivedQuantities dq = four_flow();
  CHECK_THROWS_AS(ctmc_mean_delays(scale(dq, 0.0), CtmcSpec{}),
                  ValidationError);
  CHECK_THROWS_AS(ctmc_mean_delays(scale(dq, 1.0 / dq.L), CtmcSpec{}),
                  InstabilityError);
  CHECK_THROWS_AS(ctmc_mean_delays(scale(dq, 1.5 / dq.L), CtmcSpec{}),
                  InstabilityError);

  CtmcSpec bad_cap;
  bad_cap.cap = 0;
  CHECK_THROWS_AS(ctmc_mean_delays(scale(dq, 0.5), bad_cap), ValidationError);

  // ten queues at cap 6 blow past any reasonable state budget
  DerivedQuantities wide =
      from_shares({{1, 1, 1, 1, 1}, {1, 1, 1, 1, 1}}, 1800.0, 6.0);
  CHECK_THROWS_AS(ctmc_mean_delays(scale(wide, 0.5), CtmcSpec{}),
                  StateSpaceTooLargeError);
}

}  // TEST_SUITE
