#include <cmath>
#include <string>

#include "doctest.h"
#include "vadelay/errors.hpp"
#include "vadelay/model.hpp"

using namespace vadelay;

namespace {

// Six flows with relative load shares 1..6 (so shares i/21 after
// normalization), common 1800 veh/h saturation, exponential everything,
// split into two groups of three with 6 s deterministic all-red each.
RawIntersection six_flow_two_group() {
  RawIntersection raw;
  for (int i = 1; i <= 6; ++i) {
    RawFlow f;
    f.id = "flow-" + std::to_string(i);
    f.relative_load = static_cast<double>(i);
    f.saturation_rate_per_hour = 1800.0;
    raw.flows.push_back(f);
  }
  raw.groups.push_back({{"flow-1", "flow-2", "flow-3"}, 6.0, 0.0});
  raw.groups.push_back({{"flow-4", "flow-5", "flow-6"}, 6.0, 0.0});
  return raw;
}

}  // namespace

TEST_SUITE("model") {

TEST_CASE("normalization of a two-group layout") {
  IntersectionSpec spec = normalize_loads(six_flow_two_group());
  REQUIRE(spec.num_groups() == 2);
  REQUIRE(spec.num_flows() == 6);
  CHECK(std::isnan(spec.rho_actual));  // relative input carries no load level
  CHECK(spec.warnings.empty());

  // flows are sorted by descending share within each group
  CHECK(spec.flow(0, 0).id == "flow-3");
  CHECK(spec.flow(0, 1).id == "flow-2");
  CHECK(spec.flow(0, 2).id == "flow-1");
  CHECK(spec.flow(1, 0).id == "flow-6");

  // shares normalize to i/21, service means to 3600/1800 = 2 s
  CHECK(spec.flow(0, 0).rho_hat == doctest::Approx(3.0 / 21.0).epsilon(1e-14));
  CHECK(spec.flow(1, 2).rho_hat == doctest::Approx(4.0 / 21.0).epsilon(1e-14));
  CHECK(spec.flow(0, 0).service_mean == doctest::Approx(2.0));
  CHECK(spec.flow(1, 0).lambda_hat == doctest::Approx(6.0 / 42.0));

  double total = 0.0;
  for (const auto& g : spec.groups)
    for (const auto& f : g.flows) total += f.rho_hat;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("derived quantities of the two-group layout") {
  DerivedQuantities dq = derive_quantities(normalize_loads(six_flow_two_group()));
  // dominant shares 3/21 and 6/21
  CHECK(dq.L == doctest::Approx(3.0 / 7.0).epsilon(1e-14));
  // r1 = 1/3 and 2/3: delta = (1/3*2/3 + 2/3*1/3)/2 = 2/9
  CHECK(dq.delta == doctest::Approx(2.0 / 9.0).epsilon(1e-14));
  // dominant arrival shares (1/14 + 1/7)/L times (Var[B] + E[B]^2) = 4
  CHECK(dq.sigma2_lemma1 == doctest::Approx(4.0).epsilon(1e-13));
  CHECK(dq.sigma2_corollary == doctest::Approx(12.0 / 7.0).epsilon(1e-13));
  CHECK(dq.red_mean == doctest::Approx(12.0));
  CHECK(dq.red_residual == doctest::Approx(6.0));  // deterministic total
  CHECK(dq.lambda_hat_total == doctest::Approx(0.5));
  CHECK(dq.service_mean_any == doctest::Approx(2.0));
  CHECK(dq.service_residual_any == doctest::Approx(2.0));  // exponential
  CHECK(dq.dominant_share(0) == doctest::Approx(1.0 / 7.0));
  CHECK(dq.dominant_share(1) == doctest::Approx(2.0 / 7.0));
}

TEST_CASE("stability verdicts") {
  DerivedQuantities dq = derive_quantities(normalize_loads(six_flow_two_group()));
  StabilityReport s = check_stability(dq, 2.0);
  CHECK(s.verdict == StabilityVerdict::Stable);
  CHECK(s.system_load == doctest::Approx(6.0 / 7.0).epsilon(1e-14));
  CHECK(s.margin == doctest::Approx(1.0 / 7.0).epsilon(1e-13));
  CHECK(check_stability(dq, 7.0 / 3.0).verdict == StabilityVerdict::Boundary);
  CHECK(check_stability(dq, 2.5).verdict == StabilityVerdict::Unstable);
  CHECK(check_stability(dq, 2.5).margin < 0.0);
}

TEST_CASE("scaling to an operating point") {
  DerivedQuantities dq = derive_quantities(normalize_loads(six_flow_two_group()));
  LoadedScenario sc = scale(dq, 2.0);
  CHECK(sc.system_load() == doctest::Approx(6.0 / 7.0));
  // flow-6 is loads[1][0]: lambda = 2 * 6/42 = 2/7
  CHECK(sc.loads[1][0].lambda == doctest::Approx(2.0 / 7.0).epsilon(1e-14));
  CHECK(sc.loads[1][0].rho == doctest::Approx(4.0 / 7.0).epsilon(1e-14));
  // scv survives the refit
  CHECK(sc.loads[1][0].interarrival.scv == doctest::Approx(1.0));
  CHECK(sc.loads[1][0].interarrival.mean == doctest::Approx(3.5).epsilon(1e-14));

  LoadedScenario idle = scale(dq, 0.0);
  CHECK(idle.loads[0][0].lambda == 0.0);
  CHECK_THROWS_AS(scale(dq, -0.1), ValidationError);
}

TEST_CASE("absolute arrival rates record the document load") {
  RawIntersection raw;
  auto add = [&raw](const char* id, double rate, double sat, double hscv) {
    RawFlow f;
    f.id = id;
    f.arrival_rate_per_hour = rate;
    f.saturation_rate_per_hour = sat;
    f.headway_scv = hscv;
    raw.flows.push_back(f);
  };
  // A nine-flow junction: five car flows and four wide bicycle flows.
  add("f1", 280, 1800, 1);
  add("f2", 930, 1900, 1);
  add("f3", 700, 1900, 1);
  add("f4", 120, 1700, 1);
  add("f5", 240, 1700, 1);
  add("f6", 60, 10000, 0);
  add("f7", 60, 10000, 0);
  add("f8", 60, 10000, 0);
  add("f9", 60, 10000, 0);
  raw.groups.push_back({{"f2", "f3", "f8", "f9"}, 2.0, 0.0});
  raw.groups.push_back({{"f4"}, 8.0, 0.0});
  raw.groups.push_back({{"f6", "f7"}, 4.0, 0.0});
  raw.groups.push_back({{"f1", "f5"}, 5.0, 0.0});

  IntersectionSpec spec = normalize_loads(raw);
  CHECK(spec.rho_actual == doctest::Approx(1.2492).epsilon(1e-3));
  // the last group sorts f1 (280/1800) ahead of f5 (240/1700)
  CHECK(spec.flow(3, 0).id == "f1");
  CHECK(spec.flow(3, 0).rho_hat == doctest::Approx(0.1245).epsilon(1e-3));
  CHECK(spec.flow(3, 1).rho_hat == doctest::Approx(0.1130).epsilon(1e-3));
  // scaling to the document's own level reproduces the document rates
  DerivedQuantities dq = derive_quantities(spec);
  LoadedScenario sc = scale(dq, spec.rho_actual);
  CHECK(sc.loads[1][0].lambda == doctest::Approx(120.0 / 3600.0).epsilon(1e-12));
}

TEST_CASE("equal shares keep input order and warn") {
  RawIntersection raw = six_flow_two_group();
  raw.flows[0].relative_load = 3.0;  // flow-1 ties with flow-3
  IntersectionSpec spec = normalize_loads(raw);
  REQUIRE(!spec.warnings.empty());
  CHECK(spec.warnings[0].find("tie") != std::string::npos);
  CHECK(spec.flow(0, 0).id == "flow-1");  // input order wins the tie
  CHECK(spec.flow(0, 1).id == "flow-3");
}

TEST_CASE("input validation") {
  CHECK_THROWS_AS(normalize_loads(RawIntersection{}), ValidationError);

  auto fails = [](void (*mutate)(RawIntersection&)) {
    RawIntersection raw = six_flow_two_group();
    mutate(raw);
    CHECK_THROWS_AS(normalize_loads(raw), ValidationError);
  };
  // duplicate flow id
  fails([](RawIntersection& r) { r.flows[1].id = "flow-1"; });
  // empty flow id
  fails([](RawIntersection& r) { r.flows[0].id = ""; });
  // both load styles at once
  fails([](RawIntersection& r) { r.flows[0].arrival_rate_per_hour = 100.0; });
  // neither load style
  fails([](RawIntersection& r) { r.flows[0].relative_load = std::nan(""); });
  // mixed styles across flows
  fails([](RawIntersection& r) {
    r.flows[0].relative_load = std::nan("");
    r.flows[0].arrival_rate_per_hour = 100.0;
  });
  // nonpositive saturation
  fails([](RawIntersection& r) { r.flows[0].saturation_rate_per_hour = 0.0; });
  // negative variability
  fails([](RawIntersection& r) { r.flows[0].headway_scv = -1.0; });
  fails([](RawIntersection& r) { r.flows[0].interarrival_scv = -0.5; });
  // nonpositive load share
  fails([](RawIntersection& r) { r.flows[0].relative_load = 0.0; });
  // empty group
  fails([](RawIntersection& r) { r.groups[0].flow_ids.clear(); });
  // group names an unknown flow
  fails([](RawIntersection& r) { r.groups[0].flow_ids[0] = "ghost"; });
  // flow in two groups
  fails([](RawIntersection& r) { r.groups[1].flow_ids.push_back("flow-1"); });
  // unassigned flow
  fails([](RawIntersection& r) { r.groups[1].flow_ids.pop_back(); });
  // several groups but no red time anywhere: greens would never switch
  fails([](RawIntersection& r) {
    r.groups[0].all_red_seconds = 0.0;
    r.groups[1].all_red_seconds = 0.0;
  });
  // negative all-red
  fails([](RawIntersection& r) { r.groups[0].all_red_seconds = -2.0; });
}

TEST_CASE("single group with zero red is allowed") {
  RawIntersection raw;
  RawFlow f;
  f.id = "only";
  f.relative_load = 1.0;
  f.saturation_rate_per_hour = 1800.0;
  raw.flows.push_back(f);
  raw.groups.push_back({{"only"}, 0.0, 0.0});
  IntersectionSpec spec = normalize_loads(raw);
  DerivedQuantities dq = derive_quantities(spec);
  CHECK(dq.L == doctest::Approx(1.0));
  CHECK(dq.red_mean == 0.0);
  CHECK(dq.red_residual == 0.0);
}

}  // TEST_SUITE
