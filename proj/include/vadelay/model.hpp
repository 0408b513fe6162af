#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "vadelay/distributions.hpp"

namespace vadelay {

// ---------------------------------------------------------------------------
// Raw input as it appears in a config document. Rates are per hour (traffic
// engineering convention); everything internal is seconds.
// ---------------------------------------------------------------------------
struct RawFlow {
  std::string id;
  // Exactly one of the two load styles is used, consistently across all flows:
  // an absolute arrival rate, or a relative load share.
  double arrival_rate_per_hour = std::nan("");
  double relative_load = std::nan("");
  double saturation_rate_per_hour = 0.0;
  double headway_scv = 1.0;
  double interarrival_scv = 1.0;
};

struct RawGroup {
  std::vector<std::string> flow_ids;
  double all_red_seconds = 0.0;
  double all_red_scv = 0.0;
};

struct RawIntersection {
  std::vector<RawFlow> flows;
  std::vector<RawGroup> groups;
};

// ---------------------------------------------------------------------------
// Normalized model. rho_hat sums to 1 over all flows; the actual operating
// point is chosen later by scaling with a load factor rho.
// ---------------------------------------------------------------------------
struct FlowSpec {
  std::string id;
  double rho_hat = 0.0;       // share of the total load
  double service_mean = 0.0;  // E[B] = departure headway mean, seconds
  double headway_scv = 1.0;
  double interarrival_scv = 1.0;
  double lambda_hat = 0.0;    // rho_hat / service_mean: arrival rate at rho = 1
  FittedDist headway;
};

struct GroupSpec {
  std::vector<FlowSpec> flows;  // descending rho_hat; flows[0] is dominant
  double all_red_mean = 0.0;    // seconds
  double all_red_scv = 0.0;
  FittedDist all_red;
};

struct IntersectionSpec {
  std::vector<GroupSpec> groups;
  // Sum of arrival/saturation ratios when absolute rates were given (the load
  // the document describes); NaN when the input was relative shares.
  double rho_actual = std::nan("");
  std::vector<std::string> warnings;

  int num_groups() const { return static_cast<int>(groups.size()); }
  int num_flows() const;
  const FlowSpec& flow(int g, int j) const { return groups[g].flows[j]; }
};

// Validates and normalizes raw input: resolves group membership, converts
// rates to seconds, sorts each group by descending load share (ties keep
// input order and add a warning), and fits headway / all-red distributions.
// Throws ValidationError on bad input.
IntersectionSpec normalize_loads(const RawIntersection& raw);

// ---------------------------------------------------------------------------
// Quantities shared by the delay formulas. All derived once per intersection.
// ---------------------------------------------------------------------------
struct DerivedQuantities {
  IntersectionSpec spec;

  double L = 0.0;      // sum over groups of the dominant load share
  double delta = 0.0;  // sum_g (r1/L)(1 - r1/L)/2 with r1 the dominant share

  // Variance parameter of the heavy-traffic law, in its two circulating
  // normalizations (they differ by a factor L).
  double sigma2_lemma1 = 0.0;
  double sigma2_corollary = 0.0;

  double red_mean = 0.0;      // E[R]: total all-red time per cycle
  double red_second = 0.0;    // E[R^2]
  double red_residual = 0.0;  // E[R^2]/(2 E[R]); 0 when there is no red time

  double lambda_hat_total = 0.0;
  double service_mean_any = 0.0;      // E[B] of an arbitrary vehicle
  double service_residual_any = 0.0;  // E[B^res] of an arbitrary vehicle

  double dominant_share(int g) const { return spec.groups[g].flows[0].rho_hat; }
};

DerivedQuantities derive_quantities(const IntersectionSpec& spec);

// ---------------------------------------------------------------------------
// Stability: the intersection is stable iff L * rho < 1.
// ---------------------------------------------------------------------------
enum class StabilityVerdict { Stable, Boundary, Unstable };

struct StabilityReport {
  StabilityVerdict verdict;
  double system_load;  // L * rho
  double margin;       // 1 - L * rho
};

StabilityReport check_stability(const DerivedQuantities& dq, double rho);

// ---------------------------------------------------------------------------
// A concrete operating point: per-flow arrival rates lambda_i = rho *
// lambda_hat_i with interarrival laws refit to the scaled mean at unchanged
// scv. rho = 0 is allowed (arrivals disabled) for calibration runs.
// ---------------------------------------------------------------------------
struct LoadedFlow {
  double lambda = 0.0;  // arrivals per second
  double rho = 0.0;     // lambda * E[B]
  FittedDist interarrival;
};

struct LoadedScenario {
  DerivedQuantities dq;
  double rho = 0.0;
  std::vector<std::vector<LoadedFlow>> loads;  // [group][flow]

  double system_load() const { return dq.L * rho; }
};

LoadedScenario scale(const DerivedQuantities& dq, double rho);

}  // namespace vadelay
