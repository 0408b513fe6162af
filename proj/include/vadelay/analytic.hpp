#pragma once

#include "vadelay/model.hpp"

namespace vadelay {

// Variance parameter normalization of the saturated-regime law. The two forms
// circulate in closed-form summaries of this model; Lemma1 is the
// self-consistent default (the mixture law's mean reproduces the known values).
enum class Sigma2Form { Lemma1, Corollary };

// Heavy-traffic mean constant: Theorem3 derives it from the mixture law
// (variance term sigma^2/(4 delta)); CorollaryAsPrinted reproduces a commonly
// quoted closed form with sigma^2/delta and the Corollary sigma^2 instead.
enum class HtFormula { Theorem3, CorollaryAsPrinted };

struct AnalyticOptions {
  Sigma2Form sigma2 = Sigma2Form::Lemma1;
  HtFormula ht_formula = HtFormula::Theorem3;
  ZeroDensityMode g0 = ZeroDensityMode::Whitt;
  // Vehicles reaching an already-cleared flow during its green pass through
  // with zero delay (true), or re-form a queue and get served (false).
  bool stay_empty = true;
};

// Limit law of the scaled delay (1 - L*rho) * W as the load approaches
// saturation: an atom at zero plus U * Gamma(shape, rate) with U uniform(0,1).
struct DelayLaw {
  double p_zero = 0.0;
  double shape = 0.0;
  double rate = 0.0;

  double mean() const { return (1.0 - p_zero) * shape / (2.0 * rate); }
  double cdf(double x) const;
};

// Both throw UnsupportedTopologyError for single-group intersections (the
// saturated regime needs at least two groups sharing the cycle).
DelayLaw ht_delay_law(const DerivedQuantities& dq, int g, int j,
                      const AnalyticOptions& opts = {});
double ht_scaled_mean(const DerivedQuantities& dq, int g, int j,
                      const AnalyticOptions& opts = {});

// Mean delay accurate to o(rho) as rho -> 0. The Poisson variant evaluates
// the full expansion for exponential interarrivals; the general variant is
// the compact two-moment form with the interarrival zero-density correction,
// and reduces to the Poisson one exactly when the correction factor is 1.
double lt_mean_poisson(const DerivedQuantities& dq, double rho, int g, int j);
double lt_mean_general(const DerivedQuantities& dq, double rho, int g, int j,
                       const AnalyticOptions& opts = {});

// 1 if the flow's own group dominates the rest of the cycle (the delay curve
// is then nearly affine in rho and one correction constant suffices), else 2.
int select_order(const DerivedQuantities& dq, int g, int j);

struct InterpolationConstants {
  int order = 2;
  double k0 = 0.0;  // value at rho = 0 (times (1 - L*rho))
  double k1 = 0.0;
  double k2 = 0.0;  // unused for order 1
};

InterpolationConstants interpolation_constants(const DerivedQuantities& dq,
                                               int g, int j, int order,
                                               const AnalyticOptions& opts = {});

// Full-range approximation (K0 + K1 rho [+ K2 rho^2]) / (1 - L rho).
// order 0 selects automatically; throws InstabilityError when L*rho >= 1.
double approx_mean_delay(const DerivedQuantities& dq, double rho, int g, int j,
                         int order = 0, const AnalyticOptions& opts = {});

}  // namespace vadelay
