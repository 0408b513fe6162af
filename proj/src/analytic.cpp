#include "vadelay/analytic.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "vadelay/errors.hpp"
#include "vadelay/mathutil.hpp"

namespace vadelay {

namespace {

void check_flow_index(const DerivedQuantities& dq, int g, int j) {
  if (g < 0 || g >= dq.spec.num_groups())
    throw ValidationError("group index out of range");
  if (j < 0 || j >= static_cast<int>(dq.spec.groups[g].flows.size()))
    throw ValidationError("flow index out of range");
}

void require_multi_group(const DerivedQuantities& dq) {
  if (dq.spec.num_groups() < 2)
    throw UnsupportedTopologyError(
        "saturated-regime quantities need at least two groups sharing the "
        "cycle (single-group intersections have no red-time competition)");
}

double selected_sigma2(const DerivedQuantities& dq, Sigma2Form f) {
  return f == Sigma2Form::Lemma1 ? dq.sigma2_lemma1 : dq.sigma2_corollary;
}

// Group visited p steps after group g in the cyclic service order.
int group_at_offset(const DerivedQuantities& dq, int g, int p) {
  int m = dq.spec.num_groups();
  return (g + p) % m;
}

double group_rho_hat_total(const GroupSpec& g) {
  double s = 0.0;
  for (const auto& f : g.flows) s += f.rho_hat;
  return s;
}

}  // namespace

double DelayLaw::cdf(double x) const {
  if (x < 0.0) return 0.0;
  if (x == 0.0) return p_zero;
  return p_zero + (1.0 - p_zero) * uniform_gamma_cdf(shape, rate, x);
}

DelayLaw ht_delay_law(const DerivedQuantities& dq, int g, int j,
                      const AnalyticOptions& opts) {
  check_flow_index(dq, g, j);
  require_multi_group(dq);
  double s2 = selected_sigma2(dq, opts.sigma2);
  double r1 = dq.dominant_share(g) / dq.L;
  double rj = dq.spec.flow(g, j).rho_hat / dq.L;
  DelayLaw law;
  law.p_zero = (dq.dominant_share(g) - dq.spec.flow(g, j).rho_hat) /
               (dq.L - dq.spec.flow(g, j).rho_hat);
  law.shape = 2.0 * dq.red_mean * dq.delta / s2 + 1.0;
  law.rate = 2.0 * dq.delta / (s2 * (1.0 - r1));
  (void)rj;
  return law;
}

double ht_scaled_mean(const DerivedQuantities& dq, int g, int j,
                      const AnalyticOptions& opts) {
  check_flow_index(dq, g, j);
  require_multi_group(dq);
  double r1 = dq.dominant_share(g) / dq.L;
  double rj = dq.spec.flow(g, j).rho_hat / dq.L;
  double factor = (1.0 - r1) * (1.0 - r1) / (1.0 - rj);
  if (opts.ht_formula == HtFormula::Theorem3) {
    double s2 = selected_sigma2(dq, opts.sigma2);
    return factor * (dq.red_mean / 2.0 + s2 / (4.0 * dq.delta));
  }
  // literal transcription of the closed-form variant: sigma^2/delta with the
  // Corollary normalization
  return factor * (dq.red_mean / 2.0 + dq.sigma2_corollary / dq.delta);
}

double lt_mean_poisson(const DerivedQuantities& dq, double rho, int g, int j) {
  check_flow_index(dq, g, j);
  const auto& groups = dq.spec.groups;
  const int m_count = dq.spec.num_groups();
  const FlowSpec& target = dq.spec.flow(g, j);
  const double b_j = target.service_mean;
  const double bres_j = target.headway.residual_mean();
  const double rho_gj = rho * target.rho_hat;

  // own-flow term: arrive while an own-queue vehicle is crossing
  double w = rho_gj * (bres_j + b_j);

  // per-offset group data in service order starting at g
  std::vector<double> red_mean(m_count), red_res(m_count), red_var(m_count),
      grp_rho(m_count);
  for (int p = 0; p < m_count; ++p) {
    const GroupSpec& grp = groups[group_at_offset(dq, g, p)];
    red_mean[p] = grp.all_red_mean;
    red_res[p] = grp.all_red.residual_mean();
    red_var[p] = grp.all_red.variance();
    grp_rho[p] = rho * group_rho_hat_total(grp);
  }
  // reds from offset p through the one just before g comes up again
  std::vector<double> red_from(m_count + 1, 0.0);
  for (int p = m_count - 1; p >= 0; --p)
    red_from[p] = red_from[p + 1] + red_mean[p];
  // loads of the groups served after offset p but before g
  std::vector<double> load_after(m_count + 1, 0.0);
  for (int p = m_count - 1; p >= 0; --p)
    load_after[p] = load_after[p + 1] + grp_rho[p];

  // arrivals during another group's green: its crossing vehicle's residual,
  // the reds separating that group from ours, and our own crossing
  for (int p = 1; p < m_count; ++p) {
    const GroupSpec& grp = groups[group_at_offset(dq, g, p)];
    for (const auto& f : grp.flows) {
      double rho_mk = rho * f.rho_hat;
      w += rho_mk * (f.headway.residual_mean() + red_from[p] + b_j);
    }
  }

  // arrivals during one of the all-red periods
  if (dq.red_mean > 0.0) {
    double red_before = 0.0;
    for (int p = 0; p < m_count; ++p) {
      double s_m = load_after[p + 1];
      double inner = red_res[p] * (1.0 - rho + 2.0 * s_m + rho_gj) +
                     red_before * (s_m + rho_gj) +
                     red_from[p + 1] * (1.0 - rho + s_m) +
                     (1.0 - rho) * b_j;
      w += red_mean[p] / dq.red_mean * inner;
      red_before += red_mean[p];
    }
  }
  return w;
}

double lt_mean_general(const DerivedQuantities& dq, double rho, int g, int j,
                       const AnalyticOptions& opts) {
  check_flow_index(dq, g, j);
  const int m_count = dq.spec.num_groups();
  const FlowSpec& target = dq.spec.flow(g, j);
  const double b_j = target.service_mean;
  const double bres_j = target.headway.residual_mean();
  const double rho_gj = rho * target.rho_hat;

  FittedDist interarrival =
      fit_distribution(1.0 / target.lambda_hat, target.interarrival_scv);
  double gf = zero_density_factor(interarrival, opts.g0);

  double w = rho_gj * (gf - 1.0) * bres_j;
  w += rho * dq.service_residual_any;
  w += b_j;
  for (size_t k = 0; k < dq.spec.groups[g].flows.size(); ++k) {
    if (static_cast<int>(k) == j) continue;
    const FlowSpec& other = dq.spec.groups[g].flows[k];
    double rho_gk = rho * other.rho_hat;
    // same-group arrivals: under stay-empty they pass with zero delay, so
    // both their residual and our own-crossing share drop out; under refill
    // the own crossing E[B_{g,j}] stays.
    w -= rho_gk * other.headway.residual_mean();
    if (opts.stay_empty) w -= rho_gk * b_j;
  }
  double rho_g_total = rho * group_rho_hat_total(dq.spec.groups[g]);
  w += (1.0 - rho + rho_gj) * dq.red_residual;
  w += (rho - rho_g_total) * dq.red_mean;
  if (dq.red_mean > 0.0) {
    double acc = 0.0;
    double load_after = 0.0;  // computed backwards over offsets
    std::vector<double> grp_rho(m_count), red_var(m_count);
    for (int p = 0; p < m_count; ++p) {
      const GroupSpec& grp = dq.spec.groups[group_at_offset(dq, g, p)];
      grp_rho[p] = rho * group_rho_hat_total(grp);
      red_var[p] = grp.all_red.variance();
    }
    for (int p = m_count - 1; p >= 0; --p) {
      acc += load_after * red_var[p];
      load_after += grp_rho[p];
    }
    w += acc / dq.red_mean;
  }
  return w;
}

int select_order(const DerivedQuantities& dq, int g, int j) {
  check_flow_index(dq, g, j);
  double own_group = group_rho_hat_total(dq.spec.groups[g]);
  double others = 1.0 - own_group;
  double siblings = own_group - dq.spec.flow(g, j).rho_hat;
  // strict: a tie falls through to the safer quadratic form
  return (others - siblings < 0.0) ? 1 : 2;
}

InterpolationConstants interpolation_constants(const DerivedQuantities& dq,
                                               int g, int j, int order,
                                               const AnalyticOptions& opts) {
  check_flow_index(dq, g, j);
  if (order != 1 && order != 2)
    throw ValidationError("interpolation order must be 1 or 2");
  InterpolationConstants c;
  c.order = order;
  c.k0 = dq.red_residual + dq.spec.flow(g, j).service_mean;
  double ht = ht_scaled_mean(dq, g, j, opts);
  if (order == 1) {
    c.k1 = dq.L * (ht - c.k0);
    return c;
  }
  // the general light-traffic mean is affine in rho, so lt(1) - lt(0) is its
  // exact derivative at 0
  double slope = lt_mean_general(dq, 1.0, g, j, opts) -
                 lt_mean_general(dq, 0.0, g, j, opts);
  c.k1 = slope - dq.L * c.k0;
  c.k2 = dq.L * dq.L * (ht - c.k0) - dq.L * c.k1;
  return c;
}

double approx_mean_delay(const DerivedQuantities& dq, double rho, int g, int j,
                         int order, const AnalyticOptions& opts) {
  check_flow_index(dq, g, j);
  if (dq.L * rho >= 1.0)
    throw InstabilityError(
        "unstable load: L*rho = " + std::to_string(dq.L * rho) +
        " is not below 1");
  if (order == 0) order = select_order(dq, g, j);
  InterpolationConstants c = interpolation_constants(dq, g, j, order, opts);
  double numer = c.k0 + c.k1 * rho;
  if (order == 2) numer += c.k2 * rho * rho;
  return numer / (1.0 - dq.L * rho);
}

}  // namespace vadelay
