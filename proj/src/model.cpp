#include "vadelay/model.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>

#include "vadelay/errors.hpp"

namespace vadelay {

int IntersectionSpec::num_flows() const {
  int n = 0;
  for (const auto& g : groups) n += static_cast<int>(g.flows.size());
  return n;
}

IntersectionSpec normalize_loads(const RawIntersection& raw) {
  if (raw.flows.empty()) throw ValidationError("no flows given");
  if (raw.groups.empty()) throw ValidationError("no groups given");

  std::map<std::string, const RawFlow*> by_id;
  for (const auto& f : raw.flows) {
    if (f.id.empty()) throw ValidationError("flow with empty id");
    if (!by_id.emplace(f.id, &f).second)
      throw ValidationError("duplicate flow id '" + f.id + "'");
  }

  // one consistent load style across all flows
  bool has_rate = !std::isnan(raw.flows.front().arrival_rate_per_hour);
  for (const auto& f : raw.flows) {
    bool r = !std::isnan(f.arrival_rate_per_hour);
    bool s = !std::isnan(f.relative_load);
    if (r == s)
      throw ValidationError("flow '" + f.id +
                            "': give exactly one of arrival_rate_per_hour "
                            "and relative_load");
    if (r != has_rate)
      throw ValidationError(
          "mix of arrival_rate_per_hour and relative_load across flows");
  }

  // raw load of each flow: arrival/saturation ratio, or the relative share
  std::map<std::string, double> raw_load;
  double total = 0.0;
  for (const auto& f : raw.flows) {
    if (!(f.saturation_rate_per_hour > 0.0))
      throw ValidationError("flow '" + f.id + "': saturation rate must be > 0");
    if (!(f.headway_scv >= 0.0))
      throw ValidationError("flow '" + f.id + "': headway_scv must be >= 0");
    if (!(f.interarrival_scv >= 0.0))
      throw ValidationError("flow '" + f.id +
                            "': interarrival_scv must be >= 0");
    double v = has_rate ? f.arrival_rate_per_hour / f.saturation_rate_per_hour
                        : f.relative_load;
    if (!(v > 0.0))
      throw ValidationError("flow '" + f.id + "': load share must be > 0");
    raw_load[f.id] = v;
    total += v;
  }

  std::set<std::string> seen;
  IntersectionSpec spec;
  if (has_rate) spec.rho_actual = total;

  for (size_t gi = 0; gi < raw.groups.size(); ++gi) {
    const RawGroup& rg = raw.groups[gi];
    if (rg.flow_ids.empty())
      throw ValidationError("group " + std::to_string(gi + 1) + " is empty");
    if (!(rg.all_red_seconds >= 0.0) || !(rg.all_red_scv >= 0.0))
      throw ValidationError("group " + std::to_string(gi + 1) +
                            ": all-red mean and scv must be >= 0");
    GroupSpec group;
    group.all_red_mean = rg.all_red_seconds;
    group.all_red_scv = rg.all_red_scv;
    group.all_red = fit_distribution(rg.all_red_seconds, rg.all_red_scv);
    for (const auto& id : rg.flow_ids) {
      auto it = by_id.find(id);
      if (it == by_id.end())
        throw ValidationError("group references unknown flow '" + id + "'");
      if (!seen.insert(id).second)
        throw ValidationError("flow '" + id + "' appears in two groups");
      const RawFlow& f = *it->second;
      FlowSpec fs;
      fs.id = f.id;
      fs.rho_hat = raw_load[id] / total;
      fs.service_mean = 3600.0 / f.saturation_rate_per_hour;
      fs.headway_scv = f.headway_scv;
      fs.interarrival_scv = f.interarrival_scv;
      fs.lambda_hat = fs.rho_hat / fs.service_mean;
      fs.headway = fit_distribution(fs.service_mean, fs.headway_scv);
      group.flows.push_back(std::move(fs));
    }
    // dominant flow first; exact ties keep input order (lowest position wins)
    std::stable_sort(group.flows.begin(), group.flows.end(),
                     [](const FlowSpec& a, const FlowSpec& b) {
                       return a.rho_hat > b.rho_hat;
                     });
    if (group.flows.size() > 1 &&
        group.flows[0].rho_hat == group.flows[1].rho_hat)
      spec.warnings.push_back("group " + std::to_string(gi + 1) +
                              ": tie for the dominant flow; picking '" +
                              group.flows[0].id + "'");
    spec.groups.push_back(std::move(group));
  }
  if (seen.size() != raw.flows.size())
    throw ValidationError("some flows are not assigned to any group");

  bool any_red = false;
  for (const auto& g : spec.groups)
    if (g.all_red_mean > 0.0) any_red = true;
  if (!any_red && spec.groups.size() > 1)
    throw ValidationError(
        "multi-group intersections need at least one positive all-red time");
  return spec;
}

DerivedQuantities derive_quantities(const IntersectionSpec& spec) {
  DerivedQuantities dq;
  dq.spec = spec;

  for (const auto& g : spec.groups) dq.L += g.flows[0].rho_hat;

  double red_var = 0.0;
  for (const auto& g : spec.groups) {
    double r1 = g.flows[0].rho_hat / dq.L;
    dq.delta += r1 * (1.0 - r1) / 2.0;

    const FlowSpec& dom = g.flows[0];
    double var_b = dom.headway.variance();
    // rho_hat^2 Var[interarrival at rho=1] = scv_A * E[B]^2
    double var_a_term =
        dom.interarrival_scv * dom.service_mean * dom.service_mean;
    dq.sigma2_lemma1 += dom.lambda_hat / dq.L * (var_b + var_a_term);

    dq.red_mean += g.all_red_mean;
    red_var += g.all_red.variance();

    for (const auto& f : g.flows) {
      dq.lambda_hat_total += f.lambda_hat;
      dq.service_residual_any += f.lambda_hat * f.headway.second_moment() / 2.0;
    }
  }
  dq.sigma2_corollary = dq.L * dq.sigma2_lemma1;
  dq.red_second = red_var + dq.red_mean * dq.red_mean;
  dq.red_residual =
      dq.red_mean > 0.0 ? dq.red_second / (2.0 * dq.red_mean) : 0.0;
  dq.service_mean_any = 1.0 / dq.lambda_hat_total;
  return dq;
}

StabilityReport check_stability(const DerivedQuantities& dq, double rho) {
  if (!(rho >= 0.0))
    throw ValidationError("load factor rho must be nonnegative");
  StabilityReport r;
  r.system_load = dq.L * rho;
  r.margin = 1.0 - r.system_load;
  if (std::fabs(r.margin) <= 1e-12)
    r.verdict = StabilityVerdict::Boundary;
  else if (r.margin > 0.0)
    r.verdict = StabilityVerdict::Stable;
  else
    r.verdict = StabilityVerdict::Unstable;
  return r;
}

LoadedScenario scale(const DerivedQuantities& dq, double rho) {
  if (!(rho >= 0.0) || !std::isfinite(rho))
    throw ValidationError("load factor rho must be finite and nonnegative");
  LoadedScenario sc;
  sc.dq = dq;
  sc.rho = rho;
  sc.loads.resize(dq.spec.groups.size());
  for (size_t g = 0; g < dq.spec.groups.size(); ++g) {
    for (const auto& f : dq.spec.groups[g].flows) {
      LoadedFlow lf;
      lf.lambda = rho * f.lambda_hat;
      lf.rho = rho * f.rho_hat;
      if (lf.lambda > 0.0)
        lf.interarrival = fit_distribution(1.0 / lf.lambda, f.interarrival_scv);
      sc.loads[g].push_back(lf);
    }
  }
  return sc;
}

}  // namespace vadelay
