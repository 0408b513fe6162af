#include "vadelay/ctmc.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include "vadelay/errors.hpp"

namespace vadelay {

namespace {

constexpr long long kRawLimit = 20'000'000;  // decode-table entries
constexpr long long kDirectSolveLimit = 200'000;

struct Layout {
  int n = 0, m = 0, cap = 0;
  bool stay_empty = true;
  bool idle_green = false;  // single group without all-red: green may idle
  std::vector<int> group_of;
  std::vector<std::vector<int>> members;
  std::vector<double> lambda, mu;
  std::vector<double> red_rate;  // 1/E[R_g]; 0 when the group has no red
  std::vector<int> red_phase;    // phase id of red(g), -1 when absent
  int n_phases = 0;
  long long q_count = 0;  // (cap+1)^n
  long long raw_count = 0;

  bool is_green(int phase) const { return phase < m; }
  int green_group(int phase) const { return phase; }
  int red_group(int phase) const {
    for (int g = 0; g < m; ++g)
      if (red_phase[g] == phase) return g;
    return -1;
  }

  void decode(long long raw, int& phase, std::vector<int>& q) const {
    phase = static_cast<int>(raw / q_count);
    long long rest = raw % q_count;
    for (int i = 0; i < n; ++i) {
      q[i] = static_cast<int>(rest % (cap + 1));
      rest /= (cap + 1);
    }
  }
  long long encode(int phase, const std::vector<int>& q) const {
    long long idx = 0;
    for (int i = n - 1; i >= 0; --i) idx = idx * (cap + 1) + q[i];
    return static_cast<long long>(phase) * q_count + idx;
  }
  int group_sum(int g, const std::vector<int>& q) const {
    int s = 0;
    for (int f : members[g]) s += q[f];
    return s;
  }
  // Phase that actually starts when the cycle position reaches green(from):
  // empty greens have zero length, missing reds are skipped.
  int next_phase(int from, const std::vector<int>& q) const {
    for (int off = 0; off < m; ++off) {
      int h = (from + off) % m;
      if (group_sum(h, q) > 0) return h;
      if (red_rate[h] > 0.0) return red_phase[h];
    }
    return 0;  // everything empty, no red anywhere: the idle green
  }
  int phase_after_green(int g, const std::vector<int>& q) const {
    if (red_rate[g] > 0.0) return red_phase[g];
    return next_phase((g + 1) % m, q);
  }
};

Layout build_layout(const LoadedScenario& sc, const CtmcSpec& spec) {
  Layout L;
  L.cap = spec.cap;
  L.stay_empty = spec.stay_empty;
  L.m = sc.dq.spec.num_groups();
  double total_red = 0.0;
  for (int g = 0; g < L.m; ++g) {
    const GroupSpec& grp = sc.dq.spec.groups[g];
    std::vector<int> mem;
    for (size_t j = 0; j < grp.flows.size(); ++j) {
      mem.push_back(L.n);
      L.group_of.push_back(g);
      const LoadedFlow& lf = sc.loads[g][j];
      if (lf.lambda <= 0.0 || lf.interarrival.family != DistFamily::Exponential)
        throw UnsupportedDistributionError(
            "exact chain needs exponential interarrivals on every flow");
      if (grp.flows[j].headway.family != DistFamily::Exponential)
        throw UnsupportedDistributionError(
            "exact chain needs exponential headways on every flow");
      L.lambda.push_back(lf.lambda);
      L.mu.push_back(1.0 / grp.flows[j].service_mean);
      ++L.n;
    }
    L.members.push_back(std::move(mem));
    if (grp.all_red_mean > 0.0 &&
        grp.all_red.family != DistFamily::Exponential)
      throw UnsupportedDistributionError(
          "exact chain needs exponential (or zero) all-red times");
    L.red_rate.push_back(grp.all_red_mean > 0.0 ? 1.0 / grp.all_red_mean
                                                : 0.0);
    total_red += grp.all_red_mean;
  }
  L.idle_green = (L.m == 1 && total_red == 0.0);
  if (L.idle_green && spec.stay_empty)
    throw ValidationError(
        "stay-empty control without any all-red time never serves a "
        "re-formed queue; use refill mode");
  L.n_phases = L.m;
  L.red_phase.assign(L.m, -1);
  for (int g = 0; g < L.m; ++g)
    if (L.red_rate[g] > 0.0) L.red_phase[g] = L.n_phases++;
  L.q_count = 1;
  for (int i = 0; i < L.n; ++i) {
    if (L.q_count > kRawLimit / (L.cap + 1) / L.n_phases)
      throw StateSpaceTooLargeError("truncated chain too large; lower cap");
    L.q_count *= (L.cap + 1);
  }
  L.raw_count = L.q_count * L.n_phases;
  if (L.raw_count > kRawLimit)
    throw StateSpaceTooLargeError("truncated chain too large; lower cap");
  return L;
}

// Enumerate the out-transitions of one state. `tagged` < 0 walks the plain
// system chain; otherwise flow `tagged` is frozen (no new arrivals), its
// queue digit counts the tagged vehicle and those ahead of it, and the final
// service of that digit absorbs. Emits (rate, raw_target); raw_target < 0
// encodes absorption.
template <typename Emit>
void for_each_transition(const Layout& L, int phase, std::vector<int>& q,
                         int tagged, Emit&& emit) {
  long long self = L.encode(phase, q);
  auto send = [&](double rate, long long target) {
    if (target != self) emit(rate, target);
  };
  // arrivals
  for (int k = 0; k < L.n; ++k) {
    if (k == tagged || q[k] == L.cap) continue;
    if (L.is_green(phase) && L.group_of[k] == phase && q[k] == 0 &&
        L.stay_empty)
      continue;  // served flow already cleared: vehicles pass through
    ++q[k];
    send(L.lambda[k], L.encode(phase, q));
    --q[k];
  }
  if (L.is_green(phase)) {
    int g = L.green_group(phase);
    for (int i : L.members[g]) {
      if (q[i] == 0) continue;
      if (i == tagged && q[i] == 1) {
        emit(L.mu[i], -1);  // tagged vehicle departs
        continue;
      }
      --q[i];
      int target_phase = phase;
      if (!L.idle_green && L.group_sum(g, q) == 0)
        target_phase = L.phase_after_green(g, q);
      send(L.mu[i], L.encode(target_phase, q));
      ++q[i];
    }
  } else {
    int g = L.red_group(phase);
    send(L.red_rate[g], L.encode(L.next_phase((g + 1) % L.m, q), q));
  }
}

bool state_valid(const Layout& L, int phase, const std::vector<int>& q,
                 int tagged) {
  if (tagged >= 0 && q[tagged] == 0) return false;
  if (L.is_green(phase) && !L.idle_green)
    return L.group_sum(L.green_group(phase), q) > 0;
  return true;
}

// Compact index map over the raw product space; -1 marks invalid states.
long long build_index(const Layout& L, int tagged, std::vector<int32_t>& comp,
                      std::vector<long long>& states) {
  comp.assign(L.raw_count, -1);
  states.clear();
  std::vector<int> q(L.n);
  int phase;
  for (long long raw = 0; raw < L.raw_count; ++raw) {
    L.decode(raw, phase, q);
    if (!state_valid(L, phase, q, tagged)) continue;
    comp[raw] = static_cast<int32_t>(states.size());
    states.push_back(raw);
  }
  return static_cast<long long>(states.size());
}

using SpMat = Eigen::SparseMatrix<double>;

Eigen::VectorXd solve_sparse(SpMat& A, const Eigen::VectorXd& b) {
  if (A.rows() <= kDirectSolveLimit) {
    Eigen::SparseLU<SpMat> lu;
    lu.compute(A);
    if (lu.info() != Eigen::Success)
      throw std::runtime_error("sparse factorization failed");
    return lu.solve(b);
  }
  Eigen::BiCGSTAB<SpMat, Eigen::IncompleteLUT<double>> it;
  it.setTolerance(1e-13);
  it.setMaxIterations(20000);
  it.compute(A);
  Eigen::VectorXd x = it.solve(b);
  if (it.info() != Eigen::Success)
    throw std::runtime_error("iterative stationary solve did not converge");
  return x;
}

}  // namespace

CtmcResult ctmc_mean_delays(const LoadedScenario& sc, const CtmcSpec& spec) {
  if (spec.cap < 1) throw ValidationError("queue cap must be at least 1");
  if (!(sc.system_load() > 0.0))
    throw ValidationError("exact chain needs a positive load");
  if (sc.system_load() >= 1.0)
    throw InstabilityError("unstable load: L*rho = " +
                           std::to_string(sc.system_load()));
  Layout L = build_layout(sc, spec);

  std::vector<int32_t> comp;
  std::vector<long long> states;
  long long S = build_index(L, -1, comp, states);
  if (S > spec.max_states)
    throw StateSpaceTooLargeError("truncated chain has " + std::to_string(S) +
                                  " states; raise max_states or lower cap");

  // Stationary distribution: pi Q = 0 with the first balance equation
  // replaced by sum(pi) = 1.
  std::vector<Eigen::Triplet<double>> trips;
  std::vector<int> q(L.n);
  int phase;
  for (long long s = 0; s < S; ++s) {
    L.decode(states[s], phase, q);
    for_each_transition(L, phase, q, -1, [&](double rate, long long raw_u) {
      long long u = comp[raw_u];
      if (u != 0) trips.emplace_back(static_cast<int>(u),
                                     static_cast<int>(s), rate);
      if (s != 0) trips.emplace_back(static_cast<int>(s),
                                     static_cast<int>(s), -rate);
    });
  }
  for (long long s = 0; s < S; ++s)
    trips.emplace_back(0, static_cast<int>(s), 1.0);
  SpMat A(S, S);
  A.setFromTriplets(trips.begin(), trips.end());
  trips.clear();
  trips.shrink_to_fit();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(S);
  b[0] = 1.0;
  Eigen::VectorXd pi = solve_sparse(A, b);

  // Residual of the untouched balance equations, then clean and renormalize.
  Eigen::VectorXd y = Eigen::VectorXd::Zero(S);
  for (long long s = 0; s < S; ++s) {
    L.decode(states[s], phase, q);
    for_each_transition(L, phase, q, -1, [&](double rate, long long raw_u) {
      y[comp[raw_u]] += pi[s] * rate;
      y[s] -= pi[s] * rate;
    });
  }
  double residual = y.lpNorm<Eigen::Infinity>();
  for (long long s = 0; s < S; ++s) pi[s] = std::max(pi[s], 0.0);
  pi /= pi.sum();

  CtmcResult res;
  res.base_states = S;
  res.residual = residual;

  // Per flow: expected time-to-departure h solved on the tagged chain, then
  // averaged over what an admitted arrival sees (PASTA).
  std::vector<int32_t> comp_t;
  std::vector<long long> states_t;
  int flow_idx = 0;
  res.flows.resize(L.m);
  for (int g = 0; g < L.m; ++g) {
    for (size_t j = 0; j < sc.dq.spec.groups[g].flows.size(); ++j, ++flow_idx) {
      long long St = build_index(L, flow_idx, comp_t, states_t);
      std::vector<Eigen::Triplet<double>> tt;
      for (long long s = 0; s < St; ++s) {
        L.decode(states_t[s], phase, q);
        double total = 0.0;
        for_each_transition(L, phase, q, flow_idx,
                            [&](double rate, long long raw_u) {
                              total += rate;
                              if (raw_u >= 0)
                                tt.emplace_back(static_cast<int>(s),
                                                static_cast<int>(comp_t[raw_u]),
                                                rate);
                            });
        tt.emplace_back(static_cast<int>(s), static_cast<int>(s), -total);
      }
      SpMat At(St, St);
      At.setFromTriplets(tt.begin(), tt.end());
      Eigen::VectorXd h = solve_sparse(At, Eigen::VectorXd::Constant(St, -1.0));

      double num = 0.0, den = 0.0;
      for (long long s = 0; s < S; ++s) {
        L.decode(states[s], phase, q);
        bool pass = L.stay_empty && L.is_green(phase) &&
                    L.green_group(phase) == g && q[flow_idx] == 0;
        if (pass) {
          den += pi[s];  // drives through at zero delay
          continue;
        }
        if (q[flow_idx] == L.cap) continue;  // blocked by the truncation
        ++q[flow_idx];
        long long raw_t = L.encode(phase, q);
        --q[flow_idx];
        num += pi[s] * h[comp_t[raw_t]];
        den += pi[s];
      }
      CtmcFlowResult fr;
      fr.admitted_share = den;
      fr.mean_delay = den > 0.0 ? num / den : 0.0;
      res.flows[g].push_back(fr);
    }
  }
  return res;
}

}  // namespace vadelay
