#pragma once

#include <cstdint>
#include <vector>

#include "vadelay/model.hpp"

namespace vadelay {

struct SimConfig {
  std::uint64_t root_seed = 1;
  int replications = 10;
  long cycles = 100000;  // measured (post-warmup) cycles per replication
  long warmup = -1;      // warmup cycles; -1 picks max(200, cycles/10)
  bool stay_empty = true;
  int threads = 1;  // > 1 distributes replications over OpenMP threads
  bool allow_unstable = false;  // permit L*rho >= 1 for finite-horizon runs
  double horizon = 0.0;  // simulated seconds; > 0 replaces the cycle stop
  // When > 0, replications keep running (in whole cycles) until every flow
  // has at least ceil(min_samples_per_flow / replications) post-warmup
  // samples. Only matters at very low loads where cycles are short.
  long min_samples_per_flow = 0;
  // Optional per-flow histogram of (1 - L*rho) * delay on [0, cdf_xmax].
  bool collect_cdf = false;
  int cdf_bins = 4096;
  double cdf_xmax = 0.0;
};

struct FlowStats {
  double mean_delay = 0.0;     // grand mean of replication means, seconds
  double ci_half_width = 0.0;  // 95% Student-t over replication means
  long long samples = 0;       // post-warmup delays (departures+pass-throughs)
  // Of its group's greens that served anyone, the share whose last departure
  // was from this flow.
  double p_last_departure = 0.0;
  double final_queue_mean = 0.0;  // vehicles left at the end, mean over reps
  std::vector<double> rep_means;
  // histogram, pooled over replications (samples above xmax land in the last
  // bin; exact zeros counted separately):
  std::vector<long long> cdf_counts;
  long long cdf_zeros = 0;
  long long cdf_total = 0;
};

struct GroupStats {
  double mean_green = 0.0;        // seconds, zero-length greens included
  double zero_green_share = 0.0;  // greens that served nobody
};

struct SimResult {
  double rho = 0.0;
  double system_load = 0.0;  // L * rho
  std::vector<std::vector<FlowStats>> flows;  // [group][flow]
  std::vector<GroupStats> groups;
  double mean_cycle = 0.0;
  double sim_time_per_rep = 0.0;  // simulated seconds, mean over replications
  // whole-run conservation (warmup included), summed over replications
  long long arrivals = 0;
  long long departures = 0;
  long long pass_throughs = 0;
  long long left_in_queue = 0;
  bool conservation_ok = false;
};

// Event-driven simulation of the signalized intersection under exhaustive
// control. Deterministic for a fixed config: replication r draws from streams
// keyed by (root_seed, r, flow), so results are bit-identical between the
// serial and the OpenMP path and across reruns.
SimResult simulate(const LoadedScenario& sc, const SimConfig& cfg);

}  // namespace vadelay
