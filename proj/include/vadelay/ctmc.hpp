#pragma once

#include <vector>

#include "vadelay/model.hpp"

namespace vadelay {

// Continuous-time Markov-chain oracle for fully exponential instances
// (exponential interarrivals and headways; all-red times exponential or
// zero). Queues are truncated at `cap` vehicles per flow, so results carry a
// truncation error that vanishes as cap grows; `admitted_share` reports the
// stationary probability that an arriving vehicle is not blocked by the cap
// and is a quick gauge of how hard the truncation bites.
struct CtmcSpec {
  int cap = 6;
  bool stay_empty = true;
  long long max_states = 500000;  // refuse instances beyond this many states
};

struct CtmcFlowResult {
  double mean_delay = 0.0;     // arrival-to-departure time, admitted vehicles
  double admitted_share = 1.0;
};

struct CtmcResult {
  std::vector<std::vector<CtmcFlowResult>> flows;  // [group][position]
  long long base_states = 0;
  double residual = 0.0;  // max |pi Q| after the stationary solve
};

// Exact (up to truncation) per-flow mean delays via the stationary
// distribution plus, per flow, a tagged-vehicle absorption time. Throws
// UnsupportedDistributionError for non-exponential ingredients,
// InstabilityError when L*rho >= 1, StateSpaceTooLargeError past max_states.
CtmcResult ctmc_mean_delays(const LoadedScenario& sc, const CtmcSpec& spec);

}  // namespace vadelay
