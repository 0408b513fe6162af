#pragma once

#include <cstdint>
#include <random>
#include <string>

namespace vadelay {

// Families reachable by the two-moment fit. The fit picks the family from the
// squared coefficient of variation alone:
//   scv == 0        -> Deterministic
//   0 < scv < 1     -> MixedErlang  (E_{k-1,k} mixture, common phase rate)
//   scv == 1        -> Exponential
//   scv > 1         -> Hyperexp2    (two-branch hyperexponential, balanced means)
enum class DistFamily { Deterministic, Exponential, MixedErlang, Hyperexp2 };

const char* family_name(DistFamily f);

struct FittedDist {
  DistFamily family = DistFamily::Deterministic;
  double mean = 0.0;
  double scv = 0.0;

  // family parameters (unused entries stay zero):
  //   Exponential: rate
  //   MixedErlang: k phases on the long branch, weight p on the (k-1)-branch,
  //                common phase rate `rate`
  //   Hyperexp2:   branch probabilities p / (1-p), rates rate / rate2
  double rate = 0.0;
  double rate2 = 0.0;
  double p = 0.0;
  int k = 0;

  double second_moment() const;
  double variance() const;
  // Equilibrium residual life E[X^2] / (2 E[X]); 0 for a zero-mean point mass.
  double residual_mean() const;
  double cdf(double x) const;
  // Density at 0+ (point masses excluded: Deterministic reports 0 here and the
  // zero-density factor below handles it explicitly).
  double density_at_zero() const;
};

// Fit a distribution matching (mean, scv) exactly. mean > 0 required unless
// scv == 0, where mean == 0 (a zero point mass) is allowed. Throws
// ValidationError on infeasible input.
FittedDist fit_distribution(double mean, double scv);

// E[A] * g(0) estimate for an interarrival law: the correction factor the
// general light-traffic expression needs. Whitt mode uses the standard
// two-moment approximation 2*scv/(scv+1) above scv = 1 and scv^4 below; Exact
// mode evaluates mean * density_at_zero for the fitted family (0 for
// deterministic and for Erlang branches with 2+ phases).
enum class ZeroDensityMode { Whitt, Exact };
double zero_density_factor(const FittedDist& d, ZeroDensityMode mode);

// Deterministic random stream: one engine per (root seed, stream id) pair.
// Streams with distinct ids are statistically independent for our purposes
// (seeded through SplitMix64 whitening).
class RandomStream {
 public:
  RandomStream(std::uint64_t root_seed, std::uint64_t stream_id);

  // Uniform on (0, 1].
  double uniform() {
    return (static_cast<double>(eng_() >> 11) + 1.0) * 0x1.0p-53;
  }
  double exponential(double mean) { return -mean * std::log(uniform()); }
  double sample(const FittedDist& d);

 private:
  std::mt19937_64 eng_;
};

}  // namespace vadelay
