#include "vadelay/distributions.hpp"

#include <cmath>

#include "vadelay/errors.hpp"
#include "vadelay/mathutil.hpp"

namespace vadelay {

const char* family_name(DistFamily f) {
  switch (f) {
    case DistFamily::Deterministic: return "deterministic";
    case DistFamily::Exponential: return "exponential";
    case DistFamily::MixedErlang: return "mixed-erlang";
    case DistFamily::Hyperexp2: return "hyperexp2";
  }
  return "?";
}

double FittedDist::second_moment() const {
  switch (family) {
    case DistFamily::Deterministic:
      return mean * mean;
    case DistFamily::Exponential:
      return 2.0 * mean * mean;
    case DistFamily::MixedErlang:
      // E[X^2] = k * (k + 1 - 2p) / rate^2 for the E_{k-1,k} mixture
      return k * (k + 1 - 2.0 * p) / (rate * rate);
    case DistFamily::Hyperexp2:
      return 2.0 * (p / (rate * rate) + (1.0 - p) / (rate2 * rate2));
  }
  return 0.0;
}

double FittedDist::variance() const {
  double m2 = second_moment();
  return m2 - mean * mean;
}

double FittedDist::residual_mean() const {
  if (mean == 0.0) return 0.0;
  return second_moment() / (2.0 * mean);
}

double FittedDist::cdf(double x) const {
  switch (family) {
    case DistFamily::Deterministic:
      return x >= mean ? 1.0 : 0.0;
    case DistFamily::Exponential:
      return x <= 0.0 ? 0.0 : 1.0 - std::exp(-rate * x);
    case DistFamily::MixedErlang: {
      if (x <= 0.0) return 0.0;
      double low = (k == 1) ? 1.0 : gamma_cdf(k - 1, rate, x);
      return p * low + (1.0 - p) * gamma_cdf(k, rate, x);
    }
    case DistFamily::Hyperexp2:
      if (x <= 0.0) return 0.0;
      return 1.0 - p * std::exp(-rate * x) - (1.0 - p) * std::exp(-rate2 * x);
  }
  return 0.0;
}

double FittedDist::density_at_zero() const {
  switch (family) {
    case DistFamily::Deterministic:
      return 0.0;  // point mass; handled by the caller
    case DistFamily::Exponential:
      return rate;
    case DistFamily::MixedErlang:
      // Erlang with n >= 2 phases has density 0 at the origin; only a
      // single-phase (exponential) short branch contributes.
      return (k == 2) ? p * rate : 0.0;
    case DistFamily::Hyperexp2:
      return p * rate + (1.0 - p) * rate2;
  }
  return 0.0;
}

FittedDist fit_distribution(double mean, double scv) {
  if (!(mean >= 0.0) || !std::isfinite(mean))
    throw ValidationError("distribution mean must be finite and nonnegative");
  if (!(scv >= 0.0) || !std::isfinite(scv))
    throw ValidationError("distribution scv must be finite and nonnegative");
  if (mean == 0.0 && scv > 0.0)
    throw ValidationError("zero mean requires scv 0");

  FittedDist d;
  d.mean = mean;
  d.scv = scv;
  if (scv == 0.0) {
    d.family = DistFamily::Deterministic;
    return d;
  }
  if (scv == 1.0) {
    d.family = DistFamily::Exponential;
    d.rate = 1.0 / mean;
    return d;
  }
  if (scv < 1.0) {
    // E_{k-1,k} mixture: k is the smallest integer with 1/k <= scv <= 1/(k-1);
    // the mixing weight solves the scv equation with the root in [0,1].
    d.family = DistFamily::MixedErlang;
    int k = static_cast<int>(std::ceil(1.0 / scv));
    double disc = k * (1.0 + scv) - k * static_cast<double>(k) * scv;
    disc = std::max(disc, 0.0);
    double p = (k * scv - std::sqrt(disc)) / (1.0 + scv);
    d.k = k;
    d.p = p;
    d.rate = (k - p) / mean;
    return d;
  }
  // scv > 1: hyperexponential with balanced means, each branch carrying half
  // the mean.
  d.family = DistFamily::Hyperexp2;
  double s = std::sqrt((scv - 1.0) / (scv + 1.0));
  d.p = 0.5 * (1.0 + s);
  d.rate = 2.0 * d.p / mean;
  d.rate2 = 2.0 * (1.0 - d.p) / mean;
  return d;
}

double zero_density_factor(const FittedDist& d, ZeroDensityMode mode) {
  if (mode == ZeroDensityMode::Whitt) {
    double c2 = d.scv;
    if (c2 > 1.0) return 2.0 * c2 / (c2 + 1.0);
    return c2 * c2 * c2 * c2;
  }
  return d.mean * d.density_at_zero();
}

RandomStream::RandomStream(std::uint64_t root_seed, std::uint64_t stream_id) {
  std::uint64_t s = root_seed * 0x9e3779b97f4a7c15ULL ^
                    (stream_id + 0x632be59bd9b4e019ULL);
  // whiten a few times so nearby (seed, stream) pairs land far apart
  splitmix64(s);
  std::seed_seq seq{static_cast<std::uint32_t>(root_seed),
                    static_cast<std::uint32_t>(root_seed >> 32),
                    static_cast<std::uint32_t>(stream_id),
                    static_cast<std::uint32_t>(stream_id >> 32),
                    static_cast<std::uint32_t>(splitmix64(s)),
                    static_cast<std::uint32_t>(splitmix64(s) >> 32)};
  eng_.seed(seq);
}

double RandomStream::sample(const FittedDist& d) {
  switch (d.family) {
    case DistFamily::Deterministic:
      return d.mean;
    case DistFamily::Exponential:
      return -std::log(uniform()) / d.rate;
    case DistFamily::MixedErlang: {
      int phases = (uniform() < d.p) ? d.k - 1 : d.k;
      double acc = 0.0;
      for (int i = 0; i < phases; ++i) acc -= std::log(uniform());
      return acc / d.rate;
    }
    case DistFamily::Hyperexp2: {
      double r = (uniform() < d.p) ? d.rate : d.rate2;
      return -std::log(uniform()) / r;
    }
  }
  return 0.0;
}

}  // namespace vadelay
