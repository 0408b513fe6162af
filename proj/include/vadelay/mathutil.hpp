#pragma once

#include <cstdint>

namespace vadelay {

// Regularized lower incomplete gamma P(a, x) = gamma(a, x) / Gamma(a).
// Series expansion for x < a + 1, continued fraction otherwise (the classic
// split). Relative accuracy ~1e-14 over the ranges used here.
double gamma_p(double a, double x);

// CDF of a Gamma(shape, rate) variate at x.
double gamma_cdf(double shape, double rate, double x);

// CDF at x of U * G where U ~ Uniform(0,1) and G ~ Gamma(shape, rate),
// independent. Requires shape > 1 (always true for the delay laws here, whose
// shape is 1 + something positive).
//   P(U*G <= x) = P(G <= x) + x * rate/(shape-1) * (1 - P_{shape-1}(G <= x))
double uniform_gamma_cdf(double shape, double rate, double x);

// Two-sided 97.5% Student-t quantile (for 95% confidence intervals), table
// driven; exact at the usual small dfs, 1.96 in the limit.
double t_quantile_975(int df);

// SplitMix64 step, used to whiten (seed, stream) pairs into engine seeds.
std::uint64_t splitmix64(std::uint64_t& state);

}  // namespace vadelay
